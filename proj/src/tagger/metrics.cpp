#include "embeval/tagger/metrics.hpp"

#include <set>

#include "embeval/error.hpp"

namespace embeval::tagger {

std::vector<Span> extract_spans(const std::vector<std::string>& tags, std::size_t sentence_index) {
  std::vector<Span> spans;
  bool open = false;
  Span current;
  const auto close = [&](std::size_t end) {
    if (open) {
      current.end = end;
      spans.push_back(current);
      open = false;
    }
  };
  for (std::size_t t = 0; t < tags.size(); ++t) {
    const std::string& tag = tags[t];
    if (tag.size() < 2 || tag[1] != '-') {
      close(t);
      continue;
    }
    const std::string type = tag.substr(2);
    if (tag[0] == 'I' && open && current.type == type) continue;
    close(t);
    current = Span{sentence_index, t, t, type};
    open = true;
  }
  close(tags.size());
  return spans;
}

namespace {

void finalize(Prf& m) {
  m.precision = m.predicted ? static_cast<double>(m.true_positives) / static_cast<double>(m.predicted) : 0.0;
  m.recall = m.gold ? static_cast<double>(m.true_positives) / static_cast<double>(m.gold) : 0.0;
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
}

}  // namespace

F1Report evaluate_f1(const AnnotatedCorpus& gold, const std::vector<std::vector<std::string>>& predicted) {
  if (predicted.size() != gold.sentences.size()) {
    throw ArgumentError("evaluate_f1: " + std::to_string(predicted.size()) + " predicted sentences for " +
                        std::to_string(gold.sentences.size()) + " gold sentences");
  }
  std::set<Span> gold_spans, pred_spans;
  for (std::size_t s = 0; s < predicted.size(); ++s) {
    const auto& tokens = gold.sentences[s].tokens;
    if (predicted[s].size() != tokens.size()) {
      throw ArgumentError("evaluate_f1: sentence " + std::to_string(s) + " has " +
                          std::to_string(predicted[s].size()) + " predicted tags for " +
                          std::to_string(tokens.size()) + " tokens");
    }
    std::vector<std::string> gold_tags;
    for (const auto& t : tokens) gold_tags.push_back(t.tag);
    for (auto& sp : extract_spans(gold_tags, s)) gold_spans.insert(std::move(sp));
    for (auto& sp : extract_spans(predicted[s], s)) pred_spans.insert(std::move(sp));
  }
  F1Report report;
  for (const auto& sp : gold_spans) {
    ++report.per_type[sp.type].gold;
    ++report.micro.gold;
  }
  for (const auto& sp : pred_spans) {
    Prf& m = report.per_type[sp.type];
    ++m.predicted;
    ++report.micro.predicted;
    if (gold_spans.contains(sp)) {
      ++m.true_positives;
      ++report.micro.true_positives;
    }
  }
  for (auto& [type, m] : report.per_type) finalize(m);
  finalize(report.micro);
  return report;
}

}  // namespace embeval::tagger
