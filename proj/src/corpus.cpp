#include "embeval/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "embeval/error.hpp"
#include "embeval/text.hpp"

namespace embeval {

std::size_t AnnotatedCorpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.tokens.size();
  return n;
}

std::vector<std::string> AnnotatedCorpus::tag_set() const {
  std::vector<std::string> tags;
  std::set<std::string> seen;
  for (const auto& s : sentences) {
    for (const auto& t : s.tokens) {
      if (seen.insert(t.tag).second) tags.push_back(t.tag);
    }
  }
  return tags;
}

bool is_valid_tag(std::string_view tag) {
  if (tag == "O") return true;
  return tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-' &&
         !text::has_whitespace(tag);
}

std::string_view tag_type(std::string_view tag) {
  if (tag.size() > 2 && tag[1] == '-') return tag.substr(2);
  return {};
}

AnnotatedCorpus read_conll(std::istream& in, std::string name, const ConllOptions& options) {
  AnnotatedCorpus corpus;
  corpus.name = std::move(name);
  Sentence current;
  text::LineReader reader(in);
  std::string raw;
  while (reader.next(raw)) {
    const std::string_view line = text::strip_cr(raw);
    if (text::is_blank(line)) {
      if (!current.tokens.empty()) corpus.sentences.push_back(std::move(current));
      current = Sentence{};
      continue;
    }
    if (auto bad = text::find_invalid_utf8(line)) {
      throw ParseError("invalid UTF-8 at byte " + std::to_string(*bad), reader.line_number());
    }
    const auto fields = text::split(line, '\t');
    std::size_t tag_col = 1;
    if (options.tag_column) {
      tag_col = *options.tag_column;
      if (tag_col == 0) throw ArgumentError("tag column must be >= 1");
      if (fields.size() <= tag_col) {
        throw ParseError("expected at least " + std::to_string(tag_col + 1) +
                             " tab-separated fields, found " + std::to_string(fields.size()),
                         reader.line_number());
      }
    } else if (fields.size() != 2) {
      throw ParseError("expected 2 tab-separated fields (surface, tag), found " +
                           std::to_string(fields.size()),
                       reader.line_number());
    }
    const std::string_view surface = fields[0];
    const std::string_view tag = fields[tag_col];
    if (surface.empty() || text::has_whitespace(surface)) {
      throw ParseError("token surface is empty or contains whitespace", reader.line_number());
    }
    if (!is_valid_tag(tag)) {
      throw ParseError("invalid tag '" + std::string(tag) + "' (expected O, B-TYPE or I-TYPE)",
                       reader.line_number());
    }
    current.tokens.push_back(Token{std::string(surface), std::string(tag)});
  }
  if (!current.tokens.empty()) corpus.sentences.push_back(std::move(current));
  if (corpus.sentences.empty()) throw DataError("corpus '" + corpus.name + "' is empty");
  return corpus;
}

AnnotatedCorpus read_conll_file(const std::string& path, const ConllOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file: " + path);
  try {
    return read_conll(in, path, options);
  } catch (const ParseError& e) {
    throw e.with_prefix(path);
  }
}

void write_conll(std::ostream& out, const AnnotatedCorpus& corpus) {
  if (corpus.sentences.empty()) throw DataError("cannot write an empty corpus");
  for (const auto& sentence : corpus.sentences) {
    if (sentence.tokens.empty()) throw DataError("cannot write an empty sentence");
    for (const auto& token : sentence.tokens) out << token.surface << '\t' << token.tag << '\n';
    out << '\n';
  }
}

std::vector<BioViolation> validate_bio(const AnnotatedCorpus& corpus) {
  std::vector<BioViolation> out;
  for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
    const auto& tokens = corpus.sentences[s].tokens;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      const std::string& tag = tokens[t].tag;
      if (tag.size() < 2 || tag[0] != 'I') continue;
      const std::string prev = t == 0 ? std::string() : tokens[t - 1].tag;
      const bool ok = !prev.empty() && prev != "O" && tag_type(prev) == tag_type(tag);
      if (!ok) out.push_back(BioViolation{s, t, tag, prev});
    }
  }
  return out;
}

std::set<std::string> read_stopwords(std::istream& in) {
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view w = text::trim(line);
    if (!w.empty()) words.insert(text::lowercase(w));
  }
  return words;
}

std::set<std::string> read_stopwords_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open stopword file: " + path);
  return read_stopwords(in);
}

bool is_content_token(std::string_view surface) {
  return std::any_of(surface.begin(), surface.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return u >= 0x80 || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  });
}

std::set<std::string> content_vocabulary(const AnnotatedCorpus& corpus,
                                         const std::set<std::string>& stopwords) {
  std::set<std::string> vocab;
  for (const auto& sentence : corpus.sentences) {
    for (const auto& token : sentence.tokens) {
      if (!is_content_token(token.surface)) continue;
      std::string w = text::lowercase(token.surface);
      if (!stopwords.contains(w)) vocab.insert(std::move(w));
    }
  }
  return vocab;
}

VocabularyOverlapReport overlap_report(const std::vector<NamedVocabulary>& vocabs) {
  if (vocabs.size() < 2) throw ArgumentError("overlap report needs at least 2 vocabularies");
  VocabularyOverlapReport report;
  const std::size_t n = vocabs.size();
  report.pairwise_counts.assign(n, std::vector<std::size_t>(n, 0));
  for (const auto& v : vocabs) {
    report.names.push_back(v.name);
    report.sizes.push_back(v.words.size());
  }
  for (std::size_t i = 0; i < n; ++i) {
    report.pairwise_counts[i][i] = vocabs[i].words.size();
    for (std::size_t j = i + 1; j < n; ++j) {
      // Both sets are ordered, so a merge walk counts the intersection.
      std::size_t shared = 0;
      auto a = vocabs[i].words.begin(), b = vocabs[j].words.begin();
      while (a != vocabs[i].words.end() && b != vocabs[j].words.end()) {
        if (*a < *b) {
          ++a;
        } else if (*b < *a) {
          ++b;
        } else {
          ++shared;
          ++a;
          ++b;
        }
      }
      report.pairwise_counts[i][j] = report.pairwise_counts[j][i] = shared;
    }
  }
  return report;
}

}  // namespace embeval
