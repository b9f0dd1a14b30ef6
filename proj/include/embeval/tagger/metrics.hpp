#pragma once

// Exact-span precision / recall / F1 over BIO-tagged sentences.

#include <compare>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "embeval/corpus.hpp"

namespace embeval::tagger {

struct Span {
  std::size_t sentence = 0;
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // exclusive
  std::string type;
  auto operator<=>(const Span&) const = default;
};

// conlleval-style chunking: B-X opens a span, I-X continues a span of type X
// and otherwise opens a new one, O closes.
std::vector<Span> extract_spans(const std::vector<std::string>& tags, std::size_t sentence_index = 0);

struct Prf {
  std::size_t true_positives = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct F1Report {
  std::map<std::string, Prf> per_type;
  Prf micro;
};

// predicted[s][t] is the tag for token t of gold sentence s.
F1Report evaluate_f1(const AnnotatedCorpus& gold, const std::vector<std::vector<std::string>>& predicted);

}  // namespace embeval::tagger
