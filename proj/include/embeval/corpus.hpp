#pragma once

// CoNLL-style annotated corpora: "surface<TAB>tag" per line, blank line
// between sentences, BIO tags (O, B-TYPE, I-TYPE).

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace embeval {

struct Token {
  std::string surface;
  std::string tag;
  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::vector<Token> tokens;
  bool operator==(const Sentence&) const = default;
};

struct AnnotatedCorpus {
  std::string name;
  std::vector<Sentence> sentences;

  std::size_t token_count() const;
  // Distinct tags in first-seen order.
  std::vector<std::string> tag_set() const;
  bool operator==(const AnnotatedCorpus&) const = default;
};

struct ConllOptions {
  // Unset: strict two-column "surface<TAB>tag". Set: any line with more than
  // `tag_column` tab-separated fields; the surface is always column 0.
  std::optional<std::size_t> tag_column;
};

bool is_valid_tag(std::string_view tag);
// Entity type of a B-/I- tag, empty for O.
std::string_view tag_type(std::string_view tag);

AnnotatedCorpus read_conll(std::istream& in, std::string name = {}, const ConllOptions& options = {});
AnnotatedCorpus read_conll_file(const std::string& path, const ConllOptions& options = {});
void write_conll(std::ostream& out, const AnnotatedCorpus& corpus);

struct BioViolation {
  std::size_t sentence = 0;
  std::size_t token = 0;
  std::string tag;
  std::string previous;  // "" at sentence start
};

// I-X is valid only after B-X or I-X. Violations are reported, not repaired.
std::vector<BioViolation> validate_bio(const AnnotatedCorpus& corpus);

// One word per line; blank lines skipped; entries lowercased.
std::set<std::string> read_stopwords(std::istream& in);
std::set<std::string> read_stopwords_file(const std::string& path);

// True when the token carries at least one letter (ASCII letter or any
// non-ASCII byte), i.e. it is not pure punctuation or a pure number.
bool is_content_token(std::string_view surface);

// Lowercased content word types minus stopwords.
std::set<std::string> content_vocabulary(const AnnotatedCorpus& corpus,
                                         const std::set<std::string>& stopwords);

struct VocabularyOverlapReport {
  std::vector<std::string> names;
  std::vector<std::size_t> sizes;
  // pairwise_counts[i][j] = |V_i ∩ V_j|; diagonal equals sizes.
  std::vector<std::vector<std::size_t>> pairwise_counts;
};

struct NamedVocabulary {
  std::string name;
  std::set<std::string> words;
};

VocabularyOverlapReport overlap_report(const std::vector<NamedVocabulary>& vocabs);

}  // namespace embeval
