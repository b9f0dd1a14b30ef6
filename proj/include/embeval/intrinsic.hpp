#pragma once

// Intrinsic comparisons between embedding tables: nearest-neighbour lists
// for a query word, identifier-normalized agreement between those lists, and
// second-order (representational similarity) correlation between tables.

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "embeval/embedding.hpp"

namespace embeval {

// |a ∩ b| / |a ∪ b|; 1.0 (with a warning) when both sets are empty.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

// Surface term -> chemical identifier (e.g. an InChI string). Lookup is
// case-insensitive on the term.
class NormalizationDictionary {
 public:
  // Throws DataError when the (lowercased) term is already present,
  // ArgumentError for an empty term or identifier.
  void add(std::string_view term, std::string identifier);
  std::optional<std::string> lookup(std::string_view term) const;
  std::size_t size() const noexcept { return entries_.size(); }
  const std::map<std::string, std::string, std::less<>>& entries() const noexcept { return entries_; }

 private:
  std::map<std::string, std::string, std::less<>> entries_;
};

// "term<TAB>identifier" per line; blank lines are skipped.
NormalizationDictionary read_dictionary(std::istream& in);
NormalizationDictionary read_dictionary_file(const std::string& path);

enum class FallbackPolicy {
  Drop,             // unmatched terms are left out
  SurfaceFallback,  // unmatched terms become "surface:<lowercased term>"
};

struct NormalizedList {
  std::set<std::string> identifiers;
  std::vector<std::string> unmatched;  // in input order
};

NormalizedList normalize_list(const std::vector<std::string>& terms, const NormalizationDictionary& dict,
                              FallbackPolicy policy = FallbackPolicy::SurfaceFallback);

struct NamedWordList {
  std::string name;
  std::vector<std::string> words;
};

struct AgreementReport {
  std::vector<std::string> names;
  std::vector<std::vector<double>> jaccard;
  std::vector<NormalizedList> normalized;
};

AgreementReport agreement_matrix(const std::vector<NamedWordList>& lists, const NormalizationDictionary& dict,
                                 FallbackPolicy policy = FallbackPolicy::SurfaceFallback);

// Pearson correlation; throws DomainError when either side has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

// Words present in every table, sorted.
std::vector<std::string> shared_vocabulary(std::span<const EmbeddingTable> tables);

// Strict upper triangle of the cosine-similarity matrix over `words`, row by row.
std::vector<double> similarity_profile(const EmbeddingTable& table, const std::vector<std::string>& words);

struct CorrelationReport {
  std::vector<std::string> names;
  std::vector<std::vector<double>> pearson;
  std::size_t shared_vocab_size = 0;
};

// Pearson correlation between the tables' cosine-similarity profiles over
// their shared vocabulary. Basis-free, so tables of different dimension compare.
CorrelationReport correlation_matrix(std::span<const EmbeddingTable> tables);

struct SimilarityEntry {
  std::string table;
  NeighborList list;
};

struct SimilarityReport {
  std::string query;
  std::size_t k = 10;
  std::vector<SimilarityEntry> lists;
  std::vector<std::string> missing;  // tables that lack the query word
};

SimilarityReport similarity_query_report(std::span<const EmbeddingTable> tables, std::string_view query,
                                         std::size_t k = 10);

}  // namespace embeval
