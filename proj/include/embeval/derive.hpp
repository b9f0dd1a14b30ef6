#pragma once

// Type-level tables built from other tables: occurrence averaging for
// contextual vectors and truncated-SVD dimensionality standardization.

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
#include "embeval/linalg.hpp"

namespace embeval {

struct AveragedEmbeddings {
  EmbeddingTable table;             // rows sorted by word
  std::vector<std::size_t> counts;  // occurrences per row of `table`
};

// Single-pass streaming mean per word type, with Neumaier-compensated running
// sums so the result does not depend on record order beyond rounding. Words
// are lowercased before grouping and filtering.
class OccurrenceAccumulator {
 public:
  explicit OccurrenceAccumulator(std::optional<std::set<std::string>> vocab_filter = std::nullopt)
      : filter_(std::move(vocab_filter)) {}

  // Returns false when the word was filtered out. Throws ArgumentError when
  // the dimension differs from the first accepted record.
  bool add(std::string_view word, std::span<const double> vector);
  std::size_t dimension() const noexcept { return dim_; }
  std::size_t records() const noexcept { return records_; }

  AveragedEmbeddings finish(std::string name) const;

 private:
  struct Sums {
    Vector sum;
    Vector compensation;
    std::size_t count = 0;
  };
  std::optional<std::set<std::string>> filter_;
  std::map<std::string, Sums> sums_;
  std::size_t dim_ = 0;
  std::size_t records_ = 0;
};

// Reads "word<TAB>v1<TAB>...<TAB>vd" lines.
AveragedEmbeddings average_occurrences(std::istream& in,
                                       const std::optional<std::set<std::string>>& vocab_filter,
                                       std::string name = {});
AveragedEmbeddings average_occurrences_file(const std::string& path,
                                            const std::optional<std::set<std::string>>& vocab_filter);

struct SvdReduction {
  Vector mean;                  // zeros when fitted without centering
  Matrix components;            // d x r, orthonormal columns
  Vector singular_values;       // r values, non-increasing
  std::size_t input_dimension() const noexcept { return components.rows(); }
  std::size_t output_dimension() const noexcept { return components.cols(); }
};

struct SvdOptions {
  bool center = true;
};

// Top `target_dim` right singular vectors of the (mean-centered) row matrix.
// Each component's largest-magnitude entry is made positive so fits are
// reproducible.
SvdReduction fit_svd(const EmbeddingTable& table, std::size_t target_dim, const SvdOptions& options = {});

// Maps each row v to components^T (v - mean).
EmbeddingTable apply_svd(const SvdReduction& reduction, const EmbeddingTable& table);
Vector apply_svd(const SvdReduction& reduction, std::span<const double> v);

}  // namespace embeval
