#include "embeval/derive.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "embeval/error.hpp"
#include "embeval/simd/kernels.hpp"
#include "embeval/text.hpp"

namespace embeval {

bool OccurrenceAccumulator::add(std::string_view word, std::span<const double> vector) {
  if (vector.empty()) throw ArgumentError("occurrence vector must have dimension >= 1");
  std::string key = text::lowercase(word);
  if (filter_ && !filter_->contains(key)) return false;
  if (dim_ == 0) dim_ = vector.size();
  if (vector.size() != dim_) {
    throw ArgumentError("occurrence dimension changed from " + std::to_string(dim_) + " to " +
                        std::to_string(vector.size()));
  }
  auto [it, inserted] = sums_.try_emplace(std::move(key));
  Sums& s = it->second;
  if (inserted) {
    s.sum.assign(dim_, 0.0);
    s.compensation.assign(dim_, 0.0);
  }
  for (std::size_t i = 0; i < dim_; ++i) {
    const double x = vector[i];
    const double t = s.sum[i] + x;
    if (std::abs(s.sum[i]) >= std::abs(x)) {
      s.compensation[i] += (s.sum[i] - t) + x;
    } else {
      s.compensation[i] += (x - t) + s.sum[i];
    }
    s.sum[i] = t;
  }
  ++s.count;
  ++records_;
  return true;
}

AveragedEmbeddings OccurrenceAccumulator::finish(std::string name) const {
  if (sums_.empty()) throw DataError("no occurrence records left after vocabulary filtering");
  std::vector<std::string> words;
  Matrix rows(sums_.size(), dim_);
  AveragedEmbeddings out;
  std::size_t r = 0;
  for (const auto& [word, s] : sums_) {
    words.push_back(word);
    const double inv = 1.0 / static_cast<double>(s.count);
    for (std::size_t i = 0; i < dim_; ++i) rows(r, i) = (s.sum[i] + s.compensation[i]) * inv;
    out.counts.push_back(s.count);
    ++r;
  }
  out.table = EmbeddingTable(std::move(name), std::move(words), std::move(rows));
  return out;
}

AveragedEmbeddings average_occurrences(std::istream& in,
                                       const std::optional<std::set<std::string>>& vocab_filter,
                                       std::string name) {
  OccurrenceAccumulator acc(vocab_filter);
  text::LineReader reader(in);
  std::string raw;
  Vector values;
  std::size_t stream_dim = 0;
  while (reader.next(raw)) {
    const std::string_view line = text::strip_cr(raw);
    if (text::is_blank(line)) continue;
    const auto fields = text::split(line, '\t');
    if (fields.size() < 2) throw ParseError("expected 'word<TAB>v1<TAB>...<TAB>vd'", reader.line_number());
    if (fields[0].empty() || text::has_whitespace(fields[0])) {
      throw ParseError("word is empty or contains whitespace", reader.line_number());
    }
    if (auto bad = text::find_invalid_utf8(fields[0])) {
      throw ParseError("invalid UTF-8 in word at byte " + std::to_string(*bad), reader.line_number());
    }
    if (stream_dim == 0) stream_dim = fields.size() - 1;
    if (fields.size() - 1 != stream_dim) {
      throw ParseError("dimension drift: expected " + std::to_string(stream_dim) +
                           " components, found " + std::to_string(fields.size() - 1),
                       reader.line_number());
    }
    values.clear();
    for (std::size_t c = 1; c < fields.size(); ++c) {
      const auto v = text::parse_double(fields[c]);
      if (!v || !std::isfinite(*v)) {
        throw ParseError("component " + std::to_string(c) + " of '" + std::string(fields[0]) +
                             "' is not a finite number",
                         reader.line_number());
      }
      values.push_back(*v);
    }
    acc.add(fields[0], values);
  }
  return acc.finish(std::move(name));
}

AveragedEmbeddings average_occurrences_file(const std::string& path,
                                            const std::optional<std::set<std::string>>& vocab_filter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open occurrence file: " + path);
  try {
    return average_occurrences(in, vocab_filter, std::filesystem::path(path).stem().string());
  } catch (const ParseError& e) {
    throw e.with_prefix(path);
  }
}

SvdReduction fit_svd(const EmbeddingTable& table, std::size_t target_dim, const SvdOptions& options) {
  const std::size_t n = table.size();
  const std::size_t d = table.dimension();
  if (n < 2) throw ArgumentError("fit_svd: need at least 2 rows");
  if (target_dim == 0 || target_dim > std::min(n, d)) {
    throw ArgumentError("fit_svd: target dimension " + std::to_string(target_dim) +
                        " must be in [1, min(rows, dimension)] = [1, " +
                        std::to_string(std::min(n, d)) + "]");
  }
  SvdReduction red;
  red.mean.assign(d, 0.0);
  if (options.center) {
    for (std::size_t i = 0; i < n; ++i) simd::axpy(1.0, table.vector(i), red.mean);
    for (double& m : red.mean) m /= static_cast<double>(n);
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = table.vector(i);
    for (std::size_t j = 0; j < d; ++j) x(Eigen::Index(i), Eigen::Index(j)) = row[j] - red.mean[j];
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const auto& v = svd.matrixV();

  red.components.reset(d, target_dim);
  red.singular_values.resize(target_dim);
  for (std::size_t k = 0; k < target_dim; ++k) {
    red.singular_values[k] = sv(Eigen::Index(k));
    std::size_t pivot = 0;
    for (std::size_t j = 1; j < d; ++j) {
      if (std::abs(v(Eigen::Index(j), Eigen::Index(k))) > std::abs(v(Eigen::Index(pivot), Eigen::Index(k)))) {
        pivot = j;
      }
    }
    const double sign = v(Eigen::Index(pivot), Eigen::Index(k)) < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < d; ++j) red.components(j, k) = sign * v(Eigen::Index(j), Eigen::Index(k));
  }
  const double cutoff = (sv.size() > 0 ? sv(0) : 0.0) * 1e-12 * static_cast<double>(std::max(n, d));
  const double last = red.singular_values.back();
  if (last <= cutoff) {
    warn("fit_svd: '" + table.name() + "' has rank below target dimension " +
         std::to_string(target_dim) + "; trailing singular values are zero");
  }
  return red;
}

Vector apply_svd(const SvdReduction& reduction, std::span<const double> v) {
  const std::size_t d = reduction.input_dimension();
  if (v.size() != d) {
    throw ArgumentError("apply_svd: vector dimension " + std::to_string(v.size()) +
                        " does not match reduction dimension " + std::to_string(d));
  }
  Vector centered(v.begin(), v.end());
  simd::axpy(-1.0, reduction.mean, centered);
  Vector out(reduction.output_dimension(), 0.0);
  gemv_t_acc(reduction.components, centered, out);
  return out;
}

EmbeddingTable apply_svd(const SvdReduction& reduction, const EmbeddingTable& table) {
  if (table.dimension() != reduction.input_dimension()) {
    throw ArgumentError("apply_svd: table '" + table.name() + "' has dimension " +
                        std::to_string(table.dimension()) + ", reduction expects " +
                        std::to_string(reduction.input_dimension()));
  }
  Matrix out(table.size(), reduction.output_dimension());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const Vector row = apply_svd(reduction, table.vector(i));
    std::copy(row.begin(), row.end(), out.row(i).begin());
  }
  return EmbeddingTable(table.name(), table.vocab(), std::move(out));
}

}  // namespace embeval
