#include "embeval/tsne.hpp"

#include <cmath>
#include <limits>

#include "embeval/error.hpp"
#include "embeval/random.hpp"
#include "embeval/simd/kernels.hpp"

namespace embeval {

namespace tsne_detail {

Matrix squared_distances(const Matrix& x) {
  const std::size_t n = x.rows();
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = simd::squared_distance(x.row(i), x.row(j));
    }
  }
  return d;
}

namespace {

// Fills row weights for a given beta; returns the Shannon entropy (nats).
double row_entropy(std::span<const double> dist, std::size_t self, double min_dist, double beta,
                   std::span<double> weights) {
  double sum = 0.0;
  double weighted = 0.0;
  for (std::size_t j = 0; j < dist.size(); ++j) {
    if (j == self) {
      weights[j] = 0.0;
      continue;
    }
    const double shifted = dist[j] - min_dist;
    const double w = std::exp(-beta * shifted);
    weights[j] = w;
    sum += w;
    weighted += w * shifted;
  }
  for (double& w : weights) w /= sum;
  return std::log(sum) + beta * weighted / sum;
}

}  // namespace

ConditionalAffinities conditional_affinities(const Matrix& sq_dist, double perplexity) {
  const std::size_t n = sq_dist.rows();
  if (n < 2) throw ArgumentError("t-SNE needs at least 2 points");
  const double target = std::log(perplexity);
  ConditionalAffinities out;
  out.p.reset(n, n);
  out.beta.assign(n, 0.0);
  out.perplexity.assign(n, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    const auto dist = sq_dist.row(i);
    double min_dist = std::numeric_limits<double>::infinity();
    double mean_dist = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      min_dist = std::min(min_dist, dist[j]);
      mean_dist += dist[j];
    }
    mean_dist /= static_cast<double>(n - 1);
    const double scale = mean_dist > min_dist ? 1.0 / (mean_dist - min_dist) : 1.0;
    // Entropy falls monotonically in beta; bisect log(beta) over 40 decades
    // around the natural scale of this row.
    double lo = std::log(scale) - 20.0 * std::log(10.0);
    double hi = std::log(scale) + 20.0 * std::log(10.0);
    double log_beta = std::log(scale);
    double h = row_entropy(dist, i, min_dist, std::exp(log_beta), out.p.row(i));
    for (int step = 0; step < kMaxBisectionSteps && std::abs(h - target) >= kEntropyTolerance; ++step) {
      if (h > target) {
        lo = log_beta;
      } else {
        hi = log_beta;
      }
      log_beta = 0.5 * (lo + hi);
      h = row_entropy(dist, i, min_dist, std::exp(log_beta), out.p.row(i));
    }
    out.beta[i] = std::exp(log_beta);
    out.perplexity[i] = std::exp(h);
  }
  return out;
}

Matrix joint_affinities(const Matrix& conditional) {
  const std::size_t n = conditional.rows();
  Matrix p(n, n);
  const double denom = 2.0 * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) p(i, j) = (conditional(i, j) + conditional(j, i)) / denom;
  }
  return p;
}

double kl_divergence(const Matrix& p, const Matrix& y) {
  const std::size_t n = y.rows();
  Matrix w(n, n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 1.0 / (1.0 + simd::squared_distance(y.row(i), y.row(j)));
      w(i, j) = w(j, i) = v;
      z += 2.0 * v;
    }
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || p(i, j) <= 0.0) continue;
      kl += p(i, j) * std::log(p(i, j) / (w(i, j) / z));
    }
  }
  return kl;
}

void kl_gradient(const Matrix& p, const Matrix& y, double exaggeration, Matrix& grad) {
  const std::size_t n = y.rows();
  const std::size_t dims = y.cols();
  Matrix w(n, n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 1.0 / (1.0 + simd::squared_distance(y.row(i), y.row(j)));
      w(i, j) = w(j, i) = v;
      z += 2.0 * v;
    }
  }
  grad.reset(n, dims);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double coeff = 4.0 * (exaggeration * p(i, j) - w(i, j) / z) * w(i, j);
      for (std::size_t c = 0; c < dims; ++c) grad(i, c) += coeff * (y(i, c) - y(j, c));
    }
  }
}

}  // namespace tsne_detail

Projection2D tsne(const EmbeddingTable& table, const TsneOptions& options) {
  using namespace tsne_detail;
  const std::size_t n = table.size();
  if (n < 10) throw ArgumentError("t-SNE needs at least 10 words, got " + std::to_string(n));
  const double max_perplexity = static_cast<double>(n - 1) / 3.0;
  if (!(options.perplexity >= 5.0 && options.perplexity <= max_perplexity)) {
    throw ArgumentError("t-SNE perplexity must be in [5, " + std::to_string(max_perplexity) + "] for " +
                        std::to_string(n) + " words");
  }
  if (!(options.learning_rate > 0.0)) throw ArgumentError("t-SNE learning rate must be > 0");

  const Matrix p = joint_affinities(conditional_affinities(squared_distances(table.vectors()), options.perplexity).p);

  Rng rng(options.seed);
  Matrix y(n, 2);
  for (double& v : y.flat()) v = 1e-4 * rng.normal();
  Matrix update(n, 2);
  Matrix gains(n, 2, 1.0);
  Matrix grad;

  Projection2D out;
  out.words = table.vocab();
  for (std::size_t iter = 0; iter < options.iterations; ++iter) {
    if (iter == options.exaggeration_iterations) out.kl_after_exaggeration = kl_divergence(p, y);
    const double exaggeration = iter < options.exaggeration_iterations ? options.exaggeration : 1.0;
    const double momentum = iter < options.momentum_switch ? options.initial_momentum : options.final_momentum;
    kl_gradient(p, y, exaggeration, grad);
    for (std::size_t k = 0; k < y.size(); ++k) {
      double& g = gains.flat()[k];
      const double dy = grad.flat()[k];
      double& u = update.flat()[k];
      g = (dy > 0.0) != (u > 0.0) ? g + 0.2 : g * 0.8;
      if (g < 0.01) g = 0.01;
      u = momentum * u - options.learning_rate * g * dy;
      y.flat()[k] += u;
    }
    for (std::size_t c = 0; c < 2; ++c) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += y(i, c);
      mean /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) y(i, c) -= mean;
    }
  }
  out.final_kl = kl_divergence(p, y);
  if (options.iterations <= options.exaggeration_iterations) out.kl_after_exaggeration = out.final_kl;
  out.coords = std::move(y);
  return out;
}

}  // namespace embeval
