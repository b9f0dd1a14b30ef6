#include "embeval/tagger/crf.hpp"

#include <cmath>
#include <limits>

#include "embeval/error.hpp"

namespace embeval::tagger {

namespace {

double log_sum_exp(std::span<const double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

void check_shapes(const Matrix& emissions, const Matrix& transitions) {
  const std::size_t k = emissions.cols();
  if (emissions.rows() == 0) throw ArgumentError("CRF: empty sequence");
  if (transitions.rows() != k + 2 || transitions.cols() != k + 2) {
    throw ArgumentError("CRF: transitions must be (tags + 2) x (tags + 2)");
  }
}

// alpha(i, t): log score of all prefixes ending in tag t at position i.
Matrix forward_table(const Matrix& e, const Matrix& tr) {
  const std::size_t n = e.rows(), k = e.cols(), start = k;
  Matrix alpha(n, k);
  Vector terms(k);
  for (std::size_t t = 0; t < k; ++t) alpha(0, t) = tr(start, t) + e(0, t);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t t = 0; t < k; ++t) {
      for (std::size_t s = 0; s < k; ++s) terms[s] = alpha(i - 1, s) + tr(s, t);
      alpha(i, t) = log_sum_exp(terms) + e(i, t);
    }
  }
  return alpha;
}

// beta(i, t): log score of all suffixes after position i given tag t there.
Matrix backward_table(const Matrix& e, const Matrix& tr) {
  const std::size_t n = e.rows(), k = e.cols(), stop = k + 1;
  Matrix beta(n, k);
  Vector terms(k);
  for (std::size_t t = 0; t < k; ++t) beta(n - 1, t) = tr(t, stop);
  for (std::size_t i = n - 1; i-- > 0;) {
    for (std::size_t s = 0; s < k; ++s) {
      for (std::size_t t = 0; t < k; ++t) terms[t] = tr(s, t) + e(i + 1, t) + beta(i + 1, t);
      beta(i, s) = log_sum_exp(terms);
    }
  }
  return beta;
}

double partition_from_alpha(const Matrix& alpha, const Matrix& tr) {
  const std::size_t n = alpha.rows(), k = alpha.cols(), stop = k + 1;
  Vector terms(k);
  for (std::size_t t = 0; t < k; ++t) terms[t] = alpha(n - 1, t) + tr(t, stop);
  return log_sum_exp(terms);
}

}  // namespace

double crf_path_score(const Matrix& emissions, const Matrix& transitions, std::span<const std::size_t> tags) {
  check_shapes(emissions, transitions);
  const std::size_t n = emissions.rows(), k = emissions.cols();
  if (tags.size() != n) throw ArgumentError("CRF: tag sequence length does not match emissions");
  double score = transitions(k, tags[0]);
  for (std::size_t i = 0; i < n; ++i) {
    if (tags[i] >= k) throw ArgumentError("CRF: tag index out of range");
    score += emissions(i, tags[i]);
    if (i > 0) score += transitions(tags[i - 1], tags[i]);
  }
  return score + transitions(tags[n - 1], k + 1);
}

double crf_log_partition(const Matrix& emissions, const Matrix& transitions) {
  check_shapes(emissions, transitions);
  return partition_from_alpha(forward_table(emissions, transitions), transitions);
}

double crf_log_likelihood(const Matrix& emissions, std::span<const std::size_t> gold, const Matrix& transitions) {
  return crf_log_partition(emissions, transitions) - crf_path_score(emissions, transitions, gold);
}

double crf_loss_gradient(const Matrix& emissions, std::span<const std::size_t> gold, const Matrix& transitions,
                         double scale, Matrix& d_emissions, Matrix& d_transitions) {
  check_shapes(emissions, transitions);
  const std::size_t n = emissions.rows(), k = emissions.cols(), start = k, stop = k + 1;
  const Matrix alpha = forward_table(emissions, transitions);
  const Matrix beta = backward_table(emissions, transitions);
  const double log_z = partition_from_alpha(alpha, transitions);
  const double loss = log_z - crf_path_score(emissions, transitions, gold);

  d_emissions.reset(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < k; ++t) {
      d_emissions(i, t) = scale * std::exp(alpha(i, t) + beta(i, t) - log_z);
    }
    d_emissions(i, gold[i]) -= scale;
  }
  for (std::size_t t = 0; t < k; ++t) {
    d_transitions(start, t) += scale * std::exp(transitions(start, t) + emissions(0, t) + beta(0, t) - log_z);
    d_transitions(t, stop) += scale * std::exp(alpha(n - 1, t) + transitions(t, stop) - log_z);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t s = 0; s < k; ++s) {
      for (std::size_t t = 0; t < k; ++t) {
        const double lp = alpha(i, s) + transitions(s, t) + emissions(i + 1, t) + beta(i + 1, t) - log_z;
        d_transitions(s, t) += scale * std::exp(lp);
      }
    }
  }
  d_transitions(start, gold[0]) -= scale;
  d_transitions(gold[n - 1], stop) -= scale;
  for (std::size_t i = 1; i < n; ++i) d_transitions(gold[i - 1], gold[i]) -= scale;
  return loss;
}

std::vector<std::size_t> viterbi_decode(const Matrix& emissions, const Matrix& transitions) {
  check_shapes(emissions, transitions);
  const std::size_t n = emissions.rows(), k = emissions.cols(), start = k, stop = k + 1;
  Matrix best(n, k);
  std::vector<std::size_t> back(n * k, 0);
  for (std::size_t t = 0; t < k; ++t) best(0, t) = transitions(start, t) + emissions(0, t);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t t = 0; t < k; ++t) {
      std::size_t arg = 0;
      double top = best(i - 1, 0) + transitions(0, t);
      for (std::size_t s = 1; s < k; ++s) {
        const double v = best(i - 1, s) + transitions(s, t);
        if (v > top) {
          top = v;
          arg = s;
        }
      }
      best(i, t) = top + emissions(i, t);
      back[i * k + t] = arg;
    }
  }
  std::size_t last = 0;
  double top = best(n - 1, 0) + transitions(0, stop);
  for (std::size_t t = 1; t < k; ++t) {
    const double v = best(n - 1, t) + transitions(t, stop);
    if (v > top) {
      top = v;
      last = t;
    }
  }
  std::vector<std::size_t> path(n);
  path[n - 1] = last;
  for (std::size_t i = n - 1; i > 0; --i) path[i - 1] = back[i * k + path[i]];
  return path;
}

}  // namespace embeval::tagger
