#pragma once

// Independent reference computations. None of these call into the library's
// numeric code; they exist to check it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "embeval/linalg.hpp"

namespace oracle {

using embeval::Matrix;

// Score of a tag path; transitions are (K+2)x(K+2) with START = K, STOP = K+1.
inline double path_score(const Matrix& emissions, const Matrix& transitions, const std::vector<std::size_t>& path) {
  const std::size_t k = emissions.cols();
  double s = transitions(k, path[0]);
  for (std::size_t t = 0; t < path.size(); ++t) {
    s += emissions(t, path[t]);
    if (t > 0) s += transitions(path[t - 1], path[t]);
  }
  return s + transitions(path.back(), k + 1);
}

// Calls f on every tag sequence of the emission matrix's length.
inline void for_each_path(std::size_t length, std::size_t tags,
                          const std::function<void(const std::vector<std::size_t>&)>& f) {
  std::vector<std::size_t> path(length, 0);
  while (true) {
    f(path);
    std::size_t i = 0;
    while (i < length && ++path[i] == tags) path[i++] = 0;
    if (i == length) return;
  }
}

inline double log_partition(const Matrix& emissions, const Matrix& transitions) {
  std::vector<double> scores;
  for_each_path(emissions.rows(), emissions.cols(),
                [&](const std::vector<std::size_t>& p) { scores.push_back(path_score(emissions, transitions, p)); });
  const double m = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double s : scores) sum += std::exp(s - m);
  return m + std::log(sum);
}

// Highest-scoring path; the first one found in lexicographic order wins ties.
inline std::vector<std::size_t> best_path(const Matrix& emissions, const Matrix& transitions) {
  std::vector<std::size_t> best;
  double best_score = -std::numeric_limits<double>::infinity();
  for_each_path(emissions.rows(), emissions.cols(), [&](const std::vector<std::size_t>& p) {
    const double s = path_score(emissions, transitions, p);
    if (s > best_score) {
      best_score = s;
      best = p;
    }
  });
  return best;
}

// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Returns eigenvalues
// in descending order; `vectors` receives matching eigenvectors as columns.
inline std::vector<double> symmetric_eigen(Matrix a, Matrix& vectors) {
  const std::size_t n = a.rows();
  Matrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  std::vector<double> values(n);
  vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    values[j] = a(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) vectors(i, j) = v(i, order[j]);
  }
  return values;
}

// Squared Frobenius error of the best rank-r approximation of the centred
// data, by Eckart-Young: the sum of the discarded eigenvalues of X^T X.
inline double eckart_young_error(const Matrix& x, std::size_t r, bool center) {
  const std::size_t n = x.rows(), d = x.cols();
  std::vector<double> mean(d, 0.0);
  if (center) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j) / static_cast<double>(n);
  }
  Matrix g(d, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) g(a, b) += (x(i, a) - mean[a]) * (x(i, b) - mean[b]);
  Matrix vecs;
  const auto values = symmetric_eigen(g, vecs);
  double err = 0.0;
  for (std::size_t j = r; j < d; ++j) err += std::max(0.0, values[j]);
  return err;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double naive_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

// |a - b| / max(|a|, |b|, floor): relative error that stays meaningful near 0.
inline double relative_error(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace oracle
