#pragma once

// Exact (O(n^2)) t-SNE to two dimensions.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "embeval/embedding.hpp"
#include "embeval/linalg.hpp"

namespace embeval {

struct TsneOptions {
  double perplexity = 15.0;
  std::size_t iterations = 1000;
  double learning_rate = 100.0;
  std::uint64_t seed = 0;
  double exaggeration = 12.0;
  std::size_t exaggeration_iterations = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  std::size_t momentum_switch = 250;
};

struct Projection2D {
  std::vector<std::string> words;
  Matrix coords;                     // |words| x 2
  double final_kl = 0.0;
  double kl_after_exaggeration = 0.0;  // KL once early exaggeration has ended
};

// Requires |vocab| >= 10 and 5 <= perplexity <= (|vocab| - 1) / 3.
Projection2D tsne(const EmbeddingTable& table, const TsneOptions& options = {});

namespace tsne_detail {

constexpr double kEntropyTolerance = 1e-5;
constexpr int kMaxBisectionSteps = 50;

Matrix squared_distances(const Matrix& x);

struct ConditionalAffinities {
  Matrix p;                  // row i holds p(j | i), zero diagonal
  std::vector<double> beta;  // precision 1 / (2 sigma_i^2)
  std::vector<double> perplexity;
};

// Per-row bisection on log(beta) until the row entropy matches log(perplexity).
ConditionalAffinities conditional_affinities(const Matrix& sq_dist, double perplexity);

// (P + P^T) / (2n): symmetric, sums to 1.
Matrix joint_affinities(const Matrix& conditional);

// KL(P || Q) where Q is the Student-t affinity of the layout y (n x 2).
double kl_divergence(const Matrix& p, const Matrix& y);

// d KL / d y, scaling P by `exaggeration` (1 gives the exact gradient).
void kl_gradient(const Matrix& p, const Matrix& y, double exaggeration, Matrix& grad);

}  // namespace tsne_detail

}  // namespace embeval
