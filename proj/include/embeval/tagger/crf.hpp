#pragma once

// Linear-chain CRF over emission scores (length x tags) and a
// (tags + 2) x (tags + 2) transition matrix whose last two states are
// START and STOP. Path score:
//   T[START, y1] + sum_i E[i, y_i] + sum_i T[y_{i-1}, y_i] + T[y_n, STOP]

#include <cstddef>
#include <span>
#include <vector>

#include "embeval/linalg.hpp"

namespace embeval::tagger {

double crf_path_score(const Matrix& emissions, const Matrix& transitions, std::span<const std::size_t> tags);

// log sum over all tag sequences of exp(path score), via the forward algorithm.
double crf_log_partition(const Matrix& emissions, const Matrix& transitions);

// -log P(gold | emissions).
double crf_log_likelihood(const Matrix& emissions, std::span<const std::size_t> gold, const Matrix& transitions);

// Loss plus gradients from forward-backward marginals: d_emissions is
// overwritten with scale * dL/dE, scale * dL/dT is added to d_transitions.
double crf_loss_gradient(const Matrix& emissions, std::span<const std::size_t> gold, const Matrix& transitions,
                         double scale, Matrix& d_emissions, Matrix& d_transitions);

// Highest-scoring sequence; ties go to the lowest tag index.
std::vector<std::size_t> viterbi_decode(const Matrix& emissions, const Matrix& transitions);

}  // namespace embeval::tagger
