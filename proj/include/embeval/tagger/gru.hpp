#pragma once

#include <span>

#include "embeval/linalg.hpp"
#include "embeval/tagger/model.hpp"

namespace embeval::tagger {

// One GRU step. Throws ArgumentError on shape mismatch.
Vector gru_cell(std::span<const double> x, std::span<const double> h, const GruWeights& w);

// Everything a sequence run keeps for backpropagation. Row t of every matrix
// belongs to input position t, regardless of direction.
struct GruTrace {
  Matrix states;    // hidden state after consuming position t
  Matrix previous;  // hidden state before consuming position t
  Matrix reset, update, candidate, recurrent_candidate;  // r, z, n, U_n h
};

// Runs over the rows of `xs` front to back, or back to front when `reverse`.
void gru_run(const GruWeights& w, const Matrix& xs, bool reverse, GruTrace& trace);

// Given dL/d(states) (same shape as trace.states), accumulates parameter
// gradients into `grad` and input gradients into `d_xs`.
void gru_backprop(const GruWeights& w, const Matrix& xs, bool reverse, const GruTrace& trace,
                  const Matrix& d_states, GruWeights& grad, Matrix& d_xs);

}  // namespace embeval::tagger
