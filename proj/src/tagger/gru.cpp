#include "embeval/tagger/gru.hpp"

#include <cmath>

#include "embeval/error.hpp"
#include "embeval/simd/kernels.hpp"

namespace embeval::tagger {

namespace {

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// gx: W x + b (3H), gh: U h (3H). Writes r, z, n and returns through h_out.
void gate_step(std::span<const double> gx, std::span<const double> gh, std::span<const double> h_prev,
               std::span<double> r, std::span<double> z, std::span<double> n, std::span<double> h_out) {
  const std::size_t hidden = h_prev.size();
  for (std::size_t i = 0; i < hidden; ++i) {
    r[i] = sigmoid(gx[i] + gh[i]);
    z[i] = sigmoid(gx[hidden + i] + gh[hidden + i]);
    n[i] = std::tanh(gx[2 * hidden + i] + r[i] * gh[2 * hidden + i]);
    h_out[i] = (1.0 - z[i]) * n[i] + z[i] * h_prev[i];
  }
}

}  // namespace

Vector gru_cell(std::span<const double> x, std::span<const double> h, const GruWeights& w) {
  const std::size_t hidden = w.hidden();
  if (x.size() != w.input_dim() || h.size() != hidden || w.input.rows() != 3 * hidden ||
      w.bias.cols() != 3 * hidden) {
    throw ArgumentError("gru_cell: shape mismatch");
  }
  Vector gx(3 * hidden), gh(3 * hidden), r(hidden), z(hidden), n(hidden), out(hidden);
  gemv(w.input, x, gx);
  simd::axpy(1.0, w.bias.row(0), gx);
  gemv(w.recurrent, h, gh);
  gate_step(gx, gh, h, r, z, n, out);
  return out;
}

void gru_run(const GruWeights& w, const Matrix& xs, bool reverse, GruTrace& trace) {
  const std::size_t steps = xs.rows();
  const std::size_t hidden = w.hidden();
  if (xs.cols() != w.input_dim()) throw ArgumentError("gru_run: input width mismatch");
  Matrix gx;
  matmul_nt(xs, w.input, gx);
  for (std::size_t t = 0; t < steps; ++t) simd::axpy(1.0, w.bias.row(0), gx.row(t));

  trace.states.reset(steps, hidden);
  trace.previous.reset(steps, hidden);
  trace.reset.reset(steps, hidden);
  trace.update.reset(steps, hidden);
  trace.candidate.reset(steps, hidden);
  trace.recurrent_candidate.reset(steps, hidden);
  Vector gh(3 * hidden);
  Vector zero(hidden, 0.0);
  for (std::size_t k = 0; k < steps; ++k) {
    const std::size_t t = reverse ? steps - 1 - k : k;
    std::span<const double> h_prev = zero;
    if (k > 0) h_prev = trace.states.row(reverse ? t + 1 : t - 1);
    std::copy(h_prev.begin(), h_prev.end(), trace.previous.row(t).begin());
    gemv(w.recurrent, h_prev, gh);
    gate_step(gx.row(t), gh, h_prev, trace.reset.row(t), trace.update.row(t), trace.candidate.row(t),
              trace.states.row(t));
    std::copy(gh.begin() + 2 * static_cast<std::ptrdiff_t>(hidden), gh.end(),
              trace.recurrent_candidate.row(t).begin());
  }
}

void gru_backprop(const GruWeights& w, const Matrix& xs, bool reverse, const GruTrace& trace,
                  const Matrix& d_states, GruWeights& grad, Matrix& d_xs) {
  const std::size_t steps = xs.rows();
  const std::size_t hidden = w.hidden();
  if (d_states.rows() != steps || d_states.cols() != hidden || d_xs.rows() != steps ||
      d_xs.cols() != xs.cols()) {
    throw ArgumentError("gru_backprop: shape mismatch");
  }
  Matrix d_gx(steps, 3 * hidden);
  Matrix d_gh(steps, 3 * hidden);
  Vector carry(hidden, 0.0);
  Vector dh(hidden);
  for (std::size_t k = 0; k < steps; ++k) {
    // Walk against the direction of the forward run.
    const std::size_t t = reverse ? k : steps - 1 - k;
    const auto r = trace.reset.row(t);
    const auto z = trace.update.row(t);
    const auto n = trace.candidate.row(t);
    const auto ghn = trace.recurrent_candidate.row(t);
    const auto h_prev = trace.previous.row(t);
    const auto dst = d_states.row(t);
    auto dgx = d_gx.row(t);
    auto dgh = d_gh.row(t);
    for (std::size_t i = 0; i < hidden; ++i) {
      dh[i] = dst[i] + carry[i];
      const double dn = dh[i] * (1.0 - z[i]);
      const double dz = dh[i] * (h_prev[i] - n[i]);
      const double da_n = dn * (1.0 - n[i] * n[i]);
      const double dr = da_n * ghn[i];
      const double da_r = dr * r[i] * (1.0 - r[i]);
      const double da_z = dz * z[i] * (1.0 - z[i]);
      dgx[i] = da_r;
      dgx[hidden + i] = da_z;
      dgx[2 * hidden + i] = da_n;
      dgh[i] = da_r;
      dgh[hidden + i] = da_z;
      dgh[2 * hidden + i] = da_n * r[i];
      carry[i] = dh[i] * z[i];
    }
    gemv_t_acc(w.recurrent, dgh, carry);
  }
  matmul_tn_acc(d_gx, xs, grad.input);
  matmul_tn_acc(d_gh, trace.previous, grad.recurrent);
  for (std::size_t t = 0; t < steps; ++t) simd::axpy(1.0, d_gx.row(t), grad.bias.row(0));
  matmul_nn_acc(d_gx, w.input, d_xs);
}

}  // namespace embeval::tagger
