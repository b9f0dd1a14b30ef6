#include <doctest.h>

#include <cmath>
#include <tuple>

#include "embeval/error.hpp"
#include "embeval/tagger/gru.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace embeval;
using namespace embeval::tagger;

namespace {

GruWeights random_gru(Rng& rng, std::size_t in, std::size_t hidden, double scale = 0.5) {
  GruWeights w(in, hidden);
  for (double& v : w.input.flat()) v = scale * rng.normal();
  for (double& v : w.recurrent.flat()) v = scale * rng.normal();
  for (double& v : w.bias.flat()) v = scale * rng.normal();
  return w;
}

double sigm(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Scalar loss sum_t c_t . h_t over a sequence run.
double sequence_loss(const GruWeights& w, const Matrix& xs, bool reverse, const Matrix& c) {
  GruTrace trace;
  gru_run(w, xs, reverse, trace);
  double s = 0;
  for (std::size_t i = 0; i < c.size(); ++i) s += c.flat()[i] * trace.states.flat()[i];
  return s;
}

}  // namespace

TEST_CASE("zero weights and zero state give the zero state") {
  GruWeights w(3, 4);
  const Vector x = {1.0, -2.0, 0.5}, h(4, 0.0);
  for (double v : gru_cell(x, h, w)) CHECK(v == 0.0);
}

TEST_CASE("single step equals hand-unrolled arithmetic on a 2-unit cell") {
  Rng rng(157);
  const auto w = random_gru(rng, 2, 2, 1.0);
  const Vector x = {0.3, -1.1}, h = {0.25, -0.6};
  auto row = [&](const Matrix& m, std::size_t r, const Vector& v) { return m(r, 0) * v[0] + m(r, 1) * v[1]; };
  Vector expected(2);
  for (std::size_t i = 0; i < 2; ++i) {
    const double r = sigm(row(w.input, i, x) + w.bias(0, i) + row(w.recurrent, i, h));
    const double z = sigm(row(w.input, 2 + i, x) + w.bias(0, 2 + i) + row(w.recurrent, 2 + i, h));
    const double n = std::tanh(row(w.input, 4 + i, x) + w.bias(0, 4 + i) + r * row(w.recurrent, 4 + i, h));
    expected[i] = (1 - z) * n + z * h[i];
  }
  const auto got = gru_cell(x, h, w);
  CHECK(std::abs(got[0] - expected[0]) < 1e-12);
  CHECK(std::abs(got[1] - expected[1]) < 1e-12);
}

TEST_CASE("states stay in (-1, 1)") {
  Rng rng(163);
  // Moderate inputs keep the bound strict; saturated ones may round to +-1.
  for (const auto& [scale, input_scale, strict] : {std::tuple{0.5, 1.0, true}, std::tuple{3.0, 10.0, false}}) {
    const auto w = random_gru(rng, 5, 6, scale);
    Vector h(6, 0.0);
    for (int step = 0; step < 50; ++step) {
      Vector x(5);
      for (double& v : x) v = input_scale * rng.normal();
      h = gru_cell(x, h, w);
      for (double v : h) {
        if (strict) {
          CHECK(std::abs(v) < 1.0);
        } else {
          CHECK(std::abs(v) <= 1.0);
        }
      }
    }
  }
}

TEST_CASE("sequence run equals repeated cells in either direction") {
  Rng rng(167);
  const auto w = random_gru(rng, 3, 4);
  const Matrix xs = testing::random_matrix(rng, 5, 3);
  for (bool reverse : {false, true}) {
    GruTrace trace;
    gru_run(w, xs, reverse, trace);
    Vector h(4, 0.0);
    for (std::size_t k = 0; k < 5; ++k) {
      const std::size_t t = reverse ? 4 - k : k;
      h = gru_cell(xs.row(t), h, w);
      for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(trace.states(t, i) - h[i]) < 1e-14);
    }
  }
}

TEST_CASE("backprop matches central finite differences") {
  Rng rng(173);
  for (int trial = 0; trial < 6; ++trial) {
    const bool reverse = trial % 2 == 1;
    const std::size_t steps = 1 + rng.below(4);
    auto w = random_gru(rng, 3, 4);
    Matrix xs = testing::random_matrix(rng, steps, 3);
    const Matrix c = testing::random_matrix(rng, steps, 4);
    GruTrace trace;
    gru_run(w, xs, reverse, trace);
    GruWeights grad(3, 4);
    Matrix d_xs(steps, 3);
    gru_backprop(w, xs, reverse, trace, c, grad, d_xs);

    const double eps = 1e-5;
    auto check = [&](Matrix& m, const Matrix& g) {
      for (std::size_t i = 0; i < m.size(); ++i) {
        const double saved = m.flat()[i];
        m.flat()[i] = saved + eps;
        const double up = sequence_loss(w, xs, reverse, c);
        m.flat()[i] = saved - eps;
        const double down = sequence_loss(w, xs, reverse, c);
        m.flat()[i] = saved;
        CHECK(oracle::relative_error(g.flat()[i], (up - down) / (2 * eps), 1e-7) < 1e-4);
      }
    };
    check(w.input, grad.input);
    check(w.recurrent, grad.recurrent);
    check(w.bias, grad.bias);
    check(xs, d_xs);
  }
}

TEST_CASE("shape mismatches are argument errors") {
  GruWeights w(3, 2);
  CHECK_THROWS_AS(gru_cell(Vector(2), Vector(2), w), ArgumentError);
  CHECK_THROWS_AS(gru_cell(Vector(3), Vector(3), w), ArgumentError);
  GruTrace trace;
  CHECK_THROWS_AS(gru_run(w, Matrix(2, 4), false, trace), ArgumentError);
}
