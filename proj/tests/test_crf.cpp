#include <doctest.h>

#include <cmath>

#include "embeval/error.hpp"
#include "embeval/tagger/crf.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace embeval;
using namespace embeval::tagger;

namespace {

struct Instance {
  Matrix emissions, transitions;
  std::vector<std::size_t> gold;
};

Instance random_instance(Rng& rng, std::size_t max_len = 4, std::size_t max_tags = 3, double scale = 2.0) {
  const std::size_t n = 1 + rng.below(max_len), k = 1 + rng.below(max_tags);
  Instance inst{testing::random_matrix(rng, n, k, scale), testing::random_matrix(rng, k + 2, k + 2, scale), {}};
  for (std::size_t i = 0; i < n; ++i) inst.gold.push_back(rng.below(k));
  return inst;
}

}  // namespace

TEST_CASE("uniform single token") {
  Matrix e(1, 2), t(4, 4);
  const std::vector<std::size_t> gold = {1};
  CHECK(std::abs(crf_log_likelihood(e, gold, t) - std::log(2.0)) < 1e-15);
}

TEST_CASE("path score matches the oracle formula") {
  Rng rng(137);
  for (int i = 0; i < 50; ++i) {
    const auto inst = random_instance(rng);
    CHECK(std::abs(crf_path_score(inst.emissions, inst.transitions, inst.gold) -
                   oracle::path_score(inst.emissions, inst.transitions, inst.gold)) < 1e-12);
  }
}

TEST_CASE("log partition, path probabilities and Viterbi against enumeration") {
  Rng rng(139);
  for (int i = 0; i < 200; ++i) {
    const auto inst = random_instance(rng);
    const double z = crf_log_partition(inst.emissions, inst.transitions);
    CHECK(std::abs(z - oracle::log_partition(inst.emissions, inst.transitions)) < 1e-8);

    double total = 0.0, best = -1e300;
    oracle::for_each_path(inst.emissions.rows(), inst.emissions.cols(), [&](const std::vector<std::size_t>& p) {
      const double loss = crf_log_likelihood(inst.emissions, p, inst.transitions);
      CHECK(loss >= -1e-12);
      total += std::exp(-loss);
      best = std::max(best, oracle::path_score(inst.emissions, inst.transitions, p));
    });
    CHECK(std::abs(total - 1.0) < 1e-8);

    const auto v = viterbi_decode(inst.emissions, inst.transitions);
    CHECK(v == oracle::best_path(inst.emissions, inst.transitions));
    CHECK(oracle::path_score(inst.emissions, inst.transitions, v) >= best - 1e-12);
  }
}

TEST_CASE("log space survives huge scores") {
  Matrix e(3, 2), t(4, 4);
  e(0, 0) = 1000;
  e(1, 1) = 1000;
  e(2, 0) = -1000;
  const std::vector<std::size_t> gold = {0, 1, 1};
  CHECK(std::isfinite(crf_log_partition(e, t)));
  CHECK(std::abs(crf_log_likelihood(e, gold, t)) < 1e-9);
}

TEST_CASE("Viterbi: diagonal emissions, shift invariance, ties") {
  Matrix e(3, 3), t(5, 5);
  e(0, 2) = 5;
  e(1, 0) = 5;
  e(2, 1) = 5;
  CHECK(viterbi_decode(e, t) == std::vector<std::size_t>{2, 0, 1});
  Rng rng(149);
  for (int i = 0; i < 50; ++i) {
    auto inst = random_instance(rng, 6, 4);
    const auto before = viterbi_decode(inst.emissions, inst.transitions);
    const std::size_t row = rng.below(inst.emissions.rows());
    for (std::size_t k = 0; k < inst.emissions.cols(); ++k) inst.emissions(row, k) += 3.25;
    CHECK(viterbi_decode(inst.emissions, inst.transitions) == before);
  }
  CHECK(viterbi_decode(Matrix(2, 3), Matrix(5, 5)) == std::vector<std::size_t>{0, 0});
}

TEST_CASE("loss gradient matches finite differences") {
  Rng rng(151);
  for (int i = 0; i < 30; ++i) {
    auto inst = random_instance(rng, 5, 4);
    Matrix de, dt(inst.transitions.rows(), inst.transitions.cols());
    const double loss = crf_loss_gradient(inst.emissions, inst.gold, inst.transitions, 1.0, de, dt);
    CHECK(std::abs(loss - crf_log_likelihood(inst.emissions, inst.gold, inst.transitions)) < 1e-10);
    const double eps = 1e-5;
    auto check = [&](Matrix& m, const Matrix& g) {
      for (std::size_t a = 0; a < m.rows(); ++a) {
        for (std::size_t b = 0; b < m.cols(); ++b) {
          const double saved = m(a, b);
          m(a, b) = saved + eps;
          const double up = crf_log_likelihood(inst.emissions, inst.gold, inst.transitions);
          m(a, b) = saved - eps;
          const double down = crf_log_likelihood(inst.emissions, inst.gold, inst.transitions);
          m(a, b) = saved;
          CHECK(oracle::relative_error(g(a, b), (up - down) / (2 * eps), 1e-4) < 1e-4);
        }
      }
    };
    check(inst.emissions, de);
    check(inst.transitions, dt);
  }
}

TEST_CASE("shape errors") {
  const std::vector<std::size_t> gold = {0};
  CHECK_THROWS_AS(crf_log_likelihood(Matrix(1, 2), gold, Matrix(3, 3)), ArgumentError);
  CHECK_THROWS_AS(crf_log_likelihood(Matrix(2, 2), gold, Matrix(4, 4)), ArgumentError);
  CHECK_THROWS_AS(viterbi_decode(Matrix(0, 2), Matrix(4, 4)), ArgumentError);
}
