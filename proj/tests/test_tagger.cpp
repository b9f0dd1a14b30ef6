#include <doctest.h>

#include <cmath>

#include "embeval/error.hpp"
#include "embeval/tagger/network.hpp"
#include "embeval/tagger/train.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace embeval;
using namespace embeval::tagger;

namespace {

TaggerConfig small_config() {
  TaggerConfig c;
  c.char_embedding_dim = 3;
  c.char_hidden = 2;
  c.token_hidden = 3;
  c.l2_strength = 1e-3;
  return c;
}

struct Fixture {
  EmbeddingTable embeddings;
  TaggerModel model;
  std::vector<TrainingExample> examples;
};

Fixture make_fixture(Rng& rng, const TaggerConfig& config) {
  Fixture f;
  const std::vector<std::string> vocab = {"aspirin", "the", "of", "salt"};
  f.embeddings = EmbeddingTable("e", vocab, testing::random_matrix(rng, 4, 4));
  f.model = init_model(config, {"B-X", "I-X", "O"}, CharAlphabet({U'a', U'e', U'i', U'o', U'r', U's', U't'}), 4);
  // Perturb everything so no group sits at a special point (zeros).
  f.model.params.for_each([&](std::string_view, Matrix& m) {
    for (double& v : m.flat()) v += 0.3 * rng.normal();
  });
  const std::vector<std::vector<std::string>> sentences = {
      {"the", "aspirin", "salt"}, {"Aspirin", "of", "unknownzq"}, {"tia"}};
  for (const auto& s : sentences) {
    TrainingExample ex{s, {}};
    for (std::size_t i = 0; i < s.size(); ++i) ex.tags.push_back(rng.below(3));
    f.examples.push_back(ex);
  }
  return f;
}

double objective(const Fixture& f, const TaggerModel& model, std::span<const std::uint64_t> seeds) {
  std::vector<const TrainingExample*> batch;
  for (const auto& e : f.examples) batch.push_back(&e);
  TaggerParameters scratch = model.params.zeros_like();
  return objective_gradient(model, f.embeddings, batch, seeds, scratch);
}

// Central differences on every entry of every parameter group.
void check_gradients(Fixture& f, std::span<const std::uint64_t> seeds) {
  std::vector<const TrainingExample*> batch;
  for (const auto& e : f.examples) batch.push_back(&e);
  TaggerParameters grad = f.model.params.zeros_like();
  objective_gradient(f.model, f.embeddings, batch, seeds, grad);

  std::vector<std::pair<std::string, Matrix*>> params;
  std::vector<const Matrix*> grads;
  f.model.params.for_each([&](std::string_view name, Matrix& m) { params.emplace_back(std::string(name), &m); });
  grad.for_each([&](std::string_view, const Matrix& m) { grads.push_back(&m); });
  const double eps = 1e-5;
  for (std::size_t g = 0; g < params.size(); ++g) {
    CAPTURE(params[g].first);
    Matrix& m = *params[g].second;
    double worst = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double saved = m.flat()[i];
      m.flat()[i] = saved + eps;
      const double up = objective(f, f.model, seeds);
      m.flat()[i] = saved - eps;
      const double down = objective(f, f.model, seeds);
      m.flat()[i] = saved;
      worst = std::max(worst, oracle::relative_error(grads[g]->flat()[i], (up - down) / (2 * eps), 1e-7));
    }
    CHECK(worst < 1e-4);
  }
}

}  // namespace

TEST_CASE("full-model gradients match finite differences (CRF)") {
  Rng rng(179);
  auto f = make_fixture(rng, small_config());
  check_gradients(f, {});
}

TEST_CASE("full-model gradients match finite differences with fixed dropout masks") {
  Rng rng(181);
  auto f = make_fixture(rng, small_config());
  const std::vector<std::uint64_t> seeds = {11, 12, 13};
  check_gradients(f, seeds);
}

TEST_CASE("full-model gradients match finite differences (softmax head)") {
  Rng rng(191);
  auto cfg = small_config();
  cfg.use_crf = false;
  auto f = make_fixture(rng, cfg);
  check_gradients(f, {});
}

TEST_CASE("character encoder") {
  Rng rng(193);
  auto cfg = small_config();
  auto f = make_fixture(rng, cfg);
  CharEncodingTrace trace;
  encode_chars("a", f.model, trace);
  CHECK(trace.forward.states.rows() == 1);
  CHECK(trace.backward.states.rows() == 1);
  CHECK(encode_word_chars("a", f.model).size() == 2 * cfg.char_hidden);

  auto tied = f.model;
  tied.params.char_backward = tied.params.char_forward;
  const auto pal = encode_word_chars("rotor", tied);
  for (std::size_t i = 0; i < cfg.char_hidden; ++i) CHECK(pal[i] == pal[cfg.char_hidden + i]);
  const auto not_pal = encode_word_chars("roti", tied);
  CHECK(not_pal[0] != not_pal[cfg.char_hidden]);

  // Unknown characters share one embedding.
  CHECK(encode_word_chars("q", f.model) == encode_word_chars("z", f.model));
}

TEST_CASE("inference is deterministic; dropout 0 in train mode equals inference") {
  Rng rng(197);
  auto cfg = small_config();
  auto f = make_fixture(rng, cfg);
  const auto& words = f.examples[0].words;
  const auto a = forward_scores(words, f.embeddings, f.model, false);
  CHECK(a == forward_scores(words, f.embeddings, f.model, false));
  CHECK(a.rows() == words.size());
  CHECK(a.cols() == 3);
  const auto dropped = forward_scores(words, f.embeddings, f.model, true, 5);
  CHECK_FALSE(dropped == a);
  CHECK(dropped == forward_scores(words, f.embeddings, f.model, true, 5));
  auto no_drop = f.model;
  no_drop.config.char_dropout = 0.0;
  no_drop.config.token_dropout = 0.0;
  CHECK(forward_scores(words, f.embeddings, no_drop, true, 5) == a);
  Predictor p(f.model, f.embeddings);
  CHECK(p.scores(words) == a);
}

TEST_CASE("word lookup falls back to lowercase; unknown words get no row") {
  Rng rng(199);
  auto f = make_fixture(rng, small_config());
  CHECK(find_word_row(f.embeddings, "aspirin").value() == 0);
  CHECK(find_word_row(f.embeddings, "ASPIRIN").value() == 0);
  CHECK_FALSE(find_word_row(f.embeddings, "zzz").has_value());
}

TEST_CASE("Adam: zero gradient and zero learning rate leave parameters unchanged") {
  Rng rng(211);
  auto f = make_fixture(rng, small_config());
  const auto before = f.model.params;
  AdamState state(f.model.params);
  adam_step(f.model.params, f.model.params.zeros_like(), state, f.model.config);
  CHECK(f.model.params == before);

  auto cfg = f.model.config;
  cfg.learning_rate = 0.0;
  TaggerParameters g = f.model.params.zeros_like();
  g.for_each([&](std::string_view, Matrix& m) {
    for (double& v : m.flat()) v = rng.normal();
  });
  adam_step(f.model.params, g, state, cfg);
  CHECK(f.model.params == before);

  // A first step moves each parameter by about lr against the gradient's sign.
  AdamState fresh(before);
  auto moved = before;
  adam_step(moved, g, fresh, f.model.config);
  CHECK(std::abs(moved.emission(0, 0) - before.emission(0, 0) + 0.01 * (g.emission(0, 0) > 0 ? 1 : -1)) < 1e-6);
}

namespace {

AnnotatedCorpus tiny_corpus(const std::string& name) {
  AnnotatedCorpus c{name, {}};
  c.sentences.push_back({{{"the", "O"}, {"aspirin", "B-CHEM"}, {"salt", "I-CHEM"}}});
  c.sentences.push_back({{{"aspirin", "B-CHEM"}, {"of", "O"}}});
  c.sentences.push_back({{{"the", "O"}, {"salt", "O"}}});
  return c;
}

}  // namespace

TEST_CASE("training: learning rate 0 keeps the initial parameters; determinism") {
  Rng rng(223);
  const EmbeddingTable emb("e", {"aspirin", "the", "of", "salt"}, testing::random_matrix(rng, 4, 4));
  auto cfg = small_config();
  cfg.learning_rate = 0.0;
  cfg.max_epochs = 3;
  cfg.batch_size = 2;
  const auto corpus = tiny_corpus("train");
  const auto r = train(corpus, corpus, emb, cfg);
  const auto init = init_model(cfg, sorted_tag_set(corpus), CharAlphabet::from_corpus(corpus), 4);
  CHECK(r.model.params == init.params);
  CHECK(r.log.size() == 3);

  cfg.learning_rate = 0.01;
  const auto a = train(corpus, corpus, emb, cfg);
  const auto b = train(corpus, corpus, emb, cfg);
  CHECK(a.model == b.model);
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(epoch_log_line(a.log[i], false) == epoch_log_line(b.log[i], false));
  }
  CHECK(epoch_log_line(a.log[0], false).find("elapsed") == std::string::npos);
  CHECK(epoch_log_line(a.log[0], true).find("elapsed_seconds") != std::string::npos);
}

TEST_CASE("training: zero epochs, early stopping and best-epoch parameters") {
  Rng rng(227);
  const EmbeddingTable emb("e", {"aspirin", "the", "of", "salt"}, testing::random_matrix(rng, 4, 4));
  auto cfg = small_config();
  cfg.max_epochs = 0;
  const auto corpus = tiny_corpus("train");
  const auto none = train(corpus, corpus, emb, cfg);
  CHECK(none.log.empty());
  CHECK(none.best_epoch == 0);

  cfg.max_epochs = 40;
  cfg.patience = 2;
  std::vector<double> f1s;
  const auto r = train(corpus, corpus, emb, cfg, [&](const EpochLog& e) { f1s.push_back(e.dev_f1); });
  REQUIRE(!r.log.empty());
  CHECK(f1s.size() == r.log.size());
  const auto best = std::max_element(f1s.begin(), f1s.end());
  CHECK(r.best_epoch == static_cast<std::size_t>(best - f1s.begin()) + 1);
  if (r.early_stopped) CHECK(r.log.size() == r.best_epoch + cfg.patience);
  CHECK(evaluate_model(r.model, emb, corpus).micro.f1 == *best);
}

TEST_CASE("training rejects dev tags unseen in train") {
  Rng rng(229);
  const EmbeddingTable emb("e", {"aspirin"}, testing::random_matrix(rng, 1, 4));
  auto dev = tiny_corpus("dev");
  dev.sentences[0].tokens[0].tag = "B-GENE";
  try {
    train(tiny_corpus("train"), dev, emb, small_config());
    FAIL("expected a data error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("B-GENE") != std::string::npos);
  }
}

TEST_CASE("config validation") {
  TaggerConfig c;
  CHECK_NOTHROW(c.validate());
  c.token_dropout = 1.0;
  CHECK_THROWS_AS(c.validate(), ArgumentError);
  c = {};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ArgumentError);
  c = {};
  c.learning_rate = -1;
  CHECK_THROWS_AS(c.validate(), ArgumentError);
  const TaggerConfig d;
  CHECK(d.char_hidden == 80);
  CHECK(d.token_hidden == 300);
  CHECK(d.char_dropout == 0.25);
  CHECK(d.token_dropout == 0.5);
  CHECK(d.batch_size == 16);
  CHECK(d.max_epochs == 50);
  CHECK(d.patience == 5);
  CHECK(d.learning_rate == 0.01);
}
