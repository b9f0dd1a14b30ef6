#include "embeval/tagger/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "embeval/error.hpp"
#include "embeval/random.hpp"
#include "embeval/text.hpp"

namespace embeval::tagger {

void TaggerConfig::validate() const {
  if (char_embedding_dim == 0 || char_hidden == 0 || token_hidden == 0) {
    throw ArgumentError("tagger config: layer sizes must be >= 1");
  }
  if (batch_size == 0 || patience == 0) throw ArgumentError("tagger config: batch_size and patience must be >= 1");
  if (!(char_dropout >= 0.0 && char_dropout < 1.0) || !(token_dropout >= 0.0 && token_dropout < 1.0)) {
    throw ArgumentError("tagger config: dropout rates must be in [0, 1)");
  }
  if (!(learning_rate >= 0.0)) throw ArgumentError("tagger config: learning_rate must be >= 0");
  if (!(l2_strength >= 0.0)) throw ArgumentError("tagger config: l2_strength must be >= 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) ||
      !(adam_epsilon > 0.0)) {
    throw ArgumentError("tagger config: Adam betas must be in [0, 1) and epsilon > 0");
  }
  if (!(grad_clip >= 0.0)) throw ArgumentError("tagger config: grad_clip must be >= 0");
}

GruWeights::GruWeights(std::size_t input_dim, std::size_t hidden)
    : input(3 * hidden, input_dim), recurrent(3 * hidden, hidden), bias(1, 3 * hidden) {}

CharAlphabet::CharAlphabet(const std::vector<char32_t>& chars) : chars_(chars) {
  std::sort(chars_.begin(), chars_.end());
  chars_.erase(std::unique(chars_.begin(), chars_.end()), chars_.end());
}

CharAlphabet CharAlphabet::from_corpus(const AnnotatedCorpus& corpus) {
  std::set<char32_t> seen;
  for (const auto& s : corpus.sentences) {
    for (const auto& t : s.tokens) {
      for (char32_t c : text::decode_utf8(t.surface)) seen.insert(c);
    }
  }
  return CharAlphabet(std::vector<char32_t>(seen.begin(), seen.end()));
}

std::size_t CharAlphabet::index(char32_t c) const {
  const auto it = std::lower_bound(chars_.begin(), chars_.end(), c);
  if (it == chars_.end() || *it != c) return 0;
  return static_cast<std::size_t>(it - chars_.begin()) + 1;
}

TaggerParameters TaggerParameters::zeros_like() const {
  TaggerParameters out = *this;
  out.for_each([](std::string_view, Matrix& m) { m.fill(0.0); });
  return out;
}

std::size_t TaggerParameters::count() const {
  std::size_t n = 0;
  for_each([&](std::string_view, const Matrix& m) { n += m.size(); });
  return n;
}

std::size_t TaggerModel::tag_index(std::string_view tag) const {
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i] == tag) return i;
  }
  throw LookupError("tag '" + std::string(tag) + "' is not in the model's tag set");
}

namespace {

void glorot(Matrix& m, Rng& rng, std::size_t fan_in, std::size_t fan_out) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : m.flat()) v = rng.uniform(-limit, limit);
}

void init_gru(GruWeights& w, Rng& rng) {
  // Per-gate fan-out, as if the three gates were separate matrices.
  glorot(w.input, rng, w.input_dim(), w.hidden());
  glorot(w.recurrent, rng, w.hidden(), w.hidden());
  w.bias.fill(0.0);
}

}  // namespace

TaggerModel init_model(const TaggerConfig& config, std::vector<std::string> tags, CharAlphabet alphabet,
                       std::size_t word_dim) {
  config.validate();
  if (tags.empty()) throw ArgumentError("tagger needs at least one tag");
  TaggerModel model;
  model.config = config;
  model.tags = std::move(tags);
  model.alphabet = std::move(alphabet);
  model.word_dim = word_dim;

  const std::size_t k = model.tags.size();
  const std::size_t char_out = 2 * config.char_hidden;
  const std::size_t token_in = word_dim + char_out;
  auto& p = model.params;
  p.char_embeddings = Matrix(model.alphabet.size(), config.char_embedding_dim);
  p.char_forward = GruWeights(config.char_embedding_dim, config.char_hidden);
  p.char_backward = GruWeights(config.char_embedding_dim, config.char_hidden);
  p.token_forward = GruWeights(token_in, config.token_hidden);
  p.token_backward = GruWeights(token_in, config.token_hidden);
  p.emission = Matrix(k, 2 * config.token_hidden);
  p.emission_bias = Matrix(1, k);
  p.transitions = Matrix(k + 2, k + 2);

  Rng rng(derive_seed(config.seed, 0x1417));
  const double char_limit = std::sqrt(3.0 / static_cast<double>(config.char_embedding_dim));
  for (double& v : p.char_embeddings.flat()) v = rng.uniform(-char_limit, char_limit);
  init_gru(p.char_forward, rng);
  init_gru(p.char_backward, rng);
  init_gru(p.token_forward, rng);
  init_gru(p.token_backward, rng);
  glorot(p.emission, rng, 2 * config.token_hidden, k);
  return model;
}

std::vector<std::string> sorted_tag_set(const AnnotatedCorpus& corpus) {
  auto tags = corpus.tag_set();
  std::sort(tags.begin(), tags.end());
  return tags;
}

}  // namespace embeval::tagger
