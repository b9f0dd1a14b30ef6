#pragma once

// Configuration, vocabularies and trainable weights of the character-GRU /
// token-BiGRU / CRF sequence labeler.

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "embeval/corpus.hpp"
#include "embeval/linalg.hpp"

namespace embeval::tagger {

struct TaggerConfig {
  std::size_t char_embedding_dim = 25;
  std::size_t char_hidden = 80;   // per direction
  std::size_t token_hidden = 300; // per direction
  double char_dropout = 0.25;     // on the character encoding of each token
  double token_dropout = 0.5;     // on the token BiGRU output
  std::size_t batch_size = 16;
  std::size_t max_epochs = 50;    // 0 returns the initial parameters
  std::size_t patience = 5;
  double learning_rate = 0.01;
  double l2_strength = 1e-6;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double grad_clip = 5.0;         // global L2 norm; 0 disables
  bool use_crf = true;            // false: per-token softmax loss and argmax decoding
  std::uint64_t seed = 0;

  // Throws ArgumentError on out-of-range values.
  void validate() const;
  bool operator==(const TaggerConfig&) const = default;
};

// GRU with gates stacked as [reset; update; candidate]:
//   r = sigm(W_r x + U_r h + b_r)
//   z = sigm(W_z x + U_z h + b_z)
//   n = tanh(W_n x + r * (U_n h) + b_n)
//   h' = (1 - z) * n + z * h
struct GruWeights {
  Matrix input;      // 3H x I
  Matrix recurrent;  // 3H x H
  Matrix bias;       // 1 x 3H

  GruWeights() = default;
  GruWeights(std::size_t input_dim, std::size_t hidden);
  std::size_t hidden() const noexcept { return recurrent.cols(); }
  std::size_t input_dim() const noexcept { return input.cols(); }
  bool operator==(const GruWeights&) const = default;
};

// Character alphabet; index 0 is the shared unknown-character slot.
class CharAlphabet {
 public:
  CharAlphabet() = default;
  explicit CharAlphabet(const std::vector<char32_t>& chars);
  static CharAlphabet from_corpus(const AnnotatedCorpus& corpus);

  std::size_t size() const noexcept { return chars_.size() + 1; }
  std::size_t index(char32_t c) const;
  const std::vector<char32_t>& chars() const noexcept { return chars_; }
  bool operator==(const CharAlphabet& other) const { return chars_ == other.chars_; }

 private:
  std::vector<char32_t> chars_;  // sorted, unique
};

struct TaggerParameters {
  Matrix char_embeddings;  // alphabet x char_embedding_dim
  GruWeights char_forward;
  GruWeights char_backward;
  GruWeights token_forward;
  GruWeights token_backward;
  Matrix emission;       // tags x 2*token_hidden
  Matrix emission_bias;  // 1 x tags
  Matrix transitions;    // (tags + 2)^2, row = from, col = to; tags, tags+1 are START, STOP

  // Visits every parameter group in a fixed order.
  template <typename Self, typename F>
  static void visit(Self& self, F&& f) {
    f("char_embeddings", self.char_embeddings);
    f("char_forward.input", self.char_forward.input);
    f("char_forward.recurrent", self.char_forward.recurrent);
    f("char_forward.bias", self.char_forward.bias);
    f("char_backward.input", self.char_backward.input);
    f("char_backward.recurrent", self.char_backward.recurrent);
    f("char_backward.bias", self.char_backward.bias);
    f("token_forward.input", self.token_forward.input);
    f("token_forward.recurrent", self.token_forward.recurrent);
    f("token_forward.bias", self.token_forward.bias);
    f("token_backward.input", self.token_backward.input);
    f("token_backward.recurrent", self.token_backward.recurrent);
    f("token_backward.bias", self.token_backward.bias);
    f("emission", self.emission);
    f("emission_bias", self.emission_bias);
    f("transitions", self.transitions);
  }
  template <typename F>
  void for_each(F&& f) {
    visit(*this, std::forward<F>(f));
  }
  template <typename F>
  void for_each(F&& f) const {
    visit(*this, std::forward<F>(f));
  }

  // Same shapes, all zeros.
  TaggerParameters zeros_like() const;
  std::size_t count() const;
  bool operator==(const TaggerParameters&) const = default;
};

struct TaggerModel {
  TaggerConfig config;
  std::vector<std::string> tags;
  CharAlphabet alphabet;
  std::size_t word_dim = 0;
  TaggerParameters params;

  std::size_t tag_count() const noexcept { return tags.size(); }
  std::size_t start_state() const noexcept { return tags.size(); }
  std::size_t stop_state() const noexcept { return tags.size() + 1; }
  // Throws LookupError for tags outside the model's tag set.
  std::size_t tag_index(std::string_view tag) const;
  bool operator==(const TaggerModel&) const = default;
};

// Glorot-uniform weights, zero biases and transitions, uniform char embeddings.
TaggerModel init_model(const TaggerConfig& config, std::vector<std::string> tags, CharAlphabet alphabet,
                       std::size_t word_dim);

// Sorted distinct tags of a corpus.
std::vector<std::string> sorted_tag_set(const AnnotatedCorpus& corpus);

}  // namespace embeval::tagger
