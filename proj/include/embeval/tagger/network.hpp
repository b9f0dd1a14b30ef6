#pragma once

// Forward and backward passes of the tagger.
//
// Per token: [frozen word vector | dropout(char BiGRU encoding)] feeds a token
// BiGRU whose dropped-out states are projected to per-tag emission scores.
// Words missing from the embedding table get a zero word vector but still a
// real character encoding.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "embeval/embedding.hpp"
#include "embeval/linalg.hpp"
#include "embeval/tagger/gru.hpp"
#include "embeval/tagger/model.hpp"

namespace embeval::tagger {

// Row of `word` in the frozen table: exact match, then lowercased.
std::optional<std::size_t> find_word_row(const EmbeddingTable& table, std::string_view word);

struct CharEncodingTrace {
  Matrix inputs;  // one character embedding per row
  std::vector<std::size_t> char_ids;
  GruTrace forward, backward;
  Vector output;  // [final forward state | final backward state]
};

void encode_chars(std::string_view word, const TaggerModel& model, CharEncodingTrace& trace);
void backprop_chars(const CharEncodingTrace& trace, std::span<const double> d_output, const TaggerModel& model,
                    TaggerParameters& grad);
// 2 * char_hidden encoding of a non-empty word.
Vector encode_word_chars(std::string_view word, const TaggerModel& model);

// Emission scores (length x tags). With train_mode, dropout masks are drawn
// from a generator seeded with `dropout_seed`.
Matrix forward_scores(const std::vector<std::string>& words, const EmbeddingTable& embeddings,
                      const TaggerModel& model, bool train_mode, std::uint64_t dropout_seed = 0);

struct TrainingExample {
  std::vector<std::string> words;
  std::vector<std::size_t> tags;
};

// Adds scale * sum of per-sentence losses' gradients into `grad` and returns
// scale * sum of losses. `dropout_seeds` holds one seed per sentence in train
// mode and is empty for a dropout-free pass. Character encodings are computed
// once per distinct word in the batch.
double batch_loss_gradient(const TaggerModel& model, const EmbeddingTable& embeddings,
                           std::span<const TrainingExample* const> batch, std::span<const std::uint64_t> dropout_seeds,
                           double scale, TaggerParameters& grad);

// Loss of one sentence without gradient (CRF negative log-likelihood, or the
// summed token cross-entropy when the model decodes with softmax).
double sentence_loss(const Matrix& emissions, std::span<const std::size_t> gold, const TaggerModel& model);

std::vector<std::size_t> decode(const Matrix& emissions, const TaggerModel& model);

// Inference with a per-word cache of character encodings.
class Predictor {
 public:
  Predictor(const TaggerModel& model, const EmbeddingTable& embeddings);
  Matrix scores(const std::vector<std::string>& words);
  std::vector<std::string> predict(const std::vector<std::string>& words);

 private:
  const TaggerModel& model_;
  const EmbeddingTable& embeddings_;
  std::map<std::string, Vector, std::less<>> char_cache_;
};

}  // namespace embeval::tagger
