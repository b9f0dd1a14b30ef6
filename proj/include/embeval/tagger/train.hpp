#pragma once

// Mini-batch Adam training with L2 regularization, dropout and early
// stopping on development-set span F1.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "embeval/corpus.hpp"
#include "embeval/embedding.hpp"
#include "embeval/tagger/metrics.hpp"
#include "embeval/tagger/model.hpp"
#include "embeval/tagger/network.hpp"

namespace embeval::tagger {

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;  // mean objective over the epoch's batches
  double dev_precision = 0.0;
  double dev_recall = 0.0;
  double dev_f1 = 0.0;
  double elapsed_seconds = 0.0;
};

// One JSON object per line. Wall-clock time is only included on request so
// that logs of identical runs stay byte-identical.
std::string epoch_log_line(const EpochLog& entry, bool include_timing);

struct TrainingResult {
  TaggerModel model;  // parameters from the best development epoch
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;  // 0 when no epoch ran
  bool early_stopped = false;
};

struct AdamState {
  TaggerParameters first_moment;
  TaggerParameters second_moment;
  std::size_t step = 0;
  explicit AdamState(const TaggerParameters& like)
      : first_moment(like.zeros_like()), second_moment(like.zeros_like()) {}
};

void adam_step(TaggerParameters& params, const TaggerParameters& grad, AdamState& state, const TaggerConfig& config);

// Throws DataError naming any tag outside the model's tag set.
std::vector<TrainingExample> encode_corpus(const AnnotatedCorpus& corpus, const TaggerModel& model);

// Mean batch loss plus 0.5 * l2 * ||theta||^2; the matching gradient is added
// into `grad`. Pass empty `dropout_seeds` for a dropout-free evaluation.
double objective_gradient(const TaggerModel& model, const EmbeddingTable& embeddings,
                          std::span<const TrainingExample* const> batch, std::span<const std::uint64_t> dropout_seeds,
                          TaggerParameters& grad);

std::vector<std::vector<std::string>> predict_corpus(const TaggerModel& model, const EmbeddingTable& embeddings,
                                                     const AnnotatedCorpus& corpus);
F1Report evaluate_model(const TaggerModel& model, const EmbeddingTable& embeddings, const AnnotatedCorpus& corpus);

using EpochCallback = std::function<void(const EpochLog&)>;

TrainingResult train(const AnnotatedCorpus& train_corpus, const AnnotatedCorpus& dev_corpus,
                     const EmbeddingTable& embeddings, const TaggerConfig& config, const EpochCallback& on_epoch = {});

}  // namespace embeval::tagger
