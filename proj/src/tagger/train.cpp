#include "embeval/tagger/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

#include "embeval/error.hpp"
#include "embeval/random.hpp"

namespace embeval::tagger {

std::string epoch_log_line(const EpochLog& entry, bool include_timing) {
  nlohmann::json j = {{"epoch", entry.epoch},
                      {"train_loss", entry.train_loss},
                      {"dev_precision", entry.dev_precision},
                      {"dev_recall", entry.dev_recall},
                      {"dev_f1", entry.dev_f1}};
  if (include_timing) j["elapsed_seconds"] = entry.elapsed_seconds;
  return j.dump();
}

void adam_step(TaggerParameters& params, const TaggerParameters& grad, AdamState& state, const TaggerConfig& config) {
  ++state.step;
  const double b1 = config.adam_beta1, b2 = config.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  std::vector<std::span<double>> p, m, v;
  std::vector<std::span<const double>> g;
  params.for_each([&](std::string_view, Matrix& x) { p.push_back(x.flat()); });
  state.first_moment.for_each([&](std::string_view, Matrix& x) { m.push_back(x.flat()); });
  state.second_moment.for_each([&](std::string_view, Matrix& x) { v.push_back(x.flat()); });
  grad.for_each([&](std::string_view, const Matrix& x) { g.push_back(x.flat()); });
  for (std::size_t k = 0; k < p.size(); ++k) {
    for (std::size_t i = 0; i < p[k].size(); ++i) {
      m[k][i] = b1 * m[k][i] + (1.0 - b1) * g[k][i];
      v[k][i] = b2 * v[k][i] + (1.0 - b2) * g[k][i] * g[k][i];
      const double m_hat = m[k][i] / c1;
      const double v_hat = v[k][i] / c2;
      p[k][i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
    }
  }
}

std::vector<TrainingExample> encode_corpus(const AnnotatedCorpus& corpus, const TaggerModel& model) {
  std::vector<TrainingExample> out;
  out.reserve(corpus.sentences.size());
  std::set<std::string> unknown;
  for (const auto& s : corpus.sentences) {
    TrainingExample ex;
    for (const auto& t : s.tokens) {
      ex.words.push_back(t.surface);
      const auto it = std::find(model.tags.begin(), model.tags.end(), t.tag);
      if (it == model.tags.end()) {
        unknown.insert(t.tag);
        ex.tags.push_back(0);
      } else {
        ex.tags.push_back(static_cast<std::size_t>(it - model.tags.begin()));
      }
    }
    out.push_back(std::move(ex));
  }
  if (!unknown.empty()) {
    std::string list;
    for (const auto& t : unknown) list += (list.empty() ? "" : ", ") + t;
    throw DataError("corpus '" + corpus.name + "' uses tags unseen in training: " + list);
  }
  return out;
}

double objective_gradient(const TaggerModel& model, const EmbeddingTable& embeddings,
                          std::span<const TrainingExample* const> batch, std::span<const std::uint64_t> dropout_seeds,
                          TaggerParameters& grad) {
  if (batch.empty()) throw ArgumentError("objective_gradient: empty batch");
  const double scale = 1.0 / static_cast<double>(batch.size());
  double loss = batch_loss_gradient(model, embeddings, batch, dropout_seeds, scale, grad);
  const double l2 = model.config.l2_strength;
  if (l2 > 0.0) {
    std::vector<std::span<const double>> p;
    std::vector<std::span<double>> g;
    model.params.for_each([&](std::string_view, const Matrix& x) { p.push_back(x.flat()); });
    grad.for_each([&](std::string_view, Matrix& x) { g.push_back(x.flat()); });
    double sq = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      for (std::size_t i = 0; i < p[k].size(); ++i) {
        sq += p[k][i] * p[k][i];
        g[k][i] += l2 * p[k][i];
      }
    }
    loss += 0.5 * l2 * sq;
  }
  return loss;
}

std::vector<std::vector<std::string>> predict_corpus(const TaggerModel& model, const EmbeddingTable& embeddings,
                                                     const AnnotatedCorpus& corpus) {
  Predictor predictor(model, embeddings);
  std::vector<std::vector<std::string>> out;
  out.reserve(corpus.sentences.size());
  std::vector<std::string> words;
  for (const auto& s : corpus.sentences) {
    words.clear();
    for (const auto& t : s.tokens) words.push_back(t.surface);
    out.push_back(predictor.predict(words));
  }
  return out;
}

F1Report evaluate_model(const TaggerModel& model, const EmbeddingTable& embeddings, const AnnotatedCorpus& corpus) {
  return evaluate_f1(corpus, predict_corpus(model, embeddings, corpus));
}

namespace {

// Shuffle, then sort pools of a few batches by length so each batch holds
// similar-length sentences, then shuffle the batch order.
std::vector<std::vector<std::size_t>> make_batches(const std::vector<TrainingExample>& data, std::size_t batch_size,
                                                   Rng& rng) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<std::size_t>(order));
  const std::size_t pool = batch_size * 8;
  for (std::size_t start = 0; start < order.size(); start += pool) {
    const auto first = order.begin() + static_cast<std::ptrdiff_t>(start);
    const auto last = order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + pool));
    std::stable_sort(first, last, [&](std::size_t a, std::size_t b) {
      return data[a].words.size() < data[b].words.size();
    });
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  rng.shuffle(std::span<std::vector<std::size_t>>(batches));
  return batches;
}

void clip_gradient(TaggerParameters& grad, double max_norm) {
  if (max_norm <= 0.0) return;
  double sq = 0.0;
  grad.for_each([&](std::string_view, const Matrix& g) {
    for (double v : g.flat()) sq += v * v;
  });
  const double n = std::sqrt(sq);
  if (n <= max_norm) return;
  const double s = max_norm / n;
  grad.for_each([&](std::string_view, Matrix& g) {
    for (double& v : g.flat()) v *= s;
  });
}

}  // namespace

TrainingResult train(const AnnotatedCorpus& train_corpus, const AnnotatedCorpus& dev_corpus,
                     const EmbeddingTable& embeddings, const TaggerConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (train_corpus.sentences.empty() || dev_corpus.sentences.empty()) {
    throw DataError("training and development corpora must be non-empty");
  }
  TaggerModel model = init_model(config, sorted_tag_set(train_corpus), CharAlphabet::from_corpus(train_corpus),
                                 embeddings.dimension());
  const auto train_data = encode_corpus(train_corpus, model);
  encode_corpus(dev_corpus, model);  // rejects dev tags unseen in training

  TrainingResult result;
  result.model = model;
  AdamState adam(model.params);
  TaggerParameters grad = model.params.zeros_like();
  double best_f1 = -1.0;
  std::size_t since_best = 0;
  const auto t0 = std::chrono::steady_clock::now();

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Rng rng(derive_seed(config.seed, 0xE90C, epoch));
    const auto batches = make_batches(train_data, config.batch_size, rng);
    double loss_sum = 0.0;
    std::vector<const TrainingExample*> batch;
    std::vector<std::uint64_t> seeds;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      batch.clear();
      seeds.clear();
      for (std::size_t idx : batches[b]) {
        batch.push_back(&train_data[idx]);
        seeds.push_back(derive_seed(config.seed, epoch, idx));
      }
      grad.for_each([](std::string_view, Matrix& g) { g.fill(0.0); });
      loss_sum += objective_gradient(model, embeddings, batch, seeds, grad);
      clip_gradient(grad, config.grad_clip);
      adam_step(model.params, grad, adam, config);
    }
    const F1Report dev = evaluate_model(model, embeddings, dev_corpus);
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = loss_sum / static_cast<double>(batches.size());
    entry.dev_precision = dev.micro.precision;
    entry.dev_recall = dev.micro.recall;
    entry.dev_f1 = dev.micro.f1;
    entry.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);

    if (entry.dev_f1 > best_f1) {
      best_f1 = entry.dev_f1;
      result.best_epoch = epoch;
      result.model.params = model.params;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      result.early_stopped = true;
      break;
    }
  }
  return result;
}

}  // namespace embeval::tagger
