#include "embeval/tagger/network.hpp"

#include <cmath>
#include <limits>

#include "embeval/error.hpp"
#include "embeval/random.hpp"
#include "embeval/simd/kernels.hpp"
#include "embeval/tagger/crf.hpp"
#include "embeval/text.hpp"

namespace embeval::tagger {

std::optional<std::size_t> find_word_row(const EmbeddingTable& table, std::string_view word) {
  if (auto i = table.index_of(word)) return i;
  return table.index_of(text::lowercase(word));
}

void encode_chars(std::string_view word, const TaggerModel& model, CharEncodingTrace& trace) {
  const auto& p = model.params;
  const auto chars = text::decode_utf8(word);
  if (chars.empty()) throw ArgumentError("encode_chars: empty word");
  const std::size_t hidden = model.config.char_hidden;
  trace.char_ids.resize(chars.size());
  trace.inputs.reset(chars.size(), p.char_embeddings.cols());
  for (std::size_t i = 0; i < chars.size(); ++i) {
    trace.char_ids[i] = model.alphabet.index(chars[i]);
    const auto row = p.char_embeddings.row(trace.char_ids[i]);
    std::copy(row.begin(), row.end(), trace.inputs.row(i).begin());
  }
  gru_run(p.char_forward, trace.inputs, false, trace.forward);
  gru_run(p.char_backward, trace.inputs, true, trace.backward);
  trace.output.assign(2 * hidden, 0.0);
  const auto last = trace.forward.states.row(chars.size() - 1);
  const auto first = trace.backward.states.row(0);
  std::copy(last.begin(), last.end(), trace.output.begin());
  std::copy(first.begin(), first.end(), trace.output.begin() + static_cast<std::ptrdiff_t>(hidden));
}

void backprop_chars(const CharEncodingTrace& trace, std::span<const double> d_output, const TaggerModel& model,
                    TaggerParameters& grad) {
  const auto& p = model.params;
  const std::size_t hidden = model.config.char_hidden;
  const std::size_t steps = trace.inputs.rows();
  Matrix d_fwd(steps, hidden), d_bwd(steps, hidden);
  std::copy(d_output.begin(), d_output.begin() + static_cast<std::ptrdiff_t>(hidden), d_fwd.row(steps - 1).begin());
  std::copy(d_output.begin() + static_cast<std::ptrdiff_t>(hidden), d_output.end(), d_bwd.row(0).begin());
  Matrix d_inputs(steps, trace.inputs.cols());
  gru_backprop(p.char_forward, trace.inputs, false, trace.forward, d_fwd, grad.char_forward, d_inputs);
  gru_backprop(p.char_backward, trace.inputs, true, trace.backward, d_bwd, grad.char_backward, d_inputs);
  for (std::size_t i = 0; i < steps; ++i) {
    simd::axpy(1.0, d_inputs.row(i), grad.char_embeddings.row(trace.char_ids[i]));
  }
}

Vector encode_word_chars(std::string_view word, const TaggerModel& model) {
  CharEncodingTrace trace;
  encode_chars(word, model, trace);
  return trace.output;
}

namespace {

struct SentenceTrace {
  Matrix inputs;     // L x (word_dim + 2 * char_hidden)
  Matrix char_mask;  // L x 2 * char_hidden, scaled keep-mask; empty without dropout
  GruTrace forward, backward;
  Matrix outputs;    // L x 2 * token_hidden, after dropout
  Matrix out_mask;
  Matrix emissions;
};

void draw_mask(Matrix& mask, std::size_t rows, std::size_t cols, double rate, Rng& rng) {
  mask.reset(rows, cols);
  const double keep = 1.0 / (1.0 - rate);
  for (double& m : mask.flat()) m = rng.uniform() < rate ? 0.0 : keep;
}

void check_compatible(const TaggerModel& model, const EmbeddingTable& embeddings) {
  if (embeddings.dimension() != model.word_dim) {
    throw ArgumentError("tagger expects " + std::to_string(model.word_dim) + "-dimensional word vectors, table '" +
                        embeddings.name() + "' has " + std::to_string(embeddings.dimension()));
  }
}

void sentence_forward(const TaggerModel& model, const EmbeddingTable& embeddings,
                      const std::vector<std::string>& words, std::span<const Vector* const> char_encodings,
                      Rng* rng, SentenceTrace& tr) {
  const auto& cfg = model.config;
  const auto& p = model.params;
  const std::size_t len = words.size();
  const std::size_t word_dim = model.word_dim;
  const std::size_t char_out = 2 * cfg.char_hidden;
  const std::size_t token_out = 2 * cfg.token_hidden;
  if (len == 0) throw ArgumentError("tagger: empty sentence");

  tr.char_mask.reset(0, 0);
  tr.out_mask.reset(0, 0);
  if (rng && cfg.char_dropout > 0.0) draw_mask(tr.char_mask, len, char_out, cfg.char_dropout, *rng);
  if (rng && cfg.token_dropout > 0.0) draw_mask(tr.out_mask, len, token_out, cfg.token_dropout, *rng);

  tr.inputs.reset(len, word_dim + char_out);
  for (std::size_t t = 0; t < len; ++t) {
    auto row = tr.inputs.row(t);
    if (auto w = find_word_row(embeddings, words[t])) {
      const auto v = embeddings.vector(*w);
      std::copy(v.begin(), v.end(), row.begin());
    }
    const Vector& enc = *char_encodings[t];
    for (std::size_t c = 0; c < char_out; ++c) {
      row[word_dim + c] = tr.char_mask.empty() ? enc[c] : enc[c] * tr.char_mask(t, c);
    }
  }
  gru_run(p.token_forward, tr.inputs, false, tr.forward);
  gru_run(p.token_backward, tr.inputs, true, tr.backward);
  tr.outputs.reset(len, token_out);
  for (std::size_t t = 0; t < len; ++t) {
    auto row = tr.outputs.row(t);
    const auto f = tr.forward.states.row(t);
    const auto b = tr.backward.states.row(t);
    std::copy(f.begin(), f.end(), row.begin());
    std::copy(b.begin(), b.end(), row.begin() + static_cast<std::ptrdiff_t>(cfg.token_hidden));
    if (!tr.out_mask.empty()) {
      for (std::size_t c = 0; c < token_out; ++c) row[c] *= tr.out_mask(t, c);
    }
  }
  matmul_nt(tr.outputs, p.emission, tr.emissions);
  for (std::size_t t = 0; t < len; ++t) simd::axpy(1.0, p.emission_bias.row(0), tr.emissions.row(t));
}

double softmax_loss_gradient(const Matrix& emissions, std::span<const std::size_t> gold, double scale,
                             Matrix* d_emissions) {
  const std::size_t len = emissions.rows(), k = emissions.cols();
  if (d_emissions) d_emissions->reset(len, k);
  double loss = 0.0;
  for (std::size_t t = 0; t < len; ++t) {
    const auto row = emissions.row(t);
    double m = -std::numeric_limits<double>::infinity();
    for (double v : row) m = std::max(m, v);
    double s = 0.0;
    for (double v : row) s += std::exp(v - m);
    const double log_z = m + std::log(s);
    loss += log_z - row[gold[t]];
    if (d_emissions) {
      for (std::size_t c = 0; c < k; ++c) (*d_emissions)(t, c) = scale * std::exp(row[c] - log_z);
      (*d_emissions)(t, gold[t]) -= scale;
    }
  }
  return loss;
}

// Backward through projection, dropout and token BiGRU. Adds dL/d(char
// encoding) of each token into d_chars rows.
void sentence_backward(const TaggerModel& model, const SentenceTrace& tr, const Matrix& d_emissions,
                       TaggerParameters& grad, Matrix& d_chars) {
  const auto& cfg = model.config;
  const auto& p = model.params;
  const std::size_t len = tr.inputs.rows();
  const std::size_t hidden = cfg.token_hidden;
  matmul_tn_acc(d_emissions, tr.outputs, grad.emission);
  for (std::size_t t = 0; t < len; ++t) simd::axpy(1.0, d_emissions.row(t), grad.emission_bias.row(0));
  Matrix d_out(len, 2 * hidden);
  matmul_nn_acc(d_emissions, p.emission, d_out);
  if (!tr.out_mask.empty()) {
    for (std::size_t i = 0; i < d_out.size(); ++i) d_out.flat()[i] *= tr.out_mask.flat()[i];
  }
  Matrix d_fwd(len, hidden), d_bwd(len, hidden);
  for (std::size_t t = 0; t < len; ++t) {
    const auto row = d_out.row(t);
    std::copy(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(hidden), d_fwd.row(t).begin());
    std::copy(row.begin() + static_cast<std::ptrdiff_t>(hidden), row.end(), d_bwd.row(t).begin());
  }
  Matrix d_inputs(len, tr.inputs.cols());
  gru_backprop(p.token_forward, tr.inputs, false, tr.forward, d_fwd, grad.token_forward, d_inputs);
  gru_backprop(p.token_backward, tr.inputs, true, tr.backward, d_bwd, grad.token_backward, d_inputs);
  const std::size_t char_out = 2 * cfg.char_hidden;
  d_chars.reset(len, char_out);
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t c = 0; c < char_out; ++c) {
      const double g = d_inputs(t, model.word_dim + c);
      d_chars(t, c) = tr.char_mask.empty() ? g : g * tr.char_mask(t, c);
    }
  }
}

}  // namespace

Matrix forward_scores(const std::vector<std::string>& words, const EmbeddingTable& embeddings,
                      const TaggerModel& model, bool train_mode, std::uint64_t dropout_seed) {
  check_compatible(model, embeddings);
  std::vector<Vector> encodings;
  encodings.reserve(words.size());
  for (const auto& w : words) encodings.push_back(encode_word_chars(w, model));
  std::vector<const Vector*> ptrs;
  for (const auto& e : encodings) ptrs.push_back(&e);
  Rng rng(dropout_seed);
  SentenceTrace tr;
  sentence_forward(model, embeddings, words, ptrs, train_mode ? &rng : nullptr, tr);
  return tr.emissions;
}

double sentence_loss(const Matrix& emissions, std::span<const std::size_t> gold, const TaggerModel& model) {
  if (gold.size() != emissions.rows()) throw ArgumentError("sentence_loss: gold length mismatch");
  if (model.config.use_crf) return crf_log_likelihood(emissions, gold, model.params.transitions);
  return softmax_loss_gradient(emissions, gold, 1.0, nullptr);
}

double batch_loss_gradient(const TaggerModel& model, const EmbeddingTable& embeddings,
                           std::span<const TrainingExample* const> batch, std::span<const std::uint64_t> dropout_seeds,
                           double scale, TaggerParameters& grad) {
  check_compatible(model, embeddings);
  const bool train_mode = !dropout_seeds.empty();
  if (train_mode && dropout_seeds.size() != batch.size()) {
    throw ArgumentError("batch_loss_gradient: need one dropout seed per sentence");
  }
  // Distinct words of the batch, each encoded once.
  std::map<std::string_view, std::size_t> slots;
  for (const auto* ex : batch) {
    for (const auto& w : ex->words) slots.try_emplace(w, slots.size());
  }
  std::vector<CharEncodingTrace> char_traces(slots.size());
  for (const auto& [word, slot] : slots) encode_chars(word, model, char_traces[slot]);
  Matrix d_char_enc(slots.size(), 2 * model.config.char_hidden);

  double total = 0.0;
  SentenceTrace tr;
  Matrix d_emissions, d_chars;
  std::vector<const Vector*> encodings;
  std::vector<std::size_t> token_slots;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const TrainingExample& ex = *batch[b];
    if (ex.tags.size() != ex.words.size()) throw ArgumentError("training example: tag/word count mismatch");
    encodings.clear();
    token_slots.clear();
    for (const auto& w : ex.words) {
      token_slots.push_back(slots.at(w));
      encodings.push_back(&char_traces[token_slots.back()].output);
    }
    std::optional<Rng> rng;
    if (train_mode) rng.emplace(dropout_seeds[b]);
    sentence_forward(model, embeddings, ex.words, encodings, rng ? &*rng : nullptr, tr);
    double loss = 0.0;
    if (model.config.use_crf) {
      loss = crf_loss_gradient(tr.emissions, ex.tags, model.params.transitions, scale, d_emissions, grad.transitions);
    } else {
      loss = softmax_loss_gradient(tr.emissions, ex.tags, scale, &d_emissions);
    }
    total += scale * loss;
    sentence_backward(model, tr, d_emissions, grad, d_chars);
    for (std::size_t t = 0; t < token_slots.size(); ++t) {
      simd::axpy(1.0, d_chars.row(t), d_char_enc.row(token_slots[t]));
    }
  }
  for (std::size_t s = 0; s < char_traces.size(); ++s) backprop_chars(char_traces[s], d_char_enc.row(s), model, grad);
  return total;
}

std::vector<std::size_t> decode(const Matrix& emissions, const TaggerModel& model) {
  if (model.config.use_crf) return viterbi_decode(emissions, model.params.transitions);
  std::vector<std::size_t> out(emissions.rows());
  for (std::size_t t = 0; t < emissions.rows(); ++t) {
    const auto row = emissions.row(t);
    std::size_t arg = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c] > row[arg]) arg = c;
    }
    out[t] = arg;
  }
  return out;
}

Predictor::Predictor(const TaggerModel& model, const EmbeddingTable& embeddings)
    : model_(model), embeddings_(embeddings) {
  check_compatible(model, embeddings);
}

Matrix Predictor::scores(const std::vector<std::string>& words) {
  std::vector<const Vector*> encodings;
  for (const auto& w : words) {
    auto it = char_cache_.find(w);
    if (it == char_cache_.end()) it = char_cache_.emplace(w, encode_word_chars(w, model_)).first;
    encodings.push_back(&it->second);
  }
  SentenceTrace tr;
  sentence_forward(model_, embeddings_, words, encodings, nullptr, tr);
  return tr.emissions;
}

std::vector<std::string> Predictor::predict(const std::vector<std::string>& words) {
  std::vector<std::string> out;
  for (std::size_t i : decode(scores(words), model_)) out.push_back(model_.tags[i]);
  return out;
}

}  // namespace embeval::tagger
