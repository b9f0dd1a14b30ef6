#include "embeval/tagger/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>

#include "embeval/error.hpp"

namespace embeval::tagger {

namespace {

constexpr char kMagic[8] = {'E', 'M', 'B', 'V', 'T', 'A', 'G', '\0'};
constexpr std::uint64_t kMaxDim = std::uint64_t{1} << 24;
constexpr std::uint64_t kMaxTags = 1u << 16;
constexpr std::uint64_t kMaxString = 1u << 16;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void raw(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    raw(b, 8);
  }
  void u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    raw(b, 4);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }
  void matrix(const Matrix& m) {
    u64(m.rows());
    u64(m.cols());
    for (double v : m.flat()) f64(v);
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  void raw(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw DataError("checkpoint: truncated input");
  }
  std::uint64_t u64() {
    unsigned char b[8];
    raw(b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[i]} << (8 * i);
    return v;
  }
  std::uint32_t u32() {
    unsigned char b[4];
    raw(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{b[i]} << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  // Bytes left in a seekable stream; nullopt otherwise.
  std::optional<std::uint64_t> remaining() {
    const auto pos = in_.tellg();
    if (pos < 0) return std::nullopt;
    in_.seekg(0, std::ios::end);
    const auto end = in_.tellg();
    in_.seekg(pos);
    if (end < pos || !in_) {
      in_.clear();
      return std::nullopt;
    }
    return static_cast<std::uint64_t>(end - pos);
  }
  std::uint64_t bounded(std::uint64_t limit, const char* what) {
    const std::uint64_t v = u64();
    if (v > limit) throw DataError(std::string("checkpoint: implausible ") + what);
    return v;
  }
  std::string str() {
    const auto n = bounded(kMaxString, "string length");
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }
  void matrix(Matrix& m, std::string_view name) {
    const auto rows = u64();
    const auto cols = u64();
    if (rows != m.rows() || cols != m.cols()) {
      throw DataError("checkpoint: parameter '" + std::string(name) + "' has shape " + std::to_string(rows) + "x" +
                      std::to_string(cols) + ", expected " + std::to_string(m.rows()) + "x" +
                      std::to_string(m.cols()));
    }
    for (double& v : m.flat()) {
      v = f64();
      if (!std::isfinite(v)) throw DataError("checkpoint: non-finite value in '" + std::string(name) + "'");
    }
  }

 private:
  std::istream& in_;
};

}  // namespace

void save_model(std::ostream& out, const TaggerModel& model) {
  Writer w(out);
  w.raw(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  const auto& c = model.config;
  w.u64(c.char_embedding_dim);
  w.u64(c.char_hidden);
  w.u64(c.token_hidden);
  w.f64(c.char_dropout);
  w.f64(c.token_dropout);
  w.u64(c.batch_size);
  w.u64(c.max_epochs);
  w.u64(c.patience);
  w.f64(c.learning_rate);
  w.f64(c.l2_strength);
  w.f64(c.adam_beta1);
  w.f64(c.adam_beta2);
  w.f64(c.adam_epsilon);
  w.f64(c.grad_clip);
  w.u64(c.use_crf ? 1 : 0);
  w.u64(c.seed);
  w.u64(model.word_dim);
  w.u64(model.tags.size());
  for (const auto& t : model.tags) w.str(t);
  const auto& chars = model.alphabet.chars();
  w.u64(chars.size());
  for (char32_t ch : chars) w.u32(static_cast<std::uint32_t>(ch));
  model.params.for_each([&](std::string_view, const Matrix& m) { w.matrix(m); });
  if (!out) throw IoError("checkpoint: write failed");
}

void save_model_file(const std::string& path, const TaggerModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  save_model(out, model);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

TaggerModel load_model(std::istream& in) {
  Reader r(in);
  char magic[8];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw DataError("checkpoint: not a tagger model (bad magic)");
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint: unsupported format version " + std::to_string(version) + " (expected " +
                    std::to_string(kCheckpointVersion) + ")");
  }
  TaggerConfig c;
  c.char_embedding_dim = r.bounded(kMaxDim, "char_embedding_dim");
  c.char_hidden = r.bounded(kMaxDim, "char_hidden");
  c.token_hidden = r.bounded(kMaxDim, "token_hidden");
  c.char_dropout = r.f64();
  c.token_dropout = r.f64();
  c.batch_size = r.u64();
  c.max_epochs = r.u64();
  c.patience = r.u64();
  c.learning_rate = r.f64();
  c.l2_strength = r.f64();
  c.adam_beta1 = r.f64();
  c.adam_beta2 = r.f64();
  c.adam_epsilon = r.f64();
  c.grad_clip = r.f64();
  const auto crf = r.u64();
  if (crf > 1) throw DataError("checkpoint: bad use_crf flag");
  c.use_crf = crf == 1;
  c.seed = r.u64();
  try {
    c.validate();
  } catch (const ArgumentError& e) {
    throw DataError(std::string("checkpoint: invalid configuration: ") + e.what());
  }
  const auto word_dim = r.bounded(kMaxDim, "word dimension");
  if (word_dim == 0) throw DataError("checkpoint: word dimension is zero");
  const auto n_tags = r.bounded(kMaxTags, "tag count");
  if (n_tags == 0) throw DataError("checkpoint: empty tag set");
  std::vector<std::string> tags;
  for (std::uint64_t i = 0; i < n_tags; ++i) {
    tags.push_back(r.str());
    if (i > 0 && !(tags[i - 1] < tags[i])) throw DataError("checkpoint: tag set is not sorted and unique");
  }
  const auto n_chars = r.bounded(0x110000, "alphabet size");
  std::vector<char32_t> chars;
  for (std::uint64_t i = 0; i < n_chars; ++i) {
    const auto ch = r.u32();
    if (ch > 0x10FFFF) throw DataError("checkpoint: invalid code point in alphabet");
    if (!chars.empty() && !(chars.back() < ch)) throw DataError("checkpoint: alphabet is not sorted and unique");
    chars.push_back(static_cast<char32_t>(ch));
  }
  // Refuse headers whose implied parameter data exceeds what the stream holds
  // (or any sane size) before allocating anything.
  const double ced = static_cast<double>(c.char_embedding_dim);
  const double ch = static_cast<double>(c.char_hidden), th = static_cast<double>(c.token_hidden);
  const double k = static_cast<double>(n_tags);
  const double values = static_cast<double>(n_chars + 1) * ced + 2.0 * (3.0 * ch * (ced + ch + 1.0)) +
                        2.0 * (3.0 * th * (static_cast<double>(word_dim) + 2.0 * ch + th + 1.0)) +
                        k * 2.0 * th + k + (k + 2.0) * (k + 2.0);
  const double needed = 8.0 * values + 16.0 * 16.0;
  if (needed > 1e10) throw DataError("checkpoint: implausible parameter count");
  if (const auto available = r.remaining(); available && static_cast<double>(*available) < needed) {
    throw DataError("checkpoint: truncated input (header implies " + std::to_string(static_cast<std::uint64_t>(needed)) +
                    " bytes of parameters, " + std::to_string(*available) + " available)");
  }
  TaggerModel model = init_model(c, std::move(tags), CharAlphabet(chars), word_dim);
  model.params.for_each([&](std::string_view name, Matrix& m) { r.matrix(m, name); });
  return model;
}

TaggerModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return load_model(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace embeval::tagger
