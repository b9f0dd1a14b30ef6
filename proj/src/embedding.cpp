#include "embeval/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "embeval/error.hpp"
#include "embeval/simd/kernels.hpp"
#include "embeval/text.hpp"

namespace embeval {

namespace {

constexpr std::size_t kMaxWordBytes = 1 << 16;
constexpr std::size_t kMaxReserveRows = 1 << 20;

struct Header {
  std::size_t words = 0;
  std::size_t dimension = 0;
};

Header parse_header(std::string_view line) {
  const auto fields = text::split_ws(text::strip_cr(line));
  if (fields.size() != 2) throw ParseError("header must be '<vocab_size> <dimension>'", 1);
  const auto words = text::parse_uint(fields[0]);
  const auto dim = text::parse_uint(fields[1]);
  if (!words || !dim) throw ParseError("header must contain two non-negative integers", 1);
  if (*dim == 0) throw ParseError("dimension must be >= 1", 1);
  if (*words == 0) throw ParseError("vocabulary size must be >= 1", 1);
  // Guards against absurd headers overflowing rows * dim.
  if (*dim > (std::uint64_t{1} << 24) || *words > (std::uint64_t{1} << 40)) {
    throw ParseError("header sizes are implausibly large", 1);
  }
  return Header{static_cast<std::size_t>(*words), static_cast<std::size_t>(*dim)};
}

float load_le_float(const unsigned char* p) {
  std::uint32_t bits = 0;
  std::memcpy(&bits, p, 4);
  if constexpr (std::endian::native == std::endian::big) {
    bits = ((bits & 0xFF) << 24) | ((bits & 0xFF00) << 8) | ((bits >> 8) & 0xFF00) | (bits >> 24);
  }
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

void store_le_float(float f, unsigned char* p) {
  std::uint32_t bits = 0;
  std::memcpy(&bits, &f, 4);
  if constexpr (std::endian::native == std::endian::big) {
    bits = ((bits & 0xFF) << 24) | ((bits & 0xFF00) << 8) | ((bits >> 8) & 0xFF00) | (bits >> 24);
  }
  std::memcpy(p, &bits, 4);
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::string name, std::vector<std::string> vocab, Matrix vectors)
    : name_(std::move(name)), vocab_(std::move(vocab)), vectors_(std::move(vectors)) {
  if (vocab_.size() != vectors_.rows()) {
    throw ArgumentError("embedding table: " + std::to_string(vocab_.size()) + " words but " +
                        std::to_string(vectors_.rows()) + " vectors");
  }
  if (vectors_.cols() == 0) throw ArgumentError("embedding table: dimension must be >= 1");
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (!index_.emplace(vocab_[i], i).second) {
      throw DataError("duplicate word in embedding table: '" + vocab_[i] + "'");
    }
    for (double v : vectors_.row(i)) {
      if (!std::isfinite(v)) throw DataError("non-finite vector component for '" + vocab_[i] + "'");
    }
  }
}

std::optional<std::size_t> EmbeddingTable::index_of(std::string_view word) const {
  const auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const double> EmbeddingTable::vector(std::string_view word) const {
  const auto i = index_of(word);
  if (!i) throw LookupError("word not in embedding table '" + name_ + "': '" + std::string(word) + "'");
  return vectors_.row(*i);
}

EmbeddingTable read_w2v_text(std::istream& in, std::string name) {
  text::LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw ParseError("empty embedding file");
  const Header header = parse_header(line);

  std::vector<std::string> vocab;
  std::vector<double> values;
  vocab.reserve(std::min(header.words, kMaxReserveRows));
  std::map<std::string, std::size_t, std::less<>> seen;
  while (reader.next(line)) {
    const std::string_view view = text::strip_cr(line);
    if (text::is_blank(view)) continue;
    const std::size_t lineno = reader.line_number();
    if (vocab.size() == header.words) {
      throw ParseError("header declares " + std::to_string(header.words) +
                           " words but more data lines follow",
                       lineno);
    }
    const auto fields = text::split_ws(view);
    const std::string_view word = fields[0];
    if (auto bad = text::find_invalid_utf8(word)) {
      throw ParseError("invalid UTF-8 in word at byte " + std::to_string(*bad), lineno);
    }
    if (fields.size() != header.dimension + 1) {
      throw ParseError("word '" + std::string(word) + "' has " + std::to_string(fields.size() - 1) +
                           " components, expected " + std::to_string(header.dimension),
                       lineno);
    }
    if (!seen.emplace(std::string(word), vocab.size()).second) {
      throw ParseError("duplicate word '" + std::string(word) + "'", lineno);
    }
    for (std::size_t c = 0; c < header.dimension; ++c) {
      const auto v = text::parse_double(fields[c + 1]);
      if (!v || !std::isfinite(*v)) {
        throw ParseError("word '" + std::string(word) + "': component " + std::to_string(c + 1) +
                             " is not a finite number ('" + std::string(fields[c + 1]) + "')",
                         lineno);
      }
      values.push_back(*v);
    }
    vocab.emplace_back(word);
  }
  if (vocab.size() != header.words) {
    throw ParseError("header declares " + std::to_string(header.words) + " words but found " +
                     std::to_string(vocab.size()));
  }
  Matrix m(vocab.size(), header.dimension);
  std::copy(values.begin(), values.end(), m.data());
  return EmbeddingTable(std::move(name), std::move(vocab), std::move(m));
}

EmbeddingTable read_w2v_binary(std::istream& in, std::string name) {
  std::string header_line;
  if (!std::getline(in, header_line)) throw ParseError("empty embedding file");
  const Header header = parse_header(header_line);
  std::size_t offset = header_line.size() + 1;

  std::vector<std::string> vocab;
  std::vector<double> values;
  vocab.reserve(std::min(header.words, kMaxReserveRows));
  std::map<std::string, std::size_t, std::less<>> seen;
  std::vector<unsigned char> buf(4 * header.dimension);

  for (std::size_t w = 0; w < header.words; ++w) {
    std::string word;
    int ch = in.get();
    while (ch == '\n' || ch == '\r') {
      ++offset;
      ch = in.get();
    }
    const std::size_t word_offset = offset;
    while (ch != std::char_traits<char>::eof() && ch != ' ') {
      word.push_back(static_cast<char>(ch));
      if (word.size() > kMaxWordBytes) {
        throw ParseError("word at byte " + std::to_string(word_offset) + " exceeds " +
                         std::to_string(kMaxWordBytes) + " bytes (not a word2vec binary file?)");
      }
      ch = in.get();
    }
    offset += word.size();
    if (ch == std::char_traits<char>::eof()) {
      throw ParseError("truncated stream: expected " + std::to_string(header.words) +
                       " records, stream ended in record " + std::to_string(w + 1) + " at byte " +
                       std::to_string(offset));
    }
    ++offset;  // the space
    if (word.empty()) throw ParseError("empty word at byte " + std::to_string(word_offset));
    if (auto bad = text::find_invalid_utf8(word)) {
      throw ParseError("invalid UTF-8 in word at byte " + std::to_string(word_offset + *bad));
    }
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got != buf.size()) {
      throw ParseError("truncated stream: word '" + word + "' needs " + std::to_string(buf.size()) +
                       " bytes of vector data at byte " + std::to_string(offset) + ", only " +
                       std::to_string(got) + " available");
    }
    offset += got;
    for (std::size_t c = 0; c < header.dimension; ++c) {
      const float f = load_le_float(buf.data() + 4 * c);
      if (!std::isfinite(f)) {
        throw ParseError("word '" + word + "': component " + std::to_string(c + 1) + " is not finite");
      }
      values.push_back(static_cast<double>(f));
    }
    if (!seen.emplace(word, vocab.size()).second) throw ParseError("duplicate word '" + word + "'");
    vocab.push_back(std::move(word));
  }
  for (int ch = in.get(); ch != std::char_traits<char>::eof(); ch = in.get()) {
    if (ch != '\n' && ch != '\r' && ch != ' ') {
      throw ParseError("header declares " + std::to_string(header.words) +
                       " words but more data follows at byte " + std::to_string(offset));
    }
    ++offset;
  }
  Matrix m(vocab.size(), header.dimension);
  std::copy(values.begin(), values.end(), m.data());
  return EmbeddingTable(std::move(name), std::move(vocab), std::move(m));
}

void write_w2v_text(std::ostream& out, const EmbeddingTable& table) {
  out << table.size() << ' ' << table.dimension() << '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.vocab()[i];
    for (double v : table.vector(i)) out << ' ' << text::format_double(v);
    out << '\n';
  }
}

void write_w2v_binary(std::ostream& out, const EmbeddingTable& table) {
  out << table.size() << ' ' << table.dimension() << '\n';
  std::vector<unsigned char> buf(4 * table.dimension());
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.vocab()[i] << ' ';
    const auto row = table.vector(i);
    for (std::size_t c = 0; c < row.size(); ++c) {
      store_le_float(static_cast<float>(row[c]), buf.data() + 4 * c);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    out << '\n';
  }
}

EmbeddingTable read_embeddings_file(const std::string& path, EmbeddingFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding file: " + path);
  const std::filesystem::path p(path);
  if (format == EmbeddingFormat::Auto) {
    format = p.extension() == ".bin" ? EmbeddingFormat::Binary : EmbeddingFormat::Text;
  }
  try {
    return format == EmbeddingFormat::Binary ? read_w2v_binary(in, p.stem().string())
                                             : read_w2v_text(in, p.stem().string());
  } catch (const ParseError& e) {
    throw e.with_prefix(path);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_embeddings_file(const std::string& path, const EmbeddingTable& table,
                           EmbeddingFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write embedding file: " + path);
  if (format == EmbeddingFormat::Binary) {
    write_w2v_binary(out, table);
  } else {
    write_w2v_text(out, table);
  }
  if (!out) throw IoError("write failed: " + path);
}

RestrictResult restrict(const EmbeddingTable& table, const std::set<std::string>& vocab) {
  std::vector<std::string> words;
  Matrix rows;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (vocab.contains(table.vocab()[i])) {
      words.push_back(table.vocab()[i]);
      rows.append_row(table.vector(i));
    }
  }
  if (words.empty()) {
    throw DataError("restricting '" + table.name() + "' leaves no words (empty intersection)");
  }
  RestrictResult result;
  for (const auto& w : vocab) {
    if (!table.contains(w)) result.missing.push_back(w);
  }
  result.table = EmbeddingTable(table.name(), std::move(words), std::move(rows));
  return result;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ArgumentError("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                        std::to_string(v.size()) + ")");
  }
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0.0 || nv == 0.0) throw DomainError("cosine: zero-norm vector");
  return simd::dot(u, v) / (nu * nv);
}

NeighborList top_k(const EmbeddingTable& table, std::string_view query, std::size_t k) {
  if (k == 0) throw ArgumentError("top_k: k must be >= 1");
  const auto qi = table.index_of(query);
  if (!qi) {
    throw LookupError("query '" + std::string(query) + "' not in embedding table '" + table.name() + "'");
  }
  const auto q = table.vector(*qi);
  const double qn = norm(q);
  if (qn == 0.0) throw DomainError("top_k: query '" + std::string(query) + "' has a zero vector");

  struct Candidate {
    std::size_t index;
    double score;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(table.size());
  std::size_t zero_rows = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (i == *qi) continue;
    const auto row = table.vector(i);
    const double n = norm(row);
    if (n == 0.0) {
      ++zero_rows;
      continue;
    }
    candidates.push_back({i, simd::dot(q, row) / (qn * n)});
  }
  if (zero_rows > 0) {
    warn("top_k: skipped " + std::to_string(zero_rows) + " zero vector(s) in '" + table.name() + "'");
  }
  const auto& vocab = table.vocab();
  const auto better = [&](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return vocab[a.index] < vocab[b.index];
  };
  const std::size_t take = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                    candidates.end(), better);
  NeighborList out;
  out.query = std::string(query);
  for (std::size_t i = 0; i < take; ++i) {
    out.neighbors.push_back({vocab[candidates[i].index], candidates[i].score});
  }
  return out;
}

}  // namespace embeval
