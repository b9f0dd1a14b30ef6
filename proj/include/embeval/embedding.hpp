#pragma once

// Static word-embedding tables: word2vec text/binary I/O, vocabulary
// restriction, cosine similarity and exact k-nearest-neighbour search.

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "embeval/linalg.hpp"

namespace embeval {

// Vocabulary plus one dense row per word. Construction validates the
// invariants (unique words, common dimension >= 1, finite values), so every
// live table is well-formed. Vectors are held as doubles whatever the source.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::string name, std::vector<std::string> vocab, Matrix vectors);

  const std::string& name() const noexcept { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }
  const std::vector<std::string>& vocab() const noexcept { return vocab_; }
  const Matrix& vectors() const noexcept { return vectors_; }
  std::size_t size() const noexcept { return vocab_.size(); }
  std::size_t dimension() const noexcept { return vectors_.cols(); }

  std::optional<std::size_t> index_of(std::string_view word) const;
  bool contains(std::string_view word) const { return index_of(word).has_value(); }
  std::span<const double> vector(std::size_t i) const { return vectors_.row(i); }
  // Throws LookupError for unknown words.
  std::span<const double> vector(std::string_view word) const;

  bool operator==(const EmbeddingTable& other) const {
    return name_ == other.name_ && vocab_ == other.vocab_ && vectors_ == other.vectors_;
  }

 private:
  std::string name_;
  std::vector<std::string> vocab_;
  Matrix vectors_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

EmbeddingTable read_w2v_text(std::istream& in, std::string name = {});
EmbeddingTable read_w2v_binary(std::istream& in, std::string name = {});
// Text output uses the shortest decimal that round-trips each double.
void write_w2v_text(std::ostream& out, const EmbeddingTable& table);
// Binary output narrows to little-endian float32 and ends each record with '\n'.
void write_w2v_binary(std::ostream& out, const EmbeddingTable& table);

enum class EmbeddingFormat { Auto, Text, Binary };

// Auto picks binary for a ".bin" extension and text otherwise. The table is
// named after the file stem.
EmbeddingTable read_embeddings_file(const std::string& path,
                                    EmbeddingFormat format = EmbeddingFormat::Auto);
void write_embeddings_file(const std::string& path, const EmbeddingTable& table,
                           EmbeddingFormat format = EmbeddingFormat::Text);

struct RestrictResult {
  EmbeddingTable table;
  std::vector<std::string> missing;  // requested words absent from the table, sorted
};

// Keeps rows whose word is in `vocab`, in the table's original order.
RestrictResult restrict(const EmbeddingTable& table, const std::set<std::string>& vocab);

double cosine(std::span<const double> u, std::span<const double> v);

struct Neighbor {
  std::string word;
  double score = 0.0;
  bool operator==(const Neighbor&) const = default;
};

struct NeighborList {
  std::string query;
  std::vector<Neighbor> neighbors;  // score non-increasing, ties by word
  bool operator==(const NeighborList&) const = default;
};

// Exact scan. Returns min(k, |vocab| - 1) neighbours, query excluded.
NeighborList top_k(const EmbeddingTable& table, std::string_view query, std::size_t k);

}  // namespace embeval
