#pragma once

// Shared test utilities: temporary directories, random data generators and a
// small synthetic NER task.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "embeval/corpus.hpp"
#include "embeval/embedding.hpp"
#include "embeval/random.hpp"

namespace testing {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("embeval_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string random_word(embeval::Rng& rng, std::size_t min_len = 1, std::size_t max_len = 8) {
  static const std::string letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-";
  const std::size_t len = min_len + rng.below(max_len - min_len + 1);
  std::string w;
  for (std::size_t i = 0; i < len; ++i) w += letters[rng.below(letters.size())];
  return w;
}

// Unique words, Gaussian vectors.
inline embeval::EmbeddingTable random_table(embeval::Rng& rng, std::size_t n, std::size_t dim,
                                            const std::string& name = "random") {
  std::vector<std::string> vocab;
  while (vocab.size() < n) {
    auto w = random_word(rng, 1, 10) + std::to_string(vocab.size());
    vocab.push_back(w);
  }
  embeval::Matrix m(n, dim);
  for (double& v : m.flat()) v = rng.normal();
  return embeval::EmbeddingTable(name, std::move(vocab), std::move(m));
}

inline embeval::Matrix random_matrix(embeval::Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
  embeval::Matrix m(rows, cols);
  for (double& v : m.flat()) v = scale * rng.normal();
  return m;
}

// Random BIO-consistent corpus over a few entity types.
inline embeval::AnnotatedCorpus random_corpus(embeval::Rng& rng, std::size_t sentences,
                                              const std::string& name = "random") {
  static const std::vector<std::string> types = {"CHEM", "DRUG", "GENE"};
  embeval::AnnotatedCorpus c;
  c.name = name;
  for (std::size_t s = 0; s < sentences; ++s) {
    embeval::Sentence sent;
    const std::size_t len = 1 + rng.below(12);
    std::string prev = "O";
    for (std::size_t t = 0; t < len; ++t) {
      std::string tag;
      const auto r = rng.below(4);
      if (r == 0 || r == 1) {
        tag = "O";
      } else if (r == 2 || prev == "O") {
        tag = "B-" + types[rng.below(types.size())];
      } else {
        tag = "I-" + std::string(embeval::tag_type(prev));
      }
      sent.tokens.push_back({random_word(rng), tag});
      prev = tag;
    }
    c.sentences.push_back(std::move(sent));
  }
  return c;
}

// Synthetic NER task: entity names from a 50-entry gazetteer with suffix
// regularities, placed into templated carrier sentences. Carrier words get
// random vectors; entity words get vectors clustered around a shared centre.
struct SyntheticTask {
  embeval::AnnotatedCorpus train, dev, test;
  embeval::EmbeddingTable embeddings;
  std::vector<std::string> gazetteer;
};

inline SyntheticTask make_synthetic_task(std::uint64_t seed, std::size_t n_train = 500, std::size_t n_dev = 100,
                                         std::size_t n_test = 100, std::size_t dim = 50) {
  embeval::Rng rng(seed);
  static const std::vector<std::string> onsets = {"b", "c", "d", "f", "g", "l", "m", "n", "p", "pr",
                                                  "r", "s", "t", "tr", "v", "x", "z", "ch", "st", "br"};
  static const std::vector<std::string> vowels = {"a", "e", "i", "o", "u", "y"};
  static const std::vector<std::string> suffixes = {"ol", "ine", "ate", "ide", "one", "amine", "azole", "profen"};

  SyntheticTask task;
  std::set<std::string> names;
  while (names.size() < 50) {
    std::string stem;
    const auto syllables = 2 + rng.below(2);
    for (std::size_t i = 0; i < syllables; ++i) stem += onsets[rng.below(onsets.size())] + vowels[rng.below(6)];
    names.insert(stem + suffixes[rng.below(suffixes.size())]);
  }
  task.gazetteer.assign(names.begin(), names.end());
  rng.shuffle(std::span<std::string>(task.gazetteer));

  // Some entities span two tokens: a salt prefix followed by a name.
  static const std::vector<std::string> salts = {"sodium", "potassium", "calcium"};
  static const std::vector<std::string> templates = {
      "The solution of {} was stirred for 2 hours .",
      "A mixture of {} and {} was heated to reflux .",
      "{} was added dropwise to the reaction vessel .",
      "The patient received 200 mg of {} daily .",
      "Crystals of {} were collected by filtration .",
      "We report that {} inhibits the enzyme in vitro .",
      "After cooling , {} precipitated from the solvent .",
      "The compound was treated with {} under nitrogen .",
      "Yield of {} was 85 % after purification .",
      "Both {} and {} showed activity in the assay .",
      "The residue was dissolved in water and washed with brine .",
      "The filtrate was concentrated under reduced pressure .",
  };

  auto make_sentence = [&]() {
    embeval::Sentence s;
    const auto& tpl = templates[rng.below(templates.size())];
    std::istringstream words(tpl);
    std::string w;
    while (words >> w) {
      if (w != "{}") {
        s.tokens.push_back({w, "O"});
        continue;
      }
      if (rng.below(4) == 0) {
        s.tokens.push_back({salts[rng.below(salts.size())], "B-CHEM"});
        s.tokens.push_back({task.gazetteer[rng.below(50)], "I-CHEM"});
      } else {
        s.tokens.push_back({task.gazetteer[rng.below(50)], "B-CHEM"});
      }
    }
    return s;
  };
  auto make_corpus = [&](std::size_t n, const std::string& name) {
    embeval::AnnotatedCorpus c;
    c.name = name;
    for (std::size_t i = 0; i < n; ++i) c.sentences.push_back(make_sentence());
    return c;
  };
  task.train = make_corpus(n_train, "train");
  task.dev = make_corpus(n_dev, "dev");
  task.test = make_corpus(n_test, "test");

  std::set<std::string> carrier;
  for (const auto& t : templates) {
    std::istringstream words(t);
    std::string w;
    while (words >> w) {
      if (w != "{}") carrier.insert(w);
    }
  }
  for (const auto& s : salts) carrier.insert(s);
  std::vector<double> centre(dim);
  for (double& v : centre) v = rng.normal();
  std::vector<std::string> vocab;
  embeval::Matrix vectors;
  for (const auto& w : carrier) {
    vocab.push_back(w);
    std::vector<double> v(dim);
    for (double& x : v) x = rng.normal();
    vectors.append_row(v);
  }
  for (const auto& w : task.gazetteer) {
    vocab.push_back(w);
    std::vector<double> v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = centre[i] + 0.3 * rng.normal();
    vectors.append_row(v);
  }
  task.embeddings = embeval::EmbeddingTable("synthetic", std::move(vocab), std::move(vectors));
  return task;
}

}  // namespace testing
