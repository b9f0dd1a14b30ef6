#include "embeval/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "embeval/corpus.hpp"
#include "embeval/derive.hpp"
#include "embeval/embedding.hpp"
#include "embeval/error.hpp"
#include "embeval/intrinsic.hpp"
#include "embeval/random.hpp"
#include "embeval/report.hpp"
#include "embeval/text.hpp"
#include "embeval/tagger/checkpoint.hpp"
#include "embeval/tagger/train.hpp"
#include "embeval/tsne.hpp"

#ifndef EMBEVAL_VERSION
#define EMBEVAL_VERSION "0.0.0"
#endif

namespace embeval::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 initialisation failed");
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = in.gcount();
    if (got > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(got));
  }
  if (in.bad()) throw IoError("read error on '" + path + "'");
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::string hex;
  char pair[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(pair, sizeof pair, "%02x", md[i]);
    hex += pair;
  }
  return hex;
}

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::size_t tag_column = 0;  // 0: strict two-column CoNLL
};

// Tracks inputs and outputs of one run and writes the manifest.
class RunContext {
 public:
  RunContext(std::string subcommand, const Globals& globals, std::ostream& out, std::ostream& err)
      : subcommand_(std::move(subcommand)), globals_(globals), out_(out), err_(err) {
    std::error_code ec;
    fs::create_directories(globals_.out_dir, ec);
    if (ec || !fs::is_directory(globals_.out_dir)) {
      throw IoError("cannot create output directory '" + globals_.out_dir + "'");
    }
  }

  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }
  std::uint64_t seed() const { return globals_.seed; }

  // Hashes the file up front so a missing input fails before any work.
  const std::string& input(const std::string& path) {
    inputs_.push_back({{"path", path}, {"sha256", sha256_file(path)}});
    return path;
  }

  AnnotatedCorpus corpus(const std::string& path) {
    ConllOptions options;
    if (globals_.tag_column > 0) options.tag_column = globals_.tag_column;
    return read_conll_file(input(path), options);
  }

  std::string output_path(const std::string& name) const { return (fs::path(globals_.out_dir) / name).string(); }

  void write(const std::string& name, const std::string& content) {
    write_file(output_path(name), content);
    outputs_.push_back(name);
  }
  void record_output(const std::string& path) { outputs_.push_back(path); }

  void write_manifest(const json& config) {
    json m = {{"tool", "embeval"},
              {"version", EMBEVAL_VERSION},
              {"subcommand", subcommand_},
              {"seed", globals_.seed},
              {"tag_column", globals_.tag_column > 0 ? json(globals_.tag_column) : json(nullptr)},
              {"config", config},
              {"inputs", inputs_},
              {"outputs", outputs_}};
    write_file(output_path("manifest.json"), m.dump(2) + "\n");
  }

  static void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << content;
    f.flush();
    if (!f) throw IoError("write to '" + path + "' failed");
  }

 private:
  std::string subcommand_;
  Globals globals_;
  std::ostream& out_;
  std::ostream& err_;
  json inputs_ = json::array();
  std::vector<std::string> outputs_;
};

EmbeddingFormat parse_format(const std::string& s) {
  if (s == "text") return EmbeddingFormat::Text;
  if (s == "binary") return EmbeddingFormat::Binary;
  return EmbeddingFormat::Auto;
}

// Loads tables named after their file stems; repeated stems get a numeric suffix.
std::vector<EmbeddingTable> load_tables(RunContext& ctx, const std::vector<std::string>& paths,
                                        const std::string& format) {
  std::vector<EmbeddingTable> tables;
  std::set<std::string> names;
  for (const auto& p : paths) {
    auto t = read_embeddings_file(ctx.input(p), parse_format(format));
    std::string name = t.name();
    for (int i = 2; names.count(name) > 0; ++i) name = t.name() + "_" + std::to_string(i);
    names.insert(name);
    t.set_name(name);
    tables.push_back(std::move(t));
  }
  return tables;
}

std::string safe_file_name(const std::string& name) {
  std::string s = name;
  for (char& c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return s;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json prf_json(const tagger::Prf& p) {
  return {{"true_positives", p.true_positives},
          {"predicted", p.predicted},
          {"gold", p.gold},
          {"precision", p.precision},
          {"recall", p.recall},
          {"f1", p.f1}};
}

json f1_json(const tagger::F1Report& r) {
  json per = json::object();
  for (const auto& [type, prf] : r.per_type) per[type] = prf_json(prf);
  return {{"micro", prf_json(r.micro)}, {"per_type", per}};
}

json config_json(const tagger::TaggerConfig& c) {
  return {{"char_embedding_dim", c.char_embedding_dim},
          {"char_hidden", c.char_hidden},
          {"token_hidden", c.token_hidden},
          {"char_dropout", c.char_dropout},
          {"token_dropout", c.token_dropout},
          {"batch_size", c.batch_size},
          {"max_epochs", c.max_epochs},
          {"patience", c.patience},
          {"learning_rate", c.learning_rate},
          {"l2", c.l2_strength},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_epsilon", c.adam_epsilon},
          {"grad_clip", c.grad_clip},
          {"crf", c.use_crf},
          {"seed", c.seed}};
}

std::string join(const std::set<std::string>& items) {
  std::string s;
  for (const auto& i : items) s += (s.empty() ? "" : ", ") + i;
  return s.empty() ? "(none)" : s;
}

// Every tag of `other` must be known to the model's tag set.
void check_tags(const std::vector<std::string>& known, const std::string& known_label,
                const AnnotatedCorpus& other, const std::string& other_label) {
  const std::set<std::string> a(known.begin(), known.end());
  const auto tags = other.tag_set();
  const std::set<std::string> b(tags.begin(), tags.end());
  std::set<std::string> extra, absent;
  std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::inserter(extra, extra.end()));
  if (extra.empty()) return;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(absent, absent.end()));
  throw DataError("tag set mismatch between " + known_label + " and " + other_label + ": only in " + other_label +
                  ": " + join(extra) + "; only in " + known_label + ": " + join(absent));
}

void report_bio(const AnnotatedCorpus& corpus) {
  const auto v = validate_bio(corpus);
  if (!v.empty()) {
    warn(corpus.name + ": " + std::to_string(v.size()) + " BIO violation(s); first at sentence " +
         std::to_string(v.front().sentence + 1) + ", token " + std::to_string(v.front().token + 1) + " (" +
         v.front().tag + " after '" + v.front().previous + "')");
  }
}

// ---- overlap ----

struct OverlapSettings {
  std::vector<std::string> embeddings;
  std::string corpus;
  std::string stopwords;
  std::string format = "auto";
};

void cmd_overlap(const OverlapSettings& s, RunContext& ctx) {
  std::vector<NamedVocabulary> vocabs;
  for (const auto& t : load_tables(ctx, s.embeddings, s.format)) {
    NamedVocabulary v{t.name(), {}};
    for (const auto& w : t.vocab()) v.words.insert(text::lowercase(w));
    vocabs.push_back(std::move(v));
  }
  const auto corpus = ctx.corpus(s.corpus);
  std::set<std::string> stop;
  if (!s.stopwords.empty()) stop = read_stopwords_file(ctx.input(s.stopwords));
  vocabs.push_back({corpus.name, content_vocabulary(corpus, stop)});
  const auto report = overlap_report(vocabs);
  ctx.write("overlap.json", dump(to_json(report)));
  ctx.write("overlap.txt", to_text(report));
  ctx.write_manifest({{"embeddings", s.embeddings},
                      {"corpus", s.corpus},
                      {"stopwords", s.stopwords},
                      {"format", s.format}});
}

// ---- derive ----

struct DeriveSettings {
  std::string occurrences;
  std::string embedding;
  std::string format = "auto";
  std::size_t target_dim = 0;
  std::string corpus;
  std::string stopwords;
  bool no_center = false;
  std::string name;
  std::string output = "derived.txt";
};

void cmd_derive(const DeriveSettings& s, RunContext& ctx) {
  if (s.occurrences.empty() == s.embedding.empty()) {
    throw ArgumentError("derive needs exactly one of --occurrences or --embedding");
  }
  if (!s.stopwords.empty() && s.corpus.empty()) throw ArgumentError("--stopwords requires --corpus");
  if (s.embedding.size() && s.corpus.empty() && s.target_dim == 0) {
    throw ArgumentError("nothing to derive: give --target-dim and/or --corpus with --embedding");
  }
  std::optional<std::set<std::string>> filter;
  if (!s.corpus.empty()) {
    std::set<std::string> stop;
    const auto corpus = ctx.corpus(s.corpus);
    if (!s.stopwords.empty()) stop = read_stopwords_file(ctx.input(s.stopwords));
    filter = content_vocabulary(corpus, stop);
  }

  EmbeddingTable table;
  if (!s.occurrences.empty()) {
    table = average_occurrences_file(ctx.input(s.occurrences), filter).table;
  } else {
    table = read_embeddings_file(ctx.input(s.embedding), parse_format(s.format));
    if (filter) {
      auto r = restrict(table, *filter);
      if (!r.missing.empty()) {
        warn(std::to_string(r.missing.size()) + " corpus word(s) have no vector in '" + table.name() + "'");
      }
      table = std::move(r.table);
    }
  }
  if (s.target_dim > 0) {
    if (s.target_dim > table.dimension()) {
      throw ArgumentError("--target-dim " + std::to_string(s.target_dim) + " exceeds the input dimension " +
                          std::to_string(table.dimension()));
    }
    SvdOptions opts;
    opts.center = !s.no_center;
    table = apply_svd(fit_svd(table, s.target_dim, opts), table);
  }
  if (!s.name.empty()) table.set_name(s.name);

  const fs::path out_path = fs::path(s.output).is_absolute() ? fs::path(s.output) : fs::path(ctx.output_path(s.output));
  std::ostringstream buf;
  write_w2v_text(buf, table);
  RunContext::write_file(out_path.string(), buf.str());
  ctx.record_output(s.output);
  ctx.write_manifest({{"occurrences", s.occurrences},
                      {"embedding", s.embedding},
                      {"format", s.format},
                      {"target_dim", s.target_dim},
                      {"corpus", s.corpus},
                      {"stopwords", s.stopwords},
                      {"center", !s.no_center},
                      {"name", s.name},
                      {"output", s.output},
                      {"rows", table.size()},
                      {"dimension", table.dimension()}});
}

// ---- intrinsic / query ----

struct IntrinsicSettings {
  std::vector<std::string> embeddings;
  std::string format = "auto";
  std::string query = "ibuprofen";
  std::size_t k = 10;
  std::string dictionary;
  std::string fallback = "surface";
  bool no_tsne = false;
  std::size_t tsne_words = 100;
  double perplexity = 15.0;
  std::size_t tsne_iterations = 1000;
  double tsne_learning_rate = 100.0;
};

void run_tsne(const IntrinsicSettings& s, const std::vector<EmbeddingTable>& tables, RunContext& ctx) {
  auto shared = shared_vocabulary(tables);
  const std::size_t n = std::min(s.tsne_words, shared.size());
  if (n < 10) {
    warn("t-SNE skipped: only " + std::to_string(n) + " shared word(s) available, at least 10 needed");
    return;
  }
  Rng rng(derive_seed(ctx.seed(), 0x75E));
  rng.shuffle(std::span<std::string>(shared));
  const std::set<std::string> sample(shared.begin(), shared.begin() + static_cast<std::ptrdiff_t>(n));

  TsneOptions opts;
  opts.perplexity = s.perplexity;
  opts.iterations = s.tsne_iterations;
  opts.learning_rate = s.tsne_learning_rate;
  opts.seed = ctx.seed();
  const double max_perplexity = static_cast<double>(n - 1) / 3.0;
  if (opts.perplexity > max_perplexity) {
    warn("perplexity " + text::format_double(opts.perplexity) + " too large for " + std::to_string(n) +
         " points; using " + text::format_double(max_perplexity));
    opts.perplexity = max_perplexity;
  }
  for (const auto& t : tables) {
    const auto projection = tsne(restrict(t, sample).table, opts);
    const std::string stem = "tsne_" + safe_file_name(t.name());
    ctx.write(stem + ".tsv", projection_tsv(projection));
    ctx.write(stem + ".svg", projection_svg(projection, t.name()));
  }
}

void cmd_intrinsic(const IntrinsicSettings& s, RunContext& ctx) {
  if (s.embeddings.size() < 2) throw ArgumentError("intrinsic needs at least two --embedding files");
  const auto tables = load_tables(ctx, s.embeddings, s.format);
  NormalizationDictionary dict;
  if (!s.dictionary.empty()) dict = read_dictionary_file(ctx.input(s.dictionary));
  const auto policy = s.fallback == "drop" ? FallbackPolicy::Drop : FallbackPolicy::SurfaceFallback;

  const auto similarity = similarity_query_report(tables, s.query, s.k);
  ctx.write("similarity.json", dump(to_json(similarity)));
  ctx.write("similarity.txt", to_text(similarity));

  std::vector<NamedWordList> lists;
  for (const auto& e : similarity.lists) {
    NamedWordList l{e.table, {}};
    for (const auto& nb : e.list.neighbors) l.words.push_back(nb.word);
    lists.push_back(std::move(l));
  }
  if (lists.size() >= 2) {
    const auto agreement = agreement_matrix(lists, dict, policy);
    ctx.write("agreement.json", dump(to_json(agreement)));
    ctx.write("agreement.txt", to_text(agreement));
  } else {
    warn("agreement skipped: the query has neighbors in fewer than two tables");
  }

  const auto correlation = correlation_matrix(tables);
  ctx.write("correlation.json", dump(to_json(correlation)));
  ctx.write("correlation.txt", to_text(correlation));

  if (!s.no_tsne) run_tsne(s, tables, ctx);

  ctx.write_manifest({{"embeddings", s.embeddings},
                      {"format", s.format},
                      {"query", s.query},
                      {"k", s.k},
                      {"dictionary", s.dictionary},
                      {"fallback", s.fallback},
                      {"tsne", !s.no_tsne},
                      {"tsne_words", s.tsne_words},
                      {"perplexity", s.perplexity},
                      {"tsne_iterations", s.tsne_iterations},
                      {"tsne_learning_rate", s.tsne_learning_rate}});
}

struct QuerySettings {
  std::vector<std::string> embeddings;
  std::string format = "auto";
  std::string query;
  std::size_t k = 10;
};

void cmd_query(const QuerySettings& s, RunContext& ctx) {
  const auto tables = load_tables(ctx, s.embeddings, s.format);
  const auto report = similarity_query_report(tables, s.query, s.k);
  const auto txt = to_text(report);
  ctx.out() << txt;
  ctx.write("similarity.json", dump(to_json(report)));
  ctx.write("similarity.txt", txt);
  ctx.write_manifest({{"embeddings", s.embeddings}, {"format", s.format}, {"query", s.query}, {"k", s.k}});
}

// ---- train / eval ----

struct TrainSettings {
  std::string train;
  std::string dev;
  std::string test;
  std::string embedding;
  std::string format = "auto";
  tagger::TaggerConfig config;
  bool no_crf = false;
  bool log_timing = false;
};

void cmd_train(TrainSettings s, RunContext& ctx) {
  s.config.use_crf = !s.no_crf;
  s.config.seed = ctx.seed();
  s.config.validate();
  const auto train_corpus = ctx.corpus(s.train);
  const auto dev_corpus = ctx.corpus(s.dev);
  std::optional<AnnotatedCorpus> test_corpus;
  if (!s.test.empty()) test_corpus = ctx.corpus(s.test);
  const auto emb = read_embeddings_file(ctx.input(s.embedding), parse_format(s.format));
  for (const auto* c : {&train_corpus, &dev_corpus}) report_bio(*c);
  if (test_corpus) report_bio(*test_corpus);

  const auto train_tags = tagger::sorted_tag_set(train_corpus);
  check_tags(train_tags, "train", dev_corpus, "dev");
  if (test_corpus) check_tags(train_tags, "train", *test_corpus, "test");

  std::string log;
  auto& err = ctx.err();
  const auto result = tagger::train(train_corpus, dev_corpus, emb, s.config, [&](const tagger::EpochLog& e) {
    log += tagger::epoch_log_line(e, s.log_timing) + "\n";
    char line[160];
    std::snprintf(line, sizeof line, "epoch %zu  loss %.6f  dev P %.4f R %.4f F1 %.4f  (%.1fs)\n", e.epoch,
                  e.train_loss, e.dev_precision, e.dev_recall, e.dev_f1, e.elapsed_seconds);
    err << line << std::flush;
  });

  tagger::save_model_file(ctx.output_path("model.bin"), result.model);
  ctx.record_output("model.bin");
  ctx.write("train_log.jsonl", log);
  json metrics = {{"best_epoch", result.best_epoch},
                  {"epochs_run", result.log.size()},
                  {"early_stopped", result.early_stopped},
                  {"dev", f1_json(tagger::evaluate_model(result.model, emb, dev_corpus))}};
  if (test_corpus) metrics["test"] = f1_json(tagger::evaluate_model(result.model, emb, *test_corpus));
  ctx.write("metrics.json", dump(metrics));
  ctx.write_manifest({{"train", s.train},
                      {"dev", s.dev},
                      {"test", s.test},
                      {"embedding", s.embedding},
                      {"format", s.format},
                      {"tagger", config_json(s.config)},
                      {"log_timing", s.log_timing}});
}

struct EvalSettings {
  std::string model;
  std::string embedding;
  std::string test;
  std::string format = "auto";
};

void cmd_eval(const EvalSettings& s, RunContext& ctx) {
  const auto model = tagger::load_model_file(ctx.input(s.model));
  const auto emb = read_embeddings_file(ctx.input(s.embedding), parse_format(s.format));
  if (emb.dimension() != model.word_dim) {
    throw DataError("embedding dimension " + std::to_string(emb.dimension()) + " does not match the model's " +
                    std::to_string(model.word_dim));
  }
  const auto test_corpus = ctx.corpus(s.test);
  report_bio(test_corpus);
  check_tags(model.tags, "model", test_corpus, "test");

  const auto predicted = tagger::predict_corpus(model, emb, test_corpus);
  AnnotatedCorpus out_corpus = test_corpus;
  for (std::size_t i = 0; i < out_corpus.sentences.size(); ++i) {
    auto& tokens = out_corpus.sentences[i].tokens;
    for (std::size_t t = 0; t < tokens.size(); ++t) tokens[t].tag = predicted[i][t];
  }
  std::ostringstream conll;
  write_conll(conll, out_corpus);
  ctx.write("predictions.conll", conll.str());
  ctx.write("metrics.json", dump(json{{"test", f1_json(tagger::evaluate_f1(test_corpus, predicted))}}));
  ctx.write_manifest({{"model", s.model}, {"embedding", s.embedding}, {"test", s.test}, {"format", s.format}});
}

void add_format_option(CLI::App* sub, std::string& format) {
  sub->add_option("--format", format, "Embedding file format")
      ->check(CLI::IsMember({"auto", "text", "binary"}))
      ->capture_default_str();
}

int exit_code_for(const Error& e) {
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const ArgumentError*>(&e)) return kExitUsage;
  return kExitData;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Word-embedding evaluation workbench", "embeval"};
  app.set_version_flag("--version", EMBEVAL_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read options from a key = value file ([subcommand] sections)");

  Globals globals;
  app.add_option("--seed", globals.seed, "Seed for every random choice of the run")->capture_default_str();
  app.add_option("--out-dir", globals.out_dir, "Directory for reports and the manifest")->capture_default_str();
  app.add_option("--tag-column", globals.tag_column,
                 "0-based column holding the tag in multi-column CoNLL files (default: strict surface<TAB>tag)")
      ->check(CLI::PositiveNumber);

  OverlapSettings overlap;
  auto* c_overlap = app.add_subcommand("overlap", "Vocabulary overlap between embeddings and a corpus");
  c_overlap->add_option("-e,--embedding", overlap.embeddings, "Embedding file (repeatable)")->required();
  c_overlap->add_option("--corpus", overlap.corpus, "CoNLL corpus")->required();
  c_overlap->add_option("--stopwords", overlap.stopwords, "Stopword list, one word per line");
  add_format_option(c_overlap, overlap.format);

  DeriveSettings derive;
  auto* c_derive = app.add_subcommand("derive", "Average occurrence vectors and/or reduce dimension by SVD");
  c_derive->add_option("--occurrences", derive.occurrences, "Per-occurrence vectors (word<TAB>v1<TAB>...)");
  c_derive->add_option("-e,--embedding", derive.embedding, "Embedding file");
  c_derive->add_option("--target-dim", derive.target_dim, "SVD target dimension (0 keeps the input dimension)")
      ->capture_default_str();
  c_derive->add_option("--corpus", derive.corpus, "Restrict to the corpus content vocabulary");
  c_derive->add_option("--stopwords", derive.stopwords, "Stopwords excluded from the corpus vocabulary");
  c_derive->add_flag("--no-center", derive.no_center, "Do not mean-centre before SVD");
  c_derive->add_option("--name", derive.name, "Name of the derived table");
  c_derive->add_option("-o,--output", derive.output, "Output file (word2vec text), relative to --out-dir")
      ->capture_default_str();
  add_format_option(c_derive, derive.format);

  IntrinsicSettings intrinsic;
  auto* c_intrinsic = app.add_subcommand("intrinsic", "Similarity, agreement, correlation and t-SNE analyses");
  c_intrinsic->add_option("-e,--embedding", intrinsic.embeddings, "Embedding file (repeatable, at least two)")
      ->required();
  c_intrinsic->add_option("-q,--query", intrinsic.query, "Query word")->capture_default_str();
  c_intrinsic->add_option("-k", intrinsic.k, "Neighbors per list")->check(CLI::PositiveNumber)->capture_default_str();
  c_intrinsic->add_option("--dictionary", intrinsic.dictionary, "Normalization dictionary (term<TAB>identifier)");
  c_intrinsic->add_option("--fallback", intrinsic.fallback, "Unmatched terms: surface or drop")
      ->check(CLI::IsMember({"surface", "drop"}))
      ->capture_default_str();
  c_intrinsic->add_flag("--no-tsne", intrinsic.no_tsne, "Skip the t-SNE projections");
  c_intrinsic->add_option("--tsne-words", intrinsic.tsne_words, "Shared words sampled for t-SNE")
      ->capture_default_str();
  c_intrinsic->add_option("--perplexity", intrinsic.perplexity, "t-SNE perplexity")->capture_default_str();
  c_intrinsic->add_option("--tsne-iterations", intrinsic.tsne_iterations, "t-SNE iterations")->capture_default_str();
  c_intrinsic->add_option("--tsne-learning-rate", intrinsic.tsne_learning_rate, "t-SNE learning rate")
      ->capture_default_str();
  add_format_option(c_intrinsic, intrinsic.format);

  QuerySettings query;
  auto* c_query = app.add_subcommand("query", "Nearest neighbors of one word");
  c_query->add_option("-e,--embedding", query.embeddings, "Embedding file (repeatable)")->required();
  c_query->add_option("-q,--query", query.query, "Query word")->required();
  c_query->add_option("-k", query.k, "Neighbors per list")->check(CLI::PositiveNumber)->capture_default_str();
  add_format_option(c_query, query.format);

  TrainSettings train;
  auto& tc = train.config;
  auto* c_train = app.add_subcommand("train", "Train the GRU-CRF tagger");
  c_train->add_option("--train", train.train, "Training corpus (CoNLL)")->required();
  c_train->add_option("--dev", train.dev, "Development corpus for early stopping")->required();
  c_train->add_option("--test", train.test, "Optional test corpus scored after training");
  c_train->add_option("-e,--embedding", train.embedding, "Word embeddings")->required();
  c_train->add_option("--char-embedding-dim", tc.char_embedding_dim)->capture_default_str();
  c_train->add_option("--char-hidden", tc.char_hidden)->capture_default_str();
  c_train->add_option("--token-hidden", tc.token_hidden)->capture_default_str();
  c_train->add_option("--char-dropout", tc.char_dropout)->capture_default_str();
  c_train->add_option("--token-dropout", tc.token_dropout)->capture_default_str();
  c_train->add_option("--batch-size", tc.batch_size)->capture_default_str();
  c_train->add_option("--max-epochs", tc.max_epochs)->capture_default_str();
  c_train->add_option("--patience", tc.patience)->capture_default_str();
  c_train->add_option("--learning-rate", tc.learning_rate)->capture_default_str();
  c_train->add_option("--l2", tc.l2_strength)->capture_default_str();
  c_train->add_option("--grad-clip", tc.grad_clip)->capture_default_str();
  c_train->add_flag("--no-crf", train.no_crf, "Per-token softmax instead of the CRF layer");
  c_train->add_flag("--log-timing", train.log_timing, "Include wall-clock seconds in train_log.jsonl");
  add_format_option(c_train, train.format);

  EvalSettings eval;
  auto* c_eval = app.add_subcommand("eval", "Score a trained tagger on a corpus");
  c_eval->add_option("--model", eval.model, "Checkpoint written by train")->required();
  c_eval->add_option("-e,--embedding", eval.embedding, "Word embeddings used in training")->required();
  c_eval->add_option("--test", eval.test, "Corpus to score")->required();
  add_format_option(c_eval, eval.format);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto previous = set_warning_handler([&err](std::string_view m) { err << "warning: " << m << "\n"; });
  struct Restore {
    WarningHandler h;
    ~Restore() { set_warning_handler(std::move(h)); }
  } restore{std::move(previous)};

  try {
    if (c_overlap->parsed()) {
      RunContext ctx("overlap", globals, out, err);
      cmd_overlap(overlap, ctx);
    } else if (c_derive->parsed()) {
      RunContext ctx("derive", globals, out, err);
      cmd_derive(derive, ctx);
    } else if (c_intrinsic->parsed()) {
      RunContext ctx("intrinsic", globals, out, err);
      cmd_intrinsic(intrinsic, ctx);
    } else if (c_query->parsed()) {
      RunContext ctx("query", globals, out, err);
      cmd_query(query, ctx);
    } else if (c_train->parsed()) {
      RunContext ctx("train", globals, out, err);
      cmd_train(train, ctx);
    } else if (c_eval->parsed()) {
      RunContext ctx("eval", globals, out, err);
      cmd_eval(eval, ctx);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace embeval::cli
