#include "embeval/intrinsic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "embeval/error.hpp"
#include "embeval/simd/kernels.hpp"
#include "embeval/text.hpp"

namespace embeval {

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) {
    warn("jaccard of two empty sets is taken as 1.0");
    return 1.0;
  }
  std::size_t shared = 0;
  for (const auto& x : a) shared += b.contains(x) ? 1 : 0;
  const std::size_t unioned = a.size() + b.size() - shared;
  return static_cast<double>(shared) / static_cast<double>(unioned);
}

void NormalizationDictionary::add(std::string_view term, std::string identifier) {
  if (term.empty()) throw ArgumentError("normalization dictionary: empty term");
  if (identifier.empty()) {
    throw ArgumentError("normalization dictionary: empty identifier for '" + std::string(term) + "'");
  }
  if (!entries_.emplace(text::lowercase(term), std::move(identifier)).second) {
    throw DataError("normalization dictionary: duplicate term '" + std::string(term) + "'");
  }
}

std::optional<std::string> NormalizationDictionary::lookup(std::string_view term) const {
  const auto it = entries_.find(text::lowercase(term));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

NormalizationDictionary read_dictionary(std::istream& in) {
  NormalizationDictionary dict;
  text::LineReader reader(in);
  std::string raw;
  while (reader.next(raw)) {
    const std::string_view line = text::strip_cr(raw);
    if (text::is_blank(line)) continue;
    if (auto bad = text::find_invalid_utf8(line)) {
      throw ParseError("invalid UTF-8 at byte " + std::to_string(*bad), reader.line_number());
    }
    const auto fields = text::split(line, '\t');
    if (fields.size() != 2) {
      throw ParseError("expected 'term<TAB>identifier', found " + std::to_string(fields.size()) + " fields",
                       reader.line_number());
    }
    const std::string_view term = text::trim(fields[0]);
    const std::string_view id = text::trim(fields[1]);
    if (term.empty() || id.empty()) throw ParseError("empty term or identifier", reader.line_number());
    try {
      dict.add(term, std::string(id));
    } catch (const DataError& e) {
      throw ParseError(e.what(), reader.line_number());
    }
  }
  return dict;
}

NormalizationDictionary read_dictionary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dictionary file: " + path);
  try {
    return read_dictionary(in);
  } catch (const ParseError& e) {
    throw e.with_prefix(path);
  }
}

NormalizedList normalize_list(const std::vector<std::string>& terms, const NormalizationDictionary& dict,
                              FallbackPolicy policy) {
  NormalizedList out;
  for (const auto& term : terms) {
    if (auto id = dict.lookup(term)) {
      out.identifiers.insert(std::move(*id));
      continue;
    }
    out.unmatched.push_back(term);
    if (policy == FallbackPolicy::SurfaceFallback) out.identifiers.insert("surface:" + text::lowercase(term));
  }
  return out;
}

AgreementReport agreement_matrix(const std::vector<NamedWordList>& lists, const NormalizationDictionary& dict,
                                 FallbackPolicy policy) {
  if (lists.size() < 2) throw ArgumentError("agreement analysis needs at least 2 word lists");
  AgreementReport report;
  for (const auto& l : lists) {
    report.names.push_back(l.name);
    report.normalized.push_back(normalize_list(l.words, dict, policy));
  }
  const std::size_t n = lists.size();
  report.jaccard.assign(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i) {
    report.jaccard[i][i] = jaccard(report.normalized[i].identifiers, report.normalized[i].identifiers);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = jaccard(report.normalized[i].identifiers, report.normalized[j].identifiers);
      report.jaccard[i][j] = report.jaccard[j][i] = s;
    }
  }
  return report;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ArgumentError("pearson: length mismatch");
  if (x.size() < 2) throw ArgumentError("pearson: need at least 2 values");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DomainError("pearson: zero variance");
  return sxy / std::sqrt(sxx * syy);
}

std::vector<std::string> shared_vocabulary(std::span<const EmbeddingTable> tables) {
  if (tables.empty()) return {};
  std::vector<std::string> words;
  for (const auto& w : tables[0].vocab()) {
    const bool everywhere = std::all_of(tables.begin() + 1, tables.end(),
                                        [&](const EmbeddingTable& t) { return t.contains(w); });
    if (everywhere) words.push_back(w);
  }
  std::sort(words.begin(), words.end());
  return words;
}

std::vector<double> similarity_profile(const EmbeddingTable& table, const std::vector<std::string>& words) {
  std::vector<std::span<const double>> rows;
  std::vector<double> norms;
  for (const auto& w : words) {
    rows.push_back(table.vector(w));
    norms.push_back(norm(rows.back()));
    if (norms.back() == 0.0) {
      throw DomainError("table '" + table.name() + "': zero vector for '" + w + "'");
    }
  }
  std::vector<double> profile;
  profile.reserve(words.size() * (words.size() - 1) / 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      profile.push_back(simd::dot(rows[i], rows[j]) / (norms[i] * norms[j]));
    }
  }
  return profile;
}

CorrelationReport correlation_matrix(std::span<const EmbeddingTable> tables) {
  if (tables.size() < 2) throw ArgumentError("correlation analysis needs at least 2 tables");
  const auto words = shared_vocabulary(tables);
  if (words.size() < 3) {
    throw DataError("correlation analysis needs >= 3 shared words, found " + std::to_string(words.size()));
  }
  CorrelationReport report;
  report.shared_vocab_size = words.size();
  std::vector<std::vector<double>> profiles;
  for (const auto& t : tables) {
    report.names.push_back(t.name());
    profiles.push_back(similarity_profile(t, words));
    const auto& p = profiles.back();
    if (std::all_of(p.begin(), p.end(), [&](double v) { return v == p.front(); })) {
      throw DomainError("correlation undefined: similarity profile of '" + t.name() + "' has zero variance");
    }
  }
  const std::size_t n = tables.size();
  report.pearson.assign(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double r = pearson(profiles[i], profiles[j]);
      report.pearson[i][j] = report.pearson[j][i] = r;
    }
  }
  return report;
}

SimilarityReport similarity_query_report(std::span<const EmbeddingTable> tables, std::string_view query,
                                         std::size_t k) {
  SimilarityReport report;
  report.query = std::string(query);
  report.k = k;
  for (const auto& t : tables) {
    if (t.contains(query)) {
      report.lists.push_back({t.name(), top_k(t, query, k)});
    } else {
      report.missing.push_back(t.name());
    }
  }
  if (report.lists.empty()) {
    throw LookupError("query '" + std::string(query) + "' is not in any embedding table");
  }
  return report;
}

}  // namespace embeval
