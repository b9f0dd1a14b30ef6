#include "embeval/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "embeval/text.hpp"

namespace embeval {

namespace {

std::string fixed(double v, int decimals = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string lpad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

// Square matrix with row and column labels.
template <typename Cell>
std::string labelled_matrix(const std::vector<std::string>& names, std::size_t n, Cell cell) {
  std::size_t label_w = 0;
  for (const auto& name : names) label_w = std::max(label_w, name.size());
  std::vector<std::vector<std::string>> cells(n, std::vector<std::string>(n));
  std::size_t cell_w = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cells[i][j] = cell(i, j);
      cell_w = std::max(cell_w, cells[i][j].size());
    }
  }
  for (const auto& name : names) cell_w = std::max(cell_w, name.size());
  std::ostringstream out;
  out << pad("", label_w);
  for (const auto& name : names) out << "  " << lpad(name, cell_w);
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    out << pad(names[i], label_w);
    for (std::size_t j = 0; j < n; ++j) out << "  " << lpad(cells[i][j], cell_w);
    out << '\n';
  }
  return out.str();
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

nlohmann::json to_json(const VocabularyOverlapReport& report) {
  return {{"names", report.names}, {"sizes", report.sizes}, {"pairwise_counts", report.pairwise_counts}};
}

nlohmann::json to_json(const SimilarityReport& report) {
  nlohmann::json lists = nlohmann::json::array();
  for (const auto& entry : report.lists) {
    nlohmann::json neighbors = nlohmann::json::array();
    for (const auto& n : entry.list.neighbors) neighbors.push_back({{"word", n.word}, {"score", n.score}});
    lists.push_back({{"embedding", entry.table}, {"neighbors", neighbors}});
  }
  return {{"query", report.query}, {"k", report.k}, {"lists", lists}, {"missing", report.missing}};
}

nlohmann::json to_json(const AgreementReport& report) {
  nlohmann::json normalized = nlohmann::json::array();
  for (std::size_t i = 0; i < report.names.size(); ++i) {
    normalized.push_back({{"embedding", report.names[i]},
                          {"identifiers", report.normalized[i].identifiers},
                          {"unmatched", report.normalized[i].unmatched}});
  }
  return {{"names", report.names}, {"jaccard", report.jaccard}, {"normalized", normalized}};
}

nlohmann::json to_json(const CorrelationReport& report) {
  return {{"names", report.names}, {"pearson", report.pearson}, {"shared_vocab_size", report.shared_vocab_size}};
}

nlohmann::json to_json(const Projection2D& projection) {
  nlohmann::json points = nlohmann::json::array();
  for (std::size_t i = 0; i < projection.words.size(); ++i) {
    points.push_back({{"word", projection.words[i]}, {"x", projection.coords(i, 0)}, {"y", projection.coords(i, 1)}});
  }
  return {{"points", points},
          {"final_kl", projection.final_kl},
          {"kl_after_exaggeration", projection.kl_after_exaggeration}};
}

std::string to_text(const VocabularyOverlapReport& report) {
  std::ostringstream out;
  out << "Vocabulary overlap (shared word counts; diagonal = vocabulary size)\n\n";
  out << labelled_matrix(report.names, report.names.size(),
                         [&](std::size_t i, std::size_t j) { return std::to_string(report.pairwise_counts[i][j]); });
  return out.str();
}

std::string to_text(const SimilarityReport& report) {
  std::ostringstream out;
  out << "Top " << report.k << " neighbors of '" << report.query << "' by cosine similarity\n";
  for (const auto& entry : report.lists) {
    out << "\n[" << entry.table << "]\n";
    std::size_t word_w = 4;
    for (const auto& n : entry.list.neighbors) word_w = std::max(word_w, n.word.size());
    std::size_t rank = 1;
    for (const auto& n : entry.list.neighbors) {
      out << lpad(std::to_string(rank++), 3) << "  " << pad(n.word, word_w) << "  " << fixed(n.score) << '\n';
    }
  }
  for (const auto& name : report.missing) out << "\n[" << name << "] query word not in vocabulary\n";
  return out.str();
}

std::string to_text(const AgreementReport& report) {
  std::ostringstream out;
  out << "Agreement (Jaccard similarity of normalized neighbour lists)\n\n";
  out << labelled_matrix(report.names, report.names.size(),
                         [&](std::size_t i, std::size_t j) { return fixed(report.jaccard[i][j]); });
  for (std::size_t i = 0; i < report.names.size(); ++i) {
    const auto& u = report.normalized[i].unmatched;
    if (u.empty()) continue;
    out << "\nunmatched in " << report.names[i] << ":";
    for (const auto& w : u) out << ' ' << w;
    out << '\n';
  }
  return out.str();
}

std::string to_text(const CorrelationReport& report) {
  std::ostringstream out;
  out << "Correlation of cosine-similarity profiles over " << report.shared_vocab_size << " shared words\n\n";
  out << labelled_matrix(report.names, report.names.size(),
                         [&](std::size_t i, std::size_t j) { return fixed(report.pearson[i][j]); });
  return out.str();
}

std::string projection_tsv(const Projection2D& projection) {
  std::ostringstream out;
  out << "word\tx\ty\n";
  for (std::size_t i = 0; i < projection.words.size(); ++i) {
    out << projection.words[i] << '\t' << text::format_double(projection.coords(i, 0)) << '\t'
        << text::format_double(projection.coords(i, 1)) << '\n';
  }
  return out.str();
}

std::string projection_svg(const Projection2D& projection, const std::string& title) {
  constexpr double kSize = 640.0;
  constexpr double kMargin = 40.0;
  double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
  for (std::size_t i = 0; i < projection.words.size(); ++i) {
    const double x = projection.coords(i, 0), y = projection.coords(i, 1);
    if (i == 0 || x < min_x) min_x = x;
    if (i == 0 || x > max_x) max_x = x;
    if (i == 0 || y < min_y) min_y = y;
    if (i == 0 || y > max_y) max_y = y;
  }
  const double span = std::max({max_x - min_x, max_y - min_y, 1e-12});
  const auto sx = [&](double x) { return kMargin + (x - min_x) / span * (kSize - 2 * kMargin); };
  const auto sy = [&](double y) { return kSize - kMargin - (y - min_y) / span * (kSize - 2 * kMargin); };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
      << "\" viewBox=\"0 0 " << kSize << ' ' << kSize << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kSize / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"14\">" << xml_escape(title) << "</text>\n";
  for (std::size_t i = 0; i < projection.words.size(); ++i) {
    const std::string x = fixed(sx(projection.coords(i, 0)), 2);
    const std::string y = fixed(sy(projection.coords(i, 1)), 2);
    out << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"3\" fill=\"steelblue\"/>\n"
        << "<text x=\"" << x << "\" y=\"" << y << "\" dx=\"4\" dy=\"-4\" font-family=\"sans-serif\" "
        << "font-size=\"9\">" << xml_escape(projection.words[i]) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace embeval
