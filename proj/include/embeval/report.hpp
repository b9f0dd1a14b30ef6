#pragma once

// Serialization of analysis results: JSON for machines, aligned columns for
// people, SVG/TSV for 2-D projections. Output is a pure function of the
// report, so identical inputs give byte-identical files.

#include <string>

#include <json.hpp>

#include "embeval/corpus.hpp"
#include "embeval/intrinsic.hpp"
#include "embeval/tsne.hpp"

namespace embeval {

nlohmann::json to_json(const VocabularyOverlapReport& report);
nlohmann::json to_json(const SimilarityReport& report);
nlohmann::json to_json(const AgreementReport& report);
nlohmann::json to_json(const CorrelationReport& report);
nlohmann::json to_json(const Projection2D& projection);

std::string to_text(const VocabularyOverlapReport& report);
std::string to_text(const SimilarityReport& report);
std::string to_text(const AgreementReport& report);
std::string to_text(const CorrelationReport& report);

std::string projection_tsv(const Projection2D& projection);
std::string projection_svg(const Projection2D& projection, const std::string& title);

}  // namespace embeval
