#pragma once

// Binary model checkpoints: magic, format version, configuration, tag set,
// character alphabet and every parameter group (little-endian).

#include <iosfwd>
#include <string>

#include "embeval/tagger/model.hpp"

namespace embeval::tagger {

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_model(std::ostream& out, const TaggerModel& model);
void save_model_file(const std::string& path, const TaggerModel& model);

// Throws DataError on a bad magic, unsupported version, inconsistent shapes or
// truncated input; IoError if the file cannot be opened.
TaggerModel load_model(std::istream& in);
TaggerModel load_model_file(const std::string& path);

}  // namespace embeval::tagger
