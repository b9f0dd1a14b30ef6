#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace embeval::text {

// Offset of the first byte that breaks UTF-8 well-formedness, or nullopt.
std::optional<std::size_t> find_invalid_utf8(std::string_view s);

// Decodes well-formed UTF-8 into code points. Invalid bytes decode to
// U+FFFD one byte at a time so every input maps to something.
std::vector<char32_t> decode_utf8(std::string_view s);

// ASCII-only case folding; bytes >= 0x80 pass through unchanged.
std::string lowercase(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);
// Splits on runs of ASCII spaces/tabs; no empty fields.
std::vector<std::string_view> split_ws(std::string_view s);

bool is_blank(std::string_view s);
bool has_whitespace(std::string_view s);
std::string_view strip_cr(std::string_view s);
std::string_view trim(std::string_view s);

// Strict full-field number parsing; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view s);
std::optional<std::uint64_t> parse_uint(std::string_view s);

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

// getline that also reports whether a line was read; tracks 1-based line numbers.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}
  bool next(std::string& line);
  std::size_t line_number() const noexcept { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

}  // namespace embeval::text
