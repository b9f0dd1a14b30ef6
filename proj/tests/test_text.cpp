#include <doctest.h>

#include <bit>
#include <cmath>
#include <sstream>

#include "embeval/random.hpp"
#include "embeval/text.hpp"

using namespace embeval;

TEST_CASE("utf8 validation finds the first bad byte") {
  CHECK_FALSE(text::find_invalid_utf8("plain ascii").has_value());
  CHECK_FALSE(text::find_invalid_utf8("\xc3\xa9thanol \xe2\x86\x92").has_value());
  CHECK(text::find_invalid_utf8("ab\xff").value() == 2);
  CHECK(text::find_invalid_utf8("a\xc3").value() == 1);          // truncated sequence
  CHECK(text::find_invalid_utf8("\xc0\xaf").value() == 0);       // overlong
  CHECK(text::find_invalid_utf8("\xed\xa0\x80").value() == 0);   // surrogate
}

TEST_CASE("utf8 decoding") {
  const auto cps = text::decode_utf8("a\xc3\xa9\xe2\x86\x92");
  REQUIRE(cps.size() == 3);
  CHECK(cps[0] == U'a');
  CHECK(cps[1] == U'é');
  CHECK(cps[2] == U'→');
  const auto bad = text::decode_utf8("\xff" "b");
  REQUIRE(bad.size() == 2);
  CHECK(bad[0] == U'�');
}

TEST_CASE("lowercase leaves non-ascii bytes alone") {
  CHECK(text::lowercase("IbuPROFEN") == "ibuprofen");
  CHECK(text::lowercase("\xc3\x89thanol") == "\xc3\x89thanol");
}

TEST_CASE("splitting") {
  const auto f = text::split("a\t\tb", '\t');
  REQUIRE(f.size() == 3);
  CHECK(f[1].empty());
  const auto w = text::split_ws("  a \t b  ");
  REQUIRE(w.size() == 2);
  CHECK(w[0] == "a");
  CHECK(w[1] == "b");
  CHECK(text::trim(" \tx \r") == "x");
  CHECK(text::strip_cr("x\r") == "x");
  CHECK(text::is_blank(" \t "));
  CHECK(text::has_whitespace("a b"));
}

TEST_CASE("number parsing is strict") {
  CHECK(text::parse_double("1.5").value() == 1.5);
  CHECK(text::parse_double("+2").value() == 2.0);
  CHECK(text::parse_double("-1e-3").value() == -1e-3);
  CHECK_FALSE(text::parse_double("1.5x").has_value());
  CHECK_FALSE(text::parse_double("").has_value());
  CHECK_FALSE(text::parse_double("++1").has_value());
  CHECK(text::parse_uint("42").value() == 42);
  CHECK_FALSE(text::parse_uint("-1").has_value());
  CHECK_FALSE(text::parse_uint("4 2").has_value());
}

TEST_CASE("format_double round-trips every finite double") {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    double v = std::bit_cast<double>(rng.next_u64());
    if (!std::isfinite(v)) continue;
    const auto s = text::format_double(v);
    const auto back = text::parse_double(s);
    REQUIRE(back.has_value());
    CHECK(std::bit_cast<std::uint64_t>(*back) == std::bit_cast<std::uint64_t>(v));
  }
}

TEST_CASE("line reader counts lines") {
  std::istringstream in("a\nb\n\nc");
  text::LineReader r(in);
  std::string line;
  std::vector<std::string> lines;
  while (r.next(line)) lines.push_back(line);
  CHECK(lines == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(r.line_number() == 4);
}

TEST_CASE("seed derivation and rng are deterministic") {
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
  Rng c(9);
  for (int i = 0; i < 1000; ++i) {
    const auto x = c.below(7);
    CHECK(x < 7);
    const double u = c.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}
