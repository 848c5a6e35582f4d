#include <filesystem>

#include "doctest.h"
#include "scenforge/common/digest.hpp"
#include "scenforge/common/io.hpp"
#include "scenforge/common/number_format.hpp"
#include "scenforge/common/splitmix.hpp"
#include "scenforge/common/vec2.hpp"

using namespace scenforge;

TEST_CASE("fnv1a64 published vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(digest_hex(0xaf63dc4c8601ec8cULL) == "af63dc4c8601ec8c");
  CHECK(parse_digest_hex("000000000000000a") == 10);
  CHECK_THROWS(parse_digest_hex("xyz"));
}

TEST_CASE("splitmix64 reference sequence for seed 0") {
  SplitMix64 rng(0);
  CHECK(rng.next() == 0xe220a8397b1dcdafULL);
  CHECK(rng.next() == 0x6e789e6aa1b965f4ULL);
  CHECK(rng.next() == 0x06c45d188009454fULL);
}

TEST_CASE("next_unit stays in [0, 1)") {
  SplitMix64 rng(12345);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.next_unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("number formatting") {
  CHECK(format_sig6(8.0) == "8");
  CHECK(format_sig6(12.0) == "12");
  CHECK(format_sig6(0.1 + 0.2) == "0.3");
  CHECK(format_sig6(-0.0) == "0");
  CHECK(format_sig6(-1e-9) == "-1e-09");
  CHECK(format_sig6(123456789.0) == "1.23457e+08");
  CHECK(quantize_sig6(3.14159265) == 3.14159);
  CHECK(format_shortest(0.1) == "0.1");
  CHECK(format_shortest(11.2) == "11.2");
  CHECK(format_shortest(-0.0) == "0");
  CHECK(std::stod(format_shortest(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("rotate_quarter is exact") {
  const Vec2 p{1.75, -20.5};
  CHECK(rotate_quarter(p, 1) == Vec2{20.5, 1.75});
  CHECK(rotate_quarter(p, 2) == Vec2{-1.75, 20.5});
  CHECK(rotate_quarter(p, -1) == rotate_quarter(p, 3));
  CHECK(rotate_quarter(rotate_quarter(p, 1), 3) == p);
}

TEST_CASE("normalize_angle range") {
  constexpr double pi = std::numbers::pi;
  CHECK(normalize_angle(pi) == doctest::Approx(pi));
  CHECK(normalize_angle(-pi) == doctest::Approx(pi));
  CHECK(normalize_angle(3 * pi / 2) == doctest::Approx(-pi / 2));
}

TEST_CASE("atomic write replaces file content") {
  const auto dir = std::filesystem::temp_directory_path() / "scenforge_test_common";
  std::filesystem::remove_all(dir);
  const auto file = dir / "nested" / "a.txt";
  write_file_atomic(file, "one");
  write_file_atomic(file, "two");
  CHECK(read_text_file(file) == "two");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(file.parent_path())) ++entries;
  CHECK(entries == 1);
  std::filesystem::remove_all(dir);
  CHECK_THROWS(read_text_file(file));
}
