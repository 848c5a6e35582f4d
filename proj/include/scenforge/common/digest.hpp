#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace scenforge {

/// 64-bit FNV-1a over raw bytes. Used for every content digest in the
/// toolkit (templates, Scenic text, geometries) so digests are stable across
/// platforms and languages.
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvOffset) {
  for (char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= kFnvPrime;
  }
  return h;
}

/// Lowercase, zero-padded 16-digit hex.
std::string digest_hex(std::uint64_t digest);

/// Inverse of digest_hex; throws std::invalid_argument on malformed input.
std::uint64_t parse_digest_hex(std::string_view hex);

}  // namespace scenforge
