#include "scenforge/common/digest.hpp"
#include "scenforge/common/io.hpp"
#include "scenforge/common/number_format.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <thread>

#include <unistd.h>

namespace scenforge {

std::string digest_hex(std::uint64_t digest) {
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(digest));
  return std::string(buf.data(), 16);
}

std::uint64_t parse_digest_hex(std::string_view hex) {
  std::uint64_t value = 0;
  if (hex.size() != 16) throw std::invalid_argument("digest must be 16 hex digits");
  const auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), value, 16);
  if (ec != std::errc{} || ptr != hex.data() + hex.size()) {
    throw std::invalid_argument("malformed digest: " + std::string(hex));
  }
  return value;
}

std::string format_sig6(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("cannot format non-finite number");
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.6g", value);
  std::string out(buf.data());
  if (out == "-0") out = "0";
  return out;
}

double quantize_sig6(double value) {
  const std::string text = format_sig6(value);
  return std::strtod(text.c_str(), nullptr);
}

std::string format_shortest(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("cannot format non-finite number");
  if (value == 0.0) return "0";
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), ptr);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ostringstream suffix;
  suffix << ".tmp." << ::getpid() << "." << std::this_thread::get_id();
  fs::path tmp = path;
  tmp += suffix.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename into " + path.string() + ": " + ec.message());
  }
}

}  // namespace scenforge
