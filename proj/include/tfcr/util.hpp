#pragma once

// Small shared helpers: locale-independent number formatting/parsing and
// string splitting used by the file-format code.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace tfcr {

// Shortest decimal string that re-parses to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Fixed 17 significant digits (round-trip safe), for model files.
inline std::string format_double17(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v,
                           std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view s, double& out) {
  const char* last = s.data() + s.size();
  auto res = std::from_chars(s.data(), last, out);
  return res.ec == std::errc() && res.ptr == last;
}

inline bool parse_uint(std::string_view s, std::uint64_t& out) {
  const char* last = s.data() + s.size();
  auto res = std::from_chars(s.data(), last, out);
  return res.ec == std::errc() && res.ptr == last;
}

inline bool parse_int(std::string_view s, std::int64_t& out) {
  const char* last = s.data() + s.size();
  auto res = std::from_chars(s.data(), last, out);
  return res.ec == std::errc() && res.ptr == last;
}

// Split on a single delimiter, keeping empty fields.
inline std::vector<std::string_view> split(std::string_view s, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

// Split on runs of spaces/tabs, dropping empty fields.
inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

// Drops a single trailing '\r' (CRLF input).
inline std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

// Splits into lines on '\n'; a trailing newline does not produce a final
// empty line.
inline std::vector<std::string_view> content_lines(std::string_view content) {
  std::vector<std::string_view> lines = split(content, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace tfcr
