#include "momo/keyvalue.hpp"

#include <array>
#include <charconv>
#include <sstream>

#include "momo/error.hpp"

namespace momo {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

const KeyValueEntry* KeyValueSection::find(std::string_view key) const {
  for (const auto& e : entries) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

std::vector<KeyValueSection> parse_key_value(std::istream& in, const std::string& source) {
  std::vector<KeyValueSection> sections(1);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(source, line_no, "unterminated section header");
      KeyValueSection s;
      s.name = std::string(trim(line.substr(1, line.size() - 2)));
      s.line = line_no;
      if (s.name.empty()) fail(source, line_no, "empty section name");
      sections.push_back(std::move(s));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(source, line_no, "expected 'key = value'");
    KeyValueEntry e{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))), line_no};
    if (e.key.empty()) fail(source, line_no, "empty key");
    auto& current = sections.back();
    if (current.find(e.key) != nullptr) fail(source, line_no, "duplicate key '" + e.key + "'");
    current.entries.push_back(std::move(e));
  }
  if (in.bad()) throw Error(ErrorCode::IoError, "read failure on " + source);
  return sections;
}

bool parse_real(std::string_view text, double& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && !text.empty();
}

double parse_real(const KeyValueEntry& e, const std::string& source) {
  double v = 0.0;
  if (!parse_real(e.value, v)) fail(source, e.line, "field '" + e.key + "': expected a real, got '" + e.value + "'");
  return v;
}

long long parse_integer(const KeyValueEntry& e, const std::string& source) {
  const std::string_view text = trim(e.value);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    fail(source, e.line, "field '" + e.key + "': expected an integer, got '" + e.value + "'");
  }
  return v;
}

std::vector<double> parse_reals(const KeyValueEntry& e, const std::string& source, std::size_t expected) {
  std::istringstream ss(e.value);
  std::vector<double> values;
  std::string token;
  while (ss >> token) {
    double v = 0.0;
    if (!parse_real(token, v)) fail(source, e.line, "field '" + e.key + "': bad real '" + token + "'");
    values.push_back(v);
  }
  if (values.size() != expected) {
    fail(source, e.line, "field '" + e.key + "': expected " + std::to_string(expected) + " reals, got " +
                             std::to_string(values.size()));
  }
  return values;
}

std::string format_real(double x) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

}  // namespace momo
