#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace momo {

struct KeyValueEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// `[name]` header followed by `key = value` lines. Entries before the first
/// header land in a section with an empty name.
struct KeyValueSection {
  std::string name;
  std::size_t line = 0;
  std::vector<KeyValueEntry> entries;

  const KeyValueEntry* find(std::string_view key) const;
};

/// Parses '#'-commented key-value text. Throws ParseError with `source:line`
/// context on malformed lines or duplicate keys within a section.
std::vector<KeyValueSection> parse_key_value(std::istream& in, const std::string& source);

/// Field readers that report `source:line: field 'key'` on failure.
double parse_real(const KeyValueEntry& e, const std::string& source);
long long parse_integer(const KeyValueEntry& e, const std::string& source);
std::vector<double> parse_reals(const KeyValueEntry& e, const std::string& source, std::size_t expected);

/// Shortest decimal text that reads back to the same double.
std::string format_real(double x);
/// Strict full-string parse; false on trailing garbage.
bool parse_real(std::string_view text, double& out);

}  // namespace momo
