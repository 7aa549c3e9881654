#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace vptlab::csv {

// Minimal CSV for our own outputs: comma separated, no quoting, lines
// starting with '#' are metadata comments.
struct Table {
  std::vector<std::string> comments;  // without the leading "# "
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; throws Error(Validation) when missing.
  std::size_t column(std::string_view name) const;
};

std::vector<std::string> split(std::string_view line, char sep = ',');
std::string join(const std::vector<std::string>& fields, char sep = ',');

Table read(std::istream& in);
void write_comments(std::ostream& out, const std::vector<std::string>& comments);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Stable 64-bit FNV-1a, rendered as 16 hex digits. Used for config hashes.
std::string fnv1a_hex(std::string_view text);

// Canonical "key=value;key=value" rendering (sorted by key) for hashing.
std::string canonical(const std::map<std::string, std::string>& entries);

}  // namespace vptlab::csv
