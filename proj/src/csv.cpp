#include "vptlab/csv.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "vptlab/error.hpp"

namespace vptlab::csv {

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error(ErrorKind::Validation, "CSV column '" + std::string(name) + "' not found");
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& fields, char sep) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += sep;
    out += fields[i];
  }
  return out;
}

Table read(std::istream& in) {
  Table t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::string_view body(line);
      body.remove_prefix(1);
      if (!body.empty() && body.front() == ' ') body.remove_prefix(1);
      t.comments.emplace_back(body);
      continue;
    }
    auto fields = split(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
    } else {
      if (fields.size() != t.header.size()) {
        throw Error(ErrorKind::Validation, "CSV row has " + std::to_string(fields.size()) +
                                              " fields, header has " +
                                              std::to_string(t.header.size()));
      }
      t.rows.push_back(std::move(fields));
    }
  }
  if (!have_header) throw Error(ErrorKind::Validation, "CSV input has no header row");
  return t;
}

void write_comments(std::ostream& out, const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  out << join(fields) << '\n';
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string canonical(const std::map<std::string, std::string>& entries) {
  std::string out;
  for (const auto& [k, v] : entries) {
    if (!out.empty()) out += ';';
    out += k;
    out += '=';
    out += v;
  }
  return out;
}

}  // namespace vptlab::csv
