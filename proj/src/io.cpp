#include "q1d/io.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "q1d/error.hpp"

namespace q1d::io {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv(const std::string& path, const std::vector<Column>& columns,
               const std::vector<std::string>& header_comments) {
  require(!columns.empty(), "write_csv: no columns");
  const std::size_t rows = columns.front().values.size();
  for (const auto& c : columns)
    require(c.values.size() == rows, "write_csv: ragged columns");
  std::ofstream os(path);
  if (!os) fail_runtime("write_csv: cannot open " + path);
  for (const auto& c : header_comments) os << "# " << c << "\n";
  for (std::size_t k = 0; k < columns.size(); ++k)
    os << columns[k].name << (k + 1 < columns.size() ? "," : "\n");
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t k = 0; k < columns.size(); ++k)
      os << format_double(columns[k].values[i]) << (k + 1 < columns.size() ? "," : "\n");
  if (!os) fail_runtime("write_csv: write failed for " + path);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) fail_runtime("write_text: cannot open " + path);
  os << text;
  if (!os) fail_runtime("write_text: write failed for " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail_runtime("read_text: cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

} // namespace q1d::io
