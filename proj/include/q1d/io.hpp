#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace q1d::io {

/**
 * Shortest round-trip decimal representation of a double (std::to_chars),
 * locale independent. All numeric file output goes through here so results
 * re-read bit-identically.
 */
std::string format_double(double v);

/** Writes a rectangular table as CSV. Columns are parallel vectors. */
struct Column {
  std::string name;
  std::vector<double> values;
};

void write_csv(const std::string& path, const std::vector<Column>& columns,
               const std::vector<std::string>& header_comments = {});

void write_text(const std::string& path, const std::string& text);

std::string read_text(const std::string& path);

// FNV-1a over a string; used for config hashes in manifests and cache keys.
std::uint64_t fnv1a(const std::string& s);

} // namespace q1d::io
