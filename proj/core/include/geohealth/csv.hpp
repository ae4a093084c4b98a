#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace geohealth::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position by name, or nullopt.
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t require(std::string_view name, const std::filesystem::path& source) const;
};

/// Parses RFC-4180-style CSV (quoted fields, doubled quotes). Empty lines are skipped.
Table parse(std::string_view text, const std::filesystem::path& source = {});
Table read(const std::filesystem::path& path);

/// Strict numeric parse; "NaN"/"nan"/"NA"/empty map to quiet NaN when
/// `allow_missing`, anything else non-numeric returns nullopt.
std::optional<double> parse_number(std::string_view cell, bool allow_missing = true);

/// Shortest round-trip representation.
std::string format_number(double value);

std::string escape(std::string_view field);

class Writer {
 public:
  explicit Writer(std::vector<std::string> header);
  void row(const std::vector<std::string>& fields);
  const std::string& str() const noexcept { return buffer_; }

 private:
  std::size_t width_;
  std::string buffer_;
};

std::string read_text(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over `path`.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace geohealth::csv
