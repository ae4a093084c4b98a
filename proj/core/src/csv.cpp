#include "geohealth/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "geohealth/error.hpp"

namespace geohealth::csv {

namespace fs = std::filesystem;

std::optional<std::size_t> Table::find(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  return std::nullopt;
}

std::size_t Table::require(std::string_view name, const fs::path& source) const {
  auto pos = find(name);
  if (!pos) throw Error(ErrorCode::MissingColumn, "column '" + std::string(name) + "' not in " + source.string());
  return *pos;
}

Table parse(std::string_view text, const fs::path& source) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;

  auto end_record = [&] {
    if (field_started || !record.empty()) {
      record.push_back(std::move(field));
      records.push_back(std::move(record));
    }
    record.clear();
    field.clear();
    field_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::ParseError, "unterminated quote in " + source.string());
  end_record();

  Table table;
  if (records.empty()) throw Error(ErrorCode::ParseError, "empty CSV (no header): " + source.string());
  table.header = std::move(records.front());
  // strip a UTF-8 byte-order mark from the first header cell
  if (!table.header.empty() && table.header[0].starts_with("\xEF\xBB\xBF")) table.header[0].erase(0, 3);
  table.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r].size() != table.header.size())
      throw Error(ErrorCode::RaggedRows, source.string() + " row " + std::to_string(r + 2) + " has " +
                                             std::to_string(table.rows[r].size()) + " fields, header has " +
                                             std::to_string(table.header.size()));
  }
  return table;
}

Table read(const fs::path& path) { return parse(read_text(path), path); }

std::optional<double> parse_number(std::string_view cell, bool allow_missing) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
  if (cell.empty() || cell == "NaN" || cell == "nan" || cell == "NA" || cell == "null") {
    if (allow_missing) return std::numeric_limits<double>::quiet_NaN();
    return std::nullopt;
  }
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
  if (!std::isfinite(value) && !allow_missing) return std::nullopt;
  return value;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "NaN";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

Writer::Writer(std::vector<std::string> header) : width_(header.size()) { row(header); }

void Writer::row(const std::vector<std::string>& fields) {
  if (fields.size() != width_)
    throw Error(ErrorCode::ShapeMismatch, "CSV row width " + std::to_string(fields.size()) + " != " +
                                              std::to_string(width_));
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) buffer_.push_back(',');
    buffer_ += escape(fields[i]);
  }
  buffer_.push_back('\n');
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::FileNotFound, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace geohealth::csv
