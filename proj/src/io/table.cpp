#include "qprad/io/table.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "qprad/errors.hpp"

namespace qprad::io {

namespace {

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec == std::errc() && ptr == last) return true;
  if (s == "nan" || s == "NaN") {
    out = std::nan("");
    return true;
  }
  if (s == "inf" || s == "+inf") {
    out = INFINITY;
    return true;
  }
  if (s == "-inf") {
    out = -INFINITY;
    return true;
  }
  return false;
}

std::string quote(const std::string& cell) {
  if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Table::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) {
    throw DataError(source + ": row " + std::to_string(cells_.size() + 2) + " has " +
                    std::to_string(cells.size()) + " fields, header has " +
                    std::to_string(columns_.size()));
  }
  cells_.push_back(std::move(cells));
}

void Table::add_column(const std::string& name, const std::vector<std::string>& values) {
  if (!cells_.empty() && values.size() != cells_.size()) {
    throw ContractViolation("add_column: '" + name + "' has the wrong length");
  }
  if (cells_.empty()) cells_.resize(values.size());
  columns_.push_back(name);
  for (std::size_t i = 0; i < values.size(); ++i) cells_[i].push_back(values[i]);
}

void Table::add_column(const std::string& name, const Eigen::ArrayXd& values) {
  std::vector<std::string> text;
  text.reserve(static_cast<std::size_t>(values.size()));
  for (double v : values) text.push_back(format_double(v));
  add_column(name, text);
}

bool Table::has_column(const std::string& name) const {
  for (const auto& c : columns_) {
    if (c == name) return true;
  }
  return false;
}

std::size_t Table::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i] == name) return i;
  }
  throw DataError(source + ": missing column '" + name + "'");
}

void Table::require_columns(const std::vector<std::string>& names) const {
  std::string missing;
  for (const auto& n : names) {
    if (!has_column(n)) missing += (missing.empty() ? "" : ", ") + n;
  }
  if (!missing.empty()) throw DataError(source + ": missing required column(s): " + missing);
}

Eigen::ArrayXd Table::numeric(const std::string& name) const {
  const std::size_t j = column_index(name);
  Eigen::ArrayXd out(static_cast<Eigen::Index>(cells_.size()));
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    double v;
    if (!parse_number(cells_[i][j], v)) {
      throw DataError(source + ": line " + std::to_string(i + 2) + ", column '" + name +
                      "': not a number: '" + cells_[i][j] + "'");
    }
    out[static_cast<Eigen::Index>(i)] = v;
  }
  return out;
}

std::vector<std::string> Table::text(const std::string& name) const {
  const std::size_t j = column_index(name);
  std::vector<std::string> out;
  out.reserve(cells_.size());
  for (const auto& r : cells_) out.push_back(r[j]);
  return out;
}

Table parse_csv(std::string_view text, const std::string& source) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string cell;
  bool in_quotes = false;
  bool cell_started = false;
  std::size_t line = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        cell += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (cell_started && !cell.empty()) {
          throw DataError(source + ": line " + std::to_string(line) + ": stray quote");
        }
        in_quotes = true;
        cell_started = true;
        break;
      case ',':
        record.push_back(std::move(cell));
        cell.clear();
        cell_started = false;
        break;
      case '\r':
        break;
      case '\n':
        record.push_back(std::move(cell));
        cell.clear();
        cell_started = false;
        records.push_back(std::move(record));
        record.clear();
        ++line;
        break;
      default:
        cell += c;
        cell_started = true;
    }
  }
  if (in_quotes) throw DataError(source + ": unterminated quoted field");
  if (cell_started || !record.empty()) {
    record.push_back(std::move(cell));
    records.push_back(std::move(record));
  }
  while (!records.empty() && records.back().size() == 1 && records.back()[0].empty()) {
    records.pop_back();
  }
  if (records.empty()) throw DataError(source + ": empty file (header row is mandatory)");

  Table table(records.front());
  table.source = source;
  for (std::size_t r = 1; r < records.size(); ++r) table.add_row(std::move(records[r]));
  return table;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Table read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path), path.string()); }

std::string to_csv(const Table& table) {
  std::string out;
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += quote(cells[i]);
    }
    out += "\r\n";
  };
  emit(table.columns());
  for (std::size_t i = 0; i < table.rows(); ++i) emit(table.row(i));
  return out;
}

nlohmann::json to_json(const Table& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < table.rows(); ++i) {
    nlohmann::json obj = nlohmann::json::object();
    const auto& r = table.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      double v;
      if (parse_number(r[j], v) && std::isfinite(v)) {
        obj[table.columns()[j]] = v;
      } else {
        obj[table.columns()[j]] = r[j];
      }
    }
    rows.push_back(std::move(obj));
  }
  return rows;
}

Table table_from_json(const nlohmann::json& rows, const std::string& source) {
  if (!rows.is_array() || rows.empty() || !rows[0].is_object()) {
    throw DataError(source + ": expected a non-empty array of row objects");
  }
  std::vector<std::string> columns;
  for (const auto& [k, v] : rows[0].items()) columns.push_back(k);
  Table table(columns);
  table.source = source;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (!r.is_object() || r.size() != columns.size()) {
      throw DataError(source + ": row " + std::to_string(i) + " does not match the first row's keys");
    }
    std::vector<std::string> cells;
    for (const auto& c : columns) {
      if (!r.contains(c)) throw DataError(source + ": row " + std::to_string(i) + " lacks '" + c + "'");
      const auto& v = r[c];
      if (v.is_number()) {
        cells.push_back(format_double(v.get<double>()));
      } else if (v.is_string()) {
        cells.push_back(v.get<std::string>());
      } else {
        throw DataError(source + ": row " + std::to_string(i) + ", '" + c + "' is not scalar");
      }
    }
    table.add_row(std::move(cells));
  }
  return table;
}

Table read_table(const std::filesystem::path& path) {
  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(path.string() + ": " + e.what());
    }
    return table_from_json(j, path.string());
  }
  return read_csv(path);
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string format_int(long long value) { return std::to_string(value); }

std::string iso8601_utc(double epoch_s) {
  const double whole = std::floor(epoch_s);
  auto secs = static_cast<std::time_t>(whole);
  auto millis = static_cast<int>(std::lround((epoch_s - whole) * 1000.0));
  if (millis == 1000) {
    ++secs;
    millis = 0;
  }
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, millis);
  return buf;
}

double parse_iso8601_utc(const std::string& text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, consumed = 0;
  double s = 0;
  const char* c = text.c_str();
  bool ok = false;
  if (std::sscanf(c, "%4d-%2d-%2dT%2d:%2d:%lf%n", &y, &mo, &d, &h, &mi, &s, &consumed) == 6) {
    ok = text.substr(static_cast<std::size_t>(consumed)) == "Z";
  } else if (std::sscanf(c, "%4d-%2d-%2d%n", &y, &mo, &d, &consumed) == 3) {
    ok = static_cast<std::size_t>(consumed) == text.size();
  }
  if (!ok || mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s < 0 || s >= 61) {
    throw ConfigError("timestamp '" + text + "' is not UTC ISO-8601 (YYYY-MM-DDThh:mm:ssZ)");
  }
  std::tm tm{};
  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  tm.tm_sec = 0;
  return static_cast<double>(timegm(&tm)) + s;
}

}  // namespace qprad::io
