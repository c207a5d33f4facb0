#pragma once

// Column-named tables with RFC 4180 CSV and JSON serialisation.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace qprad::io {

class Table {
 public:
  Table() = default;
  explicit Table(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t rows() const { return cells_.size(); }
  const std::vector<std::string>& row(std::size_t i) const { return cells_.at(i); }
  void add_row(std::vector<std::string> cells);
  void add_column(const std::string& name, const std::vector<std::string>& values);
  void add_column(const std::string& name, const Eigen::ArrayXd& values);

  bool has_column(const std::string& name) const;
  std::size_t column_index(const std::string& name) const;
  /// Throws DataError listing every missing column.
  void require_columns(const std::vector<std::string>& names) const;

  /// Parses a numeric column; errors carry the 1-based file line.
  Eigen::ArrayXd numeric(const std::string& name) const;
  std::vector<std::string> text(const std::string& name) const;

  std::string source = "<memory>";

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> cells_;
};

Table parse_csv(std::string_view text, const std::string& source = "<memory>");
Table read_csv(const std::filesystem::path& path);
std::string to_csv(const Table& table);

/// Array of row objects; cells that parse fully as numbers are emitted as numbers.
nlohmann::json to_json(const Table& table);

/// Inverse of to_json: an array of flat objects with identical keys.
Table table_from_json(const nlohmann::json& rows, const std::string& source);

/// CSV or JSON by file extension.
Table read_table(const std::filesystem::path& path);

/// Shortest round-trip representation.
std::string format_double(double value);
std::string format_int(long long value);

/// Seconds since the Unix epoch <-> "YYYY-MM-DDThh:mm:ss[.fff]Z".
std::string iso8601_utc(double epoch_s);
double parse_iso8601_utc(const std::string& text);

/// Whole file as a string; DataError when unreadable.
std::string read_file(const std::filesystem::path& path);

}  // namespace qprad::io
