#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace alignpxtr {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
/// Throws std::invalid_argument if `text` is not a complete number.
double parse_double(std::string_view text);

/// Column-oriented CSV table with a header row.
///
/// Cells keep their original text so columns that are only passed through
/// are written back unchanged. Numeric columns are parsed on request.
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<std::string> header);

  static Table read(const std::filesystem::path& path);
  /// Writes to a sibling temp file first, so a failed write leaves no output.
  void write(const std::filesystem::path& path) const;

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_; }
  bool has_column(std::string_view name) const;
  std::optional<std::size_t> column_index(std::string_view name) const;

  std::span<const std::string> text_column(std::string_view name) const;
  std::vector<double> numeric_column(std::string_view name) const;

  /// Adds a column or replaces an existing one with the same name.
  void set_column(const std::string& name, std::vector<std::string> cells);
  void set_numeric_column(const std::string& name, std::span<const double> values);

  /// Appends a row of cells in header order.
  void append_row(std::vector<std::string> cells);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> columns_;
  std::size_t rows_ = 0;
};

/// Column naming of the data format.
namespace columns {
inline constexpr std::string_view kId = "id";
inline constexpr std::string_view kZTrue = "z_true";
inline constexpr std::string_view kInterestFeature = "feature.interest";
inline constexpr std::string_view kZFinal = "z_final";
std::string bias(std::string_view dimension);
std::string observed(std::string_view signal);
std::string latent(std::string_view signal);
std::string predicted(std::string_view signal);
std::string aligned(std::string_view signal);
}  // namespace columns

}  // namespace alignpxtr
