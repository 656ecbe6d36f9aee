#include "alignpxtr/table.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace alignpxtr {

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf.data(), ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return v;
}

Table::Table(std::vector<std::string> header) : header_(std::move(header)) {
  columns_.resize(header_.size());
}

namespace {

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

Table Table::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open data file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  Table table(split(line));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != table.header_.size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(table.header_.size()) + " cells, found " +
                               std::to_string(cells.size()));
    }
    table.append_row(std::move(cells));
  }
  return table;
}

void Table::write(const std::filesystem::path& path) const {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t c = 0; c < header_.size(); ++c) {
      if (c > 0) out << ',';
      out << header_[c];
    }
    out << '\n';
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t c = 0; c < header_.size(); ++c) {
        if (c > 0) out << ',';
        out << columns_[c][r];
      }
      out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot write " + path.string() + ": " + ec.message());
  }
}

bool Table::has_column(std::string_view name) const { return column_index(name).has_value(); }

std::optional<std::size_t> Table::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  return std::nullopt;
}

std::span<const std::string> Table::text_column(std::string_view name) const {
  const auto idx = column_index(name);
  if (!idx) throw std::invalid_argument("data has no column '" + std::string(name) + "'");
  return columns_[*idx];
}

std::vector<double> Table::numeric_column(std::string_view name) const {
  const auto cells = text_column(name);
  std::vector<double> values;
  values.reserve(cells.size());
  for (std::size_t r = 0; r < cells.size(); ++r) {
    try {
      values.push_back(parse_double(cells[r]));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("column '" + std::string(name) + "' row " + std::to_string(r + 1) +
                                  ": " + e.what());
    }
  }
  return values;
}

void Table::set_column(const std::string& name, std::vector<std::string> cells) {
  if (!header_.empty() && cells.size() != rows_) {
    throw std::invalid_argument("column '" + name + "' has the wrong number of rows");
  }
  if (header_.empty()) rows_ = cells.size();
  if (const auto idx = column_index(name)) {
    columns_[*idx] = std::move(cells);
  } else {
    header_.push_back(name);
    columns_.push_back(std::move(cells));
  }
}

void Table::set_numeric_column(const std::string& name, std::span<const double> values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  set_column(name, std::move(cells));
}

void Table::append_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw std::invalid_argument("row width does not match header");
  for (std::size_t c = 0; c < cells.size(); ++c) columns_[c].push_back(std::move(cells[c]));
  ++rows_;
}

namespace columns {
std::string bias(std::string_view dimension) { return "bias." + std::string(dimension); }
std::string observed(std::string_view signal) { return "s." + std::string(signal); }
std::string latent(std::string_view signal) { return "latent." + std::string(signal); }
std::string predicted(std::string_view signal) { return "x." + std::string(signal); }
std::string aligned(std::string_view signal) { return "z." + std::string(signal); }
}  // namespace columns

}  // namespace alignpxtr
