#include "latiso/grid_io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string_view>
#include <system_error>
#include <vector>

#include "latiso/errors.hpp"

namespace latiso {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string format_double(double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) fail(errc::invalid_argument, "failed to format value");
  return std::string(buffer, ptr);
}

Grid parse_grid_csv(std::istream& in, bool skip_header, const std::string& name) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  bool header_pending = skip_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    if (trim(line).empty() && rows.empty()) continue;  // leading blank lines
    if (trim(line).empty()) break;                     // trailing blank line ends the table
    std::vector<double> row;
    std::string_view rest(line);
    while (true) {
      const size_t comma = rest.find(',');
      const std::string_view field = trim(rest.substr(0, comma));
      if (field.empty() || field == "NA") {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
      } else {
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
        if (ec != std::errc() || ptr != field.data() + field.size())
          fail(errc::parse_error, name + ":" + std::to_string(line_no) + ": bad numeric field '" +
                                      std::string(field) + "'");
        if (!std::isfinite(value))
          fail(errc::parse_error,
               name + ":" + std::to_string(line_no) + ": non-finite value");
        row.push_back(value);
      }
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      fail(errc::parse_error, name + ":" + std::to_string(line_no) + ": expected " +
                                  std::to_string(rows.front().size()) + " fields, found " +
                                  std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(errc::parse_error, name + ": no data rows");

  const int n_rows = static_cast<int>(rows.size());
  const int n_cols = static_cast<int>(rows.front().size());
  Matrix values(n_rows, n_cols);
  // first parsed line is the top of the grid (largest y)
  for (int i = 0; i < n_rows; ++i)
    for (int x = 0; x < n_cols; ++x)
      values(n_rows - 1 - i, x) = rows[static_cast<size_t>(i)][static_cast<size_t>(x)];
  return Grid::with_values(n_rows, n_cols, std::move(values));
}

Grid read_grid_csv(const std::string& path, bool skip_header) {
  std::ifstream in(path);
  if (!in) fail(errc::parse_error, "cannot open '" + path + "'");
  return parse_grid_csv(in, skip_header, path);
}

std::string grid_to_csv(const Grid& grid) {
  std::string out;
  for (int y = grid.rows() - 1; y >= 0; --y) {
    for (int x = 0; x < grid.cols(); ++x) {
      if (x > 0) out += ',';
      out += grid.is_missing(x, y) ? "NA" : format_double(grid(x, y));
    }
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(errc::parse_error, "cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) fail(errc::parse_error, "short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    fail(errc::parse_error, "cannot move output into place: " + ec.message());
  }
}

void write_grid_csv(const Grid& grid, const std::string& path) {
  write_text_file(path, grid_to_csv(grid));
}

}  // namespace latiso
