#pragma once

#include <iosfwd>
#include <string>

#include "latiso/grid.hpp"

namespace latiso {

/// Grid CSV: one line per grid row with the top line holding the largest
/// y; comma-separated decimal values; an empty field or "NA" marks a
/// missing cell. No header line unless skip_header asks to drop one.
Grid parse_grid_csv(std::istream& in, bool skip_header = false,
                    const std::string& name = "<stream>");

Grid read_grid_csv(const std::string& path, bool skip_header = false);

/// Serializes with shortest round-trip formatting, so
/// parse(write(grid)) == grid exactly.
std::string grid_to_csv(const Grid& grid);

/// Writes through a temporary file and renames, so failures leave no
/// partial output behind.
void write_grid_csv(const Grid& grid, const std::string& path);

std::string format_double(double value);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace latiso
