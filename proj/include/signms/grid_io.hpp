#pragma once

#include <span>
#include <string>
#include <vector>

namespace signms {

/// Rectangular grid of values in the plain text grid format.
///
/// The first line holds `rows cols`; each following line holds one grid row
/// of whitespace-separated decimal values. Row 0 is the bottom row (y = 0).
/// Cell fields on an n x n fine grid have n rows; node fields have n + 1.
struct Grid {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;  ///< row-major, size rows * cols
};

void write_grid(const std::string& path, int rows, int cols, std::span<const double> values);

/// Throws IngestError (with line number) on unreadable files, a bad header,
/// unparsable tokens, or a row/column count that disagrees with the header.
Grid read_grid(const std::string& path);

}  // namespace signms
