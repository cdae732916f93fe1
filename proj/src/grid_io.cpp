#include "signms/grid_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "signms/errors.hpp"

namespace signms {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

void write_grid(const std::string& path, int rows, int cols, std::span<const double> values) {
  if (static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) != values.size()) {
    throw ConfigError("write_grid: " + std::to_string(values.size()) + " values for a " +
                      std::to_string(rows) + "x" + std::to_string(cols) + " grid");
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << rows << ' ' << cols << '\n';
  char buf[32];
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      // %.17g round-trips every double exactly.
      std::snprintf(buf, sizeof buf, "%.17g", values[static_cast<std::size_t>(r) * cols + c]);
      if (c > 0) out << ' ';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw Error("write failed for " + path);
}

Grid read_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError(path, 0, "cannot open file");

  Grid grid;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  int row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (!have_header) {
      if (tokens.size() != 2 || !parse_number(tokens[0], grid.rows) ||
          !parse_number(tokens[1], grid.cols) || grid.rows <= 0 || grid.cols <= 0) {
        throw IngestError(path, line_no, "expected header `rows cols` with positive integers");
      }
      grid.values.reserve(static_cast<std::size_t>(grid.rows) * grid.cols);
      have_header = true;
      continue;
    }
    if (row >= grid.rows) {
      throw IngestError(path, line_no, "more than the " + std::to_string(grid.rows) + " rows declared in the header");
    }
    if (static_cast<int>(tokens.size()) != grid.cols) {
      throw IngestError(path, line_no,
                        "count mismatch: row has " + std::to_string(tokens.size()) + " entries, expected " + std::to_string(grid.cols));
    }
    for (auto tok : tokens) {
      double v = 0.0;
      if (!parse_number(tok, v)) {
        throw IngestError(path, line_no, "cannot parse `" + std::string(tok) + "` as a number");
      }
      grid.values.push_back(v);
    }
    ++row;
  }
  if (!have_header) throw IngestError(path, line_no, "empty file");
  if (row != grid.rows) {
    throw IngestError(path, line_no,
                      "count mismatch: found " + std::to_string(grid.values.size()) + " entries, expected " +
                          std::to_string(static_cast<long>(grid.rows) * grid.cols));
  }
  return grid;
}

}  // namespace signms
