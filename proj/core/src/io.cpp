#include "finsler/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "finsler/error.hpp"

namespace finsler {

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_coords_tsv(std::ostream& out, const RowMatrix& coords) {
  out << "id";
  for (Index d = 0; d < coords.cols(); ++d) out << "\tcoord_" << d + 1;
  out << '\n';
  char buf[64];
  for (Index i = 0; i < coords.rows(); ++i) {
    out << i;
    for (Index d = 0; d < coords.cols(); ++d) {
      auto res = std::to_chars(buf, buf + sizeof buf, coords(i, d), std::chars_format::general, 17);
      out << '\t' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    cells.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (!cells.empty() && !cells.back().empty() && cells.back().back() == '\r') cells.back().pop_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) {
    fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": not a number: '" + cell + "'",
         static_cast<double>(line_no));
  }
  return value;
}

}  // namespace

RowMatrix read_coords_tsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::ParseError, "empty coordinate file");
  const auto header = split_tabs(line);
  require(header.size() >= 2 && header[0] == "id", ErrorCode::ParseError,
          "line 1: expected header 'id<TAB>coord_1...'");
  const std::size_t dim = header.size() - 1;
  std::vector<double> values;
  std::size_t line_no = 1;
  Index rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_tabs(line);
    if (cells.size() != dim + 1) {
      fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                      std::to_string(dim + 1) + " fields", static_cast<double>(line_no));
    }
    for (std::size_t c = 1; c < cells.size(); ++c) values.push_back(parse_cell(cells[c], line_no));
    ++rows;
  }
  RowMatrix coords(rows, static_cast<Index>(dim));
  std::copy(values.begin(), values.end(), coords.data());
  return coords;
}

void save_coords_tsv(const std::filesystem::path& path, const RowMatrix& coords) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::InvalidArgument, "cannot write " + path.string());
  write_coords_tsv(out, coords);
}

RowMatrix load_coords_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::ParseError, "cannot read " + path.string());
  return read_coords_tsv(in);
}

void write_trace_tsv(std::ostream& out, std::span<const double> trace, const std::string& name) {
  out << "epoch\t" << name << '\n';
  for (std::size_t t = 0; t < trace.size(); ++t) out << t + 1 << '\t' << format_double(trace[t]) << '\n';
}

}  // namespace finsler
