#include "bpi/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace bpi {

namespace {

std::vector<std::string> split_line(const std::string &line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string &raw, std::size_t line, std::size_t col) {
  const std::string cell = trim(raw);
  if (cell.empty() || cell == "NaN" || cell == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char *begin = cell.data();
  const char *end = begin + cell.size();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw DataError("csv line " + std::to_string(line) + ", column " + std::to_string(col + 1) +
                    ": cannot parse '" + cell + "' as a number");
  }
  return v;
}

} // namespace

CsvTable parse_csv(std::istream &in, bool label_column) {
  CsvTable table;
  table.has_labels = label_column;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_line(line);
      break;
    }
  }
  if (header.empty()) throw DataError("csv: missing header row");
  for (auto &h : header) h = trim(h);
  if (label_column) {
    table.label_name = header.front();
    header.erase(header.begin());
  }
  table.header = header;
  const std::size_t width = header.size();
  if (width == 0) throw DataError("csv: no feature columns");

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != width + (label_column ? 1 : 0)) {
      throw DataError("csv line " + std::to_string(line_no) + ": expected " +
                      std::to_string(width + (label_column ? 1 : 0)) + " fields, got " + std::to_string(cells.size()));
    }
    std::size_t offset = 0;
    if (label_column) {
      const double label = parse_cell(cells[0], line_no, 0);
      if (std::isnan(label) || label != std::floor(label)) {
        throw DataError("csv line " + std::to_string(line_no) + ": label must be an integer");
      }
      table.labels.push_back(static_cast<int>(label));
      offset = 1;
    }
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) row[c] = parse_cell(cells[c + offset], line_no, c + offset);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("csv: no data rows");
  table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) table.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  }
  return table;
}

CsvTable read_csv(const std::string &path, bool label_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_csv(in, label_column);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream &out, const CsvColumns &leading, const std::vector<std::string> &header,
               const Matrix &values, const Mask *mask) {
  if (header.size() != static_cast<std::size_t>(values.cols())) throw DimensionError("write_csv: header width mismatch");
  for (const auto &col : leading.columns) {
    if (col.size() != static_cast<std::size_t>(values.rows())) throw DimensionError("write_csv: leading column length");
  }
  bool first = true;
  auto sep = [&]() {
    if (!first) out << ',';
    first = false;
  };
  for (const auto &n : leading.names) {
    sep();
    out << n;
  }
  for (const auto &h : header) {
    sep();
    out << h;
  }
  out << '\n';
  for (Index r = 0; r < values.rows(); ++r) {
    first = true;
    for (const auto &col : leading.columns) {
      sep();
      out << col[static_cast<std::size_t>(r)];
    }
    for (Index c = 0; c < values.cols(); ++c) {
      sep();
      const bool observed = mask ? (*mask)(r, c) : true;
      if (observed && !std::isnan(values(r, c))) out << format_number(values(r, c));
    }
    out << '\n';
  }
}

void write_masked_csv(const std::string &path, const CsvTable &table, const MaskedMatrix &m) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  CsvColumns leading;
  if (table.has_labels) {
    leading.names.push_back(table.label_name);
    leading.columns.emplace_back(table.labels.begin(), table.labels.end());
  }
  write_csv(out, leading, table.header, m.values(), &m.mask());
}

} // namespace bpi
