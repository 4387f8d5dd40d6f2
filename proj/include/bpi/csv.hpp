#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bpi/matrix.hpp"

namespace bpi {

// Comma-separated, '.' decimal, one header row. Missing cells are an empty
// field or the literal NaN on input and an empty field on output.

struct CsvTable {
  /// Feature names (label column excluded).
  std::vector<std::string> header;
  /// NaN marks missing cells.
  Matrix values;
  std::string label_name;
  std::vector<int> labels;
  bool has_labels = false;
};

CsvTable parse_csv(std::istream &in, bool label_column);
CsvTable read_csv(const std::string &path, bool label_column);

/// 17 significant digits, so values re-parse to the same double.
std::string format_number(double v);

struct CsvColumns {
  std::vector<std::string> names;
  std::vector<std::vector<long long>> columns;
};

/// Writes optional integer columns (for example a row index and labels)
/// followed by `values`; cells not observed in `mask` (when given) or NaN are
/// left empty.
void write_csv(std::ostream &out, const CsvColumns &leading, const std::vector<std::string> &header,
               const Matrix &values, const Mask *mask = nullptr);

void write_masked_csv(const std::string &path, const CsvTable &table, const MaskedMatrix &m);

} // namespace bpi
