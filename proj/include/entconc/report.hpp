// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace entconc {

/// One line of an output table. Every command shares this schema and leaves
/// unused cells empty.
struct Row {
  std::string command;
  std::optional<std::size_t> K;
  std::optional<std::size_t> n;
  std::optional<double> epsilon;
  std::string metric;
  std::optional<double> value;
  std::optional<double> ci_lo;
  std::optional<double> ci_hi;
  std::optional<bool> valid;
  std::string regime;
};

/// Ordered key/value echo of a resolved run configuration.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

/// printf("%.17g"), with "inf", "-inf" and "nan" spelled out.
std::string format_number(double value);

/// Header comment lines "# key=value", then the column header and rows.
void write_csv(std::ostream& out, const ConfigEcho& config, const std::vector<Row>& rows);

/// {"manifest": {...}, "rows": [...]}; non-finite numbers become strings.
void write_json(std::ostream& out, const ConfigEcho& config, const std::vector<Row>& rows);

struct CurvePoint {
  double x = 0.0;
  std::string series;
  double value = 0.0;
};

enum class CurveAxis { epsilon, n };

/// Long-format points from rows with a value and the chosen axis.
std::vector<CurvePoint> curve_points(const std::vector<Row>& rows, CurveAxis axis);

/// Writes "x,series,value" sorted by x, then series.
void emit_curves(std::ostream& out, std::vector<CurvePoint> points);

}  // namespace entconc
