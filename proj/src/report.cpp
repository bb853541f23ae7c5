// SPDX-License-Identifier: Apache-2.0
#include "entconc/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <json.hpp>

namespace entconc {

namespace {

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::string cell(const std::optional<std::size_t>& v) {
  return v ? std::to_string(*v) : std::string();
}

std::string cell(const std::optional<bool>& v) {
  if (!v) return {};
  return *v ? "true" : "false";
}

// Metric names may contain commas (e.g. lambda lists); quote them per RFC 4180.
std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

nlohmann::json number(const std::optional<double>& v) {
  if (!v) return nullptr;
  if (!std::isfinite(*v)) return format_number(*v);
  return *v;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_csv(std::ostream& out, const ConfigEcho& config, const std::vector<Row>& rows) {
  for (const auto& [key, value] : config) out << "# " << key << '=' << value << '\n';
  out << "command,K,n,epsilon,metric,value,ci_lo,ci_hi,valid,regime\n";
  for (const auto& r : rows) {
    out << quoted(r.command) << ',' << cell(r.K) << ',' << cell(r.n) << ',' << cell(r.epsilon)
        << ',' << quoted(r.metric) << ',' << cell(r.value) << ',' << cell(r.ci_lo) << ','
        << cell(r.ci_hi) << ',' << cell(r.valid) << ',' << quoted(r.regime) << '\n';
  }
}

void write_json(std::ostream& out, const ConfigEcho& config, const std::vector<Row>& rows) {
  nlohmann::ordered_json manifest = nlohmann::ordered_json::object();
  for (const auto& [key, value] : config) manifest[key] = value;
  nlohmann::ordered_json table = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["command"] = r.command;
    j["K"] = r.K ? nlohmann::json(*r.K) : nlohmann::json(nullptr);
    j["n"] = r.n ? nlohmann::json(*r.n) : nlohmann::json(nullptr);
    j["epsilon"] = number(r.epsilon);
    j["metric"] = r.metric;
    j["value"] = number(r.value);
    j["ci_lo"] = number(r.ci_lo);
    j["ci_hi"] = number(r.ci_hi);
    j["valid"] = r.valid ? nlohmann::json(*r.valid) : nlohmann::json(nullptr);
    j["regime"] = r.regime;
    table.push_back(std::move(j));
  }
  nlohmann::ordered_json doc;
  doc["manifest"] = std::move(manifest);
  doc["rows"] = std::move(table);
  out << doc.dump(2) << '\n';
}

std::vector<CurvePoint> curve_points(const std::vector<Row>& rows, CurveAxis axis) {
  std::vector<CurvePoint> points;
  for (const auto& r : rows) {
    if (!r.value || !std::isfinite(*r.value)) continue;
    std::optional<double> x;
    if (axis == CurveAxis::epsilon && r.epsilon) x = *r.epsilon;
    if (axis == CurveAxis::n && r.n) x = static_cast<double>(*r.n);
    if (!x) continue;
    std::string series = r.metric;
    if (axis == CurveAxis::n && r.K) series += ":K=" + std::to_string(*r.K);
    points.push_back({*x, std::move(series), *r.value});
  }
  return points;
}

void emit_curves(std::ostream& out, std::vector<CurvePoint> points) {
  std::stable_sort(points.begin(), points.end(), [](const CurvePoint& a, const CurvePoint& b) {
    if (a.x != b.x) return a.x < b.x;
    return a.series < b.series;
  });
  out << "x,series,value\n";
  for (const auto& p : points) {
    out << format_number(p.x) << ',' << quoted(p.series) << ',' << format_number(p.value) << '\n';
  }
}

}  // namespace entconc
