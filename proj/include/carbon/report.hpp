#pragma once

// CSV / Markdown tables and the SVG spatio-temporal heatmap.
//
// All numbers go through format_number (6 significant digits, %g style) so
// output is byte-stable for fixed input.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "carbon/cef.hpp"
#include "carbon/emission.hpp"
#include "carbon/grid.hpp"

namespace carbon {

/// %.6g with round-off noise (|v| < 1e-12) printed as 0.
inline std::string format_number(double v, int digits = 6) {
  if (std::abs(v) < 1e-12) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  std::string s(buf);
  if (s == "-0") s = "0";
  return s;
}

inline std::string join_numbers(const std::vector<double>& values, char sep = ';') {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += sep;
    out += format_number(values[i]);
  }
  return out;
}

/// Row-oriented table that renders as CSV or as a Markdown pipe table.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write_csv(std::ostream& os) const {
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
      os << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
  }

  void write_markdown(std::ostream& os) const {
    auto line = [&](const std::vector<std::string>& cells) {
      os << '|';
      for (const auto& c : cells) os << ' ' << c << " |";
      os << '\n';
    };
    line(header);
    os << '|';
    for (std::size_t i = 0; i < header.size(); ++i) os << " --- |";
    os << '\n';
    for (const auto& r : rows) line(r);
  }
};

inline Table lmce_table(const CaseData& c, const LmceResult& lmce) {
  Table t{{"period", "bus", "lmce_t_per_mwh", "energy_part", "network_part"}, {}};
  for (Eigen::Index p = 0; p < lmce.value.rows(); ++p) {
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
      const auto col = static_cast<Eigen::Index>(i);
      t.rows.push_back({std::to_string(p + 1), std::to_string(c.buses[i].id), format_number(lmce.value(p, col)),
                        format_number(lmce.energy_part(p, col)), format_number(lmce.network_part(p, col))});
    }
  }
  return t;
}

inline Table lace_table(const CaseData& c, const LaceResult& lace) {
  Table t{{"period", "bus", "lace_t_per_mwh", "allocation_t", "breakpoints"}, {}};
  for (Eigen::Index p = 0; p < lace.value.rows(); ++p) {
    const std::string bps = join_numbers(lace.breakpoints[static_cast<std::size_t>(p)]);
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
      const auto col = static_cast<Eigen::Index>(i);
      t.rows.push_back({std::to_string(p + 1), std::to_string(c.buses[i].id), format_number(lace.value(p, col)),
                        format_number(lace.allocation(p, col)), bps});
    }
  }
  return t;
}

inline Table cef_table(const CaseData& c, const CefResult& cef) {
  Table t{{"period", "bus", "nci_t_per_mwh", "allocation_t"}, {}};
  for (Eigen::Index p = 0; p < cef.nci.rows(); ++p) {
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
      const auto col = static_cast<Eigen::Index>(i);
      t.rows.push_back({std::to_string(p + 1), std::to_string(c.buses[i].id), format_number(cef.nci(p, col)),
                        format_number(cef.allocation(p, col))});
    }
  }
  return t;
}

inline Table clearing_table(const CaseData& c, const Matrix& dispatch) {
  Table t{{"period", "generator", "bus", "dispatch_mw", "emission_t"}, {}};
  for (Eigen::Index p = 0; p < dispatch.cols(); ++p) {
    for (std::size_t g = 0; g < c.generators.size(); ++g) {
      const double mw = dispatch(static_cast<Eigen::Index>(g), p);
      t.rows.push_back({std::to_string(p + 1), c.generators[g].id, std::to_string(c.generators[g].bus), format_number(mw),
                        format_number(mw * c.generators[g].emission_t_per_mwh)});
    }
  }
  return t;
}

/// CEF versus LACE allocations for every bus with load, plus a totals row.
inline Table comparison_table(const CaseData& c, const LoadMatrix& loads, const CefResult& cef, const LaceResult& lace,
                              double actual_emission) {
  Table t{{"period", "bus", "load_mw", "nci_t_per_mwh", "cef_allocation_t", "lace_t_per_mwh", "lace_allocation_t"}, {}};
  double load_total = 0.0;
  double cef_total = 0.0;
  double lace_total = 0.0;
  for (Eigen::Index p = 0; p < loads.cols(); ++p) {
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      const double d = loads(row, p);
      if (d <= 0.0) continue;
      load_total += d;
      cef_total += cef.allocation(p, row);
      lace_total += lace.allocation(p, row);
      t.rows.push_back({std::to_string(p + 1), std::to_string(c.buses[i].id), format_number(d), format_number(cef.nci(p, row)),
                        format_number(cef.allocation(p, row)), format_number(lace.value(p, row)),
                        format_number(lace.allocation(p, row))});
    }
  }
  t.rows.push_back({"total", "", format_number(load_total), "", format_number(cef_total), "", format_number(lace_total)});
  t.rows.push_back({"generation", "", "", "", format_number(actual_emission), "", format_number(actual_emission)});
  return t;
}

namespace detail {

struct Rgb {
  double r, g, b;
};

inline Rgb mix(const Rgb& a, const Rgb& b, double t) {
  t = std::clamp(t, 0.0, 1.0);
  return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

inline std::string hex(const Rgb& c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(c.r)), static_cast<int>(std::lround(c.g)),
                static_cast<int>(std::lround(c.b)));
  return buf;
}

inline constexpr Rgb kWhite{255, 255, 255};
inline constexpr Rgb kBlue{8, 81, 156};
inline constexpr Rgb kGreen{26, 152, 80};
inline constexpr Rgb kRed{215, 48, 39};

}  // namespace detail

inline constexpr double kCongestionMarkPercent = 99.9;

/// Flow rate |f| / capacity in percent, periods x lines.
inline Matrix flow_rates(const CaseData& c, const Matrix& flows) {
  Matrix rates(flows.rows(), flows.cols());
  for (Eigen::Index t = 0; t < flows.rows(); ++t) {
    for (Eigen::Index l = 0; l < flows.cols(); ++l) {
      rates(t, l) = 100.0 * std::abs(flows(t, l)) / c.lines[static_cast<std::size_t>(l)].capacity_mw;
    }
  }
  return rates;
}

/// Two stacked grids: line flow rate (lines x periods) and LMCE (buses x
/// periods). Cells at or above 99.9% flow rate get a black outline. LMCE uses
/// a diverging scale centred at 0 (negative green, positive red).
inline void write_heatmap_svg(std::ostream& os, const CaseData& c, const Matrix& lmce, const Matrix& rates) {
  const int cell_w = 26;
  const int cell_h = 20;
  const int left = 70;
  const int top = 40;
  const int gap = 60;
  const auto periods = static_cast<int>(lmce.rows());
  const auto nl = static_cast<int>(rates.cols());
  const auto nb = static_cast<int>(lmce.cols());
  const int grid_w = periods * cell_w;
  const int flow_h = nl * cell_h;
  const int lmce_top = top + flow_h + gap;
  const int width = left + grid_w + 20;
  const int height = lmce_top + nb * cell_h + 50;
  const double lmce_scale = std::max(1e-12, lmce.size() > 0 ? lmce.cwiseAbs().maxCoeff() : 0.0);

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\" viewBox=\"0 0 "
     << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"#ffffff\"/>\n";
  os << "<text x=\"" << left << "\" y=\"" << top - 22 << "\" font-size=\"13\">Line flow rate (%) - " << c.name << "</text>\n";
  os << "<text x=\"" << left << "\" y=\"" << lmce_top - 22 << "\" font-size=\"13\">LMCE (tCO2/MWh), max |LMCE| = "
     << format_number(lmce_scale == 1e-12 ? 0.0 : lmce_scale, 4) << "</text>\n";

  for (int t = 0; t < periods; ++t) {
    const int x = left + t * cell_w;
    os << "<text x=\"" << x + cell_w / 2 << "\" y=\"" << top - 6 << "\" text-anchor=\"middle\">" << t + 1 << "</text>\n";
    os << "<text x=\"" << x + cell_w / 2 << "\" y=\"" << lmce_top - 6 << "\" text-anchor=\"middle\">" << t + 1 << "</text>\n";
  }

  os << "<g id=\"flow-rate\">\n";
  for (int l = 0; l < nl; ++l) {
    const auto& line = c.lines[static_cast<std::size_t>(l)];
    const int y = top + l * cell_h;
    os << "<text x=\"" << left - 6 << "\" y=\"" << y + cell_h - 6 << "\" text-anchor=\"end\">" << line.from_bus << '-'
       << line.to_bus << "</text>\n";
    for (int t = 0; t < periods; ++t) {
      const double rate = rates(t, l);
      const bool congested = rate >= kCongestionMarkPercent;
      os << "<rect x=\"" << left + t * cell_w << "\" y=\"" << y << "\" width=\"" << cell_w << "\" height=\"" << cell_h
         << "\" fill=\"" << detail::hex(detail::mix(detail::kWhite, detail::kBlue, rate / 100.0)) << '"';
      if (congested) os << " class=\"congested\" stroke=\"#000000\" stroke-width=\"2\"";
      os << "><title>line " << line.from_bus << '-' << line.to_bus << " period " << t + 1 << ": " << format_number(rate, 4)
         << "%</title></rect>\n";
    }
  }
  os << "</g>\n";

  os << "<g id=\"lmce\">\n";
  for (int i = 0; i < nb; ++i) {
    const int y = lmce_top + i * cell_h;
    os << "<text x=\"" << left - 6 << "\" y=\"" << y + cell_h - 6 << "\" text-anchor=\"end\">bus "
       << c.buses[static_cast<std::size_t>(i)].id << "</text>\n";
    for (int t = 0; t < periods; ++t) {
      const double v = lmce(t, i);
      const detail::Rgb color = v < 0.0 ? detail::mix(detail::kWhite, detail::kGreen, -v / lmce_scale)
                                        : detail::mix(detail::kWhite, detail::kRed, v / lmce_scale);
      os << "<rect x=\"" << left + t * cell_w << "\" y=\"" << y << "\" width=\"" << cell_w << "\" height=\"" << cell_h
         << "\" fill=\"" << detail::hex(color) << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"><title>bus "
         << c.buses[static_cast<std::size_t>(i)].id << " period " << t + 1 << ": " << format_number(v) << "</title></rect>\n";
    }
  }
  os << "</g>\n";
  os << "<text x=\"" << left << "\" y=\"" << height - 16 << "\">period (hour); outlined cells: flow rate &gt;= 99.9%</text>\n";
  os << "</svg>\n";
}

}  // namespace carbon
