#pragma once

#include <array>
#include <string>

#include "carbon/errors.hpp"
#include "carbon/grid.hpp"

namespace carbon {

/// Three-bus reference system.
///
/// G1 on bus 1 (200 MW, 10/MWh, 0.2 t/MWh), G3 on bus 3 (100 MW, 30/MWh,
/// 0.8 t/MWh). x12 = 2 * x23 and x23 = x13. Line 2-3 is limited to 25 MW;
/// the other two lines carry no binding limit (1000 MW). Loads: 10 MW on
/// bus 2, 150 MW on bus 3. Slack is bus 1.
inline CaseData paper_3bus_case() {
  CaseData c;
  c.name = "paper-3bus";
  c.periods = 1;
  c.slack_bus = 1;
  c.buses = {{1}, {2}, {3}};
  c.lines = {{1, 2, 2.0, 1000.0}, {2, 3, 1.0, 25.0}, {1, 3, 1.0, 1000.0}};
  c.generators = {{"G1", 1, 200.0, 0.0, 10.0, 0.2}, {"G3", 3, 100.0, 0.0, 30.0, 0.8}};
  c.loads = {{2, {10.0}}, {3, {150.0}}};
  validate_case(c);
  return c;
}

/// Six-bus, 24-hour synthetic system (this library's own parameters).
///
/// Topology follows the classic six-bus teaching network (11 lines).
/// Generators:
///   G1  bus 1  250 MW  bid 12  0.95 t/MWh  (coal)
///   G2  bus 2  200 MW  bid 20  0.40 t/MWh  (combined cycle)
///   G3  bus 3  150 MW  bid 28  0.55 t/MWh  (peaker)
///   G4  bus 6   60 MW  bid  5  0.00 t/MWh  (hydro)
/// Loads sit on buses 4, 5 and 6 and follow a daily profile between 45% and
/// 100% of their peak (110, 100, 90 MW). Line 1-4 (60 MW) is congested from
/// hour 8 through hour 23 and line 2-4 (56 MW) also binds at the hour-19
/// peak; hours 1-7 and 24 are congestion-free with G1 marginal.
inline CaseData synthetic_6bus_24h_case() {
  CaseData c;
  c.name = "synthetic-6bus-24h";
  c.periods = 24;
  c.slack_bus = 1;
  c.buses = {{1}, {2}, {3}, {4}, {5}, {6}};
  c.lines = {
      {1, 2, 0.20, 100.0}, {1, 4, 0.20, 60.0},  {1, 5, 0.30, 80.0},  {2, 3, 0.25, 80.0},
      {2, 4, 0.10, 56.0},  {2, 5, 0.30, 60.0},  {2, 6, 0.20, 90.0},  {3, 5, 0.26, 70.0},
      {3, 6, 0.10, 100.0}, {4, 5, 0.40, 50.0},  {5, 6, 0.30, 40.0},
  };
  c.generators = {
      {"G1", 1, 250.0, 0.0, 12.0, 0.95},
      {"G2", 2, 200.0, 0.0, 20.0, 0.40},
      {"G3", 3, 150.0, 0.0, 28.0, 0.55},
      {"G4", 6, 60.0, 0.0, 5.0, 0.0},
  };
  constexpr std::array<double, 24> shape = {0.55, 0.50, 0.47, 0.45, 0.46, 0.52, 0.62, 0.74, 0.83, 0.88, 0.90, 0.91,
                                            0.90, 0.89, 0.88, 0.89, 0.92, 0.97, 1.00, 0.99, 0.94, 0.84, 0.72, 0.62};
  const std::array<std::pair<int, double>, 3> peaks = {{{4, 110.0}, {5, 100.0}, {6, 90.0}}};
  for (const auto& [bus, peak] : peaks) {
    LoadProfile p{bus, {}};
    for (double s : shape) p.mw.push_back(peak * s);
    c.loads.push_back(std::move(p));
  }
  validate_case(c);
  return c;
}

inline bool is_builtin_case(const std::string& name) {
  return name == "paper-3bus" || name == "synthetic-6bus-24h";
}

inline CaseData builtin_case(const std::string& name) {
  if (name == "paper-3bus") return paper_3bus_case();
  if (name == "synthetic-6bus-24h") return synthetic_6bus_24h_case();
  throw CaseValidationError("unknown builtin case \"" + name + "\"");
}

}  // namespace carbon
