#pragma once

// Grid data model, validation and DC power transfer distribution factors.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "carbon/errors.hpp"

namespace carbon {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Bus {
  int id = 0;
};

/// Series branch. Only reactance ratios matter in the DC model.
struct Line {
  int from_bus = 0;
  int to_bus = 0;
  double reactance = 1.0;
  double capacity_mw = 0.0;
};

struct Generator {
  std::string id;
  int bus = 0;
  double pmax_mw = 0.0;
  double pmin_mw = 0.0;  // always 0 in this model
  double bid_per_mwh = 0.0;
  double emission_t_per_mwh = 0.0;
};

struct LoadProfile {
  int bus = 0;
  std::vector<double> mw;
};

/// Bus-by-period demand matrix (rows follow CaseData::buses order).
using LoadMatrix = Eigen::MatrixXd;

struct CaseData {
  std::string name;
  int periods = 1;
  int slack_bus = 0;
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  std::vector<LoadProfile> loads;

  std::size_t bus_count() const { return buses.size(); }
  std::size_t line_count() const { return lines.size(); }
  std::size_t generator_count() const { return generators.size(); }

  /// Position of bus `id` in `buses`; throws CaseValidationError if absent.
  std::size_t bus_index(int id) const {
    for (std::size_t i = 0; i < buses.size(); ++i) {
      if (buses[i].id == id) return i;
    }
    throw CaseValidationError("unknown bus id " + std::to_string(id));
  }

  LoadMatrix load_matrix() const {
    LoadMatrix d = LoadMatrix::Zero(static_cast<Eigen::Index>(buses.size()), periods);
    for (const auto& profile : loads) {
      const auto row = static_cast<Eigen::Index>(bus_index(profile.bus));
      for (int t = 0; t < periods; ++t) d(row, t) = profile.mw[static_cast<std::size_t>(t)];
    }
    return d;
  }

  /// Per-generator emission factors k_g in generator order.
  Vector emission_factors() const {
    Vector k(static_cast<Eigen::Index>(generators.size()));
    for (std::size_t g = 0; g < generators.size(); ++g) {
      k(static_cast<Eigen::Index>(g)) = generators[g].emission_t_per_mwh;
    }
    return k;
  }

  /// Bus-by-generator incidence (1 where generator g sits on bus i).
  Matrix generator_incidence() const {
    Matrix inc = Matrix::Zero(static_cast<Eigen::Index>(buses.size()),
                              static_cast<Eigen::Index>(generators.size()));
    for (std::size_t g = 0; g < generators.size(); ++g) {
      inc(static_cast<Eigen::Index>(bus_index(generators[g].bus)), static_cast<Eigen::Index>(g)) = 1.0;
    }
    return inc;
  }
};

namespace detail {

inline bool is_connected(const CaseData& c) {
  const std::size_t n = c.buses.size();
  if (n == 0) return false;
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& l : c.lines) {
    const auto a = c.bus_index(l.from_bus);
    const auto b = c.bus_index(l.to_bus);
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> q;
  q.push(0);
  seen[0] = true;
  std::size_t count = 1;
  while (!q.empty()) {
    const auto u = q.front();
    q.pop();
    for (auto v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        ++count;
        q.push(v);
      }
    }
  }
  return count == n;
}

}  // namespace detail

/// Checks every structural invariant of a case. Throws CaseValidationError
/// naming the first violation found.
inline void validate_case(const CaseData& c) {
  auto fail = [](const std::string& msg) { throw CaseValidationError(msg); };

  if (c.periods <= 0) fail("periods must be positive");
  if (c.buses.empty()) fail("case must contain at least one bus");

  std::set<int> ids;
  for (const auto& b : c.buses) {
    if (!ids.insert(b.id).second) fail("duplicate bus id " + std::to_string(b.id));
  }
  if (!ids.count(c.slack_bus)) fail("slack bus " + std::to_string(c.slack_bus) + " does not exist");

  for (const auto& l : c.lines) {
    if (!ids.count(l.from_bus) || !ids.count(l.to_bus)) {
      fail("line endpoint does not exist (" + std::to_string(l.from_bus) + "-" + std::to_string(l.to_bus) + ")");
    }
    if (l.from_bus == l.to_bus) fail("line endpoints must differ (bus " + std::to_string(l.from_bus) + ")");
    if (!(l.reactance > 0.0) || !std::isfinite(l.reactance)) fail("reactance must be positive");
    if (!(l.capacity_mw > 0.0) || !std::isfinite(l.capacity_mw)) fail("line capacity must be positive");
  }

  std::set<std::string> gen_ids;
  for (const auto& g : c.generators) {
    if (!gen_ids.insert(g.id).second) fail("duplicate generator id " + g.id);
    if (!ids.count(g.bus)) fail("generator " + g.id + " sits on unknown bus " + std::to_string(g.bus));
    if (g.pmin_mw != 0.0) fail("generator " + g.id + ": pmin must be 0");
    if (!(g.pmax_mw >= 0.0) || !std::isfinite(g.pmax_mw)) fail("generator " + g.id + ": pmax must be nonnegative");
    if (!std::isfinite(g.bid_per_mwh)) fail("generator " + g.id + ": bid must be finite");
    if (!(g.emission_t_per_mwh >= 0.0) || !std::isfinite(g.emission_t_per_mwh)) {
      fail("generator " + g.id + ": emission factor must be nonnegative");
    }
  }

  std::set<int> load_buses;
  for (const auto& p : c.loads) {
    if (!ids.count(p.bus)) fail("load on unknown bus " + std::to_string(p.bus));
    if (!load_buses.insert(p.bus).second) fail("more than one load profile on bus " + std::to_string(p.bus));
    if (p.mw.size() != static_cast<std::size_t>(c.periods)) {
      fail("load profile on bus " + std::to_string(p.bus) + " must have " + std::to_string(c.periods) + " entries");
    }
    for (double v : p.mw) {
      if (!(v >= 0.0) || !std::isfinite(v)) fail("load on bus " + std::to_string(p.bus) + " must be nonnegative");
    }
  }

  if (!detail::is_connected(c)) fail("network is not connected");

  double capacity = 0.0;
  for (const auto& g : c.generators) capacity += g.pmax_mw;
  for (int t = 0; t < c.periods; ++t) {
    double demand = 0.0;
    for (const auto& p : c.loads) demand += p.mw[static_cast<std::size_t>(t)];
    if (demand > capacity) {
      fail("infeasible capacity: period " + std::to_string(t + 1) + " load " + std::to_string(demand) +
           " MW exceeds total generation capacity " + std::to_string(capacity) + " MW");
    }
  }
}

/// Line-by-bus distribution factors against a slack reference.
struct PtdfMatrix {
  Matrix entries;  // rows = lines, cols = buses
  int slack_bus = 0;
  std::size_t slack_index = 0;

  /// Signed from->to line flows for a bus injection vector.
  Vector flows(const Vector& injections) const { return entries * injections; }
};

/// Builds the PTDF by inverting the reduced nodal susceptance matrix.
/// `slack_override` replaces the case's slack bus when given.
inline PtdfMatrix build_ptdf(const CaseData& c, std::optional<int> slack_override = std::nullopt) {
  const int slack = slack_override.value_or(c.slack_bus);
  const std::size_t n = c.bus_count();
  const std::size_t s = c.bus_index(slack);
  const auto nl = static_cast<Eigen::Index>(c.line_count());
  const auto nb = static_cast<Eigen::Index>(n);

  Matrix bbus = Matrix::Zero(nb, nb);
  for (const auto& l : c.lines) {
    const auto a = static_cast<Eigen::Index>(c.bus_index(l.from_bus));
    const auto b = static_cast<Eigen::Index>(c.bus_index(l.to_bus));
    const double y = 1.0 / l.reactance;
    bbus(a, a) += y;
    bbus(b, b) += y;
    bbus(a, b) -= y;
    bbus(b, a) -= y;
  }

  // Reduced system: drop slack row/column.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < nb; ++i) {
    if (static_cast<std::size_t>(i) != s) keep.push_back(i);
  }
  const auto nr = static_cast<Eigen::Index>(keep.size());
  Matrix reduced(nr, nr);
  for (Eigen::Index r = 0; r < nr; ++r) {
    for (Eigen::Index q = 0; q < nr; ++q) reduced(r, q) = bbus(keep[static_cast<std::size_t>(r)], keep[static_cast<std::size_t>(q)]);
  }

  // Angle sensitivities: theta = X * injection, slack angle fixed at 0.
  Matrix angles = Matrix::Zero(nb, nb);
  if (nr > 0) {
    Eigen::FullPivLU<Matrix> lu(reduced);
    if (lu.rank() < nr) throw NumericalError("singular network matrix (disconnected graph)");
    const Matrix inv = lu.inverse();
    for (Eigen::Index r = 0; r < nr; ++r) {
      for (Eigen::Index q = 0; q < nr; ++q) angles(keep[static_cast<std::size_t>(r)], keep[static_cast<std::size_t>(q)]) = inv(r, q);
    }
  }

  PtdfMatrix out;
  out.slack_bus = slack;
  out.slack_index = s;
  out.entries = Matrix::Zero(nl, nb);
  for (Eigen::Index l = 0; l < nl; ++l) {
    const auto& line = c.lines[static_cast<std::size_t>(l)];
    const auto a = static_cast<Eigen::Index>(c.bus_index(line.from_bus));
    const auto b = static_cast<Eigen::Index>(c.bus_index(line.to_bus));
    out.entries.row(l) = (angles.row(a) - angles.row(b)) / line.reactance;
  }
  out.entries.col(static_cast<Eigen::Index>(s)).setZero();
  return out;
}

}  // namespace carbon
