#pragma once

// Carbon emission flow under proportional sharing.
//
// Power arriving at a bus (local generation plus line inflows) mixes
// perfectly, so every MW leaving the bus, whether to a line or to load,
// carries the bus intensity NCI_i:
//   (G_i + sum_in f_l) NCI_i = sum_{g at i} k_g p_g + sum_in f_l NCI_{send(l)}.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "carbon/errors.hpp"
#include "carbon/grid.hpp"

namespace carbon {

struct CefResult {
  Matrix nci;         // periods x buses, t/MWh
  Matrix bci;         // periods x lines, t/MWh (intensity of the sending bus)
  Matrix allocation;  // periods x buses, t
  Matrix flows;       // periods x lines, MW, signed from->to
};

inline constexpr double kBalanceTolerance = 1e-8;

/// Signed line flows for one period; injections must balance.
inline Vector compute_flows(const PtdfMatrix& ptdf, const Vector& injections) {
  const double scale = std::max(1.0, injections.size() > 0 ? injections.cwiseAbs().maxCoeff() : 0.0);
  if (std::abs(injections.sum()) > kBalanceTolerance * scale) {
    throw NumericalError("injection imbalance of " + std::to_string(injections.sum()) + " MW");
  }
  return ptdf.flows(injections);
}

/// Bus injections = generation at the bus minus demand.
inline Vector bus_injections(const CaseData& c, const Vector& dispatch, const Vector& demand) {
  return c.generator_incidence() * dispatch - demand;
}

namespace detail {

inline Vector cef_period(const CaseData& c, const Vector& dispatch, const Vector& demand, const Vector& flows,
                         Vector& bci) {
  const auto nb = static_cast<Eigen::Index>(c.bus_count());
  const auto nl = static_cast<Eigen::Index>(c.line_count());
  // Round-off flows and outputs (far below any physical MW) would otherwise
  // leave near-empty buses with a near-singular row.
  const double scale = std::max({1.0, dispatch.size() > 0 ? dispatch.cwiseAbs().maxCoeff() : 0.0,
                                 flows.size() > 0 ? flows.cwiseAbs().maxCoeff() : 0.0});
  const double cutoff = kBalanceTolerance * scale;
  auto clean = [cutoff](double v) { return std::abs(v) <= cutoff ? 0.0 : v; };
  Matrix mix = Matrix::Zero(nb, nb);
  Vector source = Vector::Zero(nb);
  for (std::size_t g = 0; g < c.generators.size(); ++g) {
    const auto i = static_cast<Eigen::Index>(c.bus_index(c.generators[g].bus));
    const double p = clean(dispatch(static_cast<Eigen::Index>(g)));
    mix(i, i) += p;
    source(i) += c.generators[g].emission_t_per_mwh * p;
  }
  std::vector<Eigen::Index> sender(static_cast<std::size_t>(nl));
  for (Eigen::Index l = 0; l < nl; ++l) {
    const auto& line = c.lines[static_cast<std::size_t>(l)];
    const auto a = static_cast<Eigen::Index>(c.bus_index(line.from_bus));
    const auto b = static_cast<Eigen::Index>(c.bus_index(line.to_bus));
    const double f = clean(flows(l));
    const Eigen::Index from = f >= 0.0 ? a : b;
    const Eigen::Index to = f >= 0.0 ? b : a;
    sender[static_cast<std::size_t>(l)] = from;
    const double mag = std::abs(f);
    mix(to, to) += mag;
    mix(to, from) -= mag;
  }
  // Buses with no throughput have no defined intensity; pin them to 0.
  for (Eigen::Index i = 0; i < nb; ++i) {
    if (mix(i, i) != 0.0) continue;
    if (demand(i) > 0.0) {
      throw NumericalError("singular carbon mixing system: bus " + std::to_string(c.buses[static_cast<std::size_t>(i)].id) +
                           " has load but no supply");
    }
    mix(i, i) = 1.0;
  }
  Eigen::FullPivLU<Matrix> lu(mix);
  if (lu.rank() < nb) throw NumericalError("singular carbon mixing system");
  const Vector nci = lu.solve(source);
  bci.resize(nl);
  for (Eigen::Index l = 0; l < nl; ++l) bci(l) = nci(sender[static_cast<std::size_t>(l)]);
  return nci;
}

}  // namespace detail

/// Proportional-sharing intensities and demand allocations for every period.
/// `dispatch` is generators x periods; flows are recomputed from PTDF.
inline CefResult cef_solve(const CaseData& c, const PtdfMatrix& ptdf, const Matrix& dispatch, const LoadMatrix& loads) {
  const auto nb = static_cast<Eigen::Index>(c.bus_count());
  const auto nl = static_cast<Eigen::Index>(c.line_count());
  const Eigen::Index periods = loads.cols();
  CefResult r{Matrix(periods, nb), Matrix(periods, nl), Matrix(periods, nb), Matrix(periods, nl)};
  for (Eigen::Index t = 0; t < periods; ++t) {
    const Vector p = dispatch.col(t);
    const Vector d = loads.col(t);
    const Vector flows = compute_flows(ptdf, bus_injections(c, p, d));
    Vector bci;
    const Vector nci = detail::cef_period(c, p, d, flows, bci);
    r.nci.row(t) = nci.transpose();
    r.bci.row(t) = bci.transpose();
    r.flows.row(t) = flows.transpose();
    r.allocation.row(t) = nci.cwiseProduct(d).transpose();
  }
  return r;
}

}  // namespace carbon
