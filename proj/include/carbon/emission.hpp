#pragma once

// Marginal and average locational emission metrics.
//
// LMCE_{i,t} = K' dx/db_{i,t}, split into an energy part (balance
// right-hand side only) and a network part (bound right-hand sides only).
// LACE_{i,t} averages LMCE along the demand ray sigma * b*, sigma in [0, 1];
// LMCE is piecewise constant in sigma, so the average is an exact weighted
// sum over the segments between breakpoints where the binding set changes.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "carbon/clearing.hpp"
#include "carbon/errors.hpp"
#include "carbon/grid.hpp"
#include "carbon/sensitivity.hpp"
#include "carbon/simplex.hpp"

namespace carbon {

/// Emission factors (t/MWh) aligned with the dispatch vector of one period.
struct EmissionVector {
  Vector k;

  static EmissionVector from_case(const CaseData& c) { return EmissionVector{c.emission_factors()}; }
};

/// Rows = periods, columns = buses.
struct LmceResult {
  Matrix value;
  Matrix energy_part;
  Matrix network_part;
};

struct LaceOptions {
  double svd_tol = kDefaultSvdTol;
  int seed_points = 64;
  double tol_sigma = 1e-7;
  int max_breakpoints = 64;
};

struct LaceResult {
  Matrix value;       // periods x buses
  Matrix allocation;  // value * b*
  std::vector<std::vector<double>> breakpoints;  // per period: 0 = y_0 < ... < y_M = 1
  std::vector<Matrix> segment_lmce;              // per period: segments x buses
};

struct ConservationReport {
  double allocated = 0.0;  // sum_{i,t} LACE * b*
  double actual = 0.0;     // K' x(b*)
  double relative_gap = 0.0;
};

inline double total_emission(const EmissionVector& k, const Vector& dispatch) {
  if (k.k.size() != dispatch.size()) throw NumericalError("emission vector and dispatch differ in length");
  return k.k.dot(dispatch);
}

/// Sum over periods; `dispatch` is generators x periods.
inline double total_emission(const EmissionVector& k, const Matrix& dispatch) {
  if (k.k.size() != dispatch.rows()) throw NumericalError("emission vector and dispatch differ in length");
  return (k.k.transpose() * dispatch).sum();
}

/// LMCE per bus for one period.
inline Vector compute_lmce(const EmissionVector& k, const SensitivityResult& sens) {
  if (k.k.size() != sens.dx_db.rows()) throw NumericalError("emission vector and sensitivity differ in length");
  return sens.dx_db.transpose() * k.k;
}

inline LmceResult compute_lmce(const EmissionVector& k, const std::vector<SensitivityResult>& sens) {
  LmceResult out;
  if (sens.empty()) return out;
  out.value.resize(static_cast<Eigen::Index>(sens.size()), sens.front().dx_db.cols());
  for (std::size_t t = 0; t < sens.size(); ++t) out.value.row(static_cast<Eigen::Index>(t)) = compute_lmce(k, sens[t]).transpose();
  return out;
}

/// Energy/network parts reuse the factorization stored in `sens`.
inline void decompose_lmce(const EmissionVector& k, const KktSystem& sys, const SensitivityResult& sens, Vector& value,
                           Vector& energy, Vector& network) {
  const auto& b = sys.blocks;
  value = compute_lmce(k, sens);
  energy = sens.apply(sys.energy_rhs).middleRows(b.x_offset(), b.x_size).transpose() * k.k;
  network = sens.apply(sys.network_rhs).middleRows(b.x_offset(), b.x_size).transpose() * k.k;
}

/// Full LMCE with decomposition for every period of a solved clearing.
inline LmceResult decompose_lmce(const EmissionVector& k, const ClearingProblem& prob, const ClearingSolution& sol,
                                 double svd_tol = kDefaultSvdTol) {
  const auto periods = static_cast<Eigen::Index>(prob.periods());
  const auto buses = static_cast<Eigen::Index>(prob.buses);
  LmceResult out{Matrix(periods, buses), Matrix(periods, buses), Matrix(periods, buses)};
  for (std::size_t t = 0; t < prob.periods(); ++t) {
    const KktSystem sys = assemble_kkt_lp(prob.blocks[t], sol.periods[t]);
    const SensitivityResult sens = solve_sensitivity(sys, svd_tol);
    Vector v, e, n;
    decompose_lmce(k, sys, sens, v, e, n);
    const auto row = static_cast<Eigen::Index>(t);
    out.value.row(row) = v.transpose();
    out.energy_part.row(row) = e.transpose();
    out.network_part.row(row) = n.transpose();
  }
  return out;
}

/// Clears one period at an arbitrary demand vector and returns its LMCE.
class LmceProbe {
 public:
  LmceProbe(const CaseData& c, const PtdfMatrix& ptdf, double svd_tol = kDefaultSvdTol)
      : assembler_(c, ptdf), k_(EmissionVector::from_case(c)), svd_tol_(svd_tol) {}

  LpSolution clear(const Vector& demand, int period = 0) const { return solve_lp(assembler_.block(demand, period).lp); }

  Vector lmce(const Vector& demand, int period = 0) const {
    const PeriodProblem block = assembler_.block(demand, period);
    const LpSolution sol = solve_lp(block.lp);
    return compute_lmce(k_, solve_sensitivity(assemble_kkt_lp(block, sol), svd_tol_));
  }

  const EmissionVector& emission() const { return k_; }

 private:
  PeriodAssembler assembler_;
  EmissionVector k_;
  double svd_tol_;
};

namespace detail {

/// Refines a bisection bracket [lo, hi]. Inside a region the primal solution
/// is affine in sigma, and with demand entering only the right-hand side the
/// region ends where a slack of the left solution reaches zero; that crossing
/// is extrapolated from the left solution's sensitivities. The binding flags
/// use a tolerance and flip slightly before the exact crossing, so the
/// estimate may sit just past `hi`; anything up to `limit` (the end of the
/// seed interval) is accepted. Falls back to the bracket midpoint otherwise.
inline double polish_breakpoint(const PeriodProblem& block, const LpSolution& s, const Vector& demand, double lo,
                                double hi, double limit, double svd_tol) {
  const double mid = 0.5 * (lo + hi);
  try {
    const SensitivityResult sens = solve_sensitivity(assemble_kkt_lp(block, s), svd_tol);
    const Vector dx = sens.dx_db * demand;
    const Vector bdx = block.lp.ineq_matrix * dx;
    const Vector dw1 = block.upper_jacobian * demand - bdx;
    const Vector dw2 = bdx - block.lower_jacobian * demand;
    double step = std::numeric_limits<double>::infinity();
    // Rows sitting at a bound have slack exactly 0; only basic rows can cross.
    for (Eigen::Index k = 0; k < s.w1.size(); ++k) {
      if (s.w1(k) > 0.0 && dw1(k) < 0.0) step = std::min(step, s.w1(k) / -dw1(k));
      if (s.w2(k) > 0.0 && dw2(k) < 0.0) step = std::min(step, s.w2(k) / -dw2(k));
    }
    const double bp = lo + step;
    if (std::isfinite(bp) && bp >= lo - (hi - lo) && bp <= std::max(hi, limit)) return bp;
  } catch (const NumericalError&) {
  }
  return mid;
}

}  // namespace detail

/// Sigma values in (0, 1) where the optimal binding set changes along
/// sigma * demand, with 0 and 1 appended. Seeds a uniform grid, bisects every
/// interval whose end points disagree, then refines each bracket.
inline std::vector<double> find_breakpoints(const CaseData& c, const PtdfMatrix& ptdf, const Vector& demand, int period,
                                            const LaceOptions& opt = {}) {
  if (opt.seed_points < 1) throw CaseValidationError("sigma seed points must be positive");
  if (!(opt.tol_sigma > 0.0)) throw CaseValidationError("sigma tolerance must be positive");
  const PeriodAssembler assembler(c, ptdf);
  auto binding_at = [&](double sigma) { return solve_lp(assembler.block(sigma * demand, period).lp); };

  // At sigma = 0 every unit sits at zero output, so the scan starts just
  // above it.
  const double first = std::min(1e-6, 0.5 / opt.seed_points);
  const double edge = 10.0 * opt.tol_sigma;

  std::vector<double> found;
  double left = first;
  LpSolution left_sol = binding_at(left);
  for (int s = 1; s <= opt.seed_points; ++s) {
    const double right = static_cast<double>(s) / opt.seed_points;
    const LpSolution right_sol = binding_at(right);
    double lo = left;
    LpSolution lo_sol = left_sol;
    while (!lo_sol.same_binding_set(right_sol)) {
      double hi = right;
      while (hi - lo > opt.tol_sigma) {
        const double mid = 0.5 * (lo + hi);
        LpSolution mid_sol = binding_at(mid);
        if (mid_sol.same_binding_set(lo_sol)) {
          lo = mid;
          lo_sol = std::move(mid_sol);
        } else {
          hi = mid;
        }
      }
      const double bp = detail::polish_breakpoint(assembler.block(lo * demand, period), lo_sol, demand, lo, hi, right,
                                                        opt.svd_tol);
      if (bp > edge && bp < 1.0 - edge && (found.empty() || bp - found.back() > edge)) found.push_back(bp);
      if (static_cast<int>(found.size()) > opt.max_breakpoints) {
        throw NumericalError("excessive degeneracy: more than " + std::to_string(opt.max_breakpoints) +
                             " breakpoints in period " + std::to_string(period + 1));
      }
      if (hi >= right) break;
      lo = hi;
      lo_sol = binding_at(lo);
    }
    left = right;
    left_sol = right_sol;
  }

  std::vector<double> out;
  out.reserve(found.size() + 2);
  out.push_back(0.0);
  out.insert(out.end(), found.begin(), found.end());
  out.push_back(1.0);
  return out;
}

/// Breakpoints for every period of the case's demand matrix.
inline std::vector<std::vector<double>> find_breakpoints(const CaseData& c, const PtdfMatrix& ptdf,
                                                         const LoadMatrix& loads, const LaceOptions& opt = {}) {
  std::vector<std::vector<double>> out;
  for (Eigen::Index t = 0; t < loads.cols(); ++t) {
    out.push_back(find_breakpoints(c, ptdf, loads.col(t), static_cast<int>(t), opt));
  }
  return out;
}

/// LACE from segment-midpoint LMCE values weighted by segment length.
/// A bus with zero demand gets allocation 0 and the weighted LMCE as value.
inline LaceResult compute_lace(const CaseData& c, const PtdfMatrix& ptdf, const LoadMatrix& loads,
                               const std::vector<std::vector<double>>& breakpoints, const LaceOptions& opt = {}) {
  if (breakpoints.size() != static_cast<std::size_t>(loads.cols())) {
    throw CaseValidationError("one breakpoint list per period required");
  }
  const LmceProbe probe(c, ptdf, opt.svd_tol);
  const Eigen::Index nb = loads.rows();
  LaceResult out;
  out.value = Matrix::Zero(loads.cols(), nb);
  out.allocation = Matrix::Zero(loads.cols(), nb);
  out.breakpoints = breakpoints;
  for (Eigen::Index t = 0; t < loads.cols(); ++t) {
    const auto& y = breakpoints[static_cast<std::size_t>(t)];
    if (y.size() < 2 || y.front() != 0.0 || y.back() != 1.0) throw CaseValidationError("breakpoints must run from 0 to 1");
    const auto segments = static_cast<Eigen::Index>(y.size() - 1);
    Matrix seg(segments, nb);
    for (Eigen::Index m = 0; m < segments; ++m) {
      const double a = y[static_cast<std::size_t>(m)];
      const double b = y[static_cast<std::size_t>(m + 1)];
      if (!(b > a)) throw CaseValidationError("breakpoints must be strictly increasing");
      const Vector demand = 0.5 * (a + b) * loads.col(t);
      seg.row(m) = probe.lmce(demand, static_cast<int>(t)).transpose();
      out.value.row(t) += (b - a) * seg.row(m);
    }
    out.segment_lmce.push_back(std::move(seg));
    for (Eigen::Index i = 0; i < nb; ++i) out.allocation(t, i) = loads(i, t) == 0.0 ? 0.0 : out.value(t, i) * loads(i, t);
  }
  return out;
}

inline LaceResult compute_lace(const CaseData& c, const PtdfMatrix& ptdf, const LoadMatrix& loads,
                               const LaceOptions& opt = {}) {
  return compute_lace(c, ptdf, loads, find_breakpoints(c, ptdf, loads, opt), opt);
}

/// Midpoint-rule average of LMCE over `n_points` uniform sigma cells.
inline LaceResult compute_lace_riemann(const CaseData& c, const PtdfMatrix& ptdf, const LoadMatrix& loads, int n_points,
                                       double svd_tol = kDefaultSvdTol) {
  if (n_points < 1) throw CaseValidationError("Riemann point count must be positive");
  const LmceProbe probe(c, ptdf, svd_tol);
  const Eigen::Index nb = loads.rows();
  LaceResult out;
  out.value = Matrix::Zero(loads.cols(), nb);
  out.allocation = Matrix::Zero(loads.cols(), nb);
  for (Eigen::Index t = 0; t < loads.cols(); ++t) {
    Vector sum = Vector::Zero(nb);
    for (int j = 0; j < n_points; ++j) {
      const double sigma = (j + 0.5) / n_points;
      sum += probe.lmce(sigma * loads.col(t), static_cast<int>(t));
    }
    out.value.row(t) = (sum / n_points).transpose();
    for (Eigen::Index i = 0; i < nb; ++i) out.allocation(t, i) = loads(i, t) == 0.0 ? 0.0 : out.value(t, i) * loads(i, t);
  }
  return out;
}

inline ConservationReport verify_conservation(const LaceResult& lace, const LoadMatrix& loads, double actual) {
  ConservationReport r;
  r.actual = actual;
  for (Eigen::Index t = 0; t < lace.value.rows(); ++t) {
    for (Eigen::Index i = 0; i < lace.value.cols(); ++i) r.allocated += lace.value(t, i) * loads(i, t);
  }
  const double gap = std::abs(r.allocated - r.actual);
  r.relative_gap = gap == 0.0 ? 0.0 : gap / std::max(std::abs(r.actual), 1e-9);
  return r;
}

}  // namespace carbon
