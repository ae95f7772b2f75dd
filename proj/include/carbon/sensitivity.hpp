#pragma once

// Demand sensitivities of a cleared market from the differentiated KKT system
//
//   [ 0    A    0    0  ] [dpi ]   [ dA_b       ]
//   [ A'   -Q  -B'   B' ] [dx  ] = [ 0          ]
//   [ 0   Psi B -W1  0  ] [dpsi]   [ Psi du/db  ]
//   [ 0   Phi B  0   W2 ] [dphi]   [ Phi dv/db  ]
//
// (Q = 0 for the LP clearing), solved with a truncated SVD pseudoinverse.
// Every inequality row is kept, binding or not; for an inactive row the
// complementarity equation pins dpsi (dphi) to zero.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "carbon/clearing.hpp"
#include "carbon/errors.hpp"
#include "carbon/grid.hpp"
#include "carbon/simplex.hpp"
#include "carbon/svd.hpp"

namespace carbon {

inline constexpr double kDefaultSvdTol = 1e-9;
inline constexpr double kDefaultFiniteDiffEps = 1e-4;
inline constexpr double kKktTolerance = 1e-8;

/// Row/column ranges of the four variable blocks in H.
struct KktBlocks {
  Eigen::Index pi_size = 0;
  Eigen::Index x_size = 0;
  Eigen::Index ineq_size = 0;

  Eigen::Index pi_offset() const { return 0; }
  Eigen::Index x_offset() const { return pi_size; }
  Eigen::Index psi_offset() const { return pi_size + x_size; }
  Eigen::Index phi_offset() const { return pi_size + x_size + ineq_size; }
  Eigen::Index dimension() const { return pi_size + x_size + 2 * ineq_size; }
};

struct KktSystem {
  int period = 0;
  Matrix h;
  Matrix rhs;          // one column per bus: energy_rhs + network_rhs
  Matrix energy_rhs;   // balance block only
  Matrix network_rhs;  // bound blocks only
  KktBlocks blocks;
};

struct SensitivityResult {
  int period = 0;
  Matrix dz;  // full solution, one column per bus
  Matrix dx_db;
  Matrix dpi_db;
  Matrix dpsi_db;
  Matrix dphi_db;
  SvdDiagnostics svd;
  SvdFactorization factorization;
  double truncation_tol = kDefaultSvdTol;

  /// Applies the stored pseudoinverse to further right-hand sides.
  Matrix apply(const Matrix& rhs) const { return factorization.solve(rhs, truncation_tol); }
};

namespace detail {

inline void check_kkt_consistency(const LinearProgram& lp, const LpSolution& s, const Matrix* q) {
  Vector r = lp.cost;
  if (q != nullptr) r += (*q) * s.x;
  if (lp.eq_rows() > 0) r -= lp.eq_matrix.transpose() * s.pi;
  if (lp.ineq_rows() > 0) r += lp.ineq_matrix.transpose() * (s.psi - s.phi);
  const double scale = std::max(1.0, lp.cost.size() > 0 ? lp.cost.cwiseAbs().maxCoeff() : 0.0);
  const double stationarity = r.size() > 0 ? r.cwiseAbs().maxCoeff() : 0.0;
  if (stationarity > kKktTolerance * scale) {
    throw NumericalError("solution not KKT-consistent (stationarity residual " + std::to_string(stationarity) + ")");
  }
  for (Eigen::Index k = 0; k < lp.ineq_rows(); ++k) {
    if (!std::isfinite(s.w1(k)) || !std::isfinite(s.w2(k))) {
      throw NumericalError("solution not KKT-consistent (non-finite slack on row " + std::to_string(k) + ")");
    }
    const double tol = kKktTolerance * std::max(1.0, std::abs(s.psi(k)) + std::abs(s.phi(k)));
    if (s.psi(k) < 0.0 || s.phi(k) < 0.0 || s.w1(k) < -tol || s.w2(k) < -tol || std::abs(s.psi(k) * s.w1(k)) > tol ||
        std::abs(s.phi(k) * s.w2(k)) > tol) {
      throw NumericalError("solution not KKT-consistent (complementarity violated on row " + std::to_string(k) + ")");
    }
  }
}

inline KktSystem assemble_kkt(const PeriodProblem& block, const LpSolution& s, const Matrix* q) {
  const LinearProgram& lp = block.lp;
  const Eigen::Index m = lp.eq_rows();
  const Eigen::Index n = lp.variables();
  const Eigen::Index r = lp.ineq_rows();
  if (s.x.size() != n || s.pi.size() != m || s.psi.size() != r || s.phi.size() != r) {
    throw NumericalError("solution dimensions do not match problem");
  }
  check_kkt_consistency(lp, s, q);

  KktSystem sys;
  sys.period = block.period;
  sys.blocks = KktBlocks{m, n, r};
  const Eigen::Index dim = sys.blocks.dimension();
  const Eigen::Index ox = sys.blocks.x_offset();
  const Eigen::Index opsi = sys.blocks.psi_offset();
  const Eigen::Index ophi = sys.blocks.phi_offset();

  sys.h = Matrix::Zero(dim, dim);
  // Balance rows.
  sys.h.block(0, ox, m, n) = lp.eq_matrix;
  // Stationarity rows.
  sys.h.block(ox, 0, n, m) = lp.eq_matrix.transpose();
  if (q != nullptr) sys.h.block(ox, ox, n, n) -= *q;
  sys.h.block(ox, opsi, n, r) = -lp.ineq_matrix.transpose();
  sys.h.block(ox, ophi, n, r) = lp.ineq_matrix.transpose();
  // Complementarity rows.
  sys.h.block(opsi, ox, r, n) = s.psi.asDiagonal() * lp.ineq_matrix;
  sys.h.block(opsi, opsi, r, r) = -Matrix(s.w1.asDiagonal());
  sys.h.block(ophi, ox, r, n) = s.phi.asDiagonal() * lp.ineq_matrix;
  sys.h.block(ophi, ophi, r, r) = Matrix(s.w2.asDiagonal());

  const Eigen::Index buses = block.eq_jacobian.cols();
  sys.energy_rhs = Matrix::Zero(dim, buses);
  sys.network_rhs = Matrix::Zero(dim, buses);
  sys.energy_rhs.block(0, 0, m, buses) = block.eq_jacobian;
  sys.network_rhs.block(opsi, 0, r, buses) = s.psi.asDiagonal() * block.upper_jacobian;
  sys.network_rhs.block(ophi, 0, r, buses) = s.phi.asDiagonal() * block.lower_jacobian;
  // Disjoint supports, so the sum is exact.
  sys.rhs = sys.energy_rhs + sys.network_rhs;
  return sys;
}

}  // namespace detail

/// Right-hand side for a unit demand increase at `bus_index`.
inline Vector build_perturbation_rhs(const PeriodProblem& block, const LpSolution& s, std::size_t bus_index) {
  if (bus_index >= static_cast<std::size_t>(block.eq_jacobian.cols())) {
    throw CaseValidationError("unknown bus index " + std::to_string(bus_index));
  }
  const Eigen::Index m = block.lp.eq_rows();
  const Eigen::Index n = block.lp.variables();
  const Eigen::Index r = block.lp.ineq_rows();
  const auto col = static_cast<Eigen::Index>(bus_index);
  Vector rho = Vector::Zero(m + n + 2 * r);
  rho.head(m) = block.eq_jacobian.col(col);
  rho.segment(m + n, r) = s.psi.cwiseProduct(block.upper_jacobian.col(col));
  rho.segment(m + n + r, r) = s.phi.cwiseProduct(block.lower_jacobian.col(col));
  return rho;
}

inline Vector build_perturbation_rhs(const ClearingProblem& prob, const ClearingSolution& sol, std::size_t bus_index,
                                     std::size_t period) {
  if (period >= prob.periods()) throw CaseValidationError("unknown period " + std::to_string(period + 1));
  return build_perturbation_rhs(prob.blocks[period], sol.periods[period], bus_index);
}

/// KKT system of the LP clearing. Refuses solutions that are not KKT-consistent.
inline KktSystem assemble_kkt_lp(const PeriodProblem& block, const LpSolution& s) {
  return detail::assemble_kkt(block, s, nullptr);
}

/// KKT system for a quadratic objective 1/2 x'Qx + c'x over the same constraints.
inline KktSystem assemble_kkt_qp(const Matrix& q, const PeriodProblem& block, const LpSolution& s) {
  const Eigen::Index n = block.lp.variables();
  if (q.rows() != n || q.cols() != n) throw NumericalError("Q must be square with one row per variable");
  const double qscale = std::max(1.0, n > 0 ? q.cwiseAbs().maxCoeff() : 0.0);
  if (n > 0 && (q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * qscale) {
    throw NumericalError("Q must be symmetric");
  }
  return detail::assemble_kkt(block, s, &q);
}

inline SensitivityResult solve_sensitivity(const KktSystem& sys, double tol = kDefaultSvdTol) {
  SensitivityResult out;
  out.period = sys.period;
  out.truncation_tol = tol;
  out.factorization = jacobi_svd(sys.h);
  out.svd = out.factorization.diagnostics(tol);
  out.dz = out.factorization.solve(sys.rhs, tol);
  const auto& b = sys.blocks;
  out.dpi_db = out.dz.middleRows(b.pi_offset(), b.pi_size);
  out.dx_db = out.dz.middleRows(b.x_offset(), b.x_size);
  out.dpsi_db = out.dz.middleRows(b.psi_offset(), b.ineq_size);
  out.dphi_db = out.dz.middleRows(b.phi_offset(), b.ineq_size);
  return out;
}

/// Sensitivities for every period of a solved clearing.
inline std::vector<SensitivityResult> clearing_sensitivities(const ClearingProblem& prob, const ClearingSolution& sol,
                                                             double tol = kDefaultSvdTol) {
  std::vector<SensitivityResult> out;
  for (std::size_t t = 0; t < prob.periods(); ++t) {
    out.push_back(solve_sensitivity(assemble_kkt_lp(prob.blocks[t], sol.periods[t]), tol));
  }
  return out;
}

/// Central-difference dispatch sensitivity from two LP re-solves at
/// demand +/- eps on one bus. Throws BreakpointStraddleError when the two
/// solves disagree on the binding set.
inline Vector finite_diff_sensitivity(const CaseData& c, const PtdfMatrix& ptdf, const LoadMatrix& loads,
                                      std::size_t bus_index, int period, double eps = kDefaultFiniteDiffEps) {
  if (bus_index >= c.bus_count()) throw CaseValidationError("unknown bus index " + std::to_string(bus_index));
  if (period < 0 || period >= loads.cols()) throw CaseValidationError("unknown period " + std::to_string(period + 1));
  if (!(eps > 0.0)) throw CaseValidationError("eps must be positive");
  const PeriodAssembler assembler(c, ptdf);
  Vector up = loads.col(period);
  Vector down = loads.col(period);
  up(static_cast<Eigen::Index>(bus_index)) += eps;
  down(static_cast<Eigen::Index>(bus_index)) -= eps;
  const LpSolution plus = solve_lp(assembler.block(up, period).lp);
  const LpSolution minus = solve_lp(assembler.block(down, period).lp);
  if (!plus.same_binding_set(minus)) {
    throw BreakpointStraddleError("breakpoint straddled, reduce eps or move base point");
  }
  return (plus.x - minus.x) / (2.0 * eps);
}

}  // namespace carbon
