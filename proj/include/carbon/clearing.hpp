#pragma once

// Bid-cost-minimizing DC market clearing, one LP per period.
//
// Per period t, with x = generator dispatch:
//   min  bid' x
//   s.t. 1' x = sum_i d_{i,t}                                   (pi)
//        -Fmax + PTDF d_t <= PTDF Cg x <= Fmax + PTDF d_t         (phi, psi)
//        0 <= x_g <= pmax_g                                      (phi, psi)
// Line rows come first, one two-sided row per line, then one capacity row
// per generator. The bound Jacobians w.r.t. nodal demand are PTDF for line
// rows and zero for capacity rows; the balance row has Jacobian 1'.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "carbon/errors.hpp"
#include "carbon/grid.hpp"
#include "carbon/simplex.hpp"

namespace carbon {

struct PeriodProblem {
  int period = 0;
  LinearProgram lp;
  Matrix eq_jacobian;     // d(eq_rhs)/d(demand): rows = eq rows, cols = buses
  Matrix upper_jacobian;  // d(ineq_upper)/d(demand)
  Matrix lower_jacobian;  // d(ineq_lower)/d(demand)
};

/// Block-diagonal clearing problem: periods are independent.
struct ClearingProblem {
  std::size_t buses = 0;
  std::size_t generators = 0;
  std::size_t lines = 0;
  std::vector<PeriodProblem> blocks;
  std::vector<std::string> row_labels;  // inequality row names, shared by all periods

  std::size_t periods() const { return blocks.size(); }
  std::size_t ineq_rows() const { return lines + generators; }
};

struct ClearingSolution {
  std::vector<LpSolution> periods;
  Matrix dispatch;  // generators x periods
  double objective = 0.0;
};

/// Shared per-case matrices; builds one period's LP for any demand vector.
class PeriodAssembler {
 public:
  PeriodAssembler(const CaseData& c, const PtdfMatrix& ptdf) {
    const auto nb = static_cast<Eigen::Index>(c.bus_count());
    const auto ng = static_cast<Eigen::Index>(c.generator_count());
    const auto nl = static_cast<Eigen::Index>(c.line_count());
    if (ptdf.entries.rows() != nl || ptdf.entries.cols() != nb) {
      throw CaseValidationError("PTDF dimensions do not match case");
    }
    buses_ = nb;
    lines_ = nl;
    ptdf_ = ptdf.entries;
    line_limits_.resize(nl);
    for (Eigen::Index l = 0; l < nl; ++l) line_limits_(l) = c.lines[static_cast<std::size_t>(l)].capacity_mw;
    cost_.resize(ng);
    pmax_.resize(ng);
    for (Eigen::Index g = 0; g < ng; ++g) {
      cost_(g) = c.generators[static_cast<std::size_t>(g)].bid_per_mwh;
      pmax_(g) = c.generators[static_cast<std::size_t>(g)].pmax_mw;
    }
    ineq_.resize(nl + ng, ng);
    ineq_.topRows(nl) = ptdf.entries * c.generator_incidence();
    ineq_.bottomRows(ng) = Matrix::Identity(ng, ng);
    bound_jac_ = Matrix::Zero(nl + ng, nb);
    bound_jac_.topRows(nl) = ptdf.entries;
  }

  PeriodProblem block(const Vector& demand, int period) const {
    if (demand.size() != buses_) throw CaseValidationError("demand vector must have one entry per bus");
    const Eigen::Index ng = cost_.size();
    PeriodProblem b;
    b.period = period;
    b.lp.cost = cost_;
    b.lp.eq_matrix = Matrix::Ones(1, ng);
    b.lp.eq_rhs = Vector::Constant(1, demand.sum());
    b.lp.ineq_matrix = ineq_;
    const Vector shift = ptdf_ * demand;
    b.lp.ineq_upper.resize(ineq_.rows());
    b.lp.ineq_lower.resize(ineq_.rows());
    b.lp.ineq_upper.head(lines_) = line_limits_ + shift;
    b.lp.ineq_lower.head(lines_) = -line_limits_ + shift;
    b.lp.ineq_upper.tail(ng) = pmax_;
    b.lp.ineq_lower.tail(ng).setZero();
    b.eq_jacobian = Matrix::Ones(1, buses_);
    b.upper_jacobian = bound_jac_;
    b.lower_jacobian = bound_jac_;
    return b;
  }

 private:
  Eigen::Index buses_ = 0;
  Eigen::Index lines_ = 0;
  Matrix ptdf_;
  Vector line_limits_;
  Vector cost_;
  Vector pmax_;
  Matrix ineq_;
  Matrix bound_jac_;
};

inline std::vector<std::string> clearing_row_labels(const CaseData& c) {
  std::vector<std::string> labels;
  for (const auto& l : c.lines) labels.push_back("line " + std::to_string(l.from_bus) + "-" + std::to_string(l.to_bus));
  for (const auto& g : c.generators) labels.push_back("capacity " + g.id);
  return labels;
}

/// Builds the per-period LP blocks for the given bus-by-period demand.
inline ClearingProblem assemble_clearing_lp(const CaseData& c, const PtdfMatrix& ptdf, const LoadMatrix& loads) {
  if (loads.rows() != static_cast<Eigen::Index>(c.bus_count()) || loads.cols() != c.periods) {
    throw CaseValidationError("load matrix must be " + std::to_string(c.bus_count()) + " x " + std::to_string(c.periods));
  }
  const PeriodAssembler assembler(c, ptdf);
  ClearingProblem prob;
  prob.buses = c.bus_count();
  prob.generators = c.generator_count();
  prob.lines = c.line_count();
  prob.row_labels = clearing_row_labels(c);
  for (int t = 0; t < c.periods; ++t) prob.blocks.push_back(assembler.block(loads.col(t), t));
  return prob;
}

inline LpSolution solve_period(const PeriodProblem& block, const std::vector<std::string>& labels = {},
                               const SimplexOptions& options = {}) {
  try {
    return solve_lp(block.lp, options);
  } catch (const InfeasibleError& e) {
    std::string msg = std::string(e.what()) + " (period " + std::to_string(block.period + 1) + ")";
    if (e.ineq_row() >= 0 && static_cast<std::size_t>(e.ineq_row()) < labels.size()) {
      msg += " [" + labels[static_cast<std::size_t>(e.ineq_row())] + "]";
    }
    throw InfeasibleError(msg, e.ineq_row());
  }
}

/// Solves every period block. Throws InfeasibleError naming the period/row.
inline ClearingSolution solve_clearing(const ClearingProblem& prob, const SimplexOptions& options = {}) {
  ClearingSolution sol;
  sol.dispatch = Matrix::Zero(static_cast<Eigen::Index>(prob.generators), static_cast<Eigen::Index>(prob.periods()));
  for (const auto& block : prob.blocks) {
    sol.periods.push_back(solve_period(block, prob.row_labels, options));
    sol.dispatch.col(block.period) = sol.periods.back().x;
    sol.objective += sol.periods.back().objective;
  }
  return sol;
}

}  // namespace carbon
