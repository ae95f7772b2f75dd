#pragma once

// Dense bounded-variable primal simplex with Bland's rule.
//
// Solves   min c'x   s.t.  A x = b,   lower <= B x <= upper
// with x free. Each inequality row k gets a row-activity variable s_k = B_k x
// bounded by [lower_k, upper_k], so the working problem is
//
//   [A  0] [x]   [b]
//   [B -I] [s] = [0],   lower <= s <= upper.
//
// Multiplier convention (matches the differentiated KKT system):
//   c - A'pi + B'psi - B'phi = 0,  psi, phi >= 0,
//   psi_k (upper_k - B_k x) = 0,   phi_k (B_k x - lower_k) = 0.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "carbon/errors.hpp"

namespace carbon {

struct LinearProgram {
  Eigen::VectorXd cost;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd ineq_matrix;
  Eigen::VectorXd ineq_lower;
  Eigen::VectorXd ineq_upper;

  Eigen::Index variables() const { return cost.size(); }
  Eigen::Index eq_rows() const { return eq_matrix.rows(); }
  Eigen::Index ineq_rows() const { return ineq_matrix.rows(); }
};

struct LpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd pi;
  Eigen::VectorXd psi;  // upper-bound multipliers
  Eigen::VectorXd phi;  // lower-bound multipliers
  Eigen::VectorXd w1;   // upper slack: upper - Bx
  Eigen::VectorXd w2;   // lower slack: Bx - lower
  double objective = 0.0;
  std::vector<bool> binding_upper;
  std::vector<bool> binding_lower;
  int iterations = 0;

  bool same_binding_set(const LpSolution& other) const {
    return binding_upper == other.binding_upper && binding_lower == other.binding_lower;
  }
};

struct SimplexOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-11;
  /// Row flagged binding when slack < binding_tol * max(1, |bound|).
  double binding_tol = 1e-7;
  int max_iterations = 10000;
};

namespace detail {

class BoundedSimplex {
 public:
  enum class Status { Basic, AtLower, AtUpper, FreeZero };

  BoundedSimplex(const LinearProgram& lp, const SimplexOptions& opt) : lp_(lp), opt_(opt) {
    n_ = lp.variables();
    meq_ = lp.eq_rows();
    mineq_ = lp.ineq_rows();
    m_ = meq_ + mineq_;
    nstruct_ = n_ + mineq_;
    ntotal_ = nstruct_ + m_;

    matrix_ = Eigen::MatrixXd::Zero(m_, ntotal_);
    if (meq_ > 0) matrix_.block(0, 0, meq_, n_) = lp.eq_matrix;
    if (mineq_ > 0) {
      matrix_.block(meq_, 0, mineq_, n_) = lp.ineq_matrix;
      matrix_.block(meq_, n_, mineq_, mineq_) = -Eigen::MatrixXd::Identity(mineq_, mineq_);
    }
    rhs_ = Eigen::VectorXd::Zero(m_);
    if (meq_ > 0) rhs_.head(meq_) = lp.eq_rhs;

    const double inf = std::numeric_limits<double>::infinity();
    lower_ = Eigen::VectorXd::Constant(ntotal_, -inf);
    upper_ = Eigen::VectorXd::Constant(ntotal_, inf);
    if (mineq_ > 0) {
      lower_.segment(n_, mineq_) = lp.ineq_lower;
      upper_.segment(n_, mineq_) = lp.ineq_upper;
    }
    lower_.tail(m_).setZero();

    status_.assign(static_cast<std::size_t>(ntotal_), Status::FreeZero);
    value_ = Eigen::VectorXd::Zero(ntotal_);
    for (Eigen::Index j = 0; j < nstruct_; ++j) {
      if (std::isfinite(lower_(j))) {
        set_status(j, Status::AtLower);
        value_(j) = lower_(j);
      } else if (std::isfinite(upper_(j))) {
        set_status(j, Status::AtUpper);
        value_(j) = upper_(j);
      }
    }
  }

  LpSolution solve() {
    for (Eigen::Index j = 0; j < nstruct_; ++j) {
      if (lower_(j) > upper_(j)) {
        throw InfeasibleError("infeasible: inequality row " + std::to_string(j - n_) + " has lower bound above upper",
                              static_cast<long>(j - n_));
      }
    }

    // Phase 1: artificials absorb the residual of the initial point.
    Eigen::VectorXd residual = rhs_ - matrix_.leftCols(nstruct_) * value_.head(nstruct_);
    basis_.resize(static_cast<std::size_t>(m_));
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index a = nstruct_ + i;
      matrix_(i, a) = residual(i) >= 0.0 ? 1.0 : -1.0;
      value_(a) = std::abs(residual(i));
      set_status(a, Status::Basic);
      basis_[static_cast<std::size_t>(i)] = a;
    }
    Eigen::VectorXd phase1_cost = Eigen::VectorXd::Zero(ntotal_);
    phase1_cost.tail(m_).setOnes();
    run(phase1_cost);

    const double infeas = value_.tail(m_).sum();
    const double scale = std::max(1.0, rhs_.cwiseAbs().maxCoeff() + (mineq_ > 0 ? finite_abs_max() : 0.0));
    if (infeas > opt_.feasibility_tol * scale) {
      Eigen::Index worst = 0;
      value_.tail(m_).maxCoeff(&worst);
      const std::string row = worst < meq_ ? "equality row " + std::to_string(worst)
                                           : "inequality row " + std::to_string(worst - meq_);
      throw InfeasibleError("infeasible: cannot satisfy " + row, worst < meq_ ? -1 : static_cast<long>(worst - meq_));
    }

    // Phase 2: artificials are pinned to zero.
    for (Eigen::Index a = nstruct_; a < ntotal_; ++a) {
      upper_(a) = 0.0;
      if (status_[static_cast<std::size_t>(a)] != Status::Basic) {
        set_status(a, Status::AtLower);
        value_(a) = 0.0;
      }
    }
    drive_out_artificials();

    Eigen::VectorXd phase2_cost = Eigen::VectorXd::Zero(ntotal_);
    phase2_cost.head(n_) = lp_.cost;
    run(phase2_cost);
    return extract(phase2_cost);
  }

 private:
  double finite_abs_max() const {
    double m = 0.0;
    for (Eigen::Index j = n_; j < nstruct_; ++j) {
      if (std::isfinite(lower_(j))) m = std::max(m, std::abs(lower_(j)));
      if (std::isfinite(upper_(j))) m = std::max(m, std::abs(upper_(j)));
    }
    return m;
  }

  void set_status(Eigen::Index j, Status s) { status_[static_cast<std::size_t>(j)] = s; }
  Status status(Eigen::Index j) const { return status_[static_cast<std::size_t>(j)]; }

  Eigen::MatrixXd basis_matrix() const {
    Eigen::MatrixXd bm(m_, m_);
    for (Eigen::Index i = 0; i < m_; ++i) bm.col(i) = matrix_.col(basis_[static_cast<std::size_t>(i)]);
    return bm;
  }

  void refresh_basic_values(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu) {
    Eigen::VectorXd r = rhs_;
    for (Eigen::Index j = 0; j < ntotal_; ++j) {
      if (status(j) != Status::Basic && value_(j) != 0.0) r -= matrix_.col(j) * value_(j);
    }
    const Eigen::VectorXd xb = lu.solve(r);
    for (Eigen::Index i = 0; i < m_; ++i) value_(basis_[static_cast<std::size_t>(i)]) = xb(i);
  }

  void run(const Eigen::VectorXd& cost) {
    if (m_ == 0) {
      // No rows: only free variables; bounded iff cost vanishes.
      for (Eigen::Index j = 0; j < ntotal_; ++j) {
        if (status(j) == Status::FreeZero && std::abs(cost(j)) > opt_.optimality_tol) {
          throw NumericalError("unbounded LP");
        }
      }
      return;
    }
    for (int iter = 0;; ++iter) {
      if (iter > opt_.max_iterations) throw NumericalError("simplex iteration limit reached");
      const Eigen::MatrixXd bm = basis_matrix();
      const Eigen::PartialPivLU<Eigen::MatrixXd> lu(bm);
      refresh_basic_values(lu);

      Eigen::VectorXd cb(m_);
      for (Eigen::Index i = 0; i < m_; ++i) cb(i) = cost(basis_[static_cast<std::size_t>(i)]);
      const Eigen::VectorXd duals = bm.transpose().partialPivLu().solve(cb);

      // Bland: lowest-index eligible entering variable.
      Eigen::Index entering = -1;
      double direction = 0.0;
      for (Eigen::Index j = 0; j < ntotal_; ++j) {
        const Status s = status(j);
        if (s == Status::Basic) continue;
        if (lower_(j) == upper_(j)) continue;  // fixed
        const double d = cost(j) - duals.dot(matrix_.col(j));
        if ((s == Status::AtLower || s == Status::FreeZero) && d < -opt_.optimality_tol) {
          entering = j;
          direction = 1.0;
          break;
        }
        if ((s == Status::AtUpper || s == Status::FreeZero) && d > opt_.optimality_tol) {
          entering = j;
          direction = -1.0;
          break;
        }
      }
      if (entering < 0) {
        iterations_ += iter;
        return;
      }

      const Eigen::VectorXd alpha = lu.solve(matrix_.col(entering));

      // Ratio test; ties resolved toward the lowest variable index.
      const double inf = std::numeric_limits<double>::infinity();
      double best = inf;
      Eigen::Index leave_pos = -1;  // -1 with finite best means bound flip
      Eigen::Index leave_var = std::numeric_limits<Eigen::Index>::max();
      bool leave_to_upper = false;

      auto consider = [&](double t, Eigen::Index pos, Eigen::Index var, bool to_upper) {
        t = std::max(t, 0.0);
        const double tie = 1e-12 * (1.0 + std::abs(t));
        if (t < best - tie || (t <= best + tie && var < leave_var)) {
          best = t;
          leave_pos = pos;
          leave_var = var;
          leave_to_upper = to_upper;
        }
      };

      if (std::isfinite(lower_(entering)) && std::isfinite(upper_(entering))) {
        consider(upper_(entering) - lower_(entering), -1, entering, direction > 0);
      }
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double delta = -direction * alpha(i);
        if (std::abs(delta) <= opt_.pivot_tol) continue;
        const Eigen::Index var = basis_[static_cast<std::size_t>(i)];
        if (delta < 0.0 && std::isfinite(lower_(var))) {
          consider((value_(var) - lower_(var)) / -delta, i, var, false);
        } else if (delta > 0.0 && std::isfinite(upper_(var))) {
          consider((upper_(var) - value_(var)) / delta, i, var, true);
        }
      }
      if (!std::isfinite(best)) throw NumericalError("unbounded LP");

      value_(entering) += direction * best;
      if (leave_pos < 0) {
        const bool to_upper = direction > 0;
        set_status(entering, to_upper ? Status::AtUpper : Status::AtLower);
        value_(entering) = to_upper ? upper_(entering) : lower_(entering);
        continue;
      }
      const Eigen::Index out = basis_[static_cast<std::size_t>(leave_pos)];
      set_status(out, leave_to_upper ? Status::AtUpper : Status::AtLower);
      value_(out) = leave_to_upper ? upper_(out) : lower_(out);
      basis_[static_cast<std::size_t>(leave_pos)] = entering;
      set_status(entering, Status::Basic);
    }
  }

  void drive_out_artificials() {
    for (Eigen::Index pos = 0; pos < m_; ++pos) {
      if (basis_[static_cast<std::size_t>(pos)] < nstruct_) continue;
      const Eigen::MatrixXd bm = basis_matrix();
      const Eigen::MatrixXd binv_row = bm.transpose().partialPivLu().solve(Eigen::VectorXd::Unit(m_, pos));
      for (Eigen::Index j = 0; j < nstruct_; ++j) {
        if (status(j) == Status::Basic) continue;
        if (std::abs(binv_row.col(0).dot(matrix_.col(j))) > 1e-9) {
          const Eigen::Index out = basis_[static_cast<std::size_t>(pos)];
          set_status(out, Status::AtLower);
          value_(out) = 0.0;
          basis_[static_cast<std::size_t>(pos)] = j;
          set_status(j, Status::Basic);
          break;
        }
      }
    }
  }

  LpSolution extract(const Eigen::VectorXd& cost) {
    const Eigen::MatrixXd bm = basis_matrix();
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(bm);
    refresh_basic_values(lu);
    Eigen::VectorXd cb(m_);
    for (Eigen::Index i = 0; i < m_; ++i) cb(i) = cost(basis_[static_cast<std::size_t>(i)]);
    const Eigen::VectorXd duals = m_ > 0 ? Eigen::VectorXd(bm.transpose().partialPivLu().solve(cb)) : Eigen::VectorXd();

    LpSolution sol;
    sol.iterations = iterations_;
    sol.x = value_.head(n_);
    sol.pi = duals.head(meq_);
    sol.psi = Eigen::VectorXd::Zero(mineq_);
    sol.phi = Eigen::VectorXd::Zero(mineq_);
    sol.w1 = Eigen::VectorXd::Zero(mineq_);
    sol.w2 = Eigen::VectorXd::Zero(mineq_);
    sol.binding_upper.assign(static_cast<std::size_t>(mineq_), false);
    sol.binding_lower.assign(static_cast<std::size_t>(mineq_), false);
    for (Eigen::Index k = 0; k < mineq_; ++k) {
      const Eigen::Index j = n_ + k;
      const double q = duals(meq_ + k);
      const bool fixed = lower_(j) == upper_(j);
      const Status st = status(j);
      if (st == Status::AtUpper || (fixed && st != Status::Basic)) sol.psi(k) = std::max(-q, 0.0);
      if (st == Status::AtLower || (fixed && st != Status::Basic)) sol.phi(k) = std::max(q, 0.0);
      if (!fixed && ((st == Status::AtUpper && q > opt_.optimality_tol) || (st == Status::AtLower && q < -opt_.optimality_tol))) {
        throw NumericalError("simplex returned a non-optimal basis");
      }
      const double s = value_(j);
      sol.w1(k) = std::max(0.0, lp_.ineq_upper(k) - s);
      sol.w2(k) = std::max(0.0, s - lp_.ineq_lower(k));
      if (status(j) == Status::AtUpper) sol.w1(k) = 0.0;
      if (status(j) == Status::AtLower) sol.w2(k) = 0.0;
      sol.binding_upper[static_cast<std::size_t>(k)] =
          sol.w1(k) < opt_.binding_tol * std::max(1.0, std::abs(lp_.ineq_upper(k)));
      sol.binding_lower[static_cast<std::size_t>(k)] =
          sol.w2(k) < opt_.binding_tol * std::max(1.0, std::abs(lp_.ineq_lower(k)));
    }
    sol.objective = lp_.cost.dot(sol.x);
    return sol;
  }

  const LinearProgram& lp_;
  SimplexOptions opt_;
  Eigen::Index n_ = 0, meq_ = 0, mineq_ = 0, m_ = 0, nstruct_ = 0, ntotal_ = 0;
  Eigen::MatrixXd matrix_;
  Eigen::VectorXd rhs_, lower_, upper_, value_;
  std::vector<Status> status_;
  std::vector<Eigen::Index> basis_;
  int iterations_ = 0;
};

}  // namespace detail

/// Solves the LP to an optimal basic solution. Deterministic for fixed input.
/// Throws InfeasibleError or NumericalError (unbounded, iteration limit).
inline LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options = {}) {
  if (lp.eq_matrix.cols() != lp.variables() && lp.eq_rows() > 0) throw NumericalError("dimension mismatch in equality block");
  if (lp.ineq_rows() > 0 && lp.ineq_matrix.cols() != lp.variables()) throw NumericalError("dimension mismatch in inequality block");
  if (lp.eq_rhs.size() != lp.eq_rows() || lp.ineq_lower.size() != lp.ineq_rows() || lp.ineq_upper.size() != lp.ineq_rows()) {
    throw NumericalError("dimension mismatch in LP bounds");
  }
  detail::BoundedSimplex simplex(lp, options);
  return simplex.solve();
}

/// Dual objective b'pi - u'psi + l'phi (finite bounds only).
inline double dual_objective(const LinearProgram& lp, const LpSolution& s) {
  double v = lp.eq_rows() > 0 ? lp.eq_rhs.dot(s.pi) : 0.0;
  for (Eigen::Index k = 0; k < lp.ineq_rows(); ++k) {
    if (s.psi(k) != 0.0) v -= lp.ineq_upper(k) * s.psi(k);
    if (s.phi(k) != 0.0) v += lp.ineq_lower(k) * s.phi(k);
  }
  return v;
}

/// Infinity norm of c - A'pi + B'psi - B'phi.
inline double stationarity_residual(const LinearProgram& lp, const LpSolution& s) {
  Eigen::VectorXd r = lp.cost;
  if (lp.eq_rows() > 0) r -= lp.eq_matrix.transpose() * s.pi;
  if (lp.ineq_rows() > 0) r += lp.ineq_matrix.transpose() * (s.psi - s.phi);
  return r.size() > 0 ? r.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace carbon
