#pragma once

// One-sided (Hestenes) Jacobi SVD and truncated pseudoinverse solves.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace carbon {

struct SvdDiagnostics {
  std::vector<double> singular_values;  // descending
  Eigen::Index rank = 0;
  double truncation_tol = 0.0;
  double condition_estimate = 0.0;  // sigma_max / smallest retained sigma

  bool full_rank() const { return rank == static_cast<Eigen::Index>(singular_values.size()); }
};

/// Thin SVD  A = U diag(sigma) V'  with sigma sorted descending.
/// For A of shape m x n, k = min(m, n): U is m x k, V is n x k.
struct SvdFactorization {
  Eigen::MatrixXd u;
  Eigen::VectorXd sigma;
  Eigen::MatrixXd v;

  Eigen::Index rank(double rel_tol) const {
    if (sigma.size() == 0 || sigma(0) <= 0.0) return 0;
    const double cut = rel_tol * sigma(0);
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
      if (sigma(i) > cut) ++r;
    }
    return r;
  }

  SvdDiagnostics diagnostics(double rel_tol) const {
    SvdDiagnostics d;
    d.singular_values.assign(sigma.data(), sigma.data() + sigma.size());
    d.rank = rank(rel_tol);
    d.truncation_tol = rel_tol;
    d.condition_estimate = d.rank > 0 ? sigma(0) / sigma(d.rank - 1) : 0.0;
    return d;
  }

  /// V * Sigma^+ * U' * rhs, singular values at or below rel_tol * sigma_max dropped.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs, double rel_tol) const {
    const Eigen::Index r = rank(rel_tol);
    Eigen::MatrixXd proj = u.leftCols(r).transpose() * rhs;
    for (Eigen::Index i = 0; i < r; ++i) proj.row(i) /= sigma(i);
    return v.leftCols(r) * proj;
  }

  Eigen::MatrixXd pseudoinverse(double rel_tol) const {
    const Eigen::Index r = rank(rel_tol);
    Eigen::MatrixXd vs = v.leftCols(r);
    for (Eigen::Index i = 0; i < r; ++i) vs.col(i) /= sigma(i);
    return vs * u.leftCols(r).transpose();
  }
};

namespace detail {

// Orthogonalizes the columns of `work` (m >= n) by plane rotations,
// accumulating them into `v`.
inline void hestenes_sweeps(Eigen::MatrixXd& work, Eigen::MatrixXd& v, int max_sweeps) {
  const Eigen::Index n = work.cols();
  const double eps = std::numeric_limits<double>::epsilon();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double alpha = work.col(p).squaredNorm();
        const double beta = work.col(q).squaredNorm();
        const double gamma = work.col(p).dot(work.col(q));
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Eigen::Index i = 0; i < work.rows(); ++i) {
          const double ap = work(i, p);
          const double aq = work(i, q);
          work(i, p) = c * ap - s * aq;
          work(i, q) = s * ap + c * aq;
        }
        for (Eigen::Index i = 0; i < v.rows(); ++i) {
          const double vp = v(i, p);
          const double vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) return;
  }
}

inline SvdFactorization tall_jacobi_svd(const Eigen::MatrixXd& a, int max_sweeps) {
  const Eigen::Index n = a.cols();
  Eigen::MatrixXd work = a;
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  hestenes_sweeps(work, v, max_sweeps);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Eigen::VectorXd norms(n);
  for (Eigen::Index j = 0; j < n; ++j) norms(j) = work.col(j).norm();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return norms(x) > norms(y); });

  SvdFactorization f;
  f.u = Eigen::MatrixXd::Zero(a.rows(), n);
  f.sigma.resize(n);
  f.v.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index j = order[static_cast<std::size_t>(k)];
    f.sigma(k) = norms(j);
    f.v.col(k) = v.col(j);
    if (norms(j) > 0.0) f.u.col(k) = work.col(j) / norms(j);
  }
  return f;
}

}  // namespace detail

/// Thin SVD by one-sided Jacobi. Columns of U belonging to exactly-zero
/// singular values are left zero.
inline SvdFactorization jacobi_svd(const Eigen::MatrixXd& a, int max_sweeps = 80) {
  if (a.rows() >= a.cols()) return detail::tall_jacobi_svd(a, max_sweeps);
  SvdFactorization t = detail::tall_jacobi_svd(a.transpose(), max_sweeps);
  std::swap(t.u, t.v);
  return t;
}

}  // namespace carbon
