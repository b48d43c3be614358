#pragma once

#include <Eigen/Eigenvalues>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "redris/matching.hpp"
#include "redris/types.hpp"

namespace redris {

/**
 * @brief Projects an unconstrained matrix onto the full switching matrices.
 *
 * Greedy: repeatedly picks the unordered port pair (i, j) maximizing
 * Re{X(i, j)} + Re{X(j, i)} among pairs whose ports are both still free, ties
 * broken towards the lexicographically smallest (i, j). The diagonal and the
 * imaginary part never influence the result. Output is always a valid full
 * matching, whatever the input values.
 */
inline MatchingMatrix greedy_project(const CMatrix& x) {
  const int k = static_cast<int>(x.rows());
  if (x.cols() != k) throw std::invalid_argument("greedy_project: input must be square");
  if (k < 2 || k % 2 != 0) throw std::invalid_argument("greedy_project: port count must be even and at least 2");

  Matrix score(k, k);  // score(i, j) for i < j
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) score(i, j) = x(i, j).real() + x(j, i).real();

  MatchingMatrix m(k);
  std::vector<bool> free_port(k, true);
  for (int picked = 0; picked < k / 2; ++picked) {
    int bi = -1, bj = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) {
      if (!free_port[i]) continue;
      for (int j = i + 1; j < k; ++j) {
        if (!free_port[j]) continue;
        if (score(i, j) > best) {  // strict: keeps the first (smallest) pair on ties
          best = score(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    m.connect(bi, bj);
    free_port[bi] = free_port[bj] = false;
  }
  return m;
}

/**
 * @brief Exhaustive matching maximizer of Tr(X * W), for oracle use.
 *
 * Enumerates all (K - 1)!! full matchings. Refuses K > 10; the point is an
 * independent reference for small instances, not a production path.
 */
inline MatchingMatrix brute_force_matching(const Matrix& w) {
  const int k = static_cast<int>(w.rows());
  if (w.cols() != k) throw std::invalid_argument("brute_force_matching: weight matrix must be square");
  if (k < 2 || k % 2 != 0)
    throw std::invalid_argument("brute_force_matching: port count must be even and at least 2");
  if (k > 10) throw std::invalid_argument("brute_force_matching: refusing K > 10");

  std::vector<int> partner(k, MatchingMatrix::kUnpaired);
  std::vector<int> best_partner;
  double best = -std::numeric_limits<double>::infinity();

  auto recurse = [&](auto&& self, double acc) -> void {
    int i = 0;
    while (i < k && partner[i] != MatchingMatrix::kUnpaired) ++i;
    if (i == k) {
      if (acc > best) {
        best = acc;
        best_partner = partner;
      }
      return;
    }
    for (int j = i + 1; j < k; ++j) {
      if (partner[j] != MatchingMatrix::kUnpaired) continue;
      partner[i] = j;
      partner[j] = i;
      self(self, acc + w(i, j) + w(j, i));
      partner[i] = MatchingMatrix::kUnpaired;
      partner[j] = MatchingMatrix::kUnpaired;
    }
  };
  recurse(recurse, 0.0);
  return MatchingMatrix::from_partner_table(best_partner);
}

/** @brief Result of one regularized least-squares solve. */
struct RlsSolution {
  CMatrix x_tilde;   // minimizer of ||A X B - Z||_F^2 + gamma0 ||X - Xbar||_F^2
  double gamma_rls;  // K^2 / tr((C^H C + gamma0 I)^{-1}), C the lifted operator
};

/**
 * @brief Solves min_X ||A X B - Z||_F^2 + gamma0 ||X - Xbar||_F^2 in closed form.
 *
 * Works in the eigenbases of A^H A and B B^H, so the K^2 x K^2 lifted system
 * is never formed. gamma_rls > gamma0 whenever A and B are both nonzero.
 */
inline RlsSolution rls_solve(const CMatrix& a, const CMatrix& b, const CMatrix& z, const CMatrix& x_bar,
                             double gamma0) {
  const int k = static_cast<int>(a.cols());
  if (b.rows() != k || x_bar.rows() != k || x_bar.cols() != k || z.rows() != a.rows() || z.cols() != b.cols())
    throw std::invalid_argument("rls_solve: inconsistent dimensions");
  if (!(gamma0 > 0.0)) throw std::invalid_argument("rls_solve: gamma0 must be positive");

  Eigen::SelfAdjointEigenSolver<CMatrix> eig_a(a.adjoint() * a);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig_b(b * b.adjoint());
  if (eig_a.info() != Eigen::Success || eig_b.info() != Eigen::Success)
    throw std::runtime_error("rls_solve: eigendecomposition failed");
  const Vector lam = eig_a.eigenvalues().cwiseMax(0.0);
  const Vector mu = eig_b.eigenvalues().cwiseMax(0.0);
  const CMatrix& qa = eig_a.eigenvectors();
  const CMatrix& qb = eig_b.eigenvectors();

  const CMatrix rhs = a.adjoint() * z * b.adjoint() + gamma0 * x_bar;
  CMatrix y = qa.adjoint() * rhs * qb;
  double inv_trace = 0.0;
  for (int p = 0; p < k; ++p) {
    for (int q = 0; q < k; ++q) {
      const double denom = lam(p) * mu(q) + gamma0;
      y(p, q) /= denom;
      inv_trace += 1.0 / denom;
    }
  }
  return {qa * y * qb.adjoint(), static_cast<double>(k) * static_cast<double>(k) / inv_trace};
}

/**
 * @brief Default data-scaled regularizer 10 * tr(A^H A) tr(B B^H) / K^2.
 *
 * Ten times the mean eigenvalue of the lifted normal operator. Anchoring the
 * relaxation this strongly to the extrinsic prior keeps successive projected
 * matchings a few pair swaps apart; with loose regularization the iterates
 * jump between distant matchings and settle on markedly worse fixed points
 * once the matching has to do the spatial separation on its own.
 */
inline double default_gamma0(const CMatrix& a, const CMatrix& b) {
  const double k = static_cast<double>(a.cols());
  return 10.0 * a.squaredNorm() * b.squaredNorm() / (k * k);
}

/** @brief Per-iteration state of the alternating matching optimizer. */
struct OptimizerState {
  CMatrix x_bar;                       // extrinsic mean carried between iterations
  double gamma0 = 0.0;                 // regularizer actually used
  double gamma_ext = 0.0;              // extrinsic precision of the last iteration
  int iterations = 0;
  bool converged = false;              // stop rule fired before the iteration cap
  bool degenerate = false;             // extrinsic precision hit zero at least once
  std::vector<double> objective_trace; // ||A X_hat B - Z||_F^2 of init, then each iterate
};

struct MatchingOptResult {
  MatchingMatrix matching;
  OptimizerState state;
};

namespace detail {

/**
 * One extrinsic R-LS + projection step. Updates x_bar in place and returns the
 * projected matching. gamma_ext = 0 falls back to projecting the plain R-LS
 * solution (flagged degenerate).
 */
inline MatchingMatrix matching_step(const CMatrix& a, const CMatrix& b, const CMatrix& z, double gamma0,
                                    OptimizerState& st) {
  const RlsSolution rls = rls_solve(a, b, z, st.x_bar, gamma0);
  const double gamma_ext = rls.gamma_rls - gamma0;
  st.gamma0 = gamma0;
  st.gamma_ext = gamma_ext;
  CMatrix x_tilde;
  if (gamma_ext > 0.0) {
    x_tilde = (rls.gamma_rls * rls.x_tilde - gamma0 * st.x_bar) / gamma_ext;
  } else {
    st.degenerate = true;
    x_tilde = rls.x_tilde;
  }
  MatchingMatrix x_hat = greedy_project(x_tilde);
  st.x_bar = ((gamma0 + gamma_ext) * x_hat.dense() - gamma_ext * x_tilde) / gamma0;
  return x_hat;
}

inline double fit_objective(const CMatrix& a, const CMatrix& b, const CMatrix& z, const MatchingMatrix& x) {
  return (a * x.apply_rows(b) - z).squaredNorm();
}

}  // namespace detail

/**
 * @brief Alternating solver for min ||A X B - Z||_F^2 over full switching matrices.
 *
 * Iterates extrinsic R-LS relaxation and greedy projection from the given
 * initial matching, stopping when the iterate stops moving
 * (||X_t - X_{t-1}||_F^2 <= eps ||X_{t-1}||_F^2) or after t_max iterations.
 * Returns the best iterate encountered, the initial matching included.
 */
inline MatchingOptResult optimize_matching(const CMatrix& a, const CMatrix& b, const CMatrix& z, double gamma0,
                                           double eps, int t_max, const MatchingMatrix& init) {
  if (init.size() != a.cols()) throw std::invalid_argument("optimize_matching: init size mismatch");
  if (!init.is_full()) throw std::invalid_argument("optimize_matching: init must be a full matching");
  if (!(gamma0 > 0.0)) throw std::invalid_argument("optimize_matching: gamma0 must be positive");
  if (t_max < 0) throw std::invalid_argument("optimize_matching: t_max must be nonnegative");

  OptimizerState st;
  st.x_bar = init.dense();
  MatchingMatrix prev = init;
  MatchingMatrix best = init;
  double best_obj = detail::fit_objective(a, b, z, init);
  st.objective_trace.push_back(best_obj);

  for (int t = 1; t <= t_max; ++t) {
    MatchingMatrix cur = detail::matching_step(a, b, z, gamma0, st);
    st.iterations = t;
    const double obj = detail::fit_objective(a, b, z, cur);
    st.objective_trace.push_back(obj);
    if (obj < best_obj) {
      best_obj = obj;
      best = cur;
    }
    const double moved = cur.squared_distance(prev);
    const double ref = static_cast<double>(prev.connected_ports());
    prev = cur;
    if (moved <= eps * ref) {
      st.converged = true;
      break;
    }
  }
  return {best, st};
}

}  // namespace redris
