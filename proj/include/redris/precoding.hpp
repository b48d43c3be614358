#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "redris/types.hpp"

namespace redris {

/** @brief Transmit filter with its receive scaling; ||f||_F^2 = power by construction. */
struct Precoder {
  CMatrix f;           // N x M
  double alpha = 0.0;  // common receive scaling
  double power = 0.0;  // transmit power budget P
};

/**
 * @brief Closed-form sum-MSE-optimal precoder under a total power constraint.
 *
 * For an M x N downlink channel H, the optimal pair is
 *   alpha = sqrt(tr((H^H H + c I)^{-2} H^H H) / P),   c = M sigma2 / P,
 *   F = (1 / alpha) (H^H H + c I)^{-1} H^H,
 * computed via Cholesky when sigma2 > 0 and via a pseudo-inverse
 * eigendecomposition when sigma2 = 0 (H^H H is then typically singular).
 * H = 0 with sigma2 > 0 returns alpha = 0 with an arbitrary unit-power F.
 */
inline Precoder mmse_precoder(const CMatrix& h, double p, double sigma2) {
  const Eigen::Index m = h.rows();
  const Eigen::Index n = h.cols();
  if (m < 1 || n < 1) throw std::invalid_argument("mmse_precoder: empty channel");
  if (!(p > 0.0)) throw std::invalid_argument("mmse_precoder: power must be positive");
  if (sigma2 < 0.0) throw std::invalid_argument("mmse_precoder: noise variance must be nonnegative");

  const double c = static_cast<double>(m) * sigma2 / p;
  CMatrix w;  // (H^H H + c I)^{-1} H^H, alpha factored out later
  if (sigma2 > 0.0) {
    CMatrix gram = h.adjoint() * h;
    gram.diagonal().array() += c;
    Eigen::LLT<CMatrix> llt(gram);
    if (llt.info() != Eigen::Success) throw std::runtime_error("mmse_precoder: Cholesky factorization failed");
    w = llt.solve(h.adjoint());
  } else {
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(h.adjoint() * h);
    if (eig.info() != Eigen::Success) throw std::runtime_error("mmse_precoder: eigendecomposition failed");
    const Vector lam = eig.eigenvalues();
    const double lam_max = lam(n - 1);
    if (!(lam_max > 0.0)) throw std::runtime_error("mmse_precoder: zero channel with zero noise, system is singular");
    const double tol = 1e-12 * lam_max;
    Vector inv = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i)
      if (lam(i) > tol) inv(i) = 1.0 / lam(i);
    w = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().adjoint() * h.adjoint();
  }

  Precoder out;
  out.power = p;
  const double trace = w.squaredNorm();  // equals tr((H^H H + c I)^{-2} H^H H)
  out.alpha = std::sqrt(trace / p);
  if (out.alpha > 0.0) {
    out.f = w / out.alpha;
  } else {
    // Vanished channel under positive noise: nothing to equalize, spend the
    // budget on a fixed filter so the power invariant still holds.
    out.f = CMatrix::Zero(n, m);
    for (Eigen::Index i = 0; i < m; ++i) out.f(i % n, i) = 1.0;
    out.f *= std::sqrt(p) / out.f.norm();
  }
  return out;
}

/**
 * @brief Transmit-side sum MSE ||alpha H F - I||_F^2 + M alpha^2 sigma2.
 */
inline double system_mse(const CMatrix& h, const CMatrix& f, double alpha, double sigma2) {
  const Eigen::Index m = h.rows();
  if (f.rows() != h.cols() || f.cols() != m) throw std::invalid_argument("system_mse: dimension mismatch");
  if (sigma2 < 0.0) throw std::invalid_argument("system_mse: noise variance must be nonnegative");
  CMatrix g = alpha * (h * f);
  g.diagonal().array() -= 1.0;
  return g.squaredNorm() + static_cast<double>(m) * alpha * alpha * sigma2;
}

/**
 * @brief Per-user MSEs from the scaled effective gain matrix G.
 *
 * User m sees ||row_m(G) - e_m^T||^2 + |alpha_m|^2 sigma2. Summing over users
 * reproduces the system MSE.
 */
inline Vector per_user_mmse(const CMatrix& g, const CVector& alpha, double sigma2) {
  const Eigen::Index m = g.rows();
  if (g.cols() != m) throw std::invalid_argument("per_user_mmse: G must be square");
  if (alpha.size() != m) throw std::invalid_argument("per_user_mmse: one scaling per user required");
  if (sigma2 < 0.0) throw std::invalid_argument("per_user_mmse: noise variance must be nonnegative");
  Vector out(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    CVector row = g.row(i).transpose();
    row(i) -= 1.0;
    out(i) = row.squaredNorm() + std::norm(alpha(i)) * sigma2;
  }
  return out;
}

/** @brief Common-scaling overload. */
inline Vector per_user_mmse(const CMatrix& g, double alpha, double sigma2) {
  return per_user_mmse(g, CVector::Constant(g.rows(), Complex(alpha, 0.0)), sigma2);
}

/**
 * @brief Sum rate sum_m log2(1 / min(MMSE_m, 1)) in bit/s/Hz.
 *
 * MMSE values above 1 carry no rate and are clamped; nonpositive values are
 * rejected.
 */
inline double sum_rate(const Vector& mmse) {
  double rate = 0.0;
  for (Eigen::Index i = 0; i < mmse.size(); ++i) {
    if (!(mmse(i) > 0.0)) throw std::invalid_argument("sum_rate: MMSE values must be positive");
    rate += std::log2(1.0 / std::min(mmse(i), 1.0));
  }
  return rate;
}

/**
 * @brief Optimal receive scaling of one user against its effective channel v:
 * argmin_alpha ||alpha v - e_m||^2 + sigma2 |alpha|^2 = conj(v_m) / (||v||^2 + sigma2).
 */
inline Complex receive_scaling_multicell(const CVector& v, Eigen::Index m, double sigma2) {
  if (m < 0 || m >= v.size()) throw std::invalid_argument("receive_scaling_multicell: user index out of range");
  if (sigma2 < 0.0) throw std::invalid_argument("receive_scaling_multicell: noise variance must be nonnegative");
  const double denom = v.squaredNorm() + sigma2;
  if (!(denom > 0.0)) throw std::invalid_argument("receive_scaling_multicell: zero channel with zero noise");
  return std::conj(v(m)) / denom;
}

}  // namespace redris
