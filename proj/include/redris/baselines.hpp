#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "redris/channel.hpp"
#include "redris/matching.hpp"
#include "redris/precoding.hpp"
#include "redris/rng.hpp"
#include "redris/types.hpp"

namespace redris {

/**
 * @brief Diagonal phase-shift matrix of a conventional reflective surface.
 *
 * Stored as phases, so the diagonal entries are exactly unit modulus.
 */
struct PhaseShiftMatrix {
  Vector theta;

  explicit PhaseShiftMatrix(int k = 0) : theta(Vector::Zero(k)) {}

  int size() const { return static_cast<int>(theta.size()); }

  CVector diagonal() const {
    CVector d(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) d(i) = Complex(std::cos(theta(i)), std::sin(theta(i)));
    return d;
  }

  static PhaseShiftMatrix random(int k, Rng& rng) {
    PhaseShiftMatrix p(k);
    for (int i = 0; i < k; ++i) p.theta(i) = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return p;
  }
};

/** @brief Effective channel H_su^H Diag(e^{j theta}) H_bs + H_bu^H. */
inline CMatrix effective_channel_reflective(const ChannelSet& set, const PhaseShiftMatrix& phi) {
  if (phi.size() != set.h_bs.rows() || set.h_su.rows() != set.h_bs.rows())
    throw std::invalid_argument("effective_channel_reflective: dimension mismatch");
  return set.h_su.adjoint() * phi.diagonal().asDiagonal() * set.h_bs + set.h_bu.adjoint();
}

struct ReflectiveOptions {
  double gamma0 = 0.0;  // 0 = data-scaled default
  double eps = 1e-4;
  int t_max = 50;
  std::optional<PhaseShiftMatrix> init;
};

struct ReflectiveSolution {
  PhaseShiftMatrix phi;
  CMatrix f;            // single-cell precoder
  double alpha = 0.0;   // single-cell common scaling
  CVector alphas;       // multi-cell per-user scalings
  double mse = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> mse_trace;
};

namespace detail {

/**
 * One unconstrained LS step on the diagonal d of the surface, for the model
 * T Diag(d) S ~ Z, followed by per-entry phase projection. The K x K normal
 * system is (T^H T .* conj(S S^H) + gamma0 I) d = diag(T^H Z S^H); entries
 * are solved jointly, never lifted to K^2. gamma0 is pure Tikhonov
 * conditioning; anchoring the solve to the previous phases instead would let
 * their unit-modulus entries drown the data term and crawl toward alignment
 * over hundreds of iterations. Ports the data does not reach keep their
 * previous phase.
 */
inline void phase_step(const CMatrix& t, const CMatrix& s, const CMatrix& z, PhaseShiftMatrix& phi) {
  const int k = static_cast<int>(t.cols());
  const CMatrix gram = (t.adjoint() * t).cwiseProduct((s * s.adjoint()).conjugate());
  const CVector rhs = (t.adjoint() * z * s.adjoint()).diagonal();
  const double gamma0 = 1e-2 * gram.real().trace() / k + 1e-300;  // guards the all-zero case
  CMatrix lhs = gram;
  lhs.diagonal().array() += gamma0;
  const CVector d = lhs.ldlt().solve(rhs);
  for (int i = 0; i < k; ++i)
    if (std::abs(d(i)) > 0.0) phi.theta(i) = std::arg(d(i));
}

}  // namespace detail

/**
 * @brief Alternating phase and precoder optimization for a reflective surface.
 *
 * Each iteration solves the regularized LS problem over the K diagonal
 * entries at the current precoder, projects every entry to unit modulus, then
 * recomputes the closed-form precoder. Same stall-based stop rule and
 * best-iterate selection as the switching-matrix optimizer.
 */
inline ReflectiveSolution reflective_ris_optimize(const ChannelSet& set, double p, double sigma2,
                                                  const ReflectiveOptions& opts, Rng& rng) {
  if (!(p > 0.0)) throw std::invalid_argument("reflective_ris_optimize: power must be positive");
  if (sigma2 < 0.0) throw std::invalid_argument("reflective_ris_optimize: noise variance must be nonnegative");
  if (!(opts.eps > 0.0)) throw std::invalid_argument("reflective_ris_optimize: eps must be positive");
  if (opts.t_max < 0) throw std::invalid_argument("reflective_ris_optimize: t_max must be nonnegative");

  const int k = static_cast<int>(set.h_bs.rows());
  const Eigen::Index m = set.h_su.cols();

  ReflectiveSolution cur;
  cur.phi = opts.init ? *opts.init : PhaseShiftMatrix::random(k, rng);
  if (cur.phi.size() != k) throw std::invalid_argument("reflective_ris_optimize: init size mismatch");

  auto rescore = [&](ReflectiveSolution& sol) {
    const CMatrix h_eff = effective_channel_reflective(set, sol.phi);
    const Precoder pre = mmse_precoder(h_eff, p, sigma2);
    sol.f = pre.f;
    sol.alpha = pre.alpha;
    sol.mse = system_mse(h_eff, pre.f, pre.alpha, sigma2);
  };
  rescore(cur);

  ReflectiveSolution best = cur;
  std::vector<double> trace = {cur.mse};
  int iterations = 0;
  bool converged = false;

  for (int t = 1; t <= opts.t_max; ++t) {
    const CMatrix tt = cur.alpha * set.h_su.adjoint();
    const CMatrix ss = set.h_bs * cur.f;
    const CMatrix zz = CMatrix::Identity(m, m) - cur.alpha * (set.h_bu.adjoint() * cur.f);
    detail::phase_step(tt, ss, zz, cur.phi);

    const double prev_mse = cur.mse;
    rescore(cur);
    trace.push_back(cur.mse);
    iterations = t;
    if (cur.mse < best.mse) best = cur;
    if (std::abs(cur.mse - prev_mse) < opts.eps * prev_mse) {
      converged = true;
      break;
    }
  }

  best.iterations = iterations;
  best.converged = converged;
  best.mse_trace = std::move(trace);
  return best;
}

/**
 * @brief Multi-cell reflective baseline: alternating phase steps and
 * closed-form per-user scaling sweeps against the distributed objective.
 */
inline ReflectiveSolution reflective_ris_optimize_multicell(const ChannelSet& set, double p, double sigma2,
                                                            const ReflectiveOptions& opts, Rng& rng) {
  if (!(p > 0.0))
    throw std::invalid_argument("reflective_ris_optimize_multicell: power must be positive");
  if (sigma2 < 0.0)
    throw std::invalid_argument("reflective_ris_optimize_multicell: noise variance must be nonnegative");
  if (!(opts.eps > 0.0)) throw std::invalid_argument("reflective_ris_optimize_multicell: eps must be positive");
  if (opts.t_max < 0) throw std::invalid_argument("reflective_ris_optimize_multicell: t_max must be nonnegative");

  const int k = static_cast<int>(set.h_bs.rows());
  const Eigen::Index m = set.h_su.cols();
  const double sqrt_p = std::sqrt(p);

  ReflectiveSolution cur;
  cur.phi = opts.init ? *opts.init : PhaseShiftMatrix::random(k, rng);
  if (cur.phi.size() != k) throw std::invalid_argument("reflective_ris_optimize_multicell: init size mismatch");

  auto rescore = [&](ReflectiveSolution& sol) {
    const CMatrix g = sqrt_p * effective_channel_reflective(set, sol.phi);
    sol.alphas = CVector(m);
    double obj = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const CVector v = g.row(i).transpose();
      sol.alphas(i) = receive_scaling_multicell(v, i, sigma2);
      CVector row = sol.alphas(i) * v;
      row(i) -= 1.0;
      obj += row.squaredNorm() + std::norm(sol.alphas(i)) * sigma2;
    }
    sol.mse = obj;
  };
  rescore(cur);

  ReflectiveSolution best = cur;
  std::vector<double> trace = {cur.mse};
  int iterations = 0;
  bool converged = false;

  for (int t = 1; t <= opts.t_max; ++t) {
    const CMatrix tt = cur.alphas.asDiagonal() * set.h_su.adjoint();
    const CMatrix ss = sqrt_p * set.h_bs;
    const CMatrix zz = CMatrix::Identity(m, m) - sqrt_p * (cur.alphas.asDiagonal() * set.h_bu.adjoint());
    detail::phase_step(tt, ss, zz, cur.phi);

    const double prev_mse = cur.mse;
    rescore(cur);
    trace.push_back(cur.mse);
    iterations = t;
    if (cur.mse < best.mse) best = cur;
    if (std::abs(cur.mse - prev_mse) < opts.eps * prev_mse) {
      converged = true;
      break;
    }
  }

  best.iterations = iterations;
  best.converged = converged;
  best.mse_trace = std::move(trace);
  return best;
}

/** @brief Uniformly random full switching matrix; the unoptimized reference. */
inline MatchingMatrix random_switching(int k, Rng& rng) { return random_matching(k, rng); }

}  // namespace redris
