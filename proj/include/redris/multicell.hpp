#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "redris/channel.hpp"
#include "redris/matching.hpp"
#include "redris/perm_opt.hpp"
#include "redris/precoding.hpp"
#include "redris/rng.hpp"
#include "redris/types.hpp"

namespace redris {

struct MultiCellOptions {
  double gamma0 = 0.0;  // 0 = data-scaled default, recomputed each iteration
  double eps = 1e-4;
  int t_max = 50;
  std::optional<MatchingMatrix> init;
};

/**
 * @brief Distributed-cell solution: switching matrix plus per-user scalings.
 *
 * objective is the joint cost ||Diag(alpha) H_eff sqrt(P) - I||_F^2
 * + sigma2 ||alpha||^2; each alpha_m is the closed-form optimum for the
 * returned switching matrix.
 */
struct MultiCellSolution {
  MatchingMatrix upsilon;
  CVector alphas;
  double objective = 0.0;
  Vector mmse;
  double rate = 0.0;
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;
  std::vector<double> objective_trace;
};

namespace detail {

/** Scaled gain rows, optimal alphas and the joint objective for a fixed matching. */
inline void score_multicell(const CMatrix& h_eff, double p, double sigma2, MultiCellSolution& out) {
  const Eigen::Index m = h_eff.rows();
  const CMatrix g = std::sqrt(p) * h_eff;
  out.alphas = CVector(m);
  out.mmse = Vector(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const CVector v = g.row(i).transpose();
    out.alphas(i) = receive_scaling_multicell(v, i, sigma2);
    CVector row = out.alphas(i) * v;
    row(i) -= 1.0;
    out.mmse(i) = row.squaredNorm() + std::norm(out.alphas(i)) * sigma2;
  }
  out.objective = out.mmse.sum();
  out.rate = sum_rate(out.mmse);
}

}  // namespace detail

/**
 * @brief Scores a fixed switching matrix in the multi-cell model: optimal
 * per-user scalings, per-user MSEs and sum rate.
 */
inline MultiCellSolution evaluate_multicell(const ChannelSet& set, const CMatrix& u, const MatchingMatrix& upsilon,
                                            double p, double sigma2) {
  MultiCellSolution out;
  out.upsilon = upsilon;
  detail::score_multicell(effective_channel(set, u, upsilon), p, sigma2, out);
  return out;
}

/**
 * @brief Alternating optimization of the switching matrix and the per-user
 * receive scalings for M single-antenna cells sharing one surface.
 *
 * Each iteration performs one extrinsic R-LS + greedy projection step on the
 * switching matrix at fixed scalings, then a full closed-form scaling sweep.
 * Stops when the objective stalls or after t_max iterations; returns the best
 * iterate, with scalings recomputed for its matching.
 */
inline MultiCellSolution optimize_multicell(const ChannelSet& set, const CMatrix& u, double p, double sigma2,
                                            const MultiCellOptions& opts, Rng& rng) {
  if (!(p > 0.0)) throw std::invalid_argument("optimize_multicell: power must be positive");
  if (sigma2 < 0.0) throw std::invalid_argument("optimize_multicell: noise variance must be nonnegative");
  if (!(opts.eps > 0.0)) throw std::invalid_argument("optimize_multicell: eps must be positive");
  if (opts.t_max < 0) throw std::invalid_argument("optimize_multicell: t_max must be nonnegative");

  const int k = static_cast<int>(u.rows());
  const CascadeCache cache = make_cascade_cache(set, u);
  const Eigen::Index m = cache.t.rows();
  const double sqrt_p = std::sqrt(p);

  MatchingMatrix ups = opts.init ? *opts.init : random_matching(k, rng);
  if (ups.size() != k) throw std::invalid_argument("optimize_multicell: init size mismatch");
  if (!ups.is_full()) throw std::invalid_argument("optimize_multicell: init must be a full matching");

  MultiCellSolution cur;
  cur.upsilon = ups;
  detail::score_multicell(effective_channel(cache, ups), p, sigma2, cur);

  MultiCellSolution best = cur;
  std::vector<double> trace = {cur.objective};
  OptimizerState st;
  st.x_bar = ups.dense();
  bool degenerate = false;
  int iterations = 0;
  bool converged = false;

  for (int t = 1; t <= opts.t_max; ++t) {
    const CMatrix a = cur.alphas.asDiagonal() * cache.t;
    const CMatrix b = sqrt_p * cache.s;
    const CMatrix z = CMatrix::Identity(m, m) - sqrt_p * (cur.alphas.asDiagonal() * cache.direct);
    const double gamma0 = opts.gamma0 > 0.0 ? opts.gamma0 : default_gamma0(a, b);

    ups = detail::matching_step(a, b, z, gamma0, st);
    degenerate = degenerate || st.degenerate;

    const double prev_obj = cur.objective;
    cur.upsilon = ups;
    detail::score_multicell(effective_channel(cache, ups), p, sigma2, cur);
    trace.push_back(cur.objective);
    iterations = t;
    if (cur.objective < best.objective) best = cur;
    if (std::abs(cur.objective - prev_obj) < opts.eps * prev_obj) {
      converged = true;
      break;
    }
  }

  best.iterations = iterations;
  best.converged = converged;
  best.degenerate = degenerate;
  best.objective_trace = std::move(trace);
  return best;
}

}  // namespace redris
