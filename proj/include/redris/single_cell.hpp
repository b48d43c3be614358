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

struct SingleCellOptions {
  double gamma0 = 0.0;  // 0 = data-scaled default, recomputed each iteration
  double eps = 1e-4;
  int t_max = 50;
  std::optional<MatchingMatrix> init;  // random full matching when absent
};

/**
 * @brief Joint solution: switching matrix, precoder, receive scaling, quality.
 *
 * mse, mmse and rate are all evaluated on the channels the optimizer was
 * given, with (alpha, f) the closed-form precoder of upsilon's effective
 * channel, so the reported numbers are mutually consistent.
 */
struct SingleCellSolution {
  MatchingMatrix upsilon;
  CMatrix f;
  double alpha = 0.0;
  double mse = 0.0;
  Vector mmse;
  double rate = 0.0;
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;
  std::vector<double> mse_trace;  // MSE at init, then after each iteration
};

namespace detail {

inline void score_solution(const CMatrix& h_eff, double p, double sigma2, SingleCellSolution& out) {
  const Precoder pre = mmse_precoder(h_eff, p, sigma2);
  out.f = pre.f;
  out.alpha = pre.alpha;
  out.mse = system_mse(h_eff, pre.f, pre.alpha, sigma2);
  out.mmse = per_user_mmse(pre.alpha * (h_eff * pre.f), pre.alpha, sigma2);
  out.rate = sum_rate(out.mmse);
}

}  // namespace detail

/**
 * @brief Scores a fixed switching matrix: closed-form precoder on the given
 * channels, then per-user MSEs and sum rate.
 */
inline SingleCellSolution evaluate_solution(const ChannelSet& set, const CMatrix& u, const MatchingMatrix& upsilon,
                                            double p, double sigma2) {
  SingleCellSolution out;
  out.upsilon = upsilon;
  detail::score_solution(effective_channel(set, u, upsilon), p, sigma2, out);
  return out;
}

/**
 * @brief Alternating optimization of the switching matrix and the precoder.
 *
 * Each iteration runs one extrinsic R-LS + greedy projection step on the
 * switching matrix at the current precoder, then recomputes the closed-form
 * precoder. Stops when the MSE stalls (|E_t - E_{t-1}| < eps E_{t-1}) or
 * after t_max iterations, and returns the best iterate seen (the random or
 * supplied initialization included).
 */
inline SingleCellSolution optimize_single_cell(const ChannelSet& set, const CMatrix& u, double p, double sigma2,
                                               const SingleCellOptions& opts, Rng& rng) {
  if (!(p > 0.0)) throw std::invalid_argument("optimize_single_cell: power must be positive");
  if (sigma2 < 0.0) throw std::invalid_argument("optimize_single_cell: noise variance must be nonnegative");
  if (!(opts.eps > 0.0)) throw std::invalid_argument("optimize_single_cell: eps must be positive");
  if (opts.t_max < 0) throw std::invalid_argument("optimize_single_cell: t_max must be nonnegative");

  const int k = static_cast<int>(u.rows());
  const CascadeCache cache = make_cascade_cache(set, u);
  const Eigen::Index m = cache.t.rows();

  MatchingMatrix ups = opts.init ? *opts.init : random_matching(k, rng);
  if (ups.size() != k) throw std::invalid_argument("optimize_single_cell: init size mismatch");
  if (!ups.is_full()) throw std::invalid_argument("optimize_single_cell: init must be a full matching");

  SingleCellSolution cur;
  cur.upsilon = ups;
  detail::score_solution(effective_channel(cache, ups), p, sigma2, cur);

  SingleCellSolution best = cur;
  std::vector<double> trace = {cur.mse};
  OptimizerState st;
  st.x_bar = ups.dense();
  bool degenerate = false;
  int iterations = 0;
  bool converged = false;

  for (int t = 1; t <= opts.t_max; ++t) {
    const CMatrix a = cur.alpha * cache.t;
    const CMatrix b = cache.s * cur.f;
    const CMatrix z = CMatrix::Identity(m, m) - cur.alpha * (cache.direct * cur.f);
    const double gamma0 = opts.gamma0 > 0.0 ? opts.gamma0 : default_gamma0(a, b);

    ups = detail::matching_step(a, b, z, gamma0, st);
    degenerate = degenerate || st.degenerate;

    const double prev_mse = cur.mse;
    cur.upsilon = ups;
    detail::score_solution(effective_channel(cache, ups), p, sigma2, cur);
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
  best.degenerate = degenerate;
  best.mse_trace = std::move(trace);
  return best;
}

}  // namespace redris
