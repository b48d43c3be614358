#pragma once

#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "redris/channel.hpp"
#include "redris/matching.hpp"
#include "redris/precoding.hpp"
#include "redris/types.hpp"

namespace redris {

namespace detail {

/**
 * One backward-elimination step: removes the pair whose removal leaves the
 * smallest objective and updates ups and h_cur in place. score takes a
 * candidate effective channel; ties keep the earliest pair in (i, j) order.
 * Returns the objective of the new level.
 */
template <typename ScoreFn>
double drop_weakest_pair(MatchingMatrix& ups, const CascadeCache& cache, CMatrix& h_cur, ScoreFn&& score) {
  const auto pairs = ups.pairs();
  double best = std::numeric_limits<double>::infinity();
  int best_idx = -1;
  CMatrix best_h;
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    const auto [i, j] = pairs[r];
    CMatrix h_cand = h_cur - cache.t.col(i) * cache.s.row(j) - cache.t.col(j) * cache.s.row(i);
    const double val = score(h_cand);
    if (val < best) {
      best = val;
      best_idx = static_cast<int>(r);
      best_h = std::move(h_cand);
    }
  }
  ups.disconnect(pairs[best_idx].first);
  h_cur = std::move(best_h);
  return best;
}

/** Greedy backward elimination until exactly np ports stay connected. */
template <typename ScoreFn>
MatchingMatrix reduce_pairs(const MatchingMatrix& upsilon, const CascadeCache& cache, int np, ScoreFn&& score) {
  if (np < 2 || np % 2 != 0) throw std::invalid_argument("universal_reduce: np must be even and at least 2");
  MatchingMatrix ups = upsilon;
  if (np > ups.connected_ports()) {
    std::cerr << "universal_reduce: np = " << np << " exceeds the " << ups.connected_ports()
              << " connected ports, returning the input unchanged\n";
    return ups;
  }

  CMatrix h_cur = effective_channel(cache, ups);
  while (ups.connected_ports() > np) drop_weakest_pair(ups, cache, h_cur, score);
  return ups;
}

/**
 * Elimination walk from the input support down to np_floor ports, keeping
 * the level with the smallest objective. The unreduced input competes too, so
 * the result never scores worse than the input.
 */
template <typename ScoreFn>
MatchingMatrix reduce_to_best_level(const MatchingMatrix& upsilon, const CascadeCache& cache, int np_floor,
                                    ScoreFn&& score) {
  if (np_floor < 2 || np_floor % 2 != 0)
    throw std::invalid_argument("reduce_to_best_level: floor must be even and at least 2");
  MatchingMatrix ups = upsilon;
  CMatrix h_cur = effective_channel(cache, ups);
  MatchingMatrix best_ups = ups;
  double best_val = score(h_cur);
  while (ups.connected_ports() > np_floor) {
    const double val = drop_weakest_pair(ups, cache, h_cur, score);
    if (val < best_val) {
      best_val = val;
      best_ups = ups;
    }
  }
  return best_ups;
}

/** Sum of per-user MSEs under receiver-side scalings; the distributed objective. */
inline double distributed_objective(const CMatrix& h, double sqrt_p, double sigma2) {
  const Eigen::Index m = h.rows();
  const CMatrix g = sqrt_p * h;
  double obj = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const CVector v = g.row(i).transpose();
    const Complex alpha = receive_scaling_multicell(v, i, sigma2);
    CVector row = alpha * v;
    row(i) -= 1.0;
    obj += row.squaredNorm() + std::norm(alpha) * sigma2;
  }
  return obj;
}

}  // namespace detail

/**
 * @brief Reduces a switching matrix to np active ports, single-cell model.
 *
 * Candidate removals are scored by the full sum MSE of the remaining effective
 * channel under a freshly computed closed-form precoder (noise term included).
 * The result is a sub-matching of the input; np equal to the connected port
 * count is a no-op, larger np warns and returns the input.
 */
inline MatchingMatrix universal_reduce(const MatchingMatrix& upsilon, const ChannelSet& set, const CMatrix& u,
                                       double p, double sigma2, int np) {
  const CascadeCache cache = make_cascade_cache(set, u);
  return detail::reduce_pairs(upsilon, cache, np, [&](const CMatrix& h) {
    const Precoder pre = mmse_precoder(h, p, sigma2);
    return system_mse(h, pre.f, pre.alpha, sigma2);
  });
}

/**
 * @brief Multi-cell variant: scores candidates by the distributed objective
 * with per-user receive scalings recomputed for each candidate.
 */
inline MatchingMatrix universal_reduce_multicell(const MatchingMatrix& upsilon, const ChannelSet& set,
                                                 const CMatrix& u, double p, double sigma2, int np) {
  const CascadeCache cache = make_cascade_cache(set, u);
  const double sqrt_p = std::sqrt(p);
  return detail::reduce_pairs(upsilon, cache, np,
                              [&](const CMatrix& h) { return detail::distributed_objective(h, sqrt_p, sigma2); });
}

/**
 * @brief Multi-cell reduction with a free connection budget.
 *
 * Walks the same elimination path as universal_reduce_multicell down to
 * np_floor ports, scores every level with the distributed objective, and
 * returns the level that scored best; the unreduced input competes too. With
 * strong inter-cell interference, removing connections can raise the sum
 * rate, so the right port count depends on the realization rather than on a
 * preset budget.
 */
inline MatchingMatrix universal_reduce_multicell_best(const MatchingMatrix& upsilon, const ChannelSet& set,
                                                      const CMatrix& u, double p, double sigma2, int np_floor = 2) {
  const CascadeCache cache = make_cascade_cache(set, u);
  const double sqrt_p = std::sqrt(p);
  return detail::reduce_to_best_level(
      upsilon, cache, np_floor, [&](const CMatrix& h) { return detail::distributed_objective(h, sqrt_p, sigma2); });
}

/** @brief Beam indices chosen by the two-port selection rule. */
struct TwoPortChoice {
  int bs_beam = 0;    // row of U H_bs with the largest energy
  int user_beam = 0;  // entry of h_su^H U with the largest energy

  /** @brief The switching matrix connecting the two chosen ports. */
  MatchingMatrix to_matching(int k) const {
    MatchingMatrix m(k);
    m.connect(user_beam, bs_beam);
    return m;
  }
};

namespace detail {

/** Index of the largest entry; ties keep the smallest index. */
inline int argmax(const Vector& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return best;
}

/** Index of the runner-up entry. */
inline int second_argmax(const Vector& v, int skip) {
  int best = -1;
  for (int i = 0; i < v.size(); ++i) {
    if (i == skip) continue;
    if (best < 0 || v(i) > v(best)) best = i;
  }
  return best;
}

}  // namespace detail

/**
 * @brief Single-user port selection from per-beam energies.
 *
 * Picks the BS-side beam with the largest total energy across antennas and
 * the user-side beam with the largest energy; on a collision the user side
 * falls back to its runner-up. Invariant to global phase rotations of h_su
 * and to column permutations of H_bs.
 */
inline TwoPortChoice two_port_select(const CMatrix& h_bs, const CVector& h_su, const CMatrix& u) {
  const int k = static_cast<int>(u.rows());
  if (k < 2) throw std::invalid_argument("two_port_select: need at least two ports");
  if (h_bs.rows() != k || h_su.size() != k || u.cols() != k)
    throw std::invalid_argument("two_port_select: dimension mismatch");

  const Vector bs_energy = (u * h_bs).rowwise().squaredNorm();
  const Vector user_energy = (h_su.adjoint() * u).cwiseAbs2().transpose();

  TwoPortChoice choice;
  choice.bs_beam = detail::argmax(bs_energy);
  choice.user_beam = detail::argmax(user_energy);
  if (choice.user_beam == choice.bs_beam)
    choice.user_beam = detail::second_argmax(user_energy, choice.bs_beam);
  return choice;
}

}  // namespace redris
