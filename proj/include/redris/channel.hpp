#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "redris/matching.hpp"
#include "redris/rng.hpp"
#include "redris/scenario.hpp"
#include "redris/types.hpp"

namespace redris {

/**
 * @brief Planar antenna array with half-wavelength spacing, row-major indexing.
 */
struct ArrayGeometry {
  int rows = 1;
  int cols = 1;

  int count() const { return rows * cols; }

  /** @brief Strictly square aperture of n = side^2 elements. */
  static ArrayGeometry square(int n) {
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    if (n < 1 || side * side != n)
      throw std::invalid_argument("ArrayGeometry - square: element count must be a perfect square, got " +
                                  std::to_string(n));
    return {side, side};
  }

  /** @brief Near-square aperture: rows is the largest divisor of n not above sqrt(n). */
  static ArrayGeometry planar(int n) {
    if (n < 1) throw std::invalid_argument("ArrayGeometry - planar: element count must be positive");
    int rows = 1;
    for (int r = 1; r * r <= n; ++r)
      if (n % r == 0) rows = r;
    return {rows, n / rows};
  }

  static ArrayGeometry single() { return {1, 1}; }

  /**
   * @brief Steering vector for a departure/arrival direction.
   *
   * Entry (p, q) is exp(j pi (p sin(az) cos(el) + q sin(el))); all entries have
   * unit magnitude, so the squared norm is exactly the element count.
   */
  CVector steering(double azimuth, double elevation) const {
    CVector a(count());
    const double u = std::sin(azimuth) * std::cos(elevation);
    const double v = std::sin(elevation);
    for (int p = 0; p < rows; ++p) {
      for (int q = 0; q < cols; ++q) {
        const double phase = std::numbers::pi * (p * u + q * v);
        a(p * cols + q) = Complex(std::cos(phase), std::sin(phase));
      }
    }
    return a;
  }
};

/**
 * @brief One drawn multipath realization.
 *
 * Gains of non-line-of-sight paths are CN(0, 1); when los is set the first
 * path carries a deterministic unit-magnitude gain instead. Azimuths are
 * uniform on [-pi/2, pi/2], elevations on [-pi/4, pi/4].
 */
struct PathSet {
  struct Path {
    Complex gain;
    double rx_az, rx_el;
    double tx_az, tx_el;
  };
  std::vector<Path> paths;
  bool los = false;

  static PathSet draw(int count, bool los, Rng& rng) {
    if (count < 1) throw std::invalid_argument("PathSet - draw: path count must be positive");
    PathSet ps;
    ps.los = los;
    ps.paths.resize(count);
    for (int q = 0; q < count; ++q) {
      Path& p = ps.paths[q];
      p.rx_az = rng.uniform(-std::numbers::pi / 2, std::numbers::pi / 2);
      p.rx_el = rng.uniform(-std::numbers::pi / 4, std::numbers::pi / 4);
      p.tx_az = rng.uniform(-std::numbers::pi / 2, std::numbers::pi / 2);
      p.tx_el = rng.uniform(-std::numbers::pi / 4, std::numbers::pi / 4);
      p.gain = rng.cnormal();
      // Drawn unconditionally so streams stay aligned across LOS modes.
      if (los && q == 0) p.gain = 1.0;
    }
    return ps;
  }
};

/**
 * @brief Distance-based pathloss c0 * (d / d0)^(-eta).
 */
inline double pathloss(double d, double d0, double c0, double eta) {
  if (!(d0 > 0.0) || !(c0 > 0.0) || !(eta > 0.0))
    throw std::invalid_argument("pathloss: d0, c0 and eta must be positive");
  if (d < d0) throw std::invalid_argument("pathloss: d must be at least the reference distance d0");
  return c0 * std::pow(d / d0, -eta);
}

/**
 * @brief Geometric multipath channel sqrt(pl) * sum_q c_q a_rx a_tx^H.
 *
 * Returns an rx.count() x tx.count() matrix. No per-path normalization is
 * applied; the expected squared entry magnitude is pl times the path count.
 */
inline CMatrix gen_channel(const ArrayGeometry& tx, const ArrayGeometry& rx, const PathSet& paths, double pl) {
  if (!(pl >= 0.0)) throw std::invalid_argument("gen_channel: pathloss must be nonnegative");
  CMatrix h = CMatrix::Zero(rx.count(), tx.count());
  for (const auto& p : paths.paths)
    h.noalias() += p.gain * rx.steering(p.rx_az, p.rx_el) * tx.steering(p.tx_az, p.tx_el).adjoint();
  return std::sqrt(pl) * h;
}

/** @brief Draws the paths internally; convenience overload. */
inline CMatrix gen_channel(const ArrayGeometry& tx, const ArrayGeometry& rx, int path_count, bool los, double pl,
                           Rng& rng) {
  return gen_channel(tx, rx, PathSet::draw(path_count, los, rng), pl);
}

/**
 * @brief The three channels of one realization plus the noise variance.
 *
 * Single cell: h_bs is K x N, h_su is K x M, h_bu is N x M.
 * Multi cell (single-antenna BSs): h_bs is K x M, h_su is K x M, h_bu is M x M
 * with column m holding the channels from every BS to user m.
 */
struct ChannelSet {
  CMatrix h_bs;
  CMatrix h_su;
  CMatrix h_bu;
  double noise_var = 0.0;
};

/**
 * @brief Draws one complete channel realization for a scenario.
 *
 * Distances first (BS-surface, then per-user surface distances), then h_bs,
 * h_su and h_bu in that order, so realizations stay paired across scenario
 * variants that only change later draws.
 */
inline ChannelSet gen_channel_set(const ScenarioConfig& cfg, Rng& rng) {
  const auto errs = validate_config(cfg);
  if (!errs.empty()) throw std::invalid_argument("gen_channel_set: invalid config: " + errs.front());

  const ArrayGeometry ris = ArrayGeometry::square(cfg.ports);
  const ArrayGeometry user = ArrayGeometry::single();
  const bool los_su = cfg.los == LosMode::BsRisAndRisUser;
  const double c0 = cfg.c0();

  ChannelSet set;
  set.noise_var = cfg.noise_var();

  if (!cfg.multi_cell) {
    const ArrayGeometry bs = ArrayGeometry::planar(cfg.bs_antennas);
    const double d_ris = rng.uniform(cfg.d_ris_min_m, cfg.d_ris_max_m);
    std::vector<double> d_user(cfg.users);
    for (int m = 0; m < cfg.users; ++m) d_user[m] = rng.uniform(cfg.d_user_min_m, cfg.d_user_max_m);

    set.h_bs = gen_channel(bs, ris, cfg.q_ris, true, pathloss(d_ris, cfg.d0_m, c0, cfg.eta_ris), rng);
    set.h_su = CMatrix(cfg.ports, cfg.users);
    for (int m = 0; m < cfg.users; ++m)
      set.h_su.col(m) =
          gen_channel(user, ris, cfg.q_su, los_su, pathloss(d_user[m], cfg.d0_m, c0, cfg.eta_ris), rng);
    set.h_bu = CMatrix(cfg.bs_antennas, cfg.users);
    for (int m = 0; m < cfg.users; ++m)
      set.h_bu.col(m) = gen_channel(user, bs, cfg.q_bu, false, pathloss(cfg.d_bu_m, cfg.d0_m, c0, cfg.eta_bu), rng);
  } else {
    std::vector<double> d_ris(cfg.users);
    for (int m = 0; m < cfg.users; ++m) d_ris[m] = rng.uniform(cfg.d_ris_min_m, cfg.d_ris_max_m);
    std::vector<double> d_user(cfg.users);
    for (int m = 0; m < cfg.users; ++m) d_user[m] = rng.uniform(cfg.d_user_min_m, cfg.d_user_max_m);

    set.h_bs = CMatrix(cfg.ports, cfg.users);
    for (int m = 0; m < cfg.users; ++m)
      set.h_bs.col(m) =
          gen_channel(user, ris, cfg.q_ris, true, pathloss(d_ris[m], cfg.d0_m, c0, cfg.eta_ris), rng);
    set.h_su = CMatrix(cfg.ports, cfg.users);
    for (int m = 0; m < cfg.users; ++m)
      set.h_su.col(m) =
          gen_channel(user, ris, cfg.q_su, los_su, pathloss(d_user[m], cfg.d0_m, c0, cfg.eta_ris), rng);
    set.h_bu = CMatrix(cfg.users, cfg.users);
    const double pl_bu = pathloss(cfg.d_bu_m, cfg.d0_m, c0, cfg.eta_bu);
    for (int m = 0; m < cfg.users; ++m)       // user
      for (int b = 0; b < cfg.users; ++b)     // BS
        set.h_bu(b, m) = gen_channel(user, user, cfg.q_bu, false, pl_bu, rng)(0, 0);
  }
  if (!cfg.direct_link) set.h_bu.setZero();
  return set;
}

/** @brief Gauss-Markov CSI error model; kappa = 1 is perfect CSI. */
struct CsiErrorModel {
  double kappa = 1.0;
};

/**
 * @brief Corrupts a channel estimate: kappa H + sqrt(1 - kappa^2) E.
 *
 * E has i.i.d. CN(0, s2) entries with s2 the mean squared entry magnitude of
 * H, so the expected corruption energy is (1 - kappa^2) ||H||_F^2.
 */
inline CMatrix corrupt_csi(const CMatrix& h, const CsiErrorModel& model, Rng& rng) {
  if (!(model.kappa > 0.0 && model.kappa <= 1.0))
    throw std::invalid_argument("corrupt_csi: kappa must lie in (0, 1]");
  if (model.kappa == 1.0) return h;
  const double entry_var = h.squaredNorm() / static_cast<double>(h.size());
  const double sigma = std::sqrt((1.0 - model.kappa * model.kappa) * entry_var);
  CMatrix out(h.rows(), h.cols());
  for (Eigen::Index j = 0; j < h.cols(); ++j)
    for (Eigen::Index i = 0; i < h.rows(); ++i) out(i, j) = model.kappa * h(i, j) + sigma * rng.cnormal();
  return out;
}

/** @brief Applies the error model to all three channels of a set. */
inline ChannelSet corrupt_csi(const ChannelSet& set, const CsiErrorModel& model, Rng& rng) {
  ChannelSet out;
  out.h_bs = corrupt_csi(set.h_bs, model, rng);
  out.h_su = corrupt_csi(set.h_su, model, rng);
  out.h_bu = corrupt_csi(set.h_bu, model, rng);
  out.noise_var = set.noise_var;
  return out;
}

/**
 * @brief Beam-domain factors of the cascaded link, cached for optimizer loops.
 *
 * t = H_su^H U (M x K), s = U H_bs (K x N), direct = H_bu^H (M x N). The
 * effective channel of a switching matrix X is t (X s) + direct.
 */
struct CascadeCache {
  CMatrix t;
  CMatrix s;
  CMatrix direct;
};

inline CascadeCache make_cascade_cache(const ChannelSet& set, const CMatrix& u) {
  if (u.rows() != u.cols() || u.rows() != set.h_bs.rows() || set.h_su.rows() != set.h_bs.rows())
    throw std::invalid_argument("make_cascade_cache: dimension mismatch between channels and transform");
  return {set.h_su.adjoint() * u, u * set.h_bs, set.h_bu.adjoint()};
}

/** @brief Effective user-side channel H_su^H U X U H_bs + H_bu^H for a matching X. */
inline CMatrix effective_channel(const CascadeCache& cache, const MatchingMatrix& x) {
  return cache.t * x.apply_rows(cache.s) + cache.direct;
}

inline CMatrix effective_channel(const ChannelSet& set, const CMatrix& u, const MatchingMatrix& x) {
  return effective_channel(make_cascade_cache(set, u), x);
}

}  // namespace redris
