#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "redris/baselines.hpp"
#include "redris/channel.hpp"
#include "redris/dft.hpp"
#include "redris/multicell.hpp"
#include "redris/port_reduction.hpp"
#include "redris/scenario.hpp"
#include "redris/single_cell.hpp"
#include "redris/types.hpp"

namespace redris {

/**
 * @brief Outcome of one scheme at one power level on one channel realization.
 *
 * Optimization runs on the (possibly corrupted) channel estimate, the rate is
 * always evaluated on the true channels. user_rates sums to sum_rate.
 */
struct TrialRecord {
  Scheme scheme = Scheme::RedrisFull;
  int trial = 0;
  double p_dbm = 0.0;
  double sum_rate = 0.0;  // bit/s/Hz
  Vector mmse;
  Vector user_rates;
  int iterations = 0;
  int active_ports = 0;
  double wall_ms = 0.0;
  bool failed = false;
  std::string error;
};

namespace detail {

inline int scheme_order(Scheme s) { return static_cast<int>(s); }

inline Vector rates_from_mmse(const Vector& mmse) {
  Vector r(mmse.size());
  for (Eigen::Index i = 0; i < mmse.size(); ++i) r(i) = std::log2(1.0 / std::min(mmse(i), 1.0));
  return r;
}

/** Per-user MSEs of the realized gain rows under receiver-side MMSE scalings. */
inline Vector distributed_mmse(const CMatrix& h_eff, double p, double sigma2) {
  const CMatrix g = std::sqrt(p) * h_eff;
  const Eigen::Index m = g.rows();
  Vector mmse(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const CVector v = g.row(i).transpose();
    const Complex alpha = receive_scaling_multicell(v, i, sigma2);
    CVector row = alpha * v;
    row(i) -= 1.0;
    mmse(i) = row.squaredNorm() + std::norm(alpha) * sigma2;
  }
  return mmse;
}

/**
 * Rate of a fixed reflective surface on the true channels. The BS only knows
 * the estimate, so the precoder comes from the estimated effective channel;
 * distributed receivers train on the realized channel, so their scalings do.
 */
inline void eval_reflective(const ChannelSet& truth, const ChannelSet& est, const PhaseShiftMatrix& phi, double p,
                            double sigma2, bool multi_cell, TrialRecord& rec) {
  const CMatrix h_true = effective_channel_reflective(truth, phi);
  if (!multi_cell) {
    const Precoder pre = mmse_precoder(effective_channel_reflective(est, phi), p, sigma2);
    rec.mmse = per_user_mmse(pre.alpha * (h_true * pre.f), pre.alpha, sigma2);
  } else {
    rec.mmse = distributed_mmse(h_true, p, sigma2);
  }
  rec.user_rates = rates_from_mmse(rec.mmse);
  rec.sum_rate = rec.user_rates.sum();
}

/** Rate of a fixed switching matrix on the true channels; precoder as above. */
inline void eval_matching(const ChannelSet& truth, const ChannelSet& est, const CMatrix& u,
                          const MatchingMatrix& ups, double p, double sigma2, bool multi_cell, TrialRecord& rec) {
  if (!multi_cell) {
    const Precoder pre = mmse_precoder(effective_channel(est, u, ups), p, sigma2);
    const CMatrix h_true = effective_channel(truth, u, ups);
    rec.mmse = per_user_mmse(pre.alpha * (h_true * pre.f), pre.alpha, sigma2);
  } else {
    rec.mmse = distributed_mmse(effective_channel(truth, u, ups), p, sigma2);
  }
  rec.active_ports = ups.connected_ports();
  rec.user_rates = rates_from_mmse(rec.mmse);
  rec.sum_rate = rec.user_rates.sum();
}

inline void run_scheme(const ScenarioConfig& cfg, const ChannelSet& truth, const ChannelSet& est, const CMatrix& u,
                       double p, double sigma2, Rng& rng, TrialRecord& rec) {
  switch (rec.scheme) {
    case Scheme::RedrisFull: {
      if (!cfg.multi_cell) {
        SingleCellOptions o{cfg.gamma0, cfg.eps, cfg.t_max, std::nullopt};
        const SingleCellSolution sol = optimize_single_cell(est, u, p, sigma2, o, rng);
        rec.iterations = sol.iterations;
        eval_matching(truth, est, u, sol.upsilon, p, sigma2, false, rec);
      } else {
        MultiCellOptions o{cfg.gamma0, cfg.eps, cfg.t_max, std::nullopt};
        const MultiCellSolution sol = optimize_multicell(est, u, p, sigma2, o, rng);
        rec.iterations = sol.iterations;
        eval_matching(truth, est, u, sol.upsilon, p, sigma2, true, rec);
      }
      break;
    }
    case Scheme::RedrisPartial: {
      MatchingMatrix reduced(cfg.ports);
      if (!cfg.multi_cell) {
        SingleCellOptions o{cfg.gamma0, cfg.eps, cfg.t_max, std::nullopt};
        const SingleCellSolution sol = optimize_single_cell(est, u, p, sigma2, o, rng);
        rec.iterations = sol.iterations;
        reduced = universal_reduce(sol.upsilon, est, u, p, sigma2, cfg.np);
      } else {
        MultiCellOptions o{cfg.gamma0, cfg.eps, cfg.t_max, std::nullopt};
        const MultiCellSolution sol = optimize_multicell(est, u, p, sigma2, o, rng);
        rec.iterations = sol.iterations;
        // The budget is free in the distributed setting: np only floors the
        // elimination walk, and the best-scoring level wins.
        reduced = universal_reduce_multicell_best(sol.upsilon, est, u, p, sigma2, cfg.np);
      }
      eval_matching(truth, est, u, reduced, p, sigma2, cfg.multi_cell, rec);
      break;
    }
    case Scheme::RedrisTwoPort: {
      const TwoPortChoice choice = two_port_select(est.h_bs, est.h_su.col(0), u);
      eval_matching(truth, est, u, choice.to_matching(cfg.ports), p, sigma2, false, rec);
      break;
    }
    case Scheme::RedrisRandom: {
      eval_matching(truth, est, u, random_switching(cfg.ports, rng), p, sigma2, cfg.multi_cell, rec);
      break;
    }
    case Scheme::Reflective: {
      ReflectiveOptions o{cfg.gamma0, cfg.eps, cfg.t_max, std::nullopt};
      const ReflectiveSolution sol = cfg.multi_cell
                                         ? reflective_ris_optimize_multicell(est, p, sigma2, o, rng)
                                         : reflective_ris_optimize(est, p, sigma2, o, rng);
      rec.iterations = sol.iterations;
      rec.active_ports = cfg.ports;
      eval_reflective(truth, est, sol.phi, p, sigma2, cfg.multi_cell, rec);
      break;
    }
  }
}

}  // namespace detail

/**
 * @brief Runs every (trial, scheme, power) combination of a scenario.
 *
 * Every scheme within a trial sees the same channel realization (paired
 * comparison); per-(trial, scheme, power) substreams keep records independent
 * of the scheme list and of the thread count. Optimizer failures are recorded
 * on the affected rows, not rethrown. Records come back sorted by (scheme,
 * power, trial).
 *
 * threads = 0 uses the hardware concurrency.
 */
inline std::vector<TrialRecord> run_experiment(const ScenarioConfig& cfg, int threads = 0) {
  {
    const auto errs = validate_config(cfg);
    if (!errs.empty()) {
      std::string msg = "run_experiment: invalid config";
      for (const auto& e : errs) msg += "; " + e;
      throw std::invalid_argument(msg);
    }
  }
  const DftOperator dft = make_dft_operator(cfg.ports);
  const double sigma2 = cfg.noise_var();
  const CsiErrorModel csi{cfg.kappa};

  std::vector<std::vector<TrialRecord>> per_trial(cfg.trials);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int trial = next.fetch_add(1); trial < cfg.trials; trial = next.fetch_add(1)) {
      Rng rng_chan = Rng::substream(cfg.seed, {0xC0DEC0DEull, static_cast<std::uint64_t>(trial)});
      const ChannelSet truth = gen_channel_set(cfg, rng_chan);
      ChannelSet est = truth;
      if (cfg.kappa < 1.0) {
        Rng rng_csi = Rng::substream(cfg.seed, {0xC51C51ull, static_cast<std::uint64_t>(trial)});
        est = corrupt_csi(truth, csi, rng_csi);
      }

      auto& out = per_trial[trial];
      for (const Scheme scheme : cfg.schemes) {
        for (std::size_t pi = 0; pi < cfg.p_dbm.size(); ++pi) {
          TrialRecord rec;
          rec.scheme = scheme;
          rec.trial = trial;
          rec.p_dbm = cfg.p_dbm[pi];
          Rng rng_opt = Rng::substream(
              cfg.seed, {0x0B7ull, static_cast<std::uint64_t>(trial),
                         static_cast<std::uint64_t>(detail::scheme_order(scheme)), static_cast<std::uint64_t>(pi)});
          const auto t0 = std::chrono::steady_clock::now();
          try {
            detail::run_scheme(cfg, truth, est, dft.matrix, dbm_to_watt(cfg.p_dbm[pi]), sigma2, rng_opt, rec);
          } catch (const std::exception& e) {
            rec.failed = true;
            rec.error = e.what();
            rec.sum_rate = std::numeric_limits<double>::quiet_NaN();
            rec.mmse = Vector();
            rec.user_rates = Vector();
          }
          rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
          out.push_back(std::move(rec));
        }
      }
    }
  };

  int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min(n_threads, cfg.trials));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  std::vector<TrialRecord> records;
  for (auto& v : per_trial)
    for (auto& r : v) records.push_back(std::move(r));
  std::stable_sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
    if (detail::scheme_order(a.scheme) != detail::scheme_order(b.scheme))
      return detail::scheme_order(a.scheme) < detail::scheme_order(b.scheme);
    if (a.p_dbm != b.p_dbm) return a.p_dbm < b.p_dbm;
    return a.trial < b.trial;
  });
  return records;
}

/** @brief Mean and standard error of the sum rate per (scheme, power) cell. */
struct AggregateRow {
  Scheme scheme = Scheme::RedrisFull;
  double p_dbm = 0.0;
  int trials = 0;  // successful trials only
  double mean_sum_rate = 0.0;
  double stderr_sum_rate = 0.0;
};

inline std::vector<AggregateRow> aggregate_records(const std::vector<TrialRecord>& records) {
  std::map<std::pair<int, double>, std::vector<double>> cells;
  for (const auto& r : records)
    if (!r.failed) cells[{detail::scheme_order(r.scheme), r.p_dbm}].push_back(r.sum_rate);
  std::vector<AggregateRow> rows;
  for (const auto& [key, vals] : cells) {
    AggregateRow row;
    row.scheme = static_cast<Scheme>(key.first);
    row.p_dbm = key.second;
    row.trials = static_cast<int>(vals.size());
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= vals.size();
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    row.mean_sum_rate = mean;
    row.stderr_sum_rate = vals.size() > 1 ? std::sqrt(var / (vals.size() - 1) / vals.size()) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

/** @brief Mean sum rate of one (scheme, power) cell; NaN when absent. */
inline double mean_sum_rate(const std::vector<TrialRecord>& records, Scheme scheme, double p_dbm) {
  for (const auto& row : aggregate_records(records))
    if (row.scheme == scheme && row.p_dbm == p_dbm) return row.mean_sum_rate;
  return std::numeric_limits<double>::quiet_NaN();
}

enum class OutputFormat { Csv, Jsonl };

struct EmitOptions {
  OutputFormat format = OutputFormat::Csv;
  bool aggregate = false;
  bool zero_wall = false;  // suppress wall-clock times for byte-reproducible output
};

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/**
 * @brief Writes records as CSV or JSON lines.
 *
 * CSV columns: scheme, trial, P_dBm, K, M, N, Np, kappa, sum_rate_bps_hz,
 * iterations, wall_ms. Doubles carry 17 significant digits, newlines are LF.
 * Aggregate mode writes per-(scheme, power) mean and standard error instead.
 */
inline void emit_results(const std::vector<TrialRecord>& records, const ScenarioConfig& cfg, std::ostream& out,
                         const EmitOptions& opts = {}) {
  const char lf = '\n';
  if (opts.aggregate) {
    const auto rows = aggregate_records(records);
    if (opts.format == OutputFormat::Csv) {
      out << "scheme,P_dBm,K,M,N,Np,kappa,trials,mean_sum_rate_bps_hz,stderr_sum_rate_bps_hz" << lf;
      for (const auto& r : rows)
        out << to_string(r.scheme) << ',' << detail::fmt_double(r.p_dbm) << ',' << cfg.ports << ',' << cfg.users
            << ',' << cfg.bs_antennas << ',' << cfg.np << ',' << detail::fmt_double(cfg.kappa) << ',' << r.trials
            << ',' << detail::fmt_double(r.mean_sum_rate) << ',' << detail::fmt_double(r.stderr_sum_rate) << lf;
    } else {
      for (const auto& r : rows) {
        nlohmann::json j{{"scheme", to_string(r.scheme)}, {"p_dbm", r.p_dbm},
                         {"k", cfg.ports},               {"m", cfg.users},
                         {"n", cfg.bs_antennas},         {"np", cfg.np},
                         {"kappa", cfg.kappa},           {"trials", r.trials},
                         {"mean_sum_rate_bps_hz", r.mean_sum_rate},
                         {"stderr_sum_rate_bps_hz", r.stderr_sum_rate}};
        out << j.dump() << lf;
      }
    }
    return;
  }

  if (opts.format == OutputFormat::Csv) {
    out << "scheme,trial,P_dBm,K,M,N,Np,kappa,sum_rate_bps_hz,iterations,wall_ms" << lf;
    for (const auto& r : records)
      out << to_string(r.scheme) << ',' << r.trial << ',' << detail::fmt_double(r.p_dbm) << ',' << cfg.ports << ','
          << cfg.users << ',' << cfg.bs_antennas << ',' << r.active_ports << ',' << detail::fmt_double(cfg.kappa)
          << ',' << detail::fmt_double(r.sum_rate) << ',' << r.iterations << ','
          << detail::fmt_double(opts.zero_wall ? 0.0 : r.wall_ms) << lf;
  } else {
    for (const auto& r : records) {
      nlohmann::json j{{"scheme", to_string(r.scheme)},
                       {"trial", r.trial},
                       {"p_dbm", r.p_dbm},
                       {"k", cfg.ports},
                       {"m", cfg.users},
                       {"n", cfg.bs_antennas},
                       {"np", r.active_ports},
                       {"kappa", cfg.kappa},
                       {"sum_rate_bps_hz", r.sum_rate},
                       {"iterations", r.iterations},
                       {"wall_ms", opts.zero_wall ? 0.0 : r.wall_ms}};
      j["per_user_mmse"] = std::vector<double>(r.mmse.data(), r.mmse.data() + r.mmse.size());
      j["per_user_rate"] = std::vector<double>(r.user_rates.data(), r.user_rates.data() + r.user_rates.size());
      if (r.failed) j["error"] = r.error;
      out << j.dump() << lf;
    }
  }
}

inline void emit_results(const std::vector<TrialRecord>& records, const ScenarioConfig& cfg,
                         const std::string& path, const EmitOptions& opts = {}) {
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!out) throw std::runtime_error("emit_results: cannot open " + path);
  emit_results(records, cfg, out, opts);
}

}  // namespace redris
