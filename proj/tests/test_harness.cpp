#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "redris/harness.hpp"

namespace {

using redris::EmitOptions;
using redris::OutputFormat;
using redris::ScenarioConfig;
using redris::Scheme;
using redris::TrialRecord;

/** Small single-cell scenario that exercises every record field in well under a second. */
ScenarioConfig tiny_config() {
  ScenarioConfig cfg;
  cfg.name = "tiny";
  cfg.ports = 16;
  cfg.bs_antennas = 8;
  cfg.users = 2;
  cfg.np = 4;
  cfg.trials = 4;
  cfg.p_dbm = {10.0, 30.0};
  cfg.schemes = {Scheme::RedrisFull, Scheme::RedrisPartial, Scheme::RedrisRandom, Scheme::Reflective};
  cfg.t_max = 8;
  cfg.eps = 1e-3;
  cfg.seed = 7;
  return cfg;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) fields.push_back(item);
  return fields;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  return lines;
}

std::string emit_to_string(const std::vector<TrialRecord>& records, const ScenarioConfig& cfg,
                           const EmitOptions& opts) {
  std::ostringstream out;
  redris::emit_results(records, cfg, out, opts);
  return out.str();
}

}  // namespace

TEST(Presets, EveryNamedPresetPassesValidation) {
  const auto& table = redris::presets();
  ASSERT_FALSE(table.empty());
  for (const auto& [name, cfg] : table) {
    EXPECT_EQ(name, cfg.name);
    const auto errs = redris::validate_config(cfg);
    std::string joined;
    for (const auto& e : errs) joined += e + "; ";
    EXPECT_TRUE(errs.empty()) << name << ": " << joined;
  }
  for (const char* expected : {"power-sweep-desk", "single-user-desk", "ports-desk-k16", "ports-desk-k36", "ports-desk-k64",
                               "los-desk", "multicell-desk", "cells-desk-m12", "power-sweep-large"}) {
    EXPECT_TRUE(table.count(expected)) << expected;
  }
}

TEST(RunExperiment, IsDeterministicAndThreadCountInvariant) {
  const ScenarioConfig cfg = tiny_config();
  const auto a = redris::run_experiment(cfg, 1);
  const auto b = redris::run_experiment(cfg, 3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].scheme, b[i].scheme);
    EXPECT_EQ(a[i].trial, b[i].trial);
    EXPECT_EQ(a[i].p_dbm, b[i].p_dbm);
    EXPECT_EQ(a[i].sum_rate, b[i].sum_rate);  // bitwise: same substreams regardless of threads
    EXPECT_EQ(a[i].iterations, b[i].iterations);
    EXPECT_EQ(a[i].active_ports, b[i].active_ports);
    EXPECT_FALSE(a[i].failed);
  }
  EmitOptions opts;
  opts.zero_wall = true;  // wall clock is the only nondeterministic column
  EXPECT_EQ(emit_to_string(a, cfg, opts), emit_to_string(b, cfg, opts));
}

// Per-(trial, scheme, power) substreams mean a scheme's records cannot depend
// on which other schemes were requested alongside it.
TEST(RunExperiment, SchemeRecordsAreIndependentOfTheSchemeList) {
  ScenarioConfig joint = tiny_config();
  joint.schemes = {Scheme::RedrisFull, Scheme::RedrisRandom};
  ScenarioConfig solo = tiny_config();
  solo.schemes = {Scheme::RedrisRandom};

  std::vector<TrialRecord> from_joint;
  for (const auto& r : redris::run_experiment(joint, 1))
    if (r.scheme == Scheme::RedrisRandom) from_joint.push_back(r);
  const auto from_solo = redris::run_experiment(solo, 1);

  ASSERT_EQ(from_joint.size(), from_solo.size());
  for (std::size_t i = 0; i < from_solo.size(); ++i) {
    EXPECT_EQ(from_joint[i].trial, from_solo[i].trial);
    EXPECT_EQ(from_joint[i].p_dbm, from_solo[i].p_dbm);
    EXPECT_EQ(from_joint[i].sum_rate, from_solo[i].sum_rate);
  }
}

TEST(RunExperiment, ProducesEveryCombinationSortedBySchemePowerTrial) {
  const ScenarioConfig cfg = tiny_config();
  const auto records = redris::run_experiment(cfg, 1);
  ASSERT_EQ(records.size(), cfg.schemes.size() * cfg.p_dbm.size() * static_cast<std::size_t>(cfg.trials));
  std::size_t i = 0;
  for (const Scheme s : {Scheme::RedrisFull, Scheme::RedrisPartial, Scheme::RedrisRandom, Scheme::Reflective})
    for (const double p : cfg.p_dbm)
      for (int trial = 0; trial < cfg.trials; ++trial, ++i) {
        EXPECT_EQ(records[i].scheme, s);
        EXPECT_EQ(records[i].p_dbm, p);
        EXPECT_EQ(records[i].trial, trial);
      }
}

TEST(RunExperiment, ActivePortCountsMatchEachScheme) {
  const ScenarioConfig cfg = tiny_config();
  for (const auto& r : redris::run_experiment(cfg, 1)) {
    switch (r.scheme) {
      case Scheme::RedrisPartial: EXPECT_EQ(r.active_ports, cfg.np); break;
      case Scheme::RedrisTwoPort: EXPECT_EQ(r.active_ports, 2); break;
      default: EXPECT_EQ(r.active_ports, cfg.ports); break;
    }
  }
}

TEST(RunExperiment, HigherTransmitPowerRaisesTheOptimizedMeanRate) {
  const auto records = redris::run_experiment(tiny_config(), 1);
  const double low = redris::mean_sum_rate(records, Scheme::RedrisFull, 10.0);
  const double high = redris::mean_sum_rate(records, Scheme::RedrisFull, 30.0);
  EXPECT_GT(high, low);
  EXPECT_TRUE(std::isnan(redris::mean_sum_rate(records, Scheme::RedrisFull, 99.0)));
}

TEST(RunExperiment, RejectsAnInvalidConfig) {
  ScenarioConfig cfg = tiny_config();
  cfg.ports = 8;  // not a perfect square
  EXPECT_THROW(redris::run_experiment(cfg, 1), std::invalid_argument);
}

TEST(EmitResults, CsvHasTheDocumentedHeaderAndOneRowPerRecord) {
  const ScenarioConfig cfg = tiny_config();
  const auto records = redris::run_experiment(cfg, 1);
  EmitOptions opts;
  opts.zero_wall = true;
  const std::string text = emit_to_string(records, cfg, opts);
  EXPECT_EQ(text.find('\r'), std::string::npos);

  const auto lines = lines_of(text);
  ASSERT_EQ(lines.size(), records.size() + 1);
  EXPECT_EQ(lines[0], "scheme,trial,P_dBm,K,M,N,Np,kappa,sum_rate_bps_hz,iterations,wall_ms");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto f = split_csv_line(lines[i + 1]);
    ASSERT_EQ(f.size(), 11u);
    EXPECT_EQ(f[0], redris::to_string(records[i].scheme));
    EXPECT_EQ(std::stoi(f[1]), records[i].trial);
    EXPECT_EQ(std::stod(f[2]), records[i].p_dbm);
    EXPECT_EQ(std::stoi(f[3]), cfg.ports);
    EXPECT_EQ(std::stoi(f[4]), cfg.users);
    EXPECT_EQ(std::stoi(f[5]), cfg.bs_antennas);
    EXPECT_EQ(std::stoi(f[6]), records[i].active_ports);
    EXPECT_EQ(std::stod(f[7]), cfg.kappa);
    EXPECT_EQ(std::stod(f[8]), records[i].sum_rate);  // %.17g round-trips exactly
    EXPECT_EQ(std::stoi(f[9]), records[i].iterations);
    EXPECT_EQ(f[10], "0");
  }
}

TEST(EmitResults, JsonLinesRoundTripAndPerUserRatesSumToTheTotal) {
  const ScenarioConfig cfg = tiny_config();
  const auto records = redris::run_experiment(cfg, 1);
  EmitOptions opts;
  opts.format = OutputFormat::Jsonl;
  const auto lines = lines_of(emit_to_string(records, cfg, opts));
  ASSERT_EQ(lines.size(), records.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto j = nlohmann::json::parse(lines[i]);
    EXPECT_EQ(j.at("scheme").get<std::string>(), redris::to_string(records[i].scheme));
    EXPECT_EQ(j.at("trial").get<int>(), records[i].trial);
    EXPECT_EQ(j.at("k").get<int>(), cfg.ports);
    EXPECT_DOUBLE_EQ(j.at("sum_rate_bps_hz").get<double>(), records[i].sum_rate);
    const auto mmse = j.at("per_user_mmse").get<std::vector<double>>();
    const auto rates = j.at("per_user_rate").get<std::vector<double>>();
    ASSERT_EQ(mmse.size(), static_cast<std::size_t>(cfg.users));
    ASSERT_EQ(rates.size(), static_cast<std::size_t>(cfg.users));
    // A weak user's share of the common-scaling MSE may exceed 1; the rate
    // clamp maps it to zero rate instead.
    double sum = 0.0;
    for (std::size_t u = 0; u < rates.size(); ++u) {
      EXPECT_GT(mmse[u], 0.0);
      EXPECT_GE(rates[u], 0.0);
      sum += rates[u];
    }
    EXPECT_NEAR(sum, records[i].sum_rate, 1e-9 * (1.0 + std::abs(records[i].sum_rate)));
    EXPECT_FALSE(j.contains("error"));
  }
}

TEST(EmitResults, AggregateRowsMatchAHandComputedMeanAndStandardError) {
  const ScenarioConfig cfg = tiny_config();
  const auto records = redris::run_experiment(cfg, 1);
  const auto rows = redris::aggregate_records(records);
  ASSERT_EQ(rows.size(), cfg.schemes.size() * cfg.p_dbm.size());
  for (const auto& row : rows) {
    std::vector<double> vals;
    for (const auto& r : records)
      if (r.scheme == row.scheme && r.p_dbm == row.p_dbm) vals.push_back(r.sum_rate);
    ASSERT_EQ(static_cast<std::size_t>(row.trials), vals.size());
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= vals.size();
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= vals.size() - 1;
    EXPECT_NEAR(row.mean_sum_rate, mean, 1e-12 * (1.0 + std::abs(mean)));
    EXPECT_NEAR(row.stderr_sum_rate, std::sqrt(var / vals.size()), 1e-12);
  }

  EmitOptions opts;
  opts.aggregate = true;
  const auto lines = lines_of(emit_to_string(records, cfg, opts));
  ASSERT_EQ(lines.size(), rows.size() + 1);
  EXPECT_EQ(lines[0], "scheme,P_dBm,K,M,N,Np,kappa,trials,mean_sum_rate_bps_hz,stderr_sum_rate_bps_hz");
}

TEST(EmitResults, EmptyRecordListProducesOnlyTheHeader) {
  const ScenarioConfig cfg = tiny_config();
  const std::string text = emit_to_string({}, cfg, EmitOptions{});
  EXPECT_EQ(text, "scheme,trial,P_dBm,K,M,N,Np,kappa,sum_rate_bps_hz,iterations,wall_ms\n");
  EXPECT_TRUE(redris::aggregate_records({}).empty());
}

TEST(AggregateRecords, SkipsFailedRowsAndCountsOnlySuccesses) {
  std::vector<TrialRecord> records(3);
  for (int i = 0; i < 3; ++i) {
    records[i].scheme = Scheme::RedrisFull;
    records[i].trial = i;
    records[i].p_dbm = 30.0;
    records[i].sum_rate = 2.0 + i;
  }
  records[1].failed = true;
  records[1].error = "solver blew up";
  records[1].sum_rate = std::numeric_limits<double>::quiet_NaN();

  const auto rows = redris::aggregate_records(records);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].trials, 2);
  EXPECT_NEAR(rows[0].mean_sum_rate, 3.0, 1e-15);

  EmitOptions opts;
  opts.format = OutputFormat::Jsonl;
  opts.zero_wall = true;
  ScenarioConfig cfg = tiny_config();
  const auto lines = lines_of(emit_to_string(records, cfg, opts));
  const auto j = nlohmann::json::parse(lines[1]);
  EXPECT_EQ(j.at("error").get<std::string>(), "solver blew up");
}

TEST(ValidateConfig, FlagsEachBadFieldByName) {
  auto flags = [](const ScenarioConfig& cfg, const std::string& field) {
    for (const auto& e : redris::validate_config(cfg))
      if (e.find(field) == 0) return true;
    return false;
  };

  EXPECT_TRUE(redris::validate_config(tiny_config()).empty());

  ScenarioConfig cfg = tiny_config();
  cfg.ports = 8;
  EXPECT_TRUE(flags(cfg, "ports"));

  cfg = tiny_config();
  cfg.np = 5;
  EXPECT_TRUE(flags(cfg, "np"));

  cfg = tiny_config();
  cfg.np = 32;  // above ports
  EXPECT_TRUE(flags(cfg, "np"));

  cfg = tiny_config();
  cfg.schemes = {Scheme::RedrisTwoPort};
  EXPECT_TRUE(flags(cfg, "schemes"));  // two users
  cfg.users = 1;
  EXPECT_TRUE(redris::validate_config(cfg).empty());

  cfg = tiny_config();
  cfg.multi_cell = true;  // bs_antennas still 8
  EXPECT_TRUE(flags(cfg, "bs_antennas"));

  cfg = tiny_config();
  cfg.kappa = 0.0;
  EXPECT_TRUE(flags(cfg, "kappa"));

  cfg = tiny_config();
  cfg.p_dbm.clear();
  EXPECT_TRUE(flags(cfg, "p_dbm"));

  cfg = tiny_config();
  cfg.d_user_min_m = 0.5;  // below the pathloss reference distance
  EXPECT_TRUE(flags(cfg, "d_user"));
}

TEST(ApplySetting, ParsesListsAndRejectsUnknownKeys) {
  ScenarioConfig cfg;
  redris::apply_setting(cfg, "p_dbm", "5, 15,25");
  ASSERT_EQ(cfg.p_dbm.size(), 3u);
  EXPECT_EQ(cfg.p_dbm[1], 15.0);
  redris::apply_setting(cfg, "schemes", "reflective, redris_full");
  ASSERT_EQ(cfg.schemes.size(), 2u);
  EXPECT_EQ(cfg.schemes[0], Scheme::Reflective);
  redris::apply_setting(cfg, "multi_cell", "yes");
  EXPECT_TRUE(cfg.multi_cell);
  redris::apply_setting(cfg, "seed", "12345");
  EXPECT_EQ(cfg.seed, 12345u);

  try {
    redris::apply_setting(cfg, "warp_factor", "9");
    FAIL() << "unknown key accepted";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("warp_factor"), std::string::npos);
  }
  EXPECT_THROW(redris::apply_setting(cfg, "multi_cell", "maybe"), std::invalid_argument);
  EXPECT_THROW(redris::apply_setting(cfg, "trials", "many"), std::invalid_argument);
}

TEST(ParseConfigFile, AppliesPresetSeedOverridesAndComments) {
  const std::string path = testing::TempDir() + "redris_harness_cfg.ini";
  {
    std::ofstream out(path);
    out << "# experiment sweep\n"
        << "[run]\n"
        << "preset = ports-desk-k36\n"
        << "; override the power grid\n"
        << "p_dbm = 10, 20\n"
        << "trials = 7\n";
  }
  const ScenarioConfig cfg = redris::parse_config_file(path);
  EXPECT_EQ(cfg.ports, 36);
  EXPECT_EQ(cfg.np, 8);
  EXPECT_EQ(cfg.trials, 7);
  ASSERT_EQ(cfg.p_dbm.size(), 2u);
  EXPECT_EQ(cfg.p_dbm[1], 20.0);
  EXPECT_TRUE(redris::validate_config(cfg).empty());
  std::remove(path.c_str());
}

TEST(ParseConfigFile, NamesTheLineOnMalformedInput) {
  const std::string path = testing::TempDir() + "redris_harness_bad.ini";
  {
    std::ofstream out(path);
    out << "trials = 3\n"
        << "this line has no equals sign\n";
  }
  try {
    redris::parse_config_file(path);
    FAIL() << "malformed line accepted";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos);
  }
  {
    std::ofstream out(path);
    out << "preset = nosuch-desk\n";
  }
  EXPECT_THROW(redris::parse_config_file(path), std::invalid_argument);
  std::remove(path.c_str());
  EXPECT_THROW(redris::parse_config_file(path), std::runtime_error);  // gone now
}
