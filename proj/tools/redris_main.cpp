// Command-line front end: runs experiment presets or config files and writes
// per-trial records as CSV or JSON lines.

#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "redris/redris.hpp"

namespace {

int cmd_list_presets() {
  for (const auto& [name, cfg] : redris::presets()) {
    std::cout << name << ": " << (cfg.multi_cell ? "multi-cell" : "single-cell") << ", K=" << cfg.ports
              << ", M=" << cfg.users << ", N=" << cfg.bs_antennas << ", trials=" << cfg.trials << ", schemes=";
    for (std::size_t i = 0; i < cfg.schemes.size(); ++i)
      std::cout << (i ? "+" : "") << redris::to_string(cfg.schemes[i]);
    std::cout << "\n";
  }
  return 0;
}

int cmd_validate(const std::string& path) {
  redris::ScenarioConfig cfg = redris::parse_config_file(path);
  const auto errs = redris::validate_config(cfg);
  if (errs.empty()) {
    std::cout << "ok: " << path << " (" << cfg.name << ")\n";
    return 0;
  }
  for (const auto& e : errs) std::cerr << "error: " << e << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"redirective-surface downlink simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run an experiment and write records");
  std::string preset, config_path, out_path = "results.csv", format = "csv";
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  int trials = 0, threads = 0;
  bool aggregate = false, no_timing = false;
  run->add_option("--preset", preset, "preset name (see list-presets)");
  run->add_option("--config", config_path, "config file (key = value lines)");
  run->add_option("--seed", seed, "override the RNG seed");
  run->add_option("--trials", trials, "override the trial count");
  run->add_option("--out", out_path, "output path")->capture_default_str();
  run->add_option("--format", format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}))
      ->capture_default_str();
  run->add_option("--set", overrides, "extra key=value overrides, repeatable");
  run->add_option("--threads", threads, "worker threads (0 = hardware)");
  run->add_flag("--aggregate", aggregate, "write per-(scheme, power) mean and standard error");
  run->add_flag("--no-timing", no_timing, "zero the wall_ms column for byte-reproducible output");

  auto* list = app.add_subcommand("list-presets", "list the built-in presets");

  auto* validate = app.add_subcommand("validate", "check a config file");
  std::string validate_path;
  validate->add_option("config", validate_path, "config file to check")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) return cmd_list_presets();
    if (validate->parsed()) return cmd_validate(validate_path);

    redris::ScenarioConfig cfg;
    if (!preset.empty() && !config_path.empty()) {
      std::cerr << "error: --preset and --config are mutually exclusive\n";
      return 1;
    }
    if (!preset.empty()) {
      const auto it = redris::presets().find(preset);
      if (it == redris::presets().end()) {
        std::cerr << "error: unknown preset '" << preset << "'\n";
        return 1;
      }
      cfg = it->second;
    } else if (!config_path.empty()) {
      cfg = redris::parse_config_file(config_path);
    } else {
      std::cerr << "error: one of --preset or --config is required\n";
      return 1;
    }

    if (run->count("--seed")) cfg.seed = seed;
    if (run->count("--trials")) cfg.trials = trials;
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
        return 1;
      }
      redris::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }

    const auto errs = redris::validate_config(cfg);
    if (!errs.empty()) {
      for (const auto& e : errs) std::cerr << "error: " << e << "\n";
      return 1;
    }

    const auto records = redris::run_experiment(cfg, threads);
    redris::EmitOptions opts;
    opts.format = format == "csv" ? redris::OutputFormat::Csv : redris::OutputFormat::Jsonl;
    opts.aggregate = aggregate;
    opts.zero_wall = no_timing;
    redris::emit_results(records, cfg, out_path, opts);

    int failures = 0;
    for (const auto& r : records) failures += r.failed;
    std::cout << records.size() << " records -> " << out_path;
    if (failures) std::cout << " (" << failures << " failed)";
    std::cout << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
