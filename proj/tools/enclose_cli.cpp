#include "enclose/config.hpp"
#include "enclose/montecarlo.hpp"
#include "enclose/scenarios.hpp"
#include "enclose/sim.hpp"
#include "enclose/trace_io.hpp"
#include "enclose/verify.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace enclose;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSafety = 2;

ScenarioConfig load_with_overrides(const std::string& scenario, const std::vector<std::string>& overrides) {
  ScenarioConfig c = resolve_scenario(scenario);
  for (const std::string& o : overrides) {
    try {
      apply_override(c, o);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("--set: ") + e.what());
    }
  }
  return c;
}

std::string default_output(const ScenarioConfig& c, const std::string& explicit_path, const std::string& from_config,
                           const std::string& suffix) {
  if (!explicit_path.empty()) return explicit_path;
  if (!from_config.empty()) return from_config;
  return c.name + suffix;
}

int cmd_run(const std::string& scenario, const std::vector<std::string>& overrides, std::string out,
            std::string metrics) {
  ScenarioConfig c;
  SimResult r;
  try {
    c = load_with_overrides(scenario, overrides);
    out = default_output(c, out, c.trace_path, ".csv");
    metrics = default_output(c, metrics, c.metrics_path, ".metrics.json");
    r = run_scenario(c);
  } catch (const EncloseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    write_trace(r.trace, out);
    write_metrics(r.metrics, c, metrics);
  } catch (const EncloseError& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return kExitConfig;
  }
  std::printf("%s: %s, %zu records, final eps %.4f m, final-20%% max|eps| %.4f m, min r %.3f m, max r %.3f m\n",
              c.name.c_str(), to_string(r.status), r.trace.size(), r.metrics.final_eps, r.metrics.max_abs_eps_final,
              r.metrics.min_r, r.metrics.max_r);
  if (r.status != RunStatus::Completed) {
    std::cerr << "aborted: " << r.message << '\n';
    return kExitSafety;
  }
  return kExitOk;
}

struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

GridAxis parse_grid(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw ConfigError("--grid '" + spec + "' is not of the form key=v1,v2,...");
  GridAxis axis{detail::trim(spec.substr(0, eq)), {}};
  std::stringstream ss(spec.substr(eq + 1));
  std::string v;
  while (std::getline(ss, v, ',')) {
    if (!detail::trim(v).empty()) axis.values.push_back(detail::trim(v));
  }
  if (axis.values.empty()) throw ConfigError("--grid '" + spec + "' lists no values");
  return axis;
}

int cmd_sweep(const std::string& scenario, const std::vector<std::string>& overrides,
              const std::vector<std::string>& grid, int mc, std::optional<std::uint64_t> seed, const std::string& dir,
              unsigned threads) {
  std::vector<ScenarioConfig> configs;
  std::vector<std::vector<std::pair<std::string, std::string>>> labels;
  ScenarioConfig base;
  try {
    base = load_with_overrides(scenario, overrides);
    if (grid.empty() == (mc <= 0)) throw ConfigError("sweep needs exactly one of --grid or --mc");
    if (!grid.empty()) {
      std::vector<GridAxis> axes;
      for (const std::string& g : grid) axes.push_back(parse_grid(g));
      std::vector<std::size_t> idx(axes.size(), 0);
      while (true) {
        ScenarioConfig c = base;
        std::vector<std::pair<std::string, std::string>> label;
        for (std::size_t a = 0; a < axes.size(); ++a) {
          set_config_value(c, axes[a].key, axes[a].values[idx[a]]);
          label.emplace_back(axes[a].key, axes[a].values[idx[a]]);
        }
        configs.push_back(c);
        labels.push_back(label);
        std::size_t a = axes.size();
        while (a > 0 && ++idx[a - 1] == axes[a - 1].values.size()) idx[--a] = 0;
        if (a == 0) break;
      }
    } else {
      MonteCarloSpec spec;
      spec.n = mc;
      spec.seed = seed.value_or(base.seed);
      configs = monte_carlo_configs(base, spec);
      labels.resize(configs.size());
    }
    // Template-level errors (bad geometry, gains) fail the whole sweep up front.
    validate(base, make_target_model(base));
  } catch (const EncloseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  const BatchSummary b = run_batch(configs, true, threads);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::cerr << "output error: cannot create '" << dir << "': " << ec.message() << '\n';
    return kExitConfig;
  }
  nlohmann::ordered_json summary = batch_json(b);
  summary["runs_detail"] = nlohmann::ordered_json::array();
  try {
    for (const RunOutcome& o : b.outcomes) {
      char stem[32];
      std::snprintf(stem, sizeof stem, "run_%04d", o.index);
      nlohmann::ordered_json entry;
      entry["index"] = o.index;
      for (const auto& [k, v] : labels[static_cast<std::size_t>(o.index)]) entry[k] = v;
      const fs::path cfg_path = fs::path(dir) / (std::string(stem) + ".cfg");
      std::ofstream(cfg_path) << serialize_config(o.config);
      entry["config"] = cfg_path.filename().string();
      if (o.config_error) {
        entry["status"] = "config_error";
        entry["message"] = o.message;
      } else {
        const fs::path trace_path = fs::path(dir) / (std::string(stem) + ".csv");
        const fs::path metrics_path = fs::path(dir) / (std::string(stem) + ".metrics.json");
        write_trace(o.trace, trace_path.string());
        write_metrics(o.metrics, o.config, metrics_path.string());
        entry["status"] = to_string(o.status);
        if (!o.message.empty()) entry["message"] = o.message;
        entry["trace"] = trace_path.filename().string();
        entry["metrics"] = metrics_path.filename().string();
        entry["max_abs_eps_final"] = o.metrics.max_abs_eps_final;
        entry["barrier_violations"] = o.metrics.barrier_violations;
      }
      summary["runs_detail"].push_back(entry);
    }
    write_json(summary, (fs::path(dir) / "summary.json").string());
  } catch (const EncloseError& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return kExitConfig;
  }
  std::printf("%d runs: %d completed, %d safety aborts, %d guard aborts, %d config errors; converged %.0f%%, "
              "worst final-20%% max|eps| %.4f m, worst min r %.3f m\n",
              b.runs, b.completed, b.safety_aborts, b.guard_aborts, b.config_errors, 100.0 * b.fraction_converged,
              b.worst_max_abs_eps_final, b.worst_min_r);
  if (b.config_errors > 0) return kExitConfig;
  if (b.safety_aborts + b.guard_aborts > 0) return kExitSafety;
  return kExitOk;
}

int cmd_verify(const std::string& suite) {
  const auto results = run_suite(suite);
  if (!results) {
    std::cerr << "unknown suite '" << suite << "'; available:";
    for (const std::string& s : suite_names()) std::cerr << ' ' << s;
    std::cerr << '\n';
    return 1;
  }
  std::vector<std::string> failed;
  for (const CriterionResult& r : *results) {
    std::printf("%s\n", format_result(r).c_str());
    if (r.gating && !r.passed) failed.push_back(r.name);
  }
  if (!failed.empty()) {
    std::printf("failed:");
    for (const std::string& f : failed) std::printf(" [%s]", f.c_str());
    std::printf("\n");
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Barrier-Lyapunov target-enclosing guidance simulator"};
  app.require_subcommand(1);

  std::string scenario, out, metrics, dir = "sweep_out", suite = "all";
  std::vector<std::string> overrides, grid;
  int mc = 0;
  std::uint64_t seed_value = 0;
  unsigned threads = 0;

  CLI::App* run = app.add_subcommand("run", "Run one scenario and write its trace and metrics");
  run->add_option("--scenario", scenario, "Bundled scenario name (st, cvt, mt) or scenario file")->required();
  run->add_option("--out", out, "Trace CSV path");
  run->add_option("--metrics", metrics, "Metrics JSON path");
  run->add_option("--set", overrides, "Override, key=value (repeatable)");

  CLI::App* sweep = app.add_subcommand("sweep", "Run a parameter grid or a Monte Carlo batch");
  sweep->add_option("--scenario", scenario, "Template scenario")->required();
  sweep->add_option("--grid", grid, "Grid axis, key=v1,v2,... (repeatable; axes combine)");
  sweep->add_option("--mc", mc, "Monte Carlo run count")->check(CLI::PositiveNumber);
  CLI::Option* seed_opt = sweep->add_option("--seed", seed_value, "Monte Carlo seed (default: the scenario seed)");
  sweep->add_option("--out", dir, "Output directory");
  sweep->add_option("--set", overrides, "Override applied to the template, key=value (repeatable)");
  sweep->add_option("--threads", threads, "Worker threads (0: all cores)");

  CLI::App* verify = app.add_subcommand("verify", "Run property suites and report each criterion");
  verify->add_option("--suite", suite, "speed | barrier | bounds | lyapunov | allocation | equivalence | all");

  CLI::App* list = app.add_subcommand("list", "List bundled scenarios");
  CLI::App* show = app.add_subcommand("show", "Print a scenario as a config file");
  show->add_option("--scenario", scenario, "Bundled scenario name or scenario file")->required();
  show->add_option("--set", overrides, "Override, key=value (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (run->parsed()) return cmd_run(scenario, overrides, out, metrics);
  if (sweep->parsed()) {
    std::optional<std::uint64_t> seed;
    if (seed_opt->count() > 0) seed = seed_value;
    return cmd_sweep(scenario, overrides, grid, mc, seed, dir, threads);
  }
  if (verify->parsed()) return cmd_verify(suite);
  if (list->parsed()) {
    for (const std::string& n : bundled_scenario_names()) {
      const ScenarioConfig c = *bundled_scenario(n);
      std::printf("%-4s r_d = %g m, V_d = %g m/s, target %s\n", n.c_str(), c.guidance.r_d, c.guidance.v_d,
                  detail::enum_name(c.target.kind, detail::kTargetNames).c_str());
    }
    return kExitOk;
  }
  if (show->parsed()) {
    try {
      std::fputs(serialize_config(load_with_overrides(scenario, overrides)).c_str(), stdout);
    } catch (const EncloseError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kExitConfig;
    }
    return kExitOk;
  }
  return kExitConfig;
}
