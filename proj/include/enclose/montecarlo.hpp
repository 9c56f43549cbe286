#pragma once

#include "enclose/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <thread>
#include <vector>

namespace enclose {

/// Randomization of the initial engagement geometry.
///
/// Each perturbed run draws eps(0) uniformly in [eps_lo, eps_hi] (default: the
/// barrier interval shrunk by `margin` on both sides), a random LOS direction
/// with elevation up to max_los_elevation_deg, and a pursuer heading whose
/// along-LOS speed matches the target's so the run starts with zero range rate.
/// The heading is rolled about the LOS by up to roll_max_deg from the azimuth
/// plane, in either direction.
struct PerturbationSpec {
  bool enabled = true;
  double margin = 0.1;
  double eps_lo = std::numeric_limits<double>::quiet_NaN();
  double eps_hi = std::numeric_limits<double>::quiet_NaN();
  double max_los_elevation_deg = 30.0;
  double roll_max_deg = 30.0;
  double speed = std::numeric_limits<double>::quiet_NaN();  // NaN: V_d
};

struct MonteCarloSpec {
  int n = 1;
  std::uint64_t seed = 0;
  PerturbationSpec perturb;
  // Run 0 uses the unperturbed template when set.
  bool nominal_first = true;
  bool keep_traces = false;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct RunOutcome {
  int index = 0;
  ScenarioConfig config;
  RunStatus status = RunStatus::Completed;
  std::string message;
  MetricsSummary metrics;
  bool config_error = false;
  SimTrace trace;  // only when keep_traces
};

struct BatchSummary {
  int runs = 0;
  int completed = 0;
  int safety_aborts = 0;
  int guard_aborts = 0;
  int config_errors = 0;
  double fraction_converged = 0.0;  // completed and max |eps| over the final 20% < 0.05 r_d
  double worst_max_abs_eps_final = 0.0;
  double worst_min_r = std::numeric_limits<double>::infinity();
  double worst_max_r = 0.0;
  long barrier_violations = 0;
  std::vector<RunOutcome> outcomes;
};

/// Draws a perturbed copy of the template for run `index`. Deterministic in
/// (seed, index).
inline ScenarioConfig perturb_scenario(const ScenarioConfig& base, const PerturbationSpec& spec,
                                       std::uint64_t seed, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  const GuidanceParams& p = base.guidance;
  const double lo = std::isnan(spec.eps_lo) ? -p.a + spec.margin : spec.eps_lo;
  const double hi = std::isnan(spec.eps_hi) ? p.b - spec.margin : spec.eps_hi;
  const double eps0 = uniform(lo, hi);
  const double psi = uniform(-kPi, kPi);
  const double el_max = deg2rad(spec.max_los_elevation_deg);
  const double theta = uniform(-el_max, el_max);
  const double roll = deg2rad(spec.roll_max_deg) * uniform(-1.0, 1.0) + (uniform(0.0, 1.0) < 0.5 ? 0.0 : kPi);

  ScenarioConfig c = base;
  const LosFrame los = LosFrame::from_angles(theta, psi);
  c.pursuer.position = base.target.position - (p.r_d + eps0) * los.e_r;

  const double speed = std::isnan(spec.speed) ? p.v_d : spec.speed;
  const Vec3 v_t0 = target_velocity(0.0, make_target_model(c));
  const double along = speed > 0.0 ? std::clamp(v_t0.dot(los.e_r) / speed, -1.0, 1.0) : 0.0;
  const double across = std::sqrt(std::max(0.0, 1.0 - along * along));
  // Unit heading in LOS components: (along, across*cos(roll), across*sin(roll)).
  c.pursuer.speed = speed;
  c.pursuer.gamma_deg = rad2deg(std::asin(std::clamp(across * std::sin(roll), -1.0, 1.0)));
  c.pursuer.chi_deg = rad2deg(std::atan2(across * std::cos(roll), along));
  return c;
}

/// Runs a list of scenarios, concurrently when `threads` != 1. Results are
/// stored by index, so the summary does not depend on scheduling. Per-run
/// config errors are recorded in the outcome instead of aborting the batch.
inline BatchSummary run_batch(const std::vector<ScenarioConfig>& configs, bool keep_traces = false,
                              unsigned threads = 0, const RunOptions& opt = {}) {
  const int n = static_cast<int>(configs.size());
  BatchSummary out;
  out.runs = n;
  out.outcomes.resize(configs.size());
  if (n == 0) return out;

  auto run_one = [&](int i) {
    RunOutcome& o = out.outcomes[static_cast<std::size_t>(i)];
    o.index = i;
    o.config = configs[static_cast<std::size_t>(i)];
    try {
      SimResult r = run_scenario(o.config, opt);
      o.status = r.status;
      o.message = r.message;
      o.metrics = r.metrics;
      if (keep_traces) o.trace = std::move(r.trace);
    } catch (const EncloseError& e) {
      o.config_error = true;
      o.message = e.what();
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(n));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) run_one(i);
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
    worker();
  }

  int converged = 0;
  for (const RunOutcome& o : out.outcomes) {
    if (o.config_error) {
      ++out.config_errors;
      continue;
    }
    switch (o.status) {
      case RunStatus::Completed: ++out.completed; break;
      case RunStatus::SafetyAbort: ++out.safety_aborts; break;
      case RunStatus::GuardAbort: ++out.guard_aborts; break;
    }
    const double r_d = o.config.guidance.r_d;
    if (o.status == RunStatus::Completed && o.metrics.max_abs_eps_final < 0.05 * r_d) ++converged;
    out.worst_max_abs_eps_final = std::max(out.worst_max_abs_eps_final, o.metrics.max_abs_eps_final);
    out.worst_min_r = std::min(out.worst_min_r, o.metrics.min_r);
    out.worst_max_r = std::max(out.worst_max_r, o.metrics.max_r);
    out.barrier_violations += o.metrics.barrier_violations;
  }
  out.fraction_converged = static_cast<double>(converged) / n;
  return out;
}

/// The configs a Monte Carlo batch would run.
inline std::vector<ScenarioConfig> monte_carlo_configs(const ScenarioConfig& base, const MonteCarloSpec& spec) {
  if (spec.n < 1) throw ConfigError("monte carlo batch needs n >= 1");
  std::vector<ScenarioConfig> configs;
  configs.reserve(static_cast<std::size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) {
    const bool nominal = !spec.perturb.enabled || (spec.nominal_first && i == 0);
    configs.push_back(nominal ? base : perturb_scenario(base, spec.perturb, spec.seed, i));
  }
  return configs;
}

inline BatchSummary monte_carlo(const ScenarioConfig& base, const MonteCarloSpec& spec, const RunOptions& opt = {}) {
  return run_batch(monte_carlo_configs(base, spec), spec.keep_traces, spec.threads, opt);
}

}  // namespace enclose
