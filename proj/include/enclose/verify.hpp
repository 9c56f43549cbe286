#pragma once

#include "enclose/kinematics.hpp"
#include "enclose/montecarlo.hpp"
#include "enclose/scenarios.hpp"
#include "enclose/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace enclose {

struct CriterionResult {
  std::string name;
  bool passed = false;
  bool gating = true;  // false: reported for comparison only
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

template <class... Args>
std::string format(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline double window_max_abs_eps(const SimTrace& tr, double from) {
  double worst = 0.0;
  for (const SimRecord& rec : tr) {
    if (rec.t >= from - 1e-9) worst = std::max(worst, std::abs(rec.command.diag.eps));
  }
  return worst;
}

inline double window_mean_abs_eps(const SimTrace& tr, double from) {
  double sum = 0.0;
  long n = 0;
  for (const SimRecord& rec : tr) {
    if (rec.t >= from - 1e-9) {
      sum += std::abs(rec.command.diag.eps);
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

/// Steady-state range-error bound (|Delta| / (max(a^2, b^2) K_1 K_2))^(1/3).
inline double steady_state_bound(double delta_bound, const GuidanceParams& p) {
  return std::cbrt(delta_bound / (std::max(p.a * p.a, p.b * p.b) * p.k_1 * p.k_2));
}

/// Stationary-target engagement started on the desired orbit: r = r_d, V_P = V_d,
/// velocity normal to the LOS in the azimuth plane.
inline ScenarioConfig equilibrium_scenario() {
  ScenarioConfig c = scenario_st();
  c.name = "st-equilibrium";
  const LosFrame los = initial_los(c);
  c.pursuer.position = c.target.position - c.guidance.r_d * los.e_r;
  c.pursuer.speed = c.guidance.v_d;
  c.pursuer.gamma_deg = 0.0;
  c.pursuer.chi_deg = 90.0;
  return c;
}

// Speed loop ---------------------------------------------------------------------------

inline CriterionResult check_speed_exactness() {
  detail::Stopwatch sw;
  CriterionResult res{"speed controller exactness"};
  ScenarioConfig c = scenario_st();
  const SimResult run = run_scenario(c);
  const double e0 = c.pursuer.speed - c.guidance.v_d;
  double worst = 0.0;
  for (const SimRecord& rec : run.trace) {
    const double ev = rec.rel.v_p - c.guidance.v_d;
    worst = std::max(worst, std::abs(ev - e0 * std::exp(-c.guidance.k_v * rec.t)));
  }
  res.seconds = sw.seconds();
  const double tol = 1e-4 * std::abs(e0);
  res.passed = run.status == RunStatus::Completed && e0 != 0.0 && worst <= tol && res.seconds < 1.0;
  res.detail = detail::format("max |e_v - e_v(0)exp(-K_v t)| = %.3e (limit %.1e), e_v(0) = %g, %zu samples, %.3f s",
                              worst, tol, e0, run.trace.size(), res.seconds);
  return res;
}

// Barrier invariance ---------------------------------------------------------------

inline CriterionResult check_barrier_invariance(int runs = 100, std::uint64_t seed = 20240601) {
  detail::Stopwatch sw;
  CriterionResult res{"barrier invariance"};
  bool ok = true;
  std::string parts;
  for (const std::string& name : bundled_scenario_names()) {
    ScenarioConfig c = *bundled_scenario(name);
    c.plant = Plant::Kinematic;
    MonteCarloSpec spec;
    spec.n = runs;
    spec.seed = seed;
    spec.nominal_first = false;
    spec.keep_traces = true;
    const BatchSummary b = monte_carlo(c, spec);
    const GuidanceParams& p = c.guidance;
    long outside = 0;
    double min_eps = std::numeric_limits<double>::infinity(), max_eps = -min_eps;
    for (const RunOutcome& o : b.outcomes) {
      for (const SimRecord& rec : o.trace) {
        const double eps = rec.rel.r - p.r_d;
        min_eps = std::min(min_eps, eps);
        max_eps = std::max(max_eps, eps);
        if (!(rec.rel.r > p.r_threat() && rec.rel.r < p.r_conn())) ++outside;
      }
    }
    const bool this_ok = outside == 0 && b.completed == runs;
    ok = ok && this_ok;
    parts += detail::format("%s: %d/%d completed, %ld outside, r in [%.3f, %.3f] vs (%g, %g); ", name.c_str(),
                            b.completed, runs, outside, p.r_d + min_eps, p.r_d + max_eps, p.r_threat(), p.r_conn());
  }
  res.seconds = sw.seconds();
  res.passed = ok && res.seconds < 120.0;
  res.detail = parts + detail::format("%.1f s", res.seconds);
  return res;
}

// Convergence and steady-state bounds -------------------------------------------------

inline CriterionResult check_convergence() {
  detail::Stopwatch sw;
  CriterionResult res{"convergence at desk scale"};
  const ScenarioConfig st = scenario_st();
  const SimResult rs = run_scenario(st);
  const double st_err = detail::window_max_abs_eps(rs.trace, st.duration - 20.0);

  const ScenarioConfig mt = scenario_mt();
  const SimResult rm = run_scenario(mt);
  const double mt_err = detail::window_max_abs_eps(rm.trace, mt.duration - 20.0);
  const double mt_bound = 1.5 * steady_state_bound(rm.metrics.max_abs_delta, mt.guidance);

  res.seconds = sw.seconds();
  res.passed = rs.status == RunStatus::Completed && rm.status == RunStatus::Completed && st_err <= 0.5 &&
               mt_err <= mt_bound;
  res.detail = detail::format("ST final-20 s max|eps| = %.4f m (limit 0.5); MT final-20 s max|eps| = %.4f m "
                              "(limit %.4f from max|Delta| = %.4f)",
                              st_err, mt_err, mt_bound, rm.metrics.max_abs_delta);
  return res;
}

inline CriterionResult check_disturbance_robustness() {
  detail::Stopwatch sw;
  CriterionResult res{"disturbance robustness"};
  ScenarioConfig c = scenario_st();
  c.plant = Plant::Uncertain;
  c.disturbance = Disturbance{};
  const SimResult r = run_scenario(c);
  const double mean = detail::window_mean_abs_eps(r.trace, 0.8 * c.duration);
  const double limit = 2.0 * steady_state_bound(3.0, c.guidance);
  res.seconds = sw.seconds();
  res.passed = r.status == RunStatus::Completed && r.metrics.barrier_violations == 0 && mean <= limit;
  res.detail = detail::format("%s at t = %.2f s, %ld barrier violations, final-20%% mean|eps| = %.4f m (limit %.4f)",
                              to_string(r.status), r.metrics.end_time, r.metrics.barrier_violations, mean, limit);
  return res;
}

/// Counts, over consecutive logged pairs with |z| > phi_bl at the first, steps
/// whose V_2 increase exceeds 1e-6 + K_2 phi_bl dt_g.
struct LyapunovCount {
  long checked = 0;
  long violations = 0;
  double worst_increase = -std::numeric_limits<double>::infinity();
  RunStatus status = RunStatus::Completed;
};

inline LyapunovCount count_lyapunov(const ScenarioConfig& c) {
  const SimResult r = run_scenario(c);
  const GuidanceParams& p = c.guidance;
  const double tol = 1e-6 + p.k_2 * p.phi_bl * c.dt_guidance;
  LyapunovCount out;
  out.status = r.status;
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    const CommandDiagnostics& a = r.trace[i - 1].command.diag;
    const CommandDiagnostics& b = r.trace[i].command.diag;
    if (std::abs(a.z) <= p.phi_bl) continue;
    ++out.checked;
    const double inc = b.v2 - a.v2;
    out.worst_increase = std::max(out.worst_increase, inc);
    if (!(inc <= tol)) ++out.violations;
  }
  return out;
}

inline std::vector<CriterionResult> check_lyapunov_decrease() {
  detail::Stopwatch sw;
  ScenarioConfig c = scenario_st();
  c.guidance.phi_bl = 0.05;
  const LyapunovCount proof = count_lyapunov(c);
  CriterionResult main{"Lyapunov decrease"};
  main.seconds = sw.seconds();
  main.passed = proof.status == RunStatus::Completed && proof.checked > 0 && proof.violations == 0;
  main.detail = detail::format("proof-consistent: %ld/%ld steps above tolerance %.3g, worst increase %.3e",
                               proof.violations, proof.checked, 1e-6 + c.guidance.k_2 * 0.05 * c.dt_guidance,
                               proof.worst_increase);

  std::vector<CriterionResult> out{main};
  struct Variant {
    const char* name;
    BarrierPairing pairing;
    RadialCompSign sign;
  };
  const Variant variants[] = {{"literal barrier pairing", BarrierPairing::Literal, RadialCompSign::ProofConsistent},
                              {"literal radial sign", BarrierPairing::ProofConsistent, RadialCompSign::Literal},
                              {"literal (both)", BarrierPairing::Literal, RadialCompSign::Literal}};
  for (const Variant& v : variants) {
    detail::Stopwatch vw;
    ScenarioConfig d = c;
    d.guidance.barrier_pairing = v.pairing;
    d.guidance.radial_comp_sign = v.sign;
    const LyapunovCount n = count_lyapunov(d);
    const SimResult r = run_scenario(d);
    CriterionResult diag{std::string("Lyapunov decrease, ") + v.name};
    diag.gating = false;
    diag.passed = n.status == RunStatus::Completed && n.violations == 0;
    diag.seconds = vw.seconds();
    diag.detail = detail::format("%ld/%ld violations, %s, final-20%% max|eps| = %.4f m", n.violations, n.checked,
                                 to_string(n.status), r.metrics.max_abs_eps_final);
    out.push_back(diag);
  }
  return out;
}

inline CriterionResult check_centripetal_equilibrium() {
  detail::Stopwatch sw;
  CriterionResult res{"equilibrium centripetal check"};
  long samples = 0, failures = 0;
  double worst_margin = -std::numeric_limits<double>::infinity();
  bool completed = true;
  for (const ScenarioConfig& c : {scenario_st(), equilibrium_scenario()}) {
    const SimResult r = run_scenario(c);
    completed = completed && r.status == RunStatus::Completed;
    const GuidanceParams& p = c.guidance;
    for (const SimRecord& rec : r.trace) {
      const CommandDiagnostics& d = rec.command.diag;
      if (!(std::abs(d.eps) < 0.01 && std::abs(d.z) < 0.01)) continue;
      ++samples;
      const double ct = std::cos(rec.rel.theta);
      const double cent = rec.rel.r * (rec.rates.dtheta * rec.rates.dtheta + ct * ct * rec.rates.dpsi * rec.rates.dpsi);
      const double lhs = std::abs(d.u_eff + cent);
      const double rhs = p.k_2 / p.phi_bl * std::abs(d.z) + 0.05 * std::abs(d.u_eff);
      worst_margin = std::max(worst_margin, lhs - rhs);
      if (lhs > rhs) ++failures;
    }
  }
  res.seconds = sw.seconds();
  res.passed = completed && samples > 0 && failures == 0;
  res.detail = detail::format("%ld equilibrium samples (ST and on-orbit start), %ld above the bound, worst "
                              "excess %.3e m/s^2",
                              samples, failures, worst_margin);
  return res;
}

/// ST with the command held over each whole guidance interval instead of
/// refreshed every plant substep.
inline CriterionResult check_held_command_loop() {
  CriterionResult res{"convergence with 20 Hz held commands"};
  res.gating = false;
  ScenarioConfig c = scenario_st();
  c.guidance_update = GuidanceUpdate::Interval;
  const SimResult r = run_scenario(c);
  const double err = detail::window_max_abs_eps(r.trace, c.duration - 20.0);
  res.passed = r.status == RunStatus::Completed && err <= 0.5;
  res.detail = detail::format("%s, final-20 s max|eps| = %.4f m, saturation duty %.2f", to_string(r.status), err,
                              r.metrics.saturation_duty);
  return res;
}

/// |Delta_true| never exceeds the declared target bound sum (MT).
inline CriterionResult check_delta_bound() {
  CriterionResult res{"target input term within declared bounds"};
  res.gating = false;
  const ScenarioConfig c = scenario_mt();
  const SimResult r = run_scenario(c);
  const double bound = make_target_model(c).bound_sum();
  res.passed = r.metrics.max_abs_delta <= bound;
  res.detail = detail::format("MT max|Delta| = %.4f m/s^2, bound sum %.4f", r.metrics.max_abs_delta, bound);
  return res;
}

// Allocation ------------------------------------------------------------------------

/// Smallest cost over `n` evenly spaced points of the constraint line
/// s_gamma a_gamma + s_chi a_chi = U, spanning a window that contains the
/// weighted minimiser.
inline double grid_min_cost(double u, double s_gamma, double s_chi, double w_1, double w_2, int n = 2001) {
  const double norm2 = s_gamma * s_gamma + s_chi * s_chi;
  const double norm = std::sqrt(norm2);
  const double x0 = u * s_gamma / norm2, y0 = u * s_chi / norm2;  // closest point to the origin
  const double dx = -s_chi / norm, dy = s_gamma / norm;           // unit direction along the line
  const double ratio = std::max(w_1, w_2) / std::min(w_1, w_2);
  const double half = 2.0 * std::abs(u) / norm * ratio * ratio + 1e-12;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double t = -half + 2.0 * half * i / (n - 1);
    best = std::min(best, std::hypot((x0 + t * dx) / w_1, (y0 + t * dy) / w_2));
  }
  return best;
}

inline CriterionResult check_allocation(int samples = 1000, std::uint64_t seed = 7) {
  detail::Stopwatch sw;
  CriterionResult res{"allocation optimality"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ang(-kPi / 2.0, kPi / 2.0), azi(-kPi, kPi), uu(-50.0, 50.0),
      ww(0.1, 2.0);
  double worst_residual = 0.0, worst_gap = -std::numeric_limits<double>::infinity();
  double worst_ratio = 0.0;
  int drawn = 0;
  while (drawn < samples) {
    const double gamma = ang(rng), chi = azi(rng), u = uu(rng);
    GuidanceParams p;
    p.w_1 = ww(rng);
    p.w_2 = ww(rng);
    p.a_sat = std::numeric_limits<double>::infinity();
    const double sg = std::sin(gamma) * std::cos(chi), sc = std::sin(chi);
    const double denom = sg * sg * p.w_1 * p.w_1 + sc * sc * p.w_2 * p.w_2;
    if (denom < 1e-4) continue;
    ++drawn;
    const LateralAllocation a = allocate_lateral(u, gamma, chi, p);
    worst_residual = std::max(worst_residual, std::abs(sg * a.a_gamma + sc * a.a_chi - u) / std::max(1.0, std::abs(u)));
    const double j = allocation_cost(a.a_gamma, a.a_chi, p.w_1, p.w_2);
    worst_gap = std::max(worst_gap, j - grid_min_cost(u, sg, sc, p.w_1, p.w_2));
    if (std::abs(a.a_gamma) > 1e-6 && std::abs(a.a_chi) > 1e-6) {
      const double expect = (sg * p.w_1 * p.w_1) / (sc * p.w_2 * p.w_2);
      worst_ratio = std::max(worst_ratio, std::abs(a.a_gamma / a.a_chi - expect) / std::abs(expect));
    }
  }
  res.seconds = sw.seconds();
  res.passed = worst_residual <= 1e-9 && worst_gap <= 1e-6 && res.seconds < 5.0;
  res.detail = detail::format("%d samples: max constraint residual %.2e (limit 1e-9), max cost gap to 2001-point "
                              "grid %.2e (limit 1e-6), max channel-ratio error %.2e, %.3f s",
                              samples, worst_residual, worst_gap, worst_ratio, res.seconds);
  return res;
}

// Cross-integrator equivalence ---------------------------------------------------------

struct EquivalenceGap {
  double r = 0.0, theta = 0.0, psi = 0.0, v_p = 0.0;
  double max() const { return std::max({r, theta, psi, v_p}); }
};

/// Replays a piecewise-constant command schedule (one body-frame command per
/// `hold` seconds) through both integrators at step `dt` and returns the
/// largest componentwise disagreement. The target is held still.
inline EquivalenceGap integrator_gap(const EngagementState& s0, const Vec3& pos_p0,
                                     const std::vector<AccelCommandFrame>& schedule, double hold, double dt) {
  const long per_hold = std::lround(hold / dt);
  EngagementState rel = s0;
  InertialState in = to_inertial(s0, pos_p0);
  const AccelCommandFrame none{};
  EquivalenceGap gap;
  for (const AccelCommandFrame& u : schedule) {
    for (long i = 0; i < per_hold; ++i) {
      rel = step_relative(rel, u, none, dt);
      in = step_inertial(in, u, none, dt);
      const EngagementState ind = to_relative(in);
      gap.r = std::max(gap.r, std::abs(ind.r - rel.r));
      gap.theta = std::max(gap.theta, std::abs(ind.theta - rel.theta));
      gap.psi = std::max(gap.psi, std::abs(wrap_pi(ind.psi - rel.psi)));
      gap.v_p = std::max(gap.v_p, std::abs(ind.v_p - rel.v_p));
    }
  }
  return gap;
}

/// Closes the ST loop separately through each integrator, recomputing the
/// command from that integrator's own state every step of length `dt`.
inline EquivalenceGap closed_loop_gap(const ScenarioConfig& c, double horizon, double dt) {
  Guards g;
  g.theta = 0.0;
  const InertialState start = initial_inertial(c, make_target_model(c));
  InertialState in = start;
  EngagementState rel = to_relative(start, g);
  const AccelCommandFrame none{};
  EquivalenceGap gap;
  const long n = std::lround(horizon / dt);
  for (long i = 0; i < n; ++i) {
    rel = step_relative(rel, guidance_step(rel, c.guidance, g).frame(), none, dt, g);
    in = step_inertial(in, guidance_step(to_relative(in, g), c.guidance, g).frame(), none, dt, g);
    const EngagementState ind = to_relative(in, g);
    gap.r = std::max(gap.r, std::abs(ind.r - rel.r));
    gap.theta = std::max(gap.theta, std::abs(ind.theta - rel.theta));
    gap.psi = std::max(gap.psi, std::abs(wrap_pi(ind.psi - rel.psi)));
    gap.v_p = std::max(gap.v_p, std::abs(ind.v_p - rel.v_p));
  }
  return gap;
}

inline CriterionResult check_integrator_equivalence() {
  detail::Stopwatch sw;
  CriterionResult res{"cross-integrator equivalence"};
  const ScenarioConfig c = scenario_st();
  const EquivalenceGap coarse = closed_loop_gap(c, 10.0, 0.005);
  const EquivalenceGap fine = closed_loop_gap(c, 10.0, 0.0025);
  res.seconds = sw.seconds();
  res.passed = coarse.max() <= 1e-3 && fine.max() < coarse.max();
  res.detail = detail::format("closed-loop ST, 10 s: dt 0.005 max gap r %.2e, theta %.2e, psi %.2e, V_P %.2e; "
                              "dt 0.0025 max gap %.2e (limit 1e-3, must shrink)",
                              coarse.r, coarse.theta, coarse.psi, coarse.v_p, fine.max());
  return res;
}

/// Open-loop replay of the logged 20 Hz ST commands through both integrators.
/// The saturated opening turn makes this a stiffer test than the closed loop.
inline CriterionResult check_replay_equivalence() {
  detail::Stopwatch sw;
  CriterionResult res{"cross-integrator equivalence, 20 Hz open-loop replay"};
  res.gating = false;
  ScenarioConfig c = scenario_st();
  c.duration = 10.0;
  const SimResult run = run_scenario(c);
  std::vector<AccelCommandFrame> schedule;
  for (std::size_t i = 0; i + 1 < run.trace.size(); ++i) schedule.push_back(run.trace[i].command.frame());
  const SimRecord& first = run.trace.front();
  const EquivalenceGap coarse = integrator_gap(first.rel, first.inertial.pos_p, schedule, c.dt_guidance, 0.005);
  const EquivalenceGap fine = integrator_gap(first.rel, first.inertial.pos_p, schedule, c.dt_guidance, 0.0025);
  res.seconds = sw.seconds();
  res.passed = coarse.max() <= 1e-3 && fine.max() < coarse.max();
  res.detail = detail::format("dt 0.005 max gap %.2e, dt 0.0025 max gap %.2e", coarse.max(), fine.max());
  return res;
}

// Suites ------------------------------------------------------------------------------

inline std::vector<std::string> suite_names() {
  return {"speed", "barrier", "bounds", "lyapunov", "allocation", "equivalence", "all"};
}

/// Runs a named suite; nullopt for an unknown name.
inline std::optional<std::vector<CriterionResult>> run_suite(const std::string& name) {
  std::vector<CriterionResult> out;
  const bool all = name == "all";
  bool known = all;
  if (all || name == "speed") {
    known = true;
    out.push_back(check_speed_exactness());
  }
  if (all || name == "barrier") {
    known = true;
    out.push_back(check_barrier_invariance());
  }
  if (all || name == "bounds") {
    known = true;
    out.push_back(check_convergence());
    out.push_back(check_disturbance_robustness());
    out.push_back(check_centripetal_equilibrium());
    out.push_back(check_delta_bound());
    out.push_back(check_held_command_loop());
  }
  if (all || name == "lyapunov") {
    known = true;
    for (auto& r : check_lyapunov_decrease()) out.push_back(std::move(r));
  }
  if (all || name == "allocation") {
    known = true;
    out.push_back(check_allocation());
  }
  if (all || name == "equivalence") {
    known = true;
    out.push_back(check_integrator_equivalence());
    out.push_back(check_replay_equivalence());
  }
  if (!known) return std::nullopt;
  return out;
}

inline std::string format_result(const CriterionResult& r) {
  const char* tag = r.gating ? (r.passed ? "PASS" : "FAIL") : (r.passed ? "info" : "info*");
  return std::string(tag) + "  " + r.name + ": " + r.detail;
}

inline bool all_gating_passed(const std::vector<CriterionResult>& rs) {
  return std::all_of(rs.begin(), rs.end(), [](const CriterionResult& r) { return !r.gating || r.passed; });
}

}  // namespace enclose
