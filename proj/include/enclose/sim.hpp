#pragma once

#include "enclose/guidance.hpp"
#include "enclose/integrator.hpp"
#include "enclose/kinematics.hpp"
#include "enclose/target.hpp"
#include "enclose/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace enclose {

enum class Plant { Kinematic, Uncertain };

/// How the speed loop is closed: at the plant rate from the pursuer's own
/// speed, or sampled and held at the guidance rate like the lateral channels.
enum class SpeedLoop { Continuous, Sampled };

/// Where the guidance command is recomputed: at every plant substep, or once
/// per guidance interval and held across its substeps.
enum class GuidanceUpdate { Substep, Interval };

struct PursuerSpec {
  Vec3 position = Vec3(0.0, 0.0, 15.0);
  double speed = 3.0;       // m/s
  double gamma_deg = 10.0;  // LOS-frame flight-path elevation
  double chi_deg = 10.0;    // LOS-frame flight-path azimuth
};

struct TargetSpec {
  TargetKind kind = TargetKind::Stationary;
  Vec3 position = Vec3(12.0, 12.0, 15.0);
  double speed = 0.0;       // constant-velocity initial speed
  double gamma_deg = 10.0;  // constant-velocity initial heading (LOS frame)
  double chi_deg = 10.0;
  Vec3 sin_mean = Vec3::Zero();
  Vec3 sin_amplitude = Vec3::Zero();
  Vec3 sin_omega = Vec3::Zero();
  std::string profile_path;
  double a_max_r = 0.0;
  double a_max_gamma = 0.0;
  double a_max_chi = 0.0;

  double bound_sum() const { return a_max_r + a_max_gamma + a_max_chi; }
};

struct Disturbance {
  double amplitude = 1.0;   // m/s^2
  double frequency = 1.0;   // rad/s
  std::array<bool, 3> channels{true, true, true};  // (a_r, a_gamma, a_chi)
};

struct ScenarioConfig {
  std::string name = "custom";
  Plant plant = Plant::Kinematic;
  SpeedLoop speed_loop = SpeedLoop::Continuous;
  GuidanceUpdate guidance_update = GuidanceUpdate::Substep;
  PursuerSpec pursuer;
  TargetSpec target;
  GuidanceParams guidance;
  Disturbance disturbance;
  double duration = 100.0;
  double dt_guidance = 0.05;
  int n_substeps = 10;
  std::uint64_t seed = 0;
  std::string trace_path;
  std::string metrics_path;
};

// Scenario setup ---------------------------------------------------------------

inline LosFrame initial_los(const ScenarioConfig& c) {
  const Vec3 d = c.target.position - c.pursuer.position;
  const double r = d.norm();
  if (!(r > 0.0)) throw ConfigError("pursuer and target start at the same position");
  return LosFrame::from_angles(std::asin(std::clamp(d.z() / r, -1.0, 1.0)), std::atan2(d.y(), d.x()));
}

/// Resolves the target spec into a model. Constant-velocity targets convert
/// their LOS-frame heading once, at the initial geometry.
inline TargetModel make_target_model(const ScenarioConfig& c) {
  const TargetSpec& s = c.target;
  TargetModel m;
  switch (s.kind) {
    case TargetKind::Stationary:
      m = TargetModel::stationary();
      break;
    case TargetKind::ConstantVelocity:
      m = TargetModel::constant_velocity(
          init_target_inertial(deg2rad(s.chi_deg), deg2rad(s.gamma_deg), s.speed, initial_los(c)));
      break;
    case TargetKind::Sinusoidal:
      m = TargetModel::sinusoidal(s.sin_mean, s.sin_amplitude, s.sin_omega);
      break;
    case TargetKind::Profile:
      m = load_profile_csv(s.profile_path);
      break;
  }
  m.a_max_r = s.a_max_r;
  m.a_max_gamma = s.a_max_gamma;
  m.a_max_chi = s.a_max_chi;
  return m;
}

inline InertialState initial_inertial(const ScenarioConfig& c, const TargetModel& m) {
  const LosFrame los = initial_los(c);
  InertialState s;
  s.pos_p = c.pursuer.position;
  s.vel_p = los_angles_to_inertial(los, c.pursuer.speed, deg2rad(c.pursuer.gamma_deg),
                                   deg2rad(c.pursuer.chi_deg));
  s.pos_t = c.target.position;
  s.vel_t = target_velocity(0.0, m);
  return s;
}

inline long guidance_steps(const ScenarioConfig& c) { return std::lround(c.duration / c.dt_guidance); }

/// Checks every scenario invariant; throws ConfigError naming the first failure.
inline void validate(const ScenarioConfig& c, const TargetModel& m) {
  if (!(c.duration >= 0.0) || !std::isfinite(c.duration)) throw ConfigError("duration must be >= 0");
  if (!(c.dt_guidance > 0.0)) throw ConfigError("dt_guidance must be > 0");
  if (c.n_substeps < 1) throw ConfigError("n_substeps must be >= 1");
  if (std::abs(guidance_steps(c) * c.dt_guidance - c.duration) > 1e-9 * std::max(1.0, c.duration)) {
    throw ConfigError("duration must be a whole number of guidance intervals");
  }
  if (c.pursuer.speed < 0.0 || c.target.speed < 0.0) throw ConfigError("speeds must be >= 0");
  c.guidance.validate(m.bound_sum());
  if (!bounds_dominate(m, c.duration)) {
    throw ConfigError("declared target acceleration bounds do not dominate the profile (max |a_T| = " +
                      std::to_string(max_target_accel(m, c.duration)) + " m/s^2)");
  }
  const double r0 = (c.target.position - c.pursuer.position).norm();
  const double eps0 = r0 - c.guidance.r_d;
  if (!inside_barrier(eps0, c.guidance)) {
    throw ConfigError("initial range error " + std::to_string(eps0) +
                      " m violates the barrier hypothesis -a < eps(0) < b with a = " +
                      std::to_string(c.guidance.a) + ", b = " + std::to_string(c.guidance.b));
  }
}

// Records and metrics ------------------------------------------------------------

struct SafetyFlags {
  bool in_barrier = false;
  bool in_safe_shell = false;
  bool saturated = false;
};

struct SimRecord {
  double t = 0.0;
  EngagementState rel;
  InertialState inertial;
  LosRates rates;
  PursuerCommand command;
  double delta_true = 0.0;
  SafetyFlags flags;
};

using SimTrace = std::vector<SimRecord>;

enum class RunStatus { Completed = 0, SafetyAbort = 1, GuardAbort = 2 };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::SafetyAbort: return "safety_abort";
    case RunStatus::GuardAbort: return "guard_abort";
  }
  return "?";
}

struct MetricsSummary {
  double final_eps = 0.0;
  double max_abs_eps_final = 0.0;   // over the last 20% of the run
  double mean_abs_eps_final = 0.0;  // over the last 20% of the run
  double settling_time = -1.0;      // |eps| < 0.05 r_d thereafter; -1 if never
  double min_r = 0.0;
  double max_r = 0.0;
  double speed_settling_time = -1.0;  // |e_v| < 0.02 V_d thereafter; -1 if never
  double lateral_effort = 0.0;        // integral of |a_gamma| + |a_chi|
  long barrier_violations = 0;
  double saturation_duty = 0.0;
  double max_abs_delta = 0.0;
  long records = 0;
  RunStatus status = RunStatus::Completed;
  double end_time = 0.0;
};

struct SimResult {
  SimTrace trace;
  MetricsSummary metrics;
  RunStatus status = RunStatus::Completed;
  std::string message;
};

/// Flags for one record. The shell and barrier tests are the same interval
/// written in range and in range error.
inline SafetyFlags safety_monitor(const SimRecord& rec, const GuidanceParams& p) {
  SafetyFlags f;
  f.in_safe_shell = rec.rel.r > p.r_threat() && rec.rel.r < p.r_conn();
  f.in_barrier = inside_barrier(rec.rel.r - p.r_d, p);
  f.saturated = rec.command.diag.saturated;
  return f;
}

/// Adds amplitude * sin(frequency * t) to each enabled channel.
inline AccelCommandFrame inject_disturbance(AccelCommandFrame u, double t, const Disturbance& d) {
  const double w = d.amplitude * std::sin(d.frequency * t);
  if (d.channels[0]) u.a_r += w;
  if (d.channels[1]) u.a_gamma += w;
  if (d.channels[2]) u.a_chi += w;
  return u;
}

/// Target-input term of the range-error dynamics, e_r . a_T, written in the
/// target's body-frame components.
inline double target_input_term(const EngagementState& rel, const AccelCommandFrame& a_t) {
  const double cg = std::cos(rel.gamma_t), sg = std::sin(rel.gamma_t);
  const double cc = std::cos(rel.chi_t), sc = std::sin(rel.chi_t);
  return a_t.a_r * cg * cc - sg * cc * a_t.a_gamma - sc * a_t.a_chi;
}

inline MetricsSummary compute_metrics(const SimTrace& trace, const ScenarioConfig& c, RunStatus status) {
  MetricsSummary m;
  m.status = status;
  m.records = static_cast<long>(trace.size());
  if (trace.empty()) return m;
  const GuidanceParams& p = c.guidance;
  const double t_end = trace.back().t;
  m.end_time = t_end;
  m.final_eps = trace.back().rel.r - p.r_d;
  m.min_r = std::numeric_limits<double>::infinity();
  m.max_r = -std::numeric_limits<double>::infinity();

  const double window_start = t_end - 0.2 * c.duration - 1e-9;
  double sum_final = 0.0;
  long n_final = 0, n_sat = 0;
  double last_unsettled = -1.0, last_speed_unsettled = -1.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const SimRecord& rec = trace[i];
    const double eps = rec.rel.r - p.r_d;
    m.min_r = std::min(m.min_r, rec.rel.r);
    m.max_r = std::max(m.max_r, rec.rel.r);
    if (rec.t >= window_start) {
      m.max_abs_eps_final = std::max(m.max_abs_eps_final, std::abs(eps));
      sum_final += std::abs(eps);
      ++n_final;
    }
    if (std::abs(eps) >= 0.05 * p.r_d) last_unsettled = rec.t;
    if (std::abs(rec.rel.v_p - p.v_d) >= 0.02 * p.v_d) last_speed_unsettled = rec.t;
    if (!rec.flags.in_barrier) ++m.barrier_violations;
    if (rec.flags.saturated) ++n_sat;
    m.max_abs_delta = std::max(m.max_abs_delta, std::abs(rec.delta_true));
    if (i + 1 < trace.size()) {
      const double dt = trace[i + 1].t - rec.t;
      m.lateral_effort += (std::abs(rec.command.a_gamma) + std::abs(rec.command.a_chi)) * dt;
    }
  }
  m.mean_abs_eps_final = n_final ? sum_final / static_cast<double>(n_final) : 0.0;
  m.saturation_duty = static_cast<double>(n_sat) / static_cast<double>(trace.size());
  const bool done = status == RunStatus::Completed;
  if (last_unsettled < 0.0) m.settling_time = 0.0;
  else if (done && last_unsettled < t_end) m.settling_time = last_unsettled + c.dt_guidance;
  if (last_speed_unsettled < 0.0) m.speed_settling_time = 0.0;
  else if (done && last_speed_unsettled < t_end) m.speed_settling_time = last_speed_unsettled + c.dt_guidance;
  return m;
}

// Closed loop --------------------------------------------------------------------

struct RunOptions {
  Guards guards;
  // Called once per plant substep with the substep start time and the
  // body-frame command held over it (before disturbance injection).
  std::function<void(double, const AccelCommandFrame&)> on_substep;
};

namespace detail {

inline SimRecord make_record(const InertialState& in, const TargetModel& m, const GuidanceParams& p,
                             const Guards& g) {
  SimRecord rec;
  rec.t = in.t;
  rec.inertial = in;
  rec.rel = to_relative(in, g);
  const LosFrame los = LosFrame::from_angles(rec.rel.theta, rec.rel.psi);
  rec.delta_true = target_input_term(rec.rel, target_body_accel(los, in.vel_t, target_accel(in.t, m), g));
  return rec;
}

}  // namespace detail

/// Runs one closed-loop engagement and samples it every dt_guidance.
///
/// The plant advances in n_substeps RK4 steps per interval with the body-frame
/// command held over each step; the command is recomputed per substep or per
/// interval according to guidance_update. A barrier crossing (checked after
/// every substep) or a kinematic guard ends the run early, and the last record
/// then carries the offending state.
inline SimResult run_scenario(const ScenarioConfig& c, const TargetModel& model, const RunOptions& opt = {}) {
  validate(c, model);
  const GuidanceParams& p = c.guidance;
  const Guards& g = opt.guards;
  // The LOS pole is a chart singularity only; guidance stays well defined there.
  Guards gg = g;
  gg.theta = 0.0;
  const long n_steps = guidance_steps(c);
  const double h = c.dt_guidance / c.n_substeps;

  SimResult res;
  res.trace.reserve(static_cast<std::size_t>(n_steps + 1));
  InertialState x = initial_inertial(c, model);

  auto fail = [&](RunStatus st, const std::string& msg) {
    res.status = st;
    char buf[64];
    std::snprintf(buf, sizeof buf, "t=%.4f s: ", x.t);
    res.message = buf + msg;
  };
  auto push_out_of_shell = [&](const PursuerCommand& cmd) {
    try {
      SimRecord bad = detail::make_record(x, model, p, gg);
      bad.rates = los_rates(bad.rel, gg);
      bad.command = cmd;
      bad.command.diag.eps = bad.rel.r - p.r_d;
      bad.flags = safety_monitor(bad, p);
      bad.flags.saturated = false;
      res.trace.push_back(bad);
    } catch (const EncloseError&) {
    }
  };

  using detail::InVec;
  for (long k = 0; k <= n_steps; ++k) {
    x.t = k * c.dt_guidance;
    SimRecord rec;
    try {
      rec = detail::make_record(x, model, p, gg);
      rec.rates = los_rates(rec.rel, gg);
    } catch (const EncloseError& e) {
      fail(RunStatus::GuardAbort, e.what());
      break;
    }
    try {
      rec.command = guidance_step(rec.rel, p, gg);
    } catch (const OutOfBarrier& e) {
      rec.flags = safety_monitor(rec, p);
      res.trace.push_back(rec);
      fail(RunStatus::SafetyAbort, e.what());
      break;
    } catch (const EncloseError& e) {
      res.trace.push_back(rec);
      fail(RunStatus::GuardAbort, e.what());
      break;
    }
    rec.flags = safety_monitor(rec, p);
    res.trace.push_back(rec);
    if (k == n_steps) break;

    PursuerCommand cmd = rec.command;
    bool aborted = false;
    for (int j = 0; j < c.n_substeps && !aborted; ++j) {
      const double t0 = x.t;
      if (j > 0 && c.guidance_update == GuidanceUpdate::Substep) {
        try {
          cmd = guidance_step(to_relative(x, gg), p, gg);
        } catch (const OutOfBarrier& e) {
          push_out_of_shell(cmd);
          fail(RunStatus::SafetyAbort, e.what());
          break;
        } catch (const EncloseError& e) {
          fail(RunStatus::GuardAbort, e.what());
          break;
        }
      }
      const AccelCommandFrame held = cmd.frame();
      if (opt.on_substep) opt.on_substep(t0, held);
      auto f = [&](double t, const InVec& s) -> InVec {
        const Vec3 pp = s.segment<3>(0), vp = s.segment<3>(3), pt = s.segment<3>(6);
        AccelCommandFrame u = held;
        if (c.speed_loop == SpeedLoop::Continuous) u.a_r = radial_accel(vp.norm(), p);
        if (c.plant == Plant::Uncertain) u = inject_disturbance(u, t, c.disturbance);
        const LosFrame los = detail::los_of(pp, pt, g);
        InVec out;
        out << vp, body_to_inertial(los, vp, u, g), target_velocity(t, model), target_accel(t, model);
        return out;
      };
      try {
        const InVec next = rk4_step(f, t0, detail::pack(x), h);
        x = detail::unpack_inertial(next, t0 + h);
        if (j + 1 == c.n_substeps) x.t = (k + 1) * c.dt_guidance;
        x.vel_t = target_velocity(x.t, model);
      } catch (const EncloseError& e) {
        fail(RunStatus::GuardAbort, e.what());
        aborted = true;
        break;
      }
      const double r = (x.pos_t - x.pos_p).norm();
      if (!(r > p.r_threat() && r < p.r_conn())) {
        push_out_of_shell(cmd);
        fail(RunStatus::SafetyAbort, "range " + std::to_string(r) + " m left the safe shell (" +
                                         std::to_string(p.r_threat()) + ", " + std::to_string(p.r_conn()) + ")");
        aborted = true;
      }
    }
    if (aborted || res.status != RunStatus::Completed) break;
  }
  res.metrics = compute_metrics(res.trace, c, res.status);
  return res;
}

inline SimResult run_scenario(const ScenarioConfig& c, const RunOptions& opt = {}) {
  return run_scenario(c, make_target_model(c), opt);
}

}  // namespace enclose
