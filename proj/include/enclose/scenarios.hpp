#pragma once

#include "enclose/sim.hpp"

#include <optional>
#include <string>
#include <vector>

namespace enclose {

// Shared engagement setup: pursuer at [0,0,15] and target at [12,12,15],
// both with LOS-frame angles gamma = chi = 10 deg.
inline ScenarioConfig base_scenario() {
  ScenarioConfig c;
  c.pursuer.position = Vec3(0.0, 0.0, 15.0);
  c.pursuer.speed = 3.0;
  c.pursuer.gamma_deg = 10.0;
  c.pursuer.chi_deg = 10.0;
  c.target.position = Vec3(12.0, 12.0, 15.0);
  c.target.gamma_deg = 10.0;
  c.target.chi_deg = 10.0;
  c.guidance.a = 5.0;
  c.guidance.b = 15.0;
  c.guidance.k_1 = 0.008;
  c.guidance.k_2 = 30.0;
  c.guidance.w_1 = 0.5;
  c.guidance.w_2 = 0.5;
  c.guidance.k_v = 1.0;
  c.duration = 100.0;
  c.dt_guidance = 0.05;
  c.n_substeps = 20;
  return c;
}

inline ScenarioConfig scenario_st() {
  ScenarioConfig c = base_scenario();
  c.name = "st";
  c.target.kind = TargetKind::Stationary;
  c.guidance.r_d = 8.0;
  c.guidance.v_d = 5.0;
  return c;
}

inline ScenarioConfig scenario_cvt() {
  ScenarioConfig c = base_scenario();
  c.name = "cvt";
  c.target.kind = TargetKind::ConstantVelocity;
  c.target.speed = 2.0;
  c.guidance.r_d = 8.0;
  c.guidance.v_d = 5.0;
  return c;
}

inline ScenarioConfig scenario_mt() {
  ScenarioConfig c = base_scenario();
  c.name = "mt";
  c.target.kind = TargetKind::Sinusoidal;
  const TargetModel m = TargetModel::maneuvering();
  c.target.sin_mean = m.v0;
  c.target.sin_amplitude = m.amplitude;
  c.target.sin_omega = m.omega;
  c.target.a_max_r = m.a_max_r;
  c.target.a_max_gamma = m.a_max_gamma;
  c.target.a_max_chi = m.a_max_chi;
  c.guidance.r_d = 12.0;
  c.guidance.v_d = 8.0;
  return c;
}

inline std::vector<std::string> bundled_scenario_names() { return {"st", "cvt", "mt"}; }

inline std::optional<ScenarioConfig> bundled_scenario(const std::string& name) {
  if (name == "st") return scenario_st();
  if (name == "cvt") return scenario_cvt();
  if (name == "mt") return scenario_mt();
  return std::nullopt;
}

}  // namespace enclose
