#pragma once

#include "enclose/montecarlo.hpp"
#include "enclose/sim.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace enclose {

inline constexpr const char* kTraceHeader =
    "t,xP,yP,zP,xT,yT,zT,r,theta,psi,VP,gammaP,chiP,eps,z,alpha,U,a_r,a_gamma,a_chi,Delta,V1,V2,in_barrier,saturated";

inline constexpr int kTraceColumns = 25;

inline std::string trace_row(const SimRecord& rec) {
  const InertialState& in = rec.inertial;
  const EngagementState& s = rec.rel;
  const PursuerCommand& c = rec.command;
  const double vals[] = {rec.t, in.pos_p.x(), in.pos_p.y(), in.pos_p.z(), in.pos_t.x(), in.pos_t.y(),
                         in.pos_t.z(), s.r, s.theta, s.psi, s.v_p, s.gamma_p, s.chi_p, c.diag.eps, c.diag.z,
                         c.diag.alpha, c.diag.u_eff, c.a_r, c.a_gamma, c.a_chi, rec.delta_true, c.diag.v1, c.diag.v2};
  std::string out;
  char buf[32];
  for (double v : vals) {
    std::snprintf(buf, sizeof buf, "%.9g,", v);
    out += buf;
  }
  out += rec.flags.in_barrier ? "1," : "0,";
  out += rec.flags.saturated ? "1" : "0";
  return out;
}

inline void write_trace(const SimTrace& trace, std::ostream& out) {
  out << kTraceHeader << '\n';
  for (const SimRecord& rec : trace) out << trace_row(rec) << '\n';
}

inline void write_trace(const SimTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EncloseError("cannot open trace file '" + path + "' for writing");
  write_trace(trace, out);
  if (!out) throw EncloseError("write failed for trace file '" + path + "'");
}

/// Reads a trace written by write_trace. Quantities that the CSV does not
/// carry (LOS rates, target heading, velocities) are left at their defaults.
inline SimTrace read_trace(std::istream& in, const std::string& source = "<trace>") {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw EncloseError(source + ":1: unexpected trace header");
  SimTrace trace;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    double v[kTraceColumns];
    std::stringstream ss(line);
    std::string cell;
    int k = 0;
    while (std::getline(ss, cell, ',')) {
      if (k >= kTraceColumns) throw EncloseError(source + ":" + std::to_string(lineno) + ": too many columns");
      char* end = nullptr;
      v[k] = std::strtod(cell.c_str(), &end);
      if (cell.empty() || *end != '\0') {
        throw EncloseError(source + ":" + std::to_string(lineno) + ": bad value '" + cell + "'");
      }
      ++k;
    }
    if (k != kTraceColumns) throw EncloseError(source + ":" + std::to_string(lineno) + ": expected 25 columns");
    SimRecord rec;
    rec.t = rec.rel.t = rec.inertial.t = v[0];
    rec.inertial.pos_p = Vec3(v[1], v[2], v[3]);
    rec.inertial.pos_t = Vec3(v[4], v[5], v[6]);
    rec.rel.r = v[7];
    rec.rel.theta = v[8];
    rec.rel.psi = v[9];
    rec.rel.v_p = v[10];
    rec.rel.gamma_p = v[11];
    rec.rel.chi_p = v[12];
    rec.command.diag.eps = v[13];
    rec.command.diag.z = v[14];
    rec.command.diag.alpha = v[15];
    rec.command.diag.u_eff = v[16];
    rec.command.a_r = v[17];
    rec.command.a_gamma = v[18];
    rec.command.a_chi = v[19];
    rec.delta_true = v[20];
    rec.command.diag.v1 = v[21];
    rec.command.diag.v2 = v[22];
    rec.flags.in_barrier = v[23] != 0.0;
    rec.flags.saturated = v[24] != 0.0;
    rec.command.diag.saturated = rec.flags.saturated;
    trace.push_back(rec);
  }
  return trace;
}

inline SimTrace read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EncloseError("cannot open trace file '" + path + "'");
  return read_trace(in, path);
}

// Metrics document ------------------------------------------------------------------

/// Flat key -> number map. Status is encoded as its RunStatus code, and the
/// guidance bounds ride along so plots can draw the barrier lines.
inline nlohmann::ordered_json metrics_json(const MetricsSummary& m, const ScenarioConfig& c) {
  nlohmann::ordered_json j;
  j["status"] = static_cast<int>(m.status);
  j["records"] = m.records;
  j["end_time"] = m.end_time;
  j["final_eps"] = m.final_eps;
  j["max_abs_eps_final"] = m.max_abs_eps_final;
  j["mean_abs_eps_final"] = m.mean_abs_eps_final;
  j["settling_time"] = m.settling_time;
  j["min_r"] = m.min_r;
  j["max_r"] = m.max_r;
  j["speed_settling_time"] = m.speed_settling_time;
  j["lateral_effort"] = m.lateral_effort;
  j["barrier_violations"] = m.barrier_violations;
  j["saturation_duty"] = m.saturation_duty;
  j["max_abs_delta"] = m.max_abs_delta;
  j["r_d"] = c.guidance.r_d;
  j["V_d"] = c.guidance.v_d;
  j["a"] = c.guidance.a;
  j["b"] = c.guidance.b;
  j["r_T"] = c.guidance.r_threat();
  j["r_C"] = c.guidance.r_conn();
  return j;
}

inline void write_json(const nlohmann::ordered_json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EncloseError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw EncloseError("write failed for '" + path + "'");
}

inline void write_metrics(const MetricsSummary& m, const ScenarioConfig& c, const std::string& path) {
  write_json(metrics_json(m, c), path);
}

inline MetricsSummary read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EncloseError("cannot open metrics file '" + path + "'");
  const nlohmann::json j = nlohmann::json::parse(in);
  MetricsSummary m;
  m.status = static_cast<RunStatus>(j.at("status").get<int>());
  m.records = j.at("records").get<long>();
  m.end_time = j.at("end_time").get<double>();
  m.final_eps = j.at("final_eps").get<double>();
  m.max_abs_eps_final = j.at("max_abs_eps_final").get<double>();
  m.mean_abs_eps_final = j.at("mean_abs_eps_final").get<double>();
  m.settling_time = j.at("settling_time").get<double>();
  m.min_r = j.at("min_r").get<double>();
  m.max_r = j.at("max_r").get<double>();
  m.speed_settling_time = j.at("speed_settling_time").get<double>();
  m.lateral_effort = j.at("lateral_effort").get<double>();
  m.barrier_violations = j.at("barrier_violations").get<long>();
  m.saturation_duty = j.at("saturation_duty").get<double>();
  m.max_abs_delta = j.at("max_abs_delta").get<double>();
  return m;
}

/// Aggregate of a batch, also a flat key -> number map.
inline nlohmann::ordered_json batch_json(const BatchSummary& b) {
  nlohmann::ordered_json j;
  j["runs"] = b.runs;
  j["completed"] = b.completed;
  j["safety_aborts"] = b.safety_aborts;
  j["guard_aborts"] = b.guard_aborts;
  j["config_errors"] = b.config_errors;
  j["fraction_converged"] = b.fraction_converged;
  j["worst_max_abs_eps_final"] = b.worst_max_abs_eps_final;
  j["worst_min_r"] = b.worst_min_r;
  j["worst_max_r"] = b.worst_max_r;
  j["barrier_violations"] = b.barrier_violations;
  return j;
}

}  // namespace enclose
