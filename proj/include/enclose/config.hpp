#pragma once

#include "enclose/scenarios.hpp"
#include "enclose/sim.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace enclose {

// Scenario files are `key = value` lines; `#` starts a comment. Keys and units:
//
//   name                      text
//   plant                     kinematic | uncertain
//   speed_loop                continuous | sampled
//   guidance_update           substep | interval
//   duration, dt_guidance     s
//   n_substeps, seed          integers
//   pursuer.position          m, "x,y,z"
//   pursuer.speed             m/s
//   pursuer.gamma_deg/chi_deg deg, LOS frame
//   target.kind               stationary | constant_velocity | sinusoidal | profile
//   target.position           m, "x,y,z"
//   target.speed              m/s (constant_velocity)
//   target.gamma_deg/chi_deg  deg, LOS frame (constant_velocity)
//   target.sin.mean           m/s, "x,y,z"
//   target.sin.amplitude      m/s, "x,y,z"
//   target.sin.omega          rad/s, "x,y,z"
//   target.profile            path to a t,vx,vy,vz CSV
//   target.a_max_r/gamma/chi  m/s^2
//   guidance.V_d, guidance.r_d, guidance.a, guidance.b    m/s, m, m, m
//   guidance.K_v, guidance.K_1, guidance.K_2              1/s, -, m/s^2
//   guidance.w_1, guidance.w_2                            -
//   guidance.phi_bl, guidance.a_sat                       m/s, m/s^2
//   guidance.barrier_pairing, guidance.radial_comp_sign   proof | literal
//   disturbance.amplitude     m/s^2
//   disturbance.frequency     rad/s
//   disturbance.channels      subset of r,gamma,chi joined by '+', or none
//   output.trace, output.metrics  paths

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = std::find_if_not(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
  const auto e = std::find_if_not(s.rbegin(), s.rend(), [](unsigned char c) { return std::isspace(c); }).base();
  return b < e ? std::string(b, e) : std::string();
}

inline double parse_double(const std::string& v) {
  const std::string t = trim(v);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) throw ConfigError("expected a number, got '" + v + "'");
  return out;
}

inline long long parse_int(const std::string& v) {
  const std::string t = trim(v);
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) throw ConfigError("expected an integer, got '" + v + "'");
  return out;
}

inline Vec3 parse_vec3(const std::string& v) {
  std::vector<double> xs;
  std::stringstream ss(v);
  std::string cell;
  while (std::getline(ss, cell, ',')) xs.push_back(parse_double(cell));
  if (xs.size() != 3) throw ConfigError("expected three comma-separated numbers, got '" + v + "'");
  return {xs[0], xs[1], xs[2]};
}

// Shortest text that parses back to the same double.
inline std::string fmt_double(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string fmt_vec3(const Vec3& v) { return fmt_double(v.x()) + "," + fmt_double(v.y()) + "," + fmt_double(v.z()); }

template <class E>
struct EnumName {
  E value;
  const char* name;
};

template <class E, std::size_t N>
E parse_enum(const std::string& v, const EnumName<E> (&table)[N]) {
  const std::string t = trim(v);
  std::string options;
  for (const auto& e : table) {
    if (t == e.name) return e.value;
    options += options.empty() ? e.name : std::string(" | ") + e.name;
  }
  throw ConfigError("expected one of " + options + ", got '" + v + "'");
}

template <class E, std::size_t N>
std::string enum_name(E v, const EnumName<E> (&table)[N]) {
  for (const auto& e : table) {
    if (e.value == v) return e.name;
  }
  return "?";
}

inline constexpr EnumName<Plant> kPlantNames[] = {{Plant::Kinematic, "kinematic"}, {Plant::Uncertain, "uncertain"}};
inline constexpr EnumName<SpeedLoop> kSpeedLoopNames[] = {{SpeedLoop::Continuous, "continuous"},
                                                          {SpeedLoop::Sampled, "sampled"}};
inline constexpr EnumName<GuidanceUpdate> kUpdateNames[] = {{GuidanceUpdate::Substep, "substep"},
                                                            {GuidanceUpdate::Interval, "interval"}};
inline constexpr EnumName<TargetKind> kTargetNames[] = {{TargetKind::Stationary, "stationary"},
                                                        {TargetKind::ConstantVelocity, "constant_velocity"},
                                                        {TargetKind::Sinusoidal, "sinusoidal"},
                                                        {TargetKind::Profile, "profile"}};
inline constexpr EnumName<BarrierPairing> kPairingNames[] = {{BarrierPairing::ProofConsistent, "proof"},
                                                             {BarrierPairing::Literal, "literal"}};
inline constexpr EnumName<RadialCompSign> kSignNames[] = {{RadialCompSign::ProofConsistent, "proof"},
                                                          {RadialCompSign::Literal, "literal"}};

inline std::array<bool, 3> parse_channels(const std::string& v) {
  std::array<bool, 3> ch{false, false, false};
  const std::string t = trim(v);
  if (t == "none") return ch;
  std::stringstream ss(t);
  std::string part;
  while (std::getline(ss, part, '+')) {
    part = trim(part);
    if (part == "r") ch[0] = true;
    else if (part == "gamma") ch[1] = true;
    else if (part == "chi") ch[2] = true;
    else throw ConfigError("unknown disturbance channel '" + part + "' (use r, gamma, chi joined by '+', or none)");
  }
  return ch;
}

inline std::string channels_name(const std::array<bool, 3>& ch) {
  static const char* names[] = {"r", "gamma", "chi"};
  std::string out;
  for (int i = 0; i < 3; ++i) {
    if (ch[i]) out += out.empty() ? names[i] : std::string("+") + names[i];
  }
  return out.empty() ? "none" : out;
}

struct Field {
  std::function<void(ScenarioConfig&, const std::string&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

#define ENCLOSE_DOUBLE(key, member)                                                          \
  {key, {[](ScenarioConfig& c, const std::string& v) { c.member = parse_double(v); },       \
         [](const ScenarioConfig& c) { return fmt_double(c.member); }}}
#define ENCLOSE_VEC3(key, member)                                                            \
  {key, {[](ScenarioConfig& c, const std::string& v) { c.member = parse_vec3(v); },         \
         [](const ScenarioConfig& c) { return fmt_vec3(c.member); }}}
#define ENCLOSE_ENUM(key, member, table)                                                     \
  {key, {[](ScenarioConfig& c, const std::string& v) { c.member = parse_enum(v, table); },  \
         [](const ScenarioConfig& c) { return enum_name(c.member, table); }}}
#define ENCLOSE_TEXT(key, member)                                                            \
  {key, {[](ScenarioConfig& c, const std::string& v) { c.member = trim(v); },               \
         [](const ScenarioConfig& c) { return c.member; }}}

// Ordered as written by serialize_config.
inline const std::vector<std::pair<std::string, Field>>& config_fields() {
  static const std::vector<std::pair<std::string, Field>> fields = {
      ENCLOSE_TEXT("name", name),
      ENCLOSE_ENUM("plant", plant, kPlantNames),
      ENCLOSE_ENUM("speed_loop", speed_loop, kSpeedLoopNames),
      ENCLOSE_ENUM("guidance_update", guidance_update, kUpdateNames),
      ENCLOSE_DOUBLE("duration", duration),
      ENCLOSE_DOUBLE("dt_guidance", dt_guidance),
      {"n_substeps",
       {[](ScenarioConfig& c, const std::string& v) { c.n_substeps = static_cast<int>(parse_int(v)); },
        [](const ScenarioConfig& c) { return std::to_string(c.n_substeps); }}},
      {"seed",
       {[](ScenarioConfig& c, const std::string& v) {
          const long long s = parse_int(v);
          if (s < 0) throw ConfigError("seed must be non-negative");
          c.seed = static_cast<std::uint64_t>(s);
        },
        [](const ScenarioConfig& c) { return std::to_string(c.seed); }}},
      ENCLOSE_VEC3("pursuer.position", pursuer.position),
      ENCLOSE_DOUBLE("pursuer.speed", pursuer.speed),
      ENCLOSE_DOUBLE("pursuer.gamma_deg", pursuer.gamma_deg),
      ENCLOSE_DOUBLE("pursuer.chi_deg", pursuer.chi_deg),
      ENCLOSE_ENUM("target.kind", target.kind, kTargetNames),
      ENCLOSE_VEC3("target.position", target.position),
      ENCLOSE_DOUBLE("target.speed", target.speed),
      ENCLOSE_DOUBLE("target.gamma_deg", target.gamma_deg),
      ENCLOSE_DOUBLE("target.chi_deg", target.chi_deg),
      ENCLOSE_VEC3("target.sin.mean", target.sin_mean),
      ENCLOSE_VEC3("target.sin.amplitude", target.sin_amplitude),
      ENCLOSE_VEC3("target.sin.omega", target.sin_omega),
      ENCLOSE_TEXT("target.profile", target.profile_path),
      ENCLOSE_DOUBLE("target.a_max_r", target.a_max_r),
      ENCLOSE_DOUBLE("target.a_max_gamma", target.a_max_gamma),
      ENCLOSE_DOUBLE("target.a_max_chi", target.a_max_chi),
      ENCLOSE_DOUBLE("guidance.V_d", guidance.v_d),
      ENCLOSE_DOUBLE("guidance.r_d", guidance.r_d),
      ENCLOSE_DOUBLE("guidance.a", guidance.a),
      ENCLOSE_DOUBLE("guidance.b", guidance.b),
      ENCLOSE_DOUBLE("guidance.K_v", guidance.k_v),
      ENCLOSE_DOUBLE("guidance.K_1", guidance.k_1),
      ENCLOSE_DOUBLE("guidance.K_2", guidance.k_2),
      ENCLOSE_DOUBLE("guidance.w_1", guidance.w_1),
      ENCLOSE_DOUBLE("guidance.w_2", guidance.w_2),
      ENCLOSE_DOUBLE("guidance.phi_bl", guidance.phi_bl),
      ENCLOSE_DOUBLE("guidance.a_sat", guidance.a_sat),
      ENCLOSE_ENUM("guidance.barrier_pairing", guidance.barrier_pairing, kPairingNames),
      ENCLOSE_ENUM("guidance.radial_comp_sign", guidance.radial_comp_sign, kSignNames),
      ENCLOSE_DOUBLE("disturbance.amplitude", disturbance.amplitude),
      ENCLOSE_DOUBLE("disturbance.frequency", disturbance.frequency),
      {"disturbance.channels",
       {[](ScenarioConfig& c, const std::string& v) { c.disturbance.channels = parse_channels(v); },
        [](const ScenarioConfig& c) { return channels_name(c.disturbance.channels); }}},
      ENCLOSE_TEXT("output.trace", trace_path),
      ENCLOSE_TEXT("output.metrics", metrics_path),
  };
  return fields;
}

#undef ENCLOSE_DOUBLE
#undef ENCLOSE_VEC3
#undef ENCLOSE_ENUM
#undef ENCLOSE_TEXT

}  // namespace detail

inline std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, f] : detail::config_fields()) keys.push_back(k);
  return keys;
}

/// Applies one `key=value` assignment. Throws ConfigError naming the key.
inline void set_config_value(ScenarioConfig& c, const std::string& key, const std::string& value) {
  const std::string k = detail::trim(key);
  for (const auto& [name, field] : detail::config_fields()) {
    if (name != k) continue;
    try {
      field.set(c, value);
    } catch (const ConfigError& e) {
      throw ConfigError("key '" + k + "': " + e.what());
    }
    return;
  }
  // Guidance gains may be named without their section, as in K_1=0.004.
  if (k.find('.') == std::string::npos) {
    const std::string qualified = "guidance." + k;
    for (const auto& [name, field] : detail::config_fields()) {
      if (name == qualified) return set_config_value(c, qualified, value);
    }
  }
  throw ConfigError("unknown key '" + k + "'");
}

/// Applies an override written as `key=value`.
inline void apply_override(ScenarioConfig& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not of the form key=value");
  set_config_value(c, assignment.substr(0, eq), assignment.substr(eq + 1));
}

/// Parses a scenario document. Unset keys keep the defaults of `base`.
/// `source` labels error messages.
inline ScenarioConfig parse_config(std::istream& in, const std::string& source = "<config>",
                                   ScenarioConfig base = {}) {
  std::string line;
  int lineno = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = detail::trim(body.substr(0, eq));
    if (auto it = seen.find(key); it != seen.end()) {
      throw ConfigError(where + "duplicate key '" + key + "' (first set on line " + std::to_string(it->second) + ")");
    }
    seen[key] = lineno;
    try {
      set_config_value(base, key, body.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return base;
}

inline ScenarioConfig parse_config_string(const std::string& text, const std::string& source = "<config>") {
  std::istringstream in(text);
  return parse_config(in, source);
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  return parse_config(in, path);
}

/// Writes every key; parse_config of the result reproduces `c` exactly.
inline std::string serialize_config(const ScenarioConfig& c) {
  std::string out;
  for (const auto& [key, field] : detail::config_fields()) out += key + " = " + field.get(c) + "\n";
  return out;
}

/// Field-wise equality of two configs, through their serialized form.
inline bool same_config(const ScenarioConfig& a, const ScenarioConfig& b) {
  return serialize_config(a) == serialize_config(b);
}

/// A bundled scenario name or a path to a scenario file.
inline ScenarioConfig resolve_scenario(const std::string& name_or_path) {
  if (auto c = bundled_scenario(name_or_path)) return *c;
  return load_config(name_or_path);
}

}  // namespace enclose
