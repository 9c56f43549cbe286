#pragma once

#include "enclose/kinematics.hpp"
#include "enclose/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace enclose {

/// Natural cubic spline through (t_i, y_i); clamps to the end values outside
/// the sample range (zero slope there).
class CubicSpline {
 public:
  CubicSpline() = default;

  CubicSpline(std::vector<double> t, std::vector<double> y) : t_(std::move(t)), y_(std::move(y)) {
    const std::size_t n = t_.size();
    if (n < 2 || y_.size() != n) throw ConfigError("spline needs at least two samples");
    for (std::size_t i = 1; i < n; ++i) {
      if (!(t_[i] > t_[i - 1])) throw ConfigError("spline sample times must be strictly increasing");
    }
    m_.assign(n, 0.0);
    if (n == 2) return;
    // Thomas algorithm for second derivatives, natural end conditions.
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = t_[i] - t_[i - 1], h1 = t_[i + 1] - t_[i];
      const double diag = 2.0 * (h0 + h1);
      const double rhs = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
      const double denom = diag - h0 * c[i - 1];
      c[i] = h1 / denom;
      d[i] = (rhs - h0 * d[i - 1]) / denom;
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      m_[i] = d[i] - c[i] * m_[i + 1];
    }
  }

  double value(double t) const { return eval(t, false); }
  double derivative(double t) const { return eval(t, true); }
  double t_front() const { return t_.front(); }
  double t_back() const { return t_.back(); }

 private:
  double eval(double t, bool deriv) const {
    if (t <= t_.front()) return deriv ? 0.0 : y_.front();
    if (t >= t_.back()) return deriv ? 0.0 : y_.back();
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - t_.begin()) - 1;
    const double h = t_[i + 1] - t_[i];
    const double A = (t_[i + 1] - t) / h, B = (t - t_[i]) / h;
    if (!deriv) {
      return A * y_[i] + B * y_[i + 1] + ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
    }
    return (y_[i + 1] - y_[i]) / h - (3.0 * A * A - 1.0) / 6.0 * h * m_[i] +
           (3.0 * B * B - 1.0) / 6.0 * h * m_[i + 1];
  }

  std::vector<double> t_, y_, m_;
};

enum class TargetKind { Stationary, ConstantVelocity, Sinusoidal, Profile };

/// Scripted target motion: inertial velocity as a function of time plus the
/// declared bounds on its body-frame acceleration components.
struct TargetModel {
  TargetKind kind = TargetKind::Stationary;
  Vec3 v0 = Vec3::Zero();        // constant-velocity, and the sinusoid's mean
  Vec3 amplitude = Vec3::Zero();  // sinusoidal: v = v0 + amplitude * sin(omega * t)
  Vec3 omega = Vec3::Zero();
  CubicSpline profile[3];
  double a_max_r = 0.0;
  double a_max_gamma = 0.0;
  double a_max_chi = 0.0;

  double bound_sum() const { return a_max_r + a_max_gamma + a_max_chi; }

  static TargetModel stationary() { return {}; }

  static TargetModel constant_velocity(const Vec3& v) {
    TargetModel m;
    m.kind = TargetKind::ConstantVelocity;
    m.v0 = v;
    return m;
  }

  static TargetModel sinusoidal(const Vec3& mean, const Vec3& amplitude, const Vec3& omega) {
    TargetModel m;
    m.kind = TargetKind::Sinusoidal;
    m.v0 = mean;
    m.amplitude = amplitude;
    m.omega = omega;
    return m;
  }

  // Maneuvering target of the bundled MT scenario.
  static TargetModel maneuvering() {
    auto m = sinusoidal(Vec3(3.5, 0.0, 0.0), Vec3(0.0, 1.5, 1.0),
                        Vec3(0.0, 4.0 * kPi / 100.0, 8.0 * kPi / 100.0));
    // |a_T| <= hypot(1.5 * 4pi/100, 8pi/100) ~= 0.3142 m/s^2 dominates every component.
    m.a_max_r = m.a_max_gamma = m.a_max_chi = 0.32;
    return m;
  }

  static TargetModel tabulated(const std::vector<double>& t, const std::vector<Vec3>& v) {
    TargetModel m;
    m.kind = TargetKind::Profile;
    for (int k = 0; k < 3; ++k) {
      std::vector<double> y(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) y[i] = v[i][k];
      m.profile[k] = CubicSpline(t, std::move(y));
    }
    return m;
  }
};

inline Vec3 target_velocity(double t, const TargetModel& m) {
  switch (m.kind) {
    case TargetKind::Stationary:
      return Vec3::Zero();
    case TargetKind::ConstantVelocity:
      return m.v0;
    case TargetKind::Sinusoidal:
      return m.v0 + m.amplitude.cwiseProduct((m.omega * t).array().sin().matrix());
    case TargetKind::Profile:
      return {m.profile[0].value(t), m.profile[1].value(t), m.profile[2].value(t)};
  }
  return Vec3::Zero();
}

inline Vec3 target_accel(double t, const TargetModel& m) {
  switch (m.kind) {
    case TargetKind::Stationary:
    case TargetKind::ConstantVelocity:
      return Vec3::Zero();
    case TargetKind::Sinusoidal:
      return m.amplitude.cwiseProduct(m.omega).cwiseProduct((m.omega * t).array().cos().matrix());
    case TargetKind::Profile:
      return {m.profile[0].derivative(t), m.profile[1].derivative(t), m.profile[2].derivative(t)};
  }
  return Vec3::Zero();
}

/// Inertial velocity of a target whose initial heading is given in the LOS frame.
inline Vec3 init_target_inertial(double chi_t0, double gamma_t0, double v_t0, const LosFrame& los) {
  return los_angles_to_inertial(los, v_t0, gamma_t0, chi_t0);
}

/// Body-frame components of the target acceleration (along velocity, pitch,
/// yaw), using the triad defined relative to the current LOS. Zero when the
/// target is (nearly) at rest.
inline AccelCommandFrame target_body_accel(const LosFrame& los, const Vec3& vel, const Vec3& acc,
                                           const Guards& g = {}) {
  if (vel.norm() < g.v_min) return {};
  const FlightAngles fa = flight_angles(los, vel);
  const BodyTriad tri = BodyTriad::from_angles(los, fa.gamma, fa.chi);
  return {acc.dot(tri.along), acc.dot(tri.pitch), acc.dot(tri.yaw)};
}

/// Largest |a_T| over a uniform time grid on [0, horizon].
inline double max_target_accel(const TargetModel& m, double horizon, double dt = 0.01) {
  double worst = 0.0;
  const auto n = static_cast<long>(std::ceil(horizon / dt));
  for (long i = 0; i <= n; ++i) worst = std::max(worst, target_accel(std::min(i * dt, horizon), m).norm());
  return worst;
}

/// True when every declared component bound dominates |a_T| on the horizon.
/// Each body-frame component is a projection of a_T, so |a_T| is an upper bound
/// for all three regardless of the LOS geometry.
inline bool bounds_dominate(const TargetModel& m, double horizon, double dt = 0.01) {
  const double worst = max_target_accel(m, horizon, dt);
  return m.a_max_r >= worst && m.a_max_gamma >= worst && m.a_max_chi >= worst;
}

/// Reads a tabulated velocity profile: header `t,vx,vy,vz`, SI units.
inline TargetModel load_profile_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open target profile '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty profile");
  auto strip = [](std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
    return s;
  };
  if (strip(line) != "t,vx,vy,vz") throw ConfigError(path + ":1: expected header 't,vx,vy,vz'");
  std::vector<double> t;
  std::vector<Vec3> v;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (strip(line).empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    double vals[4];
    int k = 0;
    while (std::getline(ss, cell, ',')) {
      if (k >= 4) throw ConfigError(path + ":" + std::to_string(lineno) + ": too many columns");
      try {
        std::size_t used = 0;
        vals[k] = std::stod(cell, &used);
        if (!strip(cell.substr(used)).empty()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
      ++k;
    }
    if (k != 4) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 4 columns");
    t.push_back(vals[0]);
    v.emplace_back(vals[1], vals[2], vals[3]);
  }
  try {
    return TargetModel::tabulated(t, v);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace enclose
