#pragma once

#include "enclose/angles.hpp"
#include "enclose/integrator.hpp"
#include "enclose/types.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>

namespace enclose {

// LOS frame ------------------------------------------------------------------

/// Orthonormal LOS basis: e_r along the LOS (pursuer -> target), e_psi the
/// azimuth direction, e_theta the elevation direction. (e_r, e_psi, e_theta)
/// is right-handed.
struct LosFrame {
  Vec3 e_r;
  Vec3 e_psi;
  Vec3 e_theta;

  static LosFrame from_angles(double theta, double psi) {
    const double ct = std::cos(theta), st = std::sin(theta);
    const double cp = std::cos(psi), sp = std::sin(psi);
    return {Vec3(ct * cp, ct * sp, st), Vec3(-sp, cp, 0.0), Vec3(-st * cp, -st * sp, ct)};
  }

  Vec3 to_inertial(double c_r, double c_psi, double c_theta) const {
    return c_r * e_r + c_psi * e_psi + c_theta * e_theta;
  }
};

/// Inertial unit vectors of a vehicle's body triad (x along velocity, y in the
/// yaw plane, z in the pitch plane), given its LOS-frame flight-path angles.
struct BodyTriad {
  Vec3 along;
  Vec3 pitch;  // d(along)/d(gamma)
  Vec3 yaw;    // d(along)/d(chi) / cos(gamma)

  static BodyTriad from_angles(const LosFrame& los, double gamma, double chi) {
    const double cg = std::cos(gamma), sg = std::sin(gamma);
    const double cc = std::cos(chi), sc = std::sin(chi);
    return {los.to_inertial(cg * cc, cg * sc, sg), los.to_inertial(-sg * cc, -sg * sc, cg),
            los.to_inertial(-sc, cc, 0.0)};
  }

  Vec3 to_inertial(const AccelCommandFrame& u) const {
    return u.a_r * along + u.a_gamma * pitch + u.a_chi * yaw;
  }
};

// LOS-frame flight-path angles (gamma, chi) of an inertial velocity.
struct FlightAngles {
  double speed = 0.0;
  double gamma = 0.0;
  double chi = 0.0;
};

inline FlightAngles flight_angles(const LosFrame& los, const Vec3& vel) {
  const double c_r = vel.dot(los.e_r);
  const double c_psi = vel.dot(los.e_psi);
  const double c_theta = vel.dot(los.e_theta);
  FlightAngles out;
  out.speed = vel.norm();
  if (out.speed == 0.0) return out;
  out.gamma = std::atan2(c_theta, std::hypot(c_r, c_psi));
  out.chi = std::atan2(c_psi, c_r);
  if (out.chi <= -kPi) out.chi += 2.0 * kPi;
  return out;
}

/// Converts LOS-frame flight-path angles and speed to an inertial velocity.
inline Vec3 los_angles_to_inertial(const LosFrame& los, double speed, double gamma, double chi) {
  return speed * BodyTriad::from_angles(los, gamma, chi).along;
}

// Relative kinematics --------------------------------------------------------

struct LosRates {
  double dr = 0.0;
  double dtheta = 0.0;
  double dpsi = 0.0;
};

inline void check_los_guards(const EngagementState& s, const Guards& g) {
  if (!(s.r > g.r_min)) {
    throw GuardViolation("range " + std::to_string(s.r) + " m at or below guard " +
                         std::to_string(g.r_min) + " m");
  }
  // A non-positive theta guard disables the pole check: the angle rates then
  // grow large near the pole but r*cos(theta)*dpsi stays finite.
  if (g.theta > 0.0 && !(std::abs(s.theta) < kPi / 2 - g.theta)) {
    throw GuardViolation("LOS elevation " + std::to_string(s.theta) + " rad within guard of the pole");
  }
}

/// Range and LOS angle rates of the relative motion.
inline LosRates los_rates(const EngagementState& s, const Guards& g = {}) {
  check_los_guards(s, g);
  const double cgp = std::cos(s.gamma_p), cgt = std::cos(s.gamma_t);
  LosRates out;
  out.dr = s.v_t * cgt * std::cos(s.chi_t) - s.v_p * cgp * std::cos(s.chi_p);
  out.dtheta = (s.v_t * std::sin(s.gamma_t) - s.v_p * std::sin(s.gamma_p)) / s.r;
  out.dpsi = (s.v_t * cgt * std::sin(s.chi_t) - s.v_p * cgp * std::sin(s.chi_p)) /
             (s.r * std::cos(s.theta));
  return out;
}

namespace detail {

struct VehicleRates {
  double dv, dgamma, dchi;
};

inline VehicleRates vehicle_rates(double v, double gamma, double chi, const AccelCommandFrame& u,
                                  const LosRates& los, double theta, const Guards& g,
                                  const char* who) {
  if (!(std::abs(gamma) < kPi / 2 - g.theta)) {
    throw GuardViolation(std::string(who) + " flight-path elevation within guard of vertical");
  }
  double lat_gamma = 0.0, lat_chi = 0.0;
  if (u.a_gamma != 0.0 || u.a_chi != 0.0) {
    if (v < g.v_min) {
      throw ZeroSpeedFrame(std::string(who) + " lateral acceleration commanded at zero speed");
    }
    lat_gamma = u.a_gamma / v;
    lat_chi = u.a_chi / (v * std::cos(gamma));
  }
  const double st = std::sin(theta), ct = std::cos(theta);
  const double sc = std::sin(chi), cc = std::cos(chi);
  const double tg = std::tan(gamma);
  VehicleRates out;
  out.dv = u.a_r;
  out.dgamma = lat_gamma - los.dpsi * st * sc - los.dtheta * cc;
  out.dchi = lat_chi + los.dpsi * tg * cc * st - los.dpsi * ct - los.dtheta * tg * sc;
  return out;
}

}  // namespace detail

/// Time derivative of the full engagement state under body-frame accelerations.
inline StateDerivative relative_derivatives(const EngagementState& s, const AccelCommandFrame& u_p,
                                            const AccelCommandFrame& u_t, const Guards& g = {}) {
  const LosRates los = los_rates(s, g);
  const auto p = detail::vehicle_rates(s.v_p, s.gamma_p, s.chi_p, u_p, los, s.theta, g, "pursuer");
  const auto q = detail::vehicle_rates(s.v_t, s.gamma_t, s.chi_t, u_t, los, s.theta, g, "target");
  return {los.dr, los.dtheta, los.dpsi, p.dv, p.dgamma, p.dchi, q.dv, q.dgamma, q.dchi};
}

namespace detail {

using RelVec = Eigen::Matrix<double, 9, 1>;

inline RelVec pack(const EngagementState& s) {
  RelVec x;
  x << s.r, s.theta, s.psi, s.v_p, s.gamma_p, s.chi_p, s.v_t, s.gamma_t, s.chi_t;
  return x;
}

inline EngagementState unpack(const RelVec& x, double t) {
  return {t, x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7], x[8]};
}

}  // namespace detail

/// Advances the relative state by one RK4 step with zero-order-hold controls.
inline EngagementState step_relative(const EngagementState& s, const AccelCommandFrame& u_p,
                                     const AccelCommandFrame& u_t, double dt, const Guards& g = {}) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_relative: dt must be positive");
  auto f = [&](double t, const detail::RelVec& x) -> detail::RelVec {
    const StateDerivative d = relative_derivatives(detail::unpack(x, t), u_p, u_t, g);
    detail::RelVec out;
    out << d.dr, d.dtheta, d.dpsi, d.dv_p, d.dgamma_p, d.dchi_p, d.dv_t, d.dgamma_t, d.dchi_t;
    return out;
  };
  const detail::RelVec x = rk4_step(f, s.t, detail::pack(s), dt);
  return wrap_angles(detail::unpack(x, s.t + dt));
}

// Frame conversions ----------------------------------------------------------

inline EngagementState to_relative(const InertialState& in, const Guards& g = {}) {
  const Vec3 d = in.pos_t - in.pos_p;
  const double r = d.norm();
  if (!(r >= g.r_min)) {
    throw DegenerateLOS("pursuer and target within " + std::to_string(g.r_min) + " m");
  }
  EngagementState s;
  s.t = in.t;
  s.r = r;
  s.theta = std::asin(std::clamp(d.z() / r, -1.0, 1.0));
  s.psi = std::atan2(d.y(), d.x());
  if (s.psi <= -kPi) s.psi += 2.0 * kPi;
  const LosFrame los = LosFrame::from_angles(s.theta, s.psi);
  const FlightAngles p = flight_angles(los, in.vel_p);
  const FlightAngles q = flight_angles(los, in.vel_t);
  s.v_p = p.speed;
  s.gamma_p = p.gamma;
  s.chi_p = p.chi;
  s.v_t = q.speed;
  s.gamma_t = q.gamma;
  s.chi_t = q.chi;
  return s;
}

/// Inverse of to_relative, anchored at the given pursuer position.
inline InertialState to_inertial(const EngagementState& s, const Vec3& pos_p = Vec3::Zero()) {
  const LosFrame los = LosFrame::from_angles(s.theta, s.psi);
  InertialState out;
  out.t = s.t;
  out.pos_p = pos_p;
  out.pos_t = pos_p + s.r * los.e_r;
  out.vel_p = los_angles_to_inertial(los, s.v_p, s.gamma_p, s.chi_p);
  out.vel_t = los_angles_to_inertial(los, s.v_t, s.gamma_t, s.chi_t);
  return out;
}

/// Inertial acceleration of a vehicle from its body-frame command.
///
/// The body triad is built from the vehicle's LOS-frame angles, so it is
/// defined for every nonzero velocity. At (near) zero speed only a pure
/// along-track command is accepted; it is applied along the LOS.
inline Vec3 body_to_inertial(const LosFrame& los, const Vec3& vel, const AccelCommandFrame& u,
                             const Guards& g = {}) {
  if (vel.norm() < g.v_min) {
    if (u.a_gamma != 0.0 || u.a_chi != 0.0) {
      throw ZeroSpeedFrame("lateral acceleration commanded at zero speed");
    }
    return u.a_r * los.e_r;
  }
  const FlightAngles fa = flight_angles(los, vel);
  return BodyTriad::from_angles(los, fa.gamma, fa.chi).to_inertial(u);
}

namespace detail {

using InVec = Eigen::Matrix<double, 12, 1>;

inline InVec pack(const InertialState& s) {
  InVec x;
  x << s.pos_p, s.vel_p, s.pos_t, s.vel_t;
  return x;
}

inline InertialState unpack_inertial(const InVec& x, double t) {
  return {x.segment<3>(0), x.segment<3>(3), x.segment<3>(6), x.segment<3>(9), t};
}

inline LosFrame los_of(const Vec3& pos_p, const Vec3& pos_t, const Guards& g) {
  const Vec3 d = pos_t - pos_p;
  const double r = d.norm();
  if (!(r >= g.r_min)) throw DegenerateLOS("pursuer and target coincide");
  const double theta = std::asin(std::clamp(d.z() / r, -1.0, 1.0));
  const double psi = std::atan2(d.y(), d.x());
  return LosFrame::from_angles(theta, psi);
}

}  // namespace detail

/// Advances inertial positions/velocities of both vehicles by one RK4 step,
/// converting body-frame commands through the instantaneous LOS frame.
inline InertialState step_inertial(const InertialState& s, const AccelCommandFrame& u_p,
                                   const AccelCommandFrame& u_t, double dt, const Guards& g = {}) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_inertial: dt must be positive");
  auto f = [&](double, const detail::InVec& x) -> detail::InVec {
    const Vec3 pp = x.segment<3>(0), vp = x.segment<3>(3);
    const Vec3 pt = x.segment<3>(6), vt = x.segment<3>(9);
    const LosFrame los = detail::los_of(pp, pt, g);
    detail::InVec out;
    out << vp, body_to_inertial(los, vp, u_p, g), vt, body_to_inertial(los, vt, u_t, g);
    return out;
  };
  return detail::unpack_inertial(rk4_step(f, s.t, detail::pack(s), dt), s.t + dt);
}

}  // namespace enclose
