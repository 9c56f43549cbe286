#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <numbers>
#include <stdexcept>
#include <string>

namespace enclose {

using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = std::numbers::pi;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Errors --------------------------------------------------------------------

class EncloseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical singularity of the LOS kinematics (r -> 0, cos(theta) -> 0, cos(gamma) -> 0).
class GuardViolation : public EncloseError {
 public:
  using EncloseError::EncloseError;
};

// Body frame undefined: lateral acceleration requested at (near) zero speed.
class ZeroSpeedFrame : public EncloseError {
 public:
  using EncloseError::EncloseError;
};

// Coincident pursuer and target positions.
class DegenerateLOS : public EncloseError {
 public:
  using EncloseError::EncloseError;
};

// Range error outside the open interval (-a, b).
class OutOfBarrier : public EncloseError {
 public:
  OutOfBarrier(const std::string& what, double eps) : EncloseError(what), eps_(eps) {}
  double eps() const { return eps_; }

 private:
  double eps_;
};

class ConfigError : public EncloseError {
 public:
  using EncloseError::EncloseError;
};

// Singularity guards of the kinematics.
struct Guards {
  double r_min = 0.01;        // m
  double theta = 1e-3;        // rad, distance kept from +-pi/2 (<= 0 disables)
  double v_min = 1e-3;        // m/s
};

// State ---------------------------------------------------------------------

/// Relative engagement state expressed in the pursuer-target line-of-sight frame.
///
/// theta/psi are the LOS elevation/azimuth; gamma_i/chi_i are each vehicle's
/// flight-path elevation/azimuth measured from the LOS frame.
struct EngagementState {
  double t = 0.0;
  double r = 1.0;
  double theta = 0.0;
  double psi = 0.0;
  double v_p = 0.0;
  double gamma_p = 0.0;
  double chi_p = 0.0;
  double v_t = 0.0;
  double gamma_t = 0.0;
  double chi_t = 0.0;

  bool operator==(const EngagementState&) const = default;
};

struct InertialState {
  Vec3 pos_p = Vec3::Zero();
  Vec3 vel_p = Vec3::Zero();
  Vec3 pos_t = Vec3::Zero();
  Vec3 vel_t = Vec3::Zero();
  double t = 0.0;
};

struct StateDerivative {
  double dr = 0.0;
  double dtheta = 0.0;
  double dpsi = 0.0;
  double dv_p = 0.0;
  double dgamma_p = 0.0;
  double dchi_p = 0.0;
  double dv_t = 0.0;
  double dgamma_t = 0.0;
  double dchi_t = 0.0;
};

/// Body-frame acceleration: along velocity, pitch-plane lateral, yaw-plane lateral.
struct AccelCommandFrame {
  double a_r = 0.0;
  double a_gamma = 0.0;
  double a_chi = 0.0;

  bool operator==(const AccelCommandFrame&) const = default;
};

}  // namespace enclose
