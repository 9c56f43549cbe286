#pragma once

#include "enclose/kinematics.hpp"
#include "enclose/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace enclose {

/// Which pairing of q with the barrier denominators the range controller uses.
///  - ProofConsistent: q/(b^2-eps^2) + (1-q)/(a^2-eps^2), matching V1 and alpha.
///  - Literal: q/(a^2-eps^2) + (1-q)/(b^2-eps^2).
enum class BarrierPairing { ProofConsistent, Literal };

/// Sign of the radial-acceleration compensation term in U.
///  - ProofConsistent: +K_v (V_P - V_d) cos(gamma_P) cos(chi_P)
///  - Literal:         -K_v (V_P - V_d) cos(gamma_P) cos(chi_P)
enum class RadialCompSign { ProofConsistent, Literal };

struct GuidanceParams {
  double v_d = 5.0;     // desired speed, m/s
  double r_d = 8.0;     // desired range, m
  double a = 5.0;       // inner error bound, m (r_d - r_threat)
  double b = 15.0;      // outer error bound, m (r_conn - r_d)
  double k_v = 1.0;     // speed gain, 1/s
  double k_1 = 0.008;   // backstepping gain
  double k_2 = 30.0;    // sliding gain, m/s^2
  double w_1 = 0.5;     // pitch-channel weight
  double w_2 = 0.5;     // yaw-channel weight
  double phi_bl = 0.05; // sliding boundary layer, m/s (0 = pure sign)
  double a_sat = 40.0;  // lateral saturation, m/s^2
  BarrierPairing barrier_pairing = BarrierPairing::ProofConsistent;
  RadialCompSign radial_comp_sign = RadialCompSign::ProofConsistent;

  double r_threat() const { return r_d - a; }
  double r_conn() const { return r_d + b; }

  /// Throws ConfigError describing the first violated invariant. The K_2
  /// condition is checked against the sum of the target's declared bounds.
  void validate(double target_bound_sum = 0.0) const {
    auto require = [](bool ok, const std::string& what) {
      if (!ok) throw ConfigError("guidance parameters: " + what);
    };
    require(a > 0.0 && b > 0.0, "error bounds a and b must be positive");
    require(r_d > a, "r_d must exceed a so that the threat radius is positive");
    require(k_v > 0.0 && k_1 > 0.0, "gains K_v and K_1 must be positive");
    require(w_1 > 0.0 && w_2 > 0.0, "allocation weights must be positive");
    require(phi_bl >= 0.0, "boundary layer must be non-negative");
    require(a_sat > 0.0, "lateral saturation must be positive");
    require(k_2 > target_bound_sum,
            "K_2 = " + std::to_string(k_2) + " must exceed the target acceleration bound sum " +
                std::to_string(target_bound_sum));
  }
};

struct CommandDiagnostics {
  double eps = 0.0;
  double z = 0.0;
  double alpha = 0.0;
  double alpha_dot = 0.0;
  double u_eff = 0.0;
  double sigma_p = 0.0;
  int q = 0;
  bool saturated = false;
  double v1 = 0.0;
  double v2 = 0.0;
};

struct PursuerCommand {
  double a_r = 0.0;
  double a_gamma = 0.0;
  double a_chi = 0.0;
  CommandDiagnostics diag;

  AccelCommandFrame frame() const { return {a_r, a_gamma, a_chi}; }
};

// Speed loop ------------------------------------------------------------------

inline double radial_accel(double v_p, const GuidanceParams& p) { return -p.k_v * (v_p - p.v_d); }

// Range loop ------------------------------------------------------------------

struct RangeError {
  double eps = 0.0;
  int q = 0;
};

inline RangeError range_error(double r, const GuidanceParams& p) {
  const double eps = r - p.r_d;
  return {eps, eps > 0.0 ? 1 : 0};
}

inline bool inside_barrier(double eps, const GuidanceParams& p) { return eps > -p.a && eps < p.b; }

inline void require_barrier(double eps, const GuidanceParams& p) {
  if (!inside_barrier(eps, p)) {
    throw OutOfBarrier("range error " + std::to_string(eps) + " m outside (-" + std::to_string(p.a) +
                           ", " + std::to_string(p.b) + ")",
                       eps);
  }
}

// Active barrier width squared: b^2 when q = 1, a^2 otherwise.
inline double barrier_width_sq(int q, const GuidanceParams& p) { return q ? p.b * p.b : p.a * p.a; }

inline double stabilizing_alpha(double eps, int q, const GuidanceParams& p) {
  require_barrier(eps, p);
  return -(barrier_width_sq(q, p) - eps * eps) * p.k_1 * eps * eps * eps;
}

inline double alpha_slope(double eps, int q, const GuidanceParams& p) {
  require_barrier(eps, p);
  const double e2 = eps * eps;
  return -p.k_1 * (3.0 * barrier_width_sq(q, p) * e2 - 5.0 * e2 * e2);
}

inline double alpha_dot(double eps, double eps_dot, int q, const GuidanceParams& p) {
  return alpha_slope(eps, q, p) * eps_dot;
}

// Multiplier of eps in the barrier term of U.
inline double barrier_gain(double eps, int q, const GuidanceParams& p) {
  const double e2 = eps * eps;
  const double a2 = p.a * p.a, b2 = p.b * p.b;
  if (p.barrier_pairing == BarrierPairing::ProofConsistent) {
    return q ? 1.0 / (b2 - e2) : 1.0 / (a2 - e2);
  }
  return q ? 1.0 / (a2 - e2) : 1.0 / (b2 - e2);
}

/// Asymmetric barrier Lyapunov function of the range error; +inf outside the barrier.
inline double barrier_lyapunov(double eps, const GuidanceParams& p) {
  if (!inside_barrier(eps, p)) return std::numeric_limits<double>::infinity();
  const double w2 = barrier_width_sq(eps > 0.0 ? 1 : 0, p);
  return 0.5 * std::log(w2 / (w2 - eps * eps));
}

// Saturated sign used by the sliding term.
inline double sliding_sign(double z, double phi_bl) {
  if (phi_bl > 0.0) return std::clamp(z / phi_bl, -1.0, 1.0);
  return static_cast<double>((z > 0.0) - (z < 0.0));
}

struct EffectiveControl {
  double u_eff = 0.0;
  double z = 0.0;
  double alpha = 0.0;
  double alpha_dot = 0.0;
  double eps = 0.0;
  int q = 0;
};

/// Effective lateral control U and pseudo-variable z from the state and its
/// LOS rates (ground-truth feedback).
inline EffectiveControl effective_control(const EngagementState& s, const LosRates& rates,
                                          const GuidanceParams& p) {
  const RangeError re = range_error(s.r, p);
  EffectiveControl out;
  out.eps = re.eps;
  out.q = re.q;
  out.alpha = stabilizing_alpha(re.eps, re.q, p);
  out.alpha_dot = alpha_dot(re.eps, rates.dr, re.q, p);
  out.z = rates.dr - out.alpha;

  const double ct = std::cos(s.theta);
  const double centripetal = s.r * rates.dtheta * rates.dtheta + s.r * ct * ct * rates.dpsi * rates.dpsi;
  const double along_los = std::cos(s.gamma_p) * std::cos(s.chi_p);
  const double sign = p.radial_comp_sign == RadialCompSign::ProofConsistent ? 1.0 : -1.0;
  const double radial_comp = sign * p.k_v * (s.v_p - p.v_d) * along_los;

  out.u_eff = -centripetal + radial_comp + out.alpha_dot - p.k_2 * sliding_sign(out.z, p.phi_bl) -
              barrier_gain(re.eps, re.q, p) * re.eps;
  return out;
}

// Allocation -------------------------------------------------------------------

/// Angle between the pursuer velocity and the LOS.
inline double lead_angle(double gamma_p, double chi_p) {
  return std::acos(std::clamp(std::cos(gamma_p) * std::cos(chi_p), -1.0, 1.0));
}

struct LateralAllocation {
  double a_gamma = 0.0;
  double a_chi = 0.0;
  bool saturated = false;
};

inline constexpr double kSingularAllocationGuard = 1e-8;

/// Minimum weighted-effort split of U into pitch and yaw lateral accelerations.
///
/// Near zero lead angle the split is singular; both channels are then driven
/// to the saturation limit with the sign of U, which turns the pursuer off the
/// LOS within one guidance step.
inline LateralAllocation allocate_lateral(double u_eff, double gamma_p, double chi_p,
                                          const GuidanceParams& p) {
  const double s_gamma = std::sin(gamma_p) * std::cos(chi_p);
  const double s_chi = std::sin(chi_p);
  const double w1s = p.w_1 * p.w_1, w2s = p.w_2 * p.w_2;
  const double denom = s_gamma * s_gamma * w1s + s_chi * s_chi * w2s;

  LateralAllocation out;
  if (denom < kSingularAllocationGuard) {
    const double sgn = u_eff < 0.0 ? -1.0 : 1.0;
    out.a_gamma = sgn * p.a_sat;
    out.a_chi = sgn * p.a_sat;
    out.saturated = true;
    return out;
  }
  out.a_gamma = s_gamma * w1s * u_eff / denom;
  out.a_chi = s_chi * w2s * u_eff / denom;
  auto clamp = [&](double& v) {
    if (std::abs(v) > p.a_sat) {
      v = std::copysign(p.a_sat, v);
      out.saturated = true;
    }
  };
  clamp(out.a_gamma);
  clamp(out.a_chi);
  return out;
}

/// Weighted lateral effort sqrt((a_gamma/w_1)^2 + (a_chi/w_2)^2).
inline double allocation_cost(double a_gamma, double a_chi, double w_1, double w_2) {
  return std::hypot(a_gamma / w_1, a_chi / w_2);
}

// Full command -------------------------------------------------------------------

inline PursuerCommand guidance_step(const EngagementState& s, const GuidanceParams& p,
                                    const Guards& g = {}) {
  require_barrier(s.r - p.r_d, p);
  const LosRates rates = los_rates(s, g);
  const EffectiveControl ec = effective_control(s, rates, p);
  const LateralAllocation lat = allocate_lateral(ec.u_eff, s.gamma_p, s.chi_p, p);

  PursuerCommand cmd;
  cmd.a_r = radial_accel(s.v_p, p);
  cmd.a_gamma = lat.a_gamma;
  cmd.a_chi = lat.a_chi;
  cmd.diag.eps = ec.eps;
  cmd.diag.z = ec.z;
  cmd.diag.alpha = ec.alpha;
  cmd.diag.alpha_dot = ec.alpha_dot;
  cmd.diag.u_eff = ec.u_eff;
  cmd.diag.sigma_p = lead_angle(s.gamma_p, s.chi_p);
  cmd.diag.q = ec.q;
  cmd.diag.saturated = lat.saturated;
  cmd.diag.v1 = barrier_lyapunov(ec.eps, p);
  cmd.diag.v2 = cmd.diag.v1 + 0.5 * ec.z * ec.z;
  return cmd;
}

}  // namespace enclose
