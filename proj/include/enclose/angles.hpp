#pragma once

#include "enclose/types.hpp"

#include <cmath>

namespace enclose {

// Wraps to (-pi, pi].
inline double wrap_pi(double x) {
  if (!std::isfinite(x)) return x;
  double y = std::remainder(x, 2.0 * kPi);  // [-pi, pi]
  if (y <= -kPi) y += 2.0 * kPi;
  return y;
}

// Maps an (elevation, azimuth) pair onto elevation in [-pi/2, pi/2] and
// azimuth in (-pi, pi], preserving the direction it encodes. Returns true when
// the pair had to be reflected through the pole.
inline bool wrap_spherical(double& elevation, double& azimuth) {
  double e = wrap_pi(elevation);
  bool reflected = false;
  if (e > kPi / 2) {
    e = kPi - e;
    reflected = true;
  } else if (e < -kPi / 2) {
    e = -kPi - e;
    reflected = true;
  }
  elevation = e;
  azimuth = wrap_pi(reflected ? azimuth + kPi : azimuth);
  return reflected;
}

/// Canonicalizes all angles of an engagement state.
///
/// A reflection of the LOS elevation flips the sign of the LOS frame's second
/// and third axes, so the vehicle angles are negated to keep every encoded
/// velocity direction unchanged.
inline EngagementState wrap_angles(EngagementState s) {
  if (wrap_spherical(s.theta, s.psi)) {
    s.gamma_p = -s.gamma_p;
    s.chi_p = -s.chi_p;
    s.gamma_t = -s.gamma_t;
    s.chi_t = -s.chi_t;
  }
  wrap_spherical(s.gamma_p, s.chi_p);
  wrap_spherical(s.gamma_t, s.chi_t);
  return s;
}

}  // namespace enclose
