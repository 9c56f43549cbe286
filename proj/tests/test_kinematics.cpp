#include "enclose/kinematics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

using namespace enclose;

namespace {

// Independent geometry for the oracles: LOS direction and a vehicle's unit
// heading written out from the spherical-angle definitions.
Vec3 los_dir(double theta, double psi) {
  return {std::cos(theta) * std::cos(psi), std::cos(theta) * std::sin(psi), std::sin(theta)};
}

// Heading whose LOS-frame components are (cos g cos c, cos g sin c, sin g).
Vec3 heading(double theta, double psi, double g, double c) {
  const Vec3 er = los_dir(theta, psi);
  const Vec3 epsi(-std::sin(psi), std::cos(psi), 0.0);
  const Vec3 eth = er.cross(epsi);
  return std::cos(g) * std::cos(c) * er + std::cos(g) * std::sin(c) * epsi + std::sin(g) * eth;
}

struct Angles {
  double r, theta, psi;
};

Angles los_of(const Vec3& pp, const Vec3& pt) {
  const Vec3 d = pt - pp;
  const double r = d.norm();
  return {r, std::asin(d.z() / r), std::atan2(d.y(), d.x())};
}

EngagementState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  EngagementState s;
  s.r = 5.0 + 20.0 * u(rng);
  s.theta = (u(rng) - 0.5) * 2.4;
  s.psi = (u(rng) - 0.5) * 2.0 * kPi;
  s.v_p = 1.0 + 6.0 * u(rng);
  s.gamma_p = (u(rng) - 0.5) * 2.4;
  s.chi_p = (u(rng) - 0.5) * 2.0 * kPi;
  s.v_t = 0.5 + 3.0 * u(rng);
  s.gamma_t = (u(rng) - 0.5) * 2.4;
  s.chi_t = (u(rng) - 0.5) * 2.0 * kPi;
  return s;
}

}  // namespace

TEST(RelativeDerivatives, HeadOnClosing) {
  EngagementState s;
  s.r = 18.0;
  s.v_p = 5.0;
  const StateDerivative d = relative_derivatives(s, {}, {});
  EXPECT_DOUBLE_EQ(d.dr, -5.0);
  EXPECT_DOUBLE_EQ(d.dtheta, 0.0);
  EXPECT_DOUBLE_EQ(d.dpsi, 0.0);
}

TEST(RelativeDerivatives, IdenticalVelocitiesCancel) {
  EngagementState s;
  s.r = 10.0;
  s.theta = 0.3;
  s.psi = 1.0;
  s.v_p = s.v_t = 4.0;
  s.gamma_p = s.gamma_t = 0.2;
  s.chi_p = s.chi_t = -0.7;
  const StateDerivative d = relative_derivatives(s, {}, {});
  EXPECT_DOUBLE_EQ(d.dr, 0.0);
  EXPECT_DOUBLE_EQ(d.dtheta, 0.0);
  EXPECT_DOUBLE_EQ(d.dpsi, 0.0);
}

// r = 18, theta = 0, psi = pi/4, V_P = 5, gamma_P = chi_P = 10 deg,
// V_T = 2, gamma_T = chi_T = 10 deg, against finite differences of the
// straight-line inertial motion.
TEST(RelativeDerivatives, MatchesInertialFiniteDifferences) {
  const double deg = kPi / 180.0;
  EngagementState s{0.0, 18.0, 0.0, kPi / 4, 5.0, 10 * deg, 10 * deg, 2.0, 10 * deg, 10 * deg};
  const Vec3 pp(0.0, 0.0, 0.0);
  const Vec3 pt = pp + s.r * los_dir(s.theta, s.psi);
  const Vec3 vp = s.v_p * heading(s.theta, s.psi, s.gamma_p, s.chi_p);
  const Vec3 vt = s.v_t * heading(s.theta, s.psi, s.gamma_t, s.chi_t);
  const double h = 1e-5;
  const Angles a = los_of(pp + h * vp, pt + h * vt), b = los_of(pp - h * vp, pt - h * vt);
  const StateDerivative d = relative_derivatives(s, {}, {});
  EXPECT_NEAR(d.dr, (a.r - b.r) / (2 * h), 1e-8);
  EXPECT_NEAR(d.dtheta, (a.theta - b.theta) / (2 * h), 1e-8);
  EXPECT_NEAR(d.dpsi, (a.psi - b.psi) / (2 * h), 1e-8);
}

// Vehicle-angle rates under lateral commands: propagate positions and
// velocities inertially with the command mapped through an independently
// built body triad, then difference the LOS-frame angles.
TEST(RelativeDerivatives, VehicleRatesMatchInertialFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    EngagementState s = random_state(rng);
    s.theta = std::clamp(s.theta, -1.0, 1.0);
    s.gamma_p = std::clamp(s.gamma_p, -1.0, 1.0);
    const AccelCommandFrame u{0.7, 1.3, -2.1};
    const auto inertial_accel = [&](const Vec3& pp, const Vec3& pt, const Vec3& vp) {
      const Angles l = los_of(pp, pt);
      const Vec3 er = los_dir(l.theta, l.psi);
      const Vec3 epsi(-std::sin(l.psi), std::cos(l.psi), 0.0);
      const Vec3 eth = er.cross(epsi);
      const Vec3 x = vp.normalized();
      const double cr = x.dot(er), cp = x.dot(epsi), ct = x.dot(eth);
      const double g = std::atan2(ct, std::hypot(cr, cp)), c = std::atan2(cp, cr);
      const Vec3 pitch = -std::sin(g) * std::cos(c) * er - std::sin(g) * std::sin(c) * epsi + std::cos(g) * eth;
      const Vec3 yaw = -std::sin(c) * er + std::cos(c) * epsi;
      return Vec3(u.a_r * x + u.a_gamma * pitch + u.a_chi * yaw);
    };
    const Vec3 pp0 = Vec3::Zero();
    const Vec3 pt0 = s.r * los_dir(s.theta, s.psi);
    const Vec3 vp0 = s.v_p * heading(s.theta, s.psi, s.gamma_p, s.chi_p);
    const Vec3 vt0 = s.v_t * heading(s.theta, s.psi, s.gamma_t, s.chi_t);
    const Vec3 ap0 = inertial_accel(pp0, pt0, vp0);
    const auto angles_at = [&](double t) {
      const Vec3 pp = pp0 + vp0 * t + 0.5 * ap0 * t * t;
      const Vec3 pt = pt0 + vt0 * t;
      const Vec3 vp = vp0 + ap0 * t;
      const Angles l = los_of(pp, pt);
      const Vec3 er = los_dir(l.theta, l.psi);
      const Vec3 epsi(-std::sin(l.psi), std::cos(l.psi), 0.0);
      const Vec3 eth = er.cross(epsi);
      const Vec3 x = vp.normalized();
      const double cr = x.dot(er), cp = x.dot(epsi), ct = x.dot(eth);
      return std::array<double, 3>{vp.norm(), std::atan2(ct, std::hypot(cr, cp)), std::atan2(cp, cr)};
    };
    const double h = 1e-5;
    const auto a = angles_at(h), b = angles_at(-h);
    const StateDerivative d = relative_derivatives(s, u, {});
    EXPECT_NEAR(d.dv_p, (a[0] - b[0]) / (2 * h), 1e-6);
    EXPECT_NEAR(d.dgamma_p, (a[1] - b[1]) / (2 * h), 1e-5);
    EXPECT_NEAR(d.dchi_p, wrap_pi(a[2] - b[2]) / (2 * h), 1e-5);
  }
}

TEST(RelativeDerivatives, NegatingBothVelocityDirectionsNegatesRangeRate) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const EngagementState s = random_state(rng);
    EngagementState m = s;
    m.gamma_p = -s.gamma_p;
    m.chi_p = s.chi_p + kPi;
    m.gamma_t = -s.gamma_t;
    m.chi_t = s.chi_t + kPi;
    const double a = relative_derivatives(s, {}, {}).dr;
    const double b = relative_derivatives(m, {}, {}).dr;
    EXPECT_NEAR(a, -b, 1e-12 * (1.0 + std::abs(a)));
  }
}

TEST(RelativeDerivatives, GuardsThrow) {
  EngagementState s;
  s.r = 0.005;
  EXPECT_THROW(relative_derivatives(s, {}, {}), GuardViolation);
  s.r = 5.0;
  s.theta = kPi / 2 - 1e-4;
  EXPECT_THROW(relative_derivatives(s, {}, {}), GuardViolation);
  s.theta = 0.0;
  s.v_p = 0.0;
  EXPECT_THROW(relative_derivatives(s, {0.0, 1.0, 0.0}, {}), ZeroSpeedFrame);
}

TEST(RelativeDerivatives, FiniteAwayFromGuards) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const StateDerivative d = relative_derivatives(random_state(rng), {1.0, -3.0, 2.0}, {0.1, 0.2, 0.3});
    for (double v : {d.dr, d.dtheta, d.dpsi, d.dv_p, d.dgamma_p, d.dchi_p, d.dv_t, d.dgamma_t, d.dchi_t}) {
      EXPECT_TRUE(std::isfinite(v));
    }
  }
}

TEST(StepRelative, StationarySystemOnlyAdvancesTime) {
  EngagementState s;
  s.r = 7.0;
  s.theta = 0.2;
  s.psi = -1.0;
  s.gamma_p = 0.1;
  s.chi_p = 0.4;
  const EngagementState n = step_relative(s, {}, {}, 0.05);
  EXPECT_DOUBLE_EQ(n.t, 0.05);
  EngagementState expect = s;
  expect.t = 0.05;
  EXPECT_EQ(n, expect);
}

TEST(StepRelative, HeadOnRangeDecreases) {
  EngagementState s;
  s.r = 18.0;
  s.v_p = 5.0;
  const EngagementState n = step_relative(s, {}, {}, 0.05);
  EXPECT_NEAR(n.r, 17.75, 1e-12);
}

TEST(StepRelative, StepHalvingShowsFourthOrder) {
  std::mt19937_64 rng(17);
  const AccelCommandFrame up{0.5, 1.0, -1.5}, ut{0.1, -0.2, 0.1};
  int checked = 0;
  for (int i = 0; i < 50; ++i) {
    EngagementState s = random_state(rng);
    s.theta = std::clamp(s.theta, -0.9, 0.9);
    const double dt = 0.1;
    // Local error estimates at dt and dt/2 from one step versus two half steps.
    auto err = [&](double h) {
      const EngagementState one = step_relative(s, up, ut, h);
      const EngagementState two = step_relative(step_relative(s, up, ut, h / 2), up, ut, h / 2);
      return std::abs(one.r - two.r) + std::abs(wrap_pi(one.psi - two.psi)) + std::abs(one.theta - two.theta);
    };
    const double e1 = err(dt), e2 = err(dt / 2);
    if (e1 < 1e-11) continue;
    ++checked;
    EXPECT_GE(e1 / e2, 8.0) << "trial " << i;
  }
  EXPECT_GT(checked, 25);
}

TEST(StepInertial, StraightLineIsExact) {
  InertialState s;
  s.pos_p = Vec3(1.0, 2.0, 3.0);
  s.vel_p = Vec3(0.5, -1.0, 2.0);
  s.pos_t = Vec3(10.0, 0.0, 0.0);
  s.vel_t = Vec3(-1.0, 0.0, 0.25);
  const InertialState n = step_inertial(s, {}, {}, 0.05);
  EXPECT_LT((n.pos_p - (s.pos_p + 0.05 * s.vel_p)).norm(), 1e-15);
  EXPECT_LT((n.pos_t - (s.pos_t + 0.05 * s.vel_t)).norm(), 1e-15);
  EXPECT_EQ(n.vel_p, s.vel_p);
}

TEST(StepInertial, PureRadialCommandKeepsDirection) {
  InertialState s;
  s.vel_p = Vec3(3.0, 0.0, 0.0);
  s.pos_t = Vec3(20.0, 0.0, 0.0);
  const InertialState n = step_inertial(s, {2.0, 0.0, 0.0}, {}, 0.1);
  EXPECT_NEAR(n.vel_p.x(), 3.2, 1e-12);
  EXPECT_NEAR(n.vel_p.y(), 0.0, 1e-15);
  EXPECT_NEAR(n.vel_p.z(), 0.0, 1e-15);
}

TEST(StepInertial, LateralCommandAtZeroSpeedThrows) {
  InertialState s;
  s.pos_t = Vec3(5.0, 0.0, 0.0);
  EXPECT_THROW(step_inertial(s, {0.0, 0.0, 1.0}, {}, 0.05), ZeroSpeedFrame);
  EXPECT_NO_THROW(step_inertial(s, {1.0, 0.0, 0.0}, {}, 0.05));
}

TEST(StepInertial, AgreesWithRelativeIntegratorOnSmoothControls) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    EngagementState s = random_state(rng);
    s.theta = std::clamp(s.theta, -0.8, 0.8);
    s.gamma_p = std::clamp(s.gamma_p, -0.8, 0.8);
    s.gamma_t = std::clamp(s.gamma_t, -0.8, 0.8);
    s.r = 30.0;
    const AccelCommandFrame up{0.2, 0.5, -0.4}, ut{0.0, 0.1, 0.1};
    EngagementState rel = s;
    InertialState in = to_inertial(s);
    for (int i = 0; i < 200; ++i) {
      rel = step_relative(rel, up, ut, 0.005);
      in = step_inertial(in, up, ut, 0.005);
    }
    const EngagementState ind = to_relative(in);
    EXPECT_NEAR(ind.r, rel.r, 1e-7);
    EXPECT_NEAR(ind.theta, rel.theta, 1e-7);
    EXPECT_NEAR(wrap_pi(ind.psi - rel.psi), 0.0, 1e-7);
    EXPECT_NEAR(ind.v_p, rel.v_p, 1e-9);
    EXPECT_NEAR(ind.gamma_p, rel.gamma_p, 1e-7);
    EXPECT_NEAR(wrap_pi(ind.chi_p - rel.chi_p), 0.0, 1e-7);
  }
}

TEST(ToRelative, PaperInitialGeometry) {
  InertialState in;
  in.pos_p = Vec3(0.0, 0.0, 15.0);
  in.pos_t = Vec3(12.0, 12.0, 15.0);
  const EngagementState s = to_relative(in);
  EXPECT_NEAR(s.r, std::sqrt(288.0), 1e-12);
  EXPECT_NEAR(s.theta, 0.0, 1e-15);
  EXPECT_NEAR(s.psi, kPi / 4, 1e-15);
}

TEST(ToRelative, VelocityAlongLosHasZeroAngles) {
  InertialState in;
  in.pos_t = Vec3(3.0, 4.0, 5.0);
  in.vel_p = 2.0 * in.pos_t.normalized();
  const EngagementState s = to_relative(in);
  EXPECT_NEAR(s.gamma_p, 0.0, 1e-12);
  EXPECT_NEAR(s.chi_p, 0.0, 1e-12);
  EXPECT_NEAR(s.v_p, 2.0, 1e-12);
}

TEST(ToRelative, RoundTripIsIdentity) {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> n(0.0, 5.0);
  for (int i = 0; i < 500; ++i) {
    InertialState in;
    in.pos_p = Vec3(n(rng), n(rng), n(rng));
    in.pos_t = in.pos_p + Vec3(n(rng), n(rng), n(rng));
    in.vel_p = Vec3(n(rng), n(rng), n(rng));
    in.vel_t = Vec3(n(rng), n(rng), n(rng));
    const InertialState back = to_inertial(to_relative(in), in.pos_p);
    EXPECT_LT((back.pos_t - in.pos_t).norm(), 1e-9);
    EXPECT_LT((back.vel_p - in.vel_p).norm(), 1e-9);
    EXPECT_LT((back.vel_t - in.vel_t).norm(), 1e-9);
    EXPECT_NEAR(back.vel_p.norm(), in.vel_p.norm(), 1e-9 * in.vel_p.norm());
  }
}

TEST(ToRelative, CoincidentPositionsThrow) {
  InertialState in;
  in.pos_t = Vec3(0.001, 0.0, 0.0);
  EXPECT_THROW(to_relative(in), DegenerateLOS);
}

TEST(WrapAngles, AzimuthWraps) {
  EngagementState s;
  s.psi = kPi + 0.1;
  EXPECT_NEAR(wrap_angles(s).psi, -kPi + 0.1, 1e-12);
  s.psi = kPi;
  EXPECT_DOUBLE_EQ(wrap_angles(s).psi, kPi);
  s.psi = -kPi;
  EXPECT_DOUBLE_EQ(wrap_angles(s).psi, kPi);
}

TEST(WrapAngles, ElevationReflectsThroughPole) {
  EngagementState s;
  s.theta = kPi / 2 + 0.1;
  s.psi = 0.3;
  const EngagementState w = wrap_angles(s);
  EXPECT_NEAR(w.theta, kPi / 2 - 0.1, 1e-12);
  EXPECT_NEAR(w.psi, wrap_pi(0.3 + kPi), 1e-12);
}

TEST(WrapAngles, IdempotentAndDirectionPreserving) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-7.0, 7.0);
  for (int i = 0; i < 1000; ++i) {
    EngagementState s;
    s.r = 10.0;
    s.v_p = 2.0;
    s.v_t = 3.0;
    s.theta = u(rng);
    s.psi = u(rng);
    s.gamma_p = u(rng);
    s.chi_p = u(rng);
    s.gamma_t = u(rng);
    s.chi_t = u(rng);
    const EngagementState w = wrap_angles(s);
    EXPECT_EQ(wrap_angles(w), w);
    EXPECT_GE(w.theta, -kPi / 2);
    EXPECT_LE(w.theta, kPi / 2);
    EXPECT_GT(w.psi, -kPi);
    EXPECT_LE(w.psi, kPi);
    EXPECT_GE(w.gamma_p, -kPi / 2);
    EXPECT_LE(w.gamma_p, kPi / 2);
    EXPECT_GT(w.chi_p, -kPi);
    EXPECT_LE(w.chi_p, kPi);
    EXPECT_LT((los_dir(w.theta, w.psi) - los_dir(s.theta, s.psi)).norm(), 1e-12);
    EXPECT_LT((heading(w.theta, w.psi, w.gamma_p, w.chi_p) - heading(s.theta, s.psi, s.gamma_p, s.chi_p)).norm(),
              1e-12);
    EXPECT_LT((heading(w.theta, w.psi, w.gamma_t, w.chi_t) - heading(s.theta, s.psi, s.gamma_t, s.chi_t)).norm(),
              1e-12);
  }
}

TEST(Rk4, ExactForCubicPolynomials) {
  // dx/dt = 3t^2 integrates exactly under a fourth-order method.
  const auto f = [](double t, const double&) { return 3.0 * t * t; };
  EXPECT_NEAR(rk4_step(f, 1.0, 1.0, 0.5), 1.0 + (1.5 * 1.5 * 1.5 - 1.0), 1e-14);
}
