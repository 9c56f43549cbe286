#include "enclose/target.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

using namespace enclose;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / ("enclose_test_" + name);
  std::ofstream(path) << body;
  return path.string();
}

std::string config_error_message(const std::string& path) {
  try {
    load_profile_csv(path);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(TargetModel, StationaryAndConstantVelocity) {
  const TargetModel s = TargetModel::stationary();
  EXPECT_EQ(target_velocity(3.0, s), Vec3::Zero());
  EXPECT_EQ(target_accel(3.0, s), Vec3::Zero());
  const TargetModel c = TargetModel::constant_velocity(Vec3(2.0, 0.5, 0.0));
  EXPECT_EQ(target_velocity(7.0, c), Vec3(2.0, 0.5, 0.0));
  EXPECT_EQ(target_accel(7.0, c), Vec3::Zero());
  EXPECT_EQ(c.bound_sum(), 0.0);
}

TEST(TargetModel, ManeuveringValues) {
  const TargetModel m = TargetModel::maneuvering();
  EXPECT_EQ(target_velocity(0.0, m), Vec3(3.5, 0.0, 0.0));
  // sin(pi) and sin(2 pi) vanish at t = 25 s.
  const Vec3 v25 = target_velocity(25.0, m);
  EXPECT_NEAR(v25.x(), 3.5, 1e-15);
  EXPECT_NEAR(v25.y(), 0.0, 1e-12);
  EXPECT_NEAR(v25.z(), 0.0, 1e-12);
  const Vec3 v12 = target_velocity(12.5, m);
  EXPECT_NEAR(v12.y(), 1.5, 1e-12);
  EXPECT_NEAR(v12.z(), 0.0, 1e-12);
  const Vec3 a0 = target_accel(0.0, m);
  EXPECT_EQ(a0.x(), 0.0);
  EXPECT_NEAR(a0.y(), 1.5 * 4.0 * kPi / 100.0, 1e-15);
  EXPECT_NEAR(a0.z(), 8.0 * kPi / 100.0, 1e-15);
}

TEST(TargetModel, AccelMatchesVelocityDifferences) {
  const TargetModel m = TargetModel::maneuvering();
  const double h = 1e-4;
  for (double t = 0.0; t <= 100.0; t += 0.37) {
    const Vec3 fd = (target_velocity(t + h, m) - target_velocity(t - h, m)) / (2.0 * h);
    EXPECT_LT((fd - target_accel(t, m)).norm(), 1e-6) << "t = " << t;
  }
}

TEST(TargetModel, ManeuveringSpeedEnvelope) {
  const TargetModel m = TargetModel::maneuvering();
  double lo = 1e9, hi = 0.0;
  for (int i = 0; i <= 100000; ++i) {
    const double v = target_velocity(i * 1e-3, m).norm();
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_NEAR(lo, 3.5, 1e-9);
  // Lateral speed squared is 2.25 u + 4 u (1 - u) with u = sin^2(omega_y t), largest at u = 6.25 / 8.
  const double u = 6.25 / 8.0;
  EXPECT_NEAR(hi, std::sqrt(3.5 * 3.5 + 2.25 * u + 4.0 * u * (1.0 - u)), 1e-6);
  EXPECT_GT(lo, 1.0);
  EXPECT_LT(hi, 6.0);
}

TEST(TargetModel, ManeuveringBoundsDominate) {
  const TargetModel m = TargetModel::maneuvering();
  EXPECT_NEAR(max_target_accel(m, 100.0, 1e-3), std::hypot(1.5 * 4.0 * kPi / 100.0, 8.0 * kPi / 100.0), 1e-6);
  EXPECT_TRUE(bounds_dominate(m, 100.0));
  EXPECT_LT(m.bound_sum(), 30.0);
  TargetModel weak = m;
  weak.a_max_chi = 0.1;
  EXPECT_FALSE(bounds_dominate(weak, 100.0));
}

TEST(TargetInit, HeadingRoundTrip) {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const LosFrame los = LosFrame::from_angles(1.4 * u(rng), 3.0 * u(rng));
    const double g = 1.4 * u(rng), c = 3.1 * u(rng), v = 2.0 + u(rng);
    const Vec3 vel = init_target_inertial(c, g, v, los);
    EXPECT_NEAR(vel.norm(), v, 1e-12);
    // Independent projection onto the LOS basis.
    EXPECT_NEAR(vel.dot(los.e_r), v * std::cos(g) * std::cos(c), 1e-12);
    EXPECT_NEAR(vel.dot(los.e_psi), v * std::cos(g) * std::sin(c), 1e-12);
    EXPECT_NEAR(vel.dot(los.e_theta), v * std::sin(g), 1e-12);
    const FlightAngles fa = flight_angles(los, vel);
    EXPECT_NEAR(fa.gamma, g, 1e-12);
    EXPECT_NEAR(fa.chi, c, 1e-12);
  }
}

TEST(TargetInit, ZeroSpeedAndZeroAngles) {
  const LosFrame los = LosFrame::from_angles(0.0, 0.0);
  EXPECT_EQ(init_target_inertial(0.3, 0.2, 0.0, los).norm(), 0.0);
  const Vec3 v = init_target_inertial(0.0, 0.0, 2.0, los);
  EXPECT_NEAR((v - Vec3(2.0, 0.0, 0.0)).norm(), 0.0, 1e-15);
}

TEST(TargetBodyAccel, ProjectsOntoBodyTriad) {
  const LosFrame los = LosFrame::from_angles(0.2, 0.7);
  const Vec3 vel = init_target_inertial(0.4, 0.3, 3.0, los);
  const Vec3 acc(0.1, -0.2, 0.3);
  const AccelCommandFrame b = target_body_accel(los, vel, acc);
  // Along-velocity component from the velocity itself.
  EXPECT_NEAR(b.a_r, acc.dot(vel.normalized()), 1e-12);
  EXPECT_NEAR(std::hypot(b.a_r, std::hypot(b.a_gamma, b.a_chi)), acc.norm(), 1e-12);
  const AccelCommandFrame rest = target_body_accel(los, Vec3::Zero(), acc);
  EXPECT_EQ(rest.a_r, 0.0);
  EXPECT_EQ(rest.a_gamma, 0.0);
  EXPECT_EQ(rest.a_chi, 0.0);
}

TEST(CubicSplineTest, InterpolatesKnotsAndLinearData) {
  const CubicSpline lin({0.0, 1.0, 3.0, 4.0}, {1.0, 3.0, 7.0, 9.0});
  for (double t = 0.0; t <= 4.0; t += 0.125) {
    EXPECT_NEAR(lin.value(t), 1.0 + 2.0 * t, 1e-12);
    if (t > 0.0 && t < 4.0) EXPECT_NEAR(lin.derivative(t), 2.0, 1e-12);
  }
  const CubicSpline s({0.0, 1.0, 2.0, 3.0}, {0.0, 1.0, 0.0, 2.0});
  EXPECT_NEAR(s.value(1.0), 1.0, 1e-12);
  EXPECT_NEAR(s.value(2.0), 0.0, 1e-12);
  EXPECT_EQ(s.value(-1.0), 0.0);
  EXPECT_EQ(s.value(5.0), 2.0);
  EXPECT_EQ(s.derivative(5.0), 0.0);
  for (double t = 0.05; t < 3.0; t += 0.1) {
    const double fd = (s.value(t + 1e-6) - s.value(t - 1e-6)) / 2e-6;
    EXPECT_NEAR(s.derivative(t), fd, 1e-6);
  }
}

TEST(CubicSplineTest, RejectsBadSamples) {
  EXPECT_THROW(CubicSpline({0.0}, {1.0}), ConfigError);
  EXPECT_THROW(CubicSpline({0.0, 0.0}, {1.0, 2.0}), ConfigError);
  EXPECT_THROW(CubicSpline({0.0, 1.0}, {1.0}), ConfigError);
}

TEST(ProfileCsv, LoadsAndInterpolates) {
  const std::string path = write_temp("profile.csv", "t,vx,vy,vz\n0,1,0,0\n1,2,0,0.5\n2,3,0,1\n\n");
  const TargetModel m = load_profile_csv(path);
  EXPECT_EQ(m.kind, TargetKind::Profile);
  EXPECT_NEAR(target_velocity(0.5, m).x(), 1.5, 1e-12);
  EXPECT_NEAR(target_velocity(1.5, m).z(), 0.75, 1e-12);
  EXPECT_NEAR(target_accel(1.0, m).x(), 1.0, 1e-12);
  std::filesystem::remove(path);
}

TEST(ProfileCsv, ErrorsCarryLocation) {
  EXPECT_NE(config_error_message("/nonexistent/enclose.csv").find("cannot open"), std::string::npos);
  std::string p = write_temp("bad_header.csv", "time,vx,vy,vz\n0,1,0,0\n");
  EXPECT_NE(config_error_message(p).find(":1:"), std::string::npos);
  p = write_temp("bad_number.csv", "t,vx,vy,vz\n0,1,0,0\n1,x,0,0\n");
  EXPECT_NE(config_error_message(p).find(":3: bad number"), std::string::npos);
  p = write_temp("short_row.csv", "t,vx,vy,vz\n0,1,0\n");
  EXPECT_NE(config_error_message(p).find(":2: expected 4 columns"), std::string::npos);
  p = write_temp("one_row.csv", "t,vx,vy,vz\n0,1,0,0\n");
  EXPECT_NE(config_error_message(p).find("at least two"), std::string::npos);
  p = write_temp("unsorted.csv", "t,vx,vy,vz\n1,1,0,0\n0,1,0,0\n");
  EXPECT_NE(config_error_message(p).find("increasing"), std::string::npos);
}
