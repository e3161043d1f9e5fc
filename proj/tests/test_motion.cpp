#include "t2motion/motion.hpp"

#include <doctest.h>

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace t2motion;
using namespace t2motion::motion;

namespace {

RigidTransform make(double tx, double ty, double tz, double rx, double ry, double rz) {
  RigidTransform t;
  t.translation_mm = {tx, ty, tz};
  t.rotation_deg = {rx, ry, rz};
  return t;
}

// Independent Monte-Carlo estimate: uniform ball by rejection sampling from
// the cube, rotation built from Eigen angle-axis products.
double monte_carlo_displacement(RigidTransform const &t, double radius, std::size_t samples, std::uint64_t seed) {
  double const deg = std::numbers::pi / 180.0;
  Eigen::Matrix3d const r = (Eigen::AngleAxisd(t.rotation_deg.z() * deg, Eigen::Vector3d::UnitZ()) *
                             Eigen::AngleAxisd(t.rotation_deg.y() * deg, Eigen::Vector3d::UnitY()) *
                             Eigen::AngleAxisd(t.rotation_deg.x() * deg, Eigen::Vector3d::UnitX()))
                                .toRotationMatrix();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double sum = 0.0;
  std::size_t n = 0;
  while (n < samples) {
    Eigen::Vector3d const p(u(rng), u(rng), u(rng));
    if (p.squaredNorm() > 1.0) {
      continue;
    }
    Eigen::Vector3d const q = radius * p;
    sum += (r * q + t.translation_mm - q).norm();
    ++n;
  }
  return sum / static_cast<double>(n);
}

MultiEchoVolume smooth_volume(Dims d) {
  MultiEchoVolume v(d, {2.0, 2.0, 3.0}, std::vector<double>{5.0, 10.0}, Space::Image);
  for (std::size_t e = 0; e < d.echoes; ++e) {
    for (std::size_t s = 0; s < d.slices; ++s) {
      for (std::size_t p = 0; p < d.lines; ++p) {
        for (std::size_t r = 0; r < d.readout; ++r) {
          double const x = (static_cast<double>(r) - 0.5 * static_cast<double>(d.readout - 1)) / static_cast<double>(d.readout);
          double const y = (static_cast<double>(p) - 0.5 * static_cast<double>(d.lines - 1)) / static_cast<double>(d.lines);
          double const z = (static_cast<double>(s) - 0.5 * static_cast<double>(d.slices - 1)) / static_cast<double>(d.slices);
          double const g = std::exp(-(x * x + y * y + z * z) / 0.04) * (1.0 + 0.5 * static_cast<double>(e));
          v(e, s, p, r) = cfloat(static_cast<float>(g), static_cast<float>(0.3 * g * x));
        }
      }
    }
  }
  return v;
}

MotionCurve curve_from(std::vector<RigidTransform> params) {
  std::vector<double> t(params.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<double>(i);
  }
  return MotionCurve(t, std::move(params));
}

} // namespace

TEST_CASE("rotation matrix follows Rz*Ry*Rx") {
  auto const t = make(0, 0, 0, 10, -20, 30);
  double const deg = std::numbers::pi / 180.0;
  Eigen::Matrix3d const expected = (Eigen::AngleAxisd(30 * deg, Eigen::Vector3d::UnitZ()) *
                                    Eigen::AngleAxisd(-20 * deg, Eigen::Vector3d::UnitY()) *
                                    Eigen::AngleAxisd(10 * deg, Eigen::Vector3d::UnitX()))
                                       .toRotationMatrix();
  CHECK((t.rotation_matrix() - expected).cwiseAbs().maxCoeff() < 1e-12);
  auto const back = RigidTransform::from_matrix(expected, {1, 2, 3});
  CHECK(parameter_distance(back, make(1, 2, 3, 10, -20, 30)) < 1e-9);
}

TEST_CASE("compose and inverse") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 50; ++i) {
    auto const a = make(u(rng), u(rng), u(rng), u(rng), u(rng), u(rng));
    auto const b = make(u(rng), u(rng), u(rng), u(rng), u(rng), u(rng));
    CHECK(parameter_distance(compose(a, inverse(a)), RigidTransform::identity()) < 1e-9);
    CHECK(parameter_distance(compose(inverse(a), a), RigidTransform::identity()) < 1e-9);
    Eigen::Vector3d const p(u(rng), u(rng), u(rng));
    CHECK((compose(a, b).apply(p) - a.apply(b.apply(p))).norm() < 1e-9);
  }
}

TEST_CASE("apply_rigid identity is bit exact") {
  auto const v = smooth_volume({2, 5, 12, 10});
  CHECK(apply_rigid(v, RigidTransform::identity()) == v);
}

TEST_CASE("apply_rigid one-voxel PE shift") {
  auto const v = smooth_volume({2, 3, 8, 6});
  auto const out = apply_rigid(v, make(0, 2.0, 0, 0, 0, 0)); // PE voxel size is 2 mm
  for (std::size_t e = 0; e < 2; ++e) {
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t r = 0; r < 6; ++r) {
        CHECK(out(e, s, 0, r) == cfloat{});
        for (std::size_t p = 1; p < 8; ++p) {
          CHECK(std::abs(out(e, s, p, r) - v(e, s, p - 1, r)) < 1e-6f);
        }
      }
    }
  }
}

TEST_CASE("apply_rigid is linear and respects the image domain") {
  auto const a = smooth_volume({2, 4, 10, 12});
  auto b = a;
  for (auto &x : b.data()) {
    x = cfloat(x.imag(), -2.0f * x.real());
  }
  std::vector<cfloat> sum(a.data().size());
  for (std::size_t i = 0; i < sum.size(); ++i) {
    sum[i] = a.data()[i] + b.data()[i];
  }
  auto const t = make(0.7, -1.1, 0.4, 1.5, -0.5, 2.0);
  auto const lhs = apply_rigid(a.with_data(Space::Image, sum), t);
  auto const ra = apply_rigid(a, t);
  auto const rb = apply_rigid(b, t);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < sum.size(); ++i) {
    num += std::norm(cdouble(lhs.data()[i]) - cdouble(ra.data()[i]) - cdouble(rb.data()[i]));
    den += std::norm(cdouble(lhs.data()[i]));
  }
  CHECK(std::sqrt(num / den) < 1e-6);
  CHECK_THROWS_AS(apply_rigid(a.with_data(Space::KSpace, sum), t), VolumeError);
  CHECK_THROWS(apply_rigid(a, make(std::nan(""), 0, 0, 0, 0, 0)));
}

TEST_CASE("apply_rigid round trip stays within interpolation error") {
  Dims const d{2, 16, 32, 32};
  auto const v = smooth_volume(d);
  auto const t = make(1.5, -2.0, 1.0, 2.0, -1.5, 2.0);
  auto const back = apply_rigid(apply_rigid(v, t), inverse(t));
  double peak = 0.0;
  double sq = 0.0;
  std::size_t n = 0;
  for (std::size_t e = 0; e < d.echoes; ++e) {
    for (std::size_t s = 4; s < 12; ++s) {
      for (std::size_t p = 8; p < 24; ++p) {
        for (std::size_t r = 8; r < 24; ++r) {
          peak = std::max(peak, static_cast<double>(std::abs(v(e, s, p, r))));
          sq += std::norm(cdouble(back(e, s, p, r)) - cdouble(v(e, s, p, r)));
          ++n;
        }
      }
    }
  }
  CHECK(std::sqrt(sq / static_cast<double>(n)) < 0.05 * peak);
}

TEST_CASE("single-slice resampling matches the full volume") {
  auto const v = smooth_volume({2, 6, 10, 12});
  auto const t = make(0.3, 1.2, -0.8, 3.0, 1.0, -2.0);
  auto const full = apply_rigid(v, t);
  std::vector<cdouble> slice;
  apply_rigid_slice(v, t, 3, slice);
  REQUIRE(slice.size() == 2u * 10u * 12u);
  for (std::size_t e = 0; e < 2; ++e) {
    for (std::size_t i = 0; i < 120; ++i) {
      CHECK(std::abs(cfloat(slice[e * 120 + i]) - full.plane(e, 3)[i]) < 1e-6f);
    }
  }
  CHECK_THROWS(apply_rigid_slice(v, t, 6, slice));
}

TEST_CASE("unit ball points") {
  auto const pts = unit_ball_points(kSpherePoints);
  REQUIRE(pts.size() == kSpherePoints);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  double mean_r3 = 0.0;
  for (auto const &p : pts) {
    CHECK(p.norm() <= 1.0);
    mean += p;
    mean_r3 += std::pow(p.norm(), 3);
  }
  mean /= static_cast<double>(pts.size());
  mean_r3 /= static_cast<double>(pts.size());
  CHECK(mean.norm() < 0.02);
  CHECK(mean_r3 == doctest::Approx(0.5).epsilon(0.01)); // r^3 is uniform on [0,1]
  CHECK(unit_ball_points(16, 3) == unit_ball_points(16, 3));
  CHECK(unit_ball_points(16, 3) != unit_ball_points(16, 4));
}

TEST_CASE("sphere displacement: translations are exact") {
  CHECK(sphere_displacement(make(0.3, 0.4, 0, 0, 0, 0), 64.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(sphere_displacement(make(0.3, 0.4, 0, 0, 0, 0), 64.0) - 0.5) < 1e-9);
  CHECK(sphere_displacement(RigidTransform::identity(), 64.0) == 0.0);
  CHECK(std::abs(sphere_displacement(make(-1, 2, 2, 0, 0, 0), 10.0) - 3.0) < 1e-9);
}

TEST_CASE("sphere displacement: rotations agree with the Monte-Carlo oracle") {
  // Closed form for a small rotation about z: 2 sin(θ/2) times the mean
  // distance to the axis, 3πR/16.
  double const closed = 2.0 * std::sin(0.5 * std::numbers::pi / 180.0) * 3.0 * std::numbers::pi * 64.0 / 16.0;
  auto const rot_z = make(0, 0, 0, 0, 0, 1);
  double const oracle = monte_carlo_displacement(rot_z, 64.0, 1'000'000, 17);
  CHECK(oracle == doctest::Approx(closed).epsilon(0.002));
  CHECK(sphere_displacement(rot_z, 64.0) == doctest::Approx(oracle).epsilon(0.005));

  for (auto const &t : {make(0, 0, 0, 2, -1, 0.5), make(0.5, -0.2, 0.1, 0.4, 0.8, -1.2), make(0, 0, 0, 0, 5, 0)}) {
    double const mc = monte_carlo_displacement(t, 64.0, 1'000'000, 99);
    CHECK(sphere_displacement(t, 64.0) == doctest::Approx(mc).epsilon(0.005));
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      CHECK(sphere_displacement(t, 64.0, unit_ball_points(kSpherePoints, seed)) == doctest::Approx(mc).epsilon(0.005));
    }
  }
}

TEST_CASE("motion curve construction and lookup") {
  CHECK_THROWS(MotionCurve({0.0}, {RigidTransform{}}));
  CHECK_THROWS(MotionCurve({0.0, 0.0}, {RigidTransform{}, RigidTransform{}}));
  CHECK_THROWS(MotionCurve({0.0, 1.0}, {RigidTransform{}}));
  MotionCurve const c({0.0, 1.0, 2.0}, {make(1, 0, 0, 0, 0, 0), make(2, 0, 0, 0, 0, 0), make(3, 0, 0, 0, 0, 0)});
  CHECK(c.nearest_index(-5.0) == 0);
  CHECK(c.nearest_index(0.4) == 0);
  CHECK(c.nearest_index(0.5) == 0); // tie -> earlier sample
  CHECK(c.nearest_index(0.6) == 1);
  CHECK(c.nearest_index(9.0) == 2);
  CHECK(c.duration() == 2.0);
  CHECK(c.mean_displacement(64.0) == doctest::Approx(2.0));
}

TEST_CASE("recenter to median") {
  SUBCASE("three samples") {
    // Displacements 0.1, 0.4, 0.9 mm: the middle sample becomes the identity.
    auto const c = curve_from({make(0.1, 0, 0, 0, 0, 0), make(0, 0.4, 0, 0, 0, 0), make(0, 0, 0.9, 0, 0, 0)});
    CHECK(median_state_index(c, 64.0) == 1);
    auto const r = recenter_to_median(c, 64.0);
    CHECK(parameter_distance(r[1], RigidTransform::identity()) < 1e-9);
    CHECK(sphere_displacement(r[1], 64.0) == 0.0);
  }
  SUBCASE("lower median for even length") {
    auto const c = curve_from({make(0.4, 0, 0, 0, 0, 0), make(0.1, 0, 0, 0, 0, 0), make(0.9, 0, 0, 0, 0, 0),
                               make(0.2, 0, 0, 0, 0, 0)});
    CHECK(median_state_index(c, 64.0) == 3);
  }
  SUBCASE("identity median leaves the curve unchanged") {
    auto const c = curve_from({make(0.2, 0, 0, 1, 0, 0), RigidTransform::identity(), RigidTransform::identity(),
                               make(0, 0, 0, 0, 0, 3)});
    auto const r = recenter_to_median(c, 64.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      CHECK(parameter_distance(r[i], c[i]) < 1e-9);
    }
  }
  SUBCASE("constant curve collapses to identity") {
    auto const t = make(1, -2, 0.5, 3, 1, -1);
    auto const r = recenter_to_median(curve_from({t, t, t, t}), 64.0);
    for (std::size_t i = 0; i < r.size(); ++i) {
      CHECK(parameter_distance(r[i], RigidTransform::identity()) < 1e-9);
    }
  }
  SUBCASE("relative motion is preserved") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<RigidTransform> params;
    for (int i = 0; i < 9; ++i) {
      params.push_back(make(u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)));
    }
    auto const c = curve_from(params);
    auto const r = recenter_to_median(c, 64.0);
    for (std::size_t a = 0; a < c.size(); ++a) {
      for (std::size_t b = 0; b < c.size(); ++b) {
        CHECK(parameter_distance(compose(inverse(r[a]), r[b]), compose(inverse(c[a]), c[b])) < 1e-9);
      }
    }
  }
}

TEST_CASE("curve CSV round trip") {
  auto const c = curve_from({make(0.125, -1, 2, 0.5, 0, -3), make(1, 2, 3, 4, 5, 6)});
  std::stringstream ss;
  write_curve_csv(c, ss);
  std::string const text = ss.str();
  CHECK(text.find("t_s,tx_mm,ty_mm,tz_mm,rx_deg,ry_deg,rz_deg") != std::string::npos);
  CHECK(text.find("# rotation_order=Rz*Ry*Rx") != std::string::npos);
  auto const back = read_curve_csv(ss);
  REQUIRE(back.size() == 2);
  CHECK(back.times() == c.times());
  CHECK(back[0] == c[0]);
  CHECK(back[1] == c[1]);

  std::stringstream bad("t_s,tx_mm,ty_mm,tz_mm,rx_deg,ry_deg,rz_deg\n0,1,2,3\n");
  CHECK_THROWS(read_curve_csv(bad));
  std::stringstream wrong_header("time,a,b\n0,1,2\n");
  CHECK_THROWS(read_curve_csv(wrong_header));
}

TEST_CASE("synthetic curves hit the requested mean displacement") {
  SyntheticCurveSpec spec;
  auto const c = make_synthetic_curve(spec, 21);
  CHECK(c.size() == 236);
  CHECK(c.duration() == doctest::Approx(235.0));
  CHECK(c.mean_displacement(spec.radius_mm) == doctest::Approx(0.89).epsilon(1e-3));
  bool has_identity = false;
  for (std::size_t i = 0; i < c.size(); ++i) {
    has_identity = has_identity || parameter_distance(c[i], RigidTransform::identity()) < 1e-9;
  }
  CHECK(has_identity);
  auto const again = make_synthetic_curve(spec, 21);
  CHECK(again.params() == c.params());
  CHECK(make_synthetic_curve(spec, 22).params() != c.params());
}
