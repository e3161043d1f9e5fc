#include "t2motion/motion.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace t2motion::motion {

namespace {

double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double result = 0.0;
  double f = 1.0 / static_cast<double>(base);
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= static_cast<double>(base);
  }
  return result;
}

std::uint64_t splitmix64(std::uint64_t &state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double unit_double(std::uint64_t &state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

} // namespace

std::vector<Eigen::Vector3d> unit_ball_points(std::size_t count, std::uint64_t seed) {
  double shift[3] = {0.0, 0.0, 0.0};
  if (seed != 0) {
    std::uint64_t state = seed;
    for (double &s : shift) {
      s = unit_double(state);
    }
  }
  std::vector<Eigen::Vector3d> points;
  points.reserve(count);
  std::uint64_t const bases[3] = {2, 3, 5};
  for (std::size_t i = 0; i < count; ++i) {
    double u[3];
    for (int k = 0; k < 3; ++k) {
      // Index i+1 skips the all-zero first Halton point.
      u[k] = std::fmod(radical_inverse(i + 1, bases[k]) + shift[k], 1.0);
    }
    // Volume-preserving map of the unit cube onto the ball.
    double const r = std::cbrt(u[0]);
    double const cos_theta = 1.0 - 2.0 * u[1];
    double const sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
    double const phi = 2.0 * std::numbers::pi * u[2];
    points.emplace_back(r * sin_theta * std::cos(phi), r * sin_theta * std::sin(phi), r * cos_theta);
  }
  return points;
}

double sphere_displacement(RigidTransform const &t, double radius_mm,
                           std::vector<Eigen::Vector3d> const &unit_points) {
  if (!(radius_mm > 0.0)) {
    throw std::invalid_argument("sphere_displacement: radius must be positive");
  }
  if (unit_points.empty()) {
    throw std::invalid_argument("sphere_displacement: empty point set");
  }
  Eigen::Matrix3d const delta = t.rotation_matrix() - Eigen::Matrix3d::Identity();
  double sum = 0.0;
  for (auto const &u : unit_points) {
    sum += (delta * (radius_mm * u) + t.translation_mm).norm();
  }
  return sum / static_cast<double>(unit_points.size());
}

double sphere_displacement(RigidTransform const &t, double radius_mm) {
  static std::vector<Eigen::Vector3d> const points = unit_ball_points(kSpherePoints);
  return sphere_displacement(t, radius_mm, points);
}

} // namespace t2motion::motion
