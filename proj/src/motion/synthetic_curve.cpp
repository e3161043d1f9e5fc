#include "t2motion/motion.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace t2motion::motion {

namespace {

MotionCurve scaled(std::vector<double> const &t_s, std::vector<RigidTransform> const &raw, double s) {
  std::vector<RigidTransform> params(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    params[i].translation_mm = s * raw[i].translation_mm;
    params[i].rotation_deg = s * raw[i].rotation_deg;
  }
  return MotionCurve(t_s, std::move(params));
}

} // namespace

MotionCurve make_synthetic_curve(SyntheticCurveSpec const &spec, std::uint64_t seed) {
  if (spec.samples < 2 || !(spec.dt_s > 0.0)) {
    throw std::invalid_argument("synthetic curve: need >= 2 samples and positive dt");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  std::size_t const n = spec.samples;
  std::vector<double> t_s(n);
  for (std::size_t i = 0; i < n; ++i) {
    t_s[i] = static_cast<double>(i) * spec.dt_s;
  }

  // Per-channel scales: translations in mm, rotations in degrees.
  double const drift_sd[6] = {0.010, 0.020, 0.015, 0.012, 0.008, 0.008};
  double const jump_sd[6] = {0.25, 0.45, 0.35, 0.35, 0.20, 0.20};
  double const jitter_sd[6] = {0.010, 0.015, 0.010, 0.008, 0.005, 0.005};

  std::vector<std::array<double, 6>> values(n);
  std::array<double, 6> drift{};
  std::array<double, 6> velocity{};
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 6; ++c) {
      // Damped random velocity gives slow, smooth drift.
      velocity[c] = 0.9 * velocity[c] + drift_sd[c] * normal(rng);
      drift[c] += velocity[c];
      values[i][c] = drift[c];
    }
  }

  // A few abrupt position changes, each persisting to the end of the run.
  int const jumps = 2 + static_cast<int>(uniform(rng) * 3.0);
  for (int j = 0; j < jumps; ++j) {
    auto const at = static_cast<std::size_t>(uniform(rng) * static_cast<double>(n));
    std::array<double, 6> step{};
    for (int c = 0; c < 6; ++c) {
      step[c] = jump_sd[c] * normal(rng);
    }
    for (std::size_t i = at; i < n; ++i) {
      for (int c = 0; c < 6; ++c) {
        values[i][c] += step[c];
      }
    }
  }

  std::vector<RigidTransform> raw(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 6; ++c) {
      values[i][c] += jitter_sd[c] * normal(rng);
    }
    raw[i].translation_mm = {values[i][0], values[i][1], values[i][2]};
    raw[i].rotation_deg = {values[i][3], values[i][4], values[i][5]};
  }

  if (!(spec.target_mean_mm > 0.0)) {
    return recenter_to_median(scaled(t_s, raw, 1.0), spec.radius_mm);
  }

  auto mean_at = [&](double s) {
    return recenter_to_median(scaled(t_s, raw, s), spec.radius_mm).mean_displacement(spec.radius_mm);
  };
  double lo = 0.0;
  double hi = 1.0;
  for (int k = 0; k < 60 && mean_at(hi) < spec.target_mean_mm; ++k) {
    lo = hi;
    hi *= 2.0;
  }
  for (int k = 0; k < 60; ++k) {
    double const mid = 0.5 * (lo + hi);
    (mean_at(mid) < spec.target_mean_mm ? lo : hi) = mid;
  }
  return recenter_to_median(scaled(t_s, raw, 0.5 * (lo + hi)), spec.radius_mm);
}

} // namespace t2motion::motion
