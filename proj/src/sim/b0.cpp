#include "t2motion/sim.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace t2motion::sim {

B0Map B0Map::zeros(MultiEchoVolume const &like) {
  B0Map map;
  map.dims = like.dims();
  map.dims.echoes = 1;
  map.voxel_size_mm = like.voxel_size_mm();
  map.freq_hz.assign(map.dims.slices * map.dims.plane(), 0.0);
  return map;
}

double B0Ramp::at(Dims const &dims, VoxelSize const &vs, double slice, double line, double col) const {
  Eigen::Vector3d const r((col - 0.5 * (static_cast<double>(dims.readout) - 1.0)) * vs[1],
                          (line - 0.5 * (static_cast<double>(dims.lines) - 1.0)) * vs[0],
                          (slice - 0.5 * (static_cast<double>(dims.slices) - 1.0)) * vs[2]);
  return gradient_hz_per_mm.dot(r);
}

B0Ramp draw_b0_ramp(Dims const &dims, VoxelSize const &vs, std::uint64_t state_seed, double max_dev_hz) {
  if (!(max_dev_hz > 0.0)) {
    throw std::invalid_argument("perturb_b0: max deviation must be positive");
  }
  std::mt19937_64 rng(state_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  Eigen::Vector3d dir;
  do {
    dir = {normal(rng), normal(rng), normal(rng)};
  } while (dir.norm() < 1e-12);
  dir.normalize();
  double const peak = (1.0 - uniform(rng)) * max_dev_hz; // (0, max]

  // Largest |dir . (r - c)| over voxel centres is reached at a corner.
  Eigen::Vector3d const half(0.5 * (static_cast<double>(dims.readout) - 1.0) * vs[1],
                             0.5 * (static_cast<double>(dims.lines) - 1.0) * vs[0],
                             0.5 * (static_cast<double>(dims.slices) - 1.0) * vs[2]);
  double const reach = dir.cwiseAbs().dot(half);
  B0Ramp ramp;
  if (reach > 0.0) {
    ramp.gradient_hz_per_mm = dir * (peak / reach);
    ramp.peak_hz = peak;
  }
  return ramp;
}

B0Map perturb_b0(B0Map const &base, std::uint64_t state_seed, double max_dev_hz) {
  B0Ramp const ramp = draw_b0_ramp(base.dims, base.voxel_size_mm, state_seed, max_dev_hz);
  B0Map out = base;
  auto const &d = base.dims;
  std::size_t k = 0;
  for (std::size_t s = 0; s < d.slices; ++s) {
    for (std::size_t p = 0; p < d.lines; ++p) {
      for (std::size_t r = 0; r < d.readout; ++r) {
        out.freq_hz[k++] += ramp.at(d, base.voxel_size_mm, static_cast<double>(s), static_cast<double>(p),
                                    static_cast<double>(r));
      }
    }
  }
  return out;
}

MultiEchoVolume apply_phase(MultiEchoVolume const &image, B0Map const &b0) {
  require_space(image, Space::Image, "apply_phase");
  auto const &d = image.dims();
  if (b0.dims.slices != d.slices || b0.dims.lines != d.lines || b0.dims.readout != d.readout ||
      b0.freq_hz.size() != d.slices * d.plane()) {
    throw std::invalid_argument("apply_phase: B0 map shape does not match the volume");
  }
  std::vector<cfloat> out(image.data().begin(), image.data().end());
  std::size_t const n = d.slices * d.plane();
  for (std::size_t e = 0; e < d.echoes; ++e) {
    double const te_s = image.te_ms()[e] * 1e-3;
    for (std::size_t i = 0; i < n; ++i) {
      double const f = b0.freq_hz[i];
      if (f == 0.0) {
        continue;
      }
      cdouble const rot = std::polar(1.0, -2.0 * std::numbers::pi * f * te_s);
      out[e * n + i] = cfloat(cdouble(out[e * n + i]) * rot);
    }
  }
  return image.with_data(Space::Image, std::move(out));
}

} // namespace t2motion::sim
