#include "t2motion/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace t2motion::phantom {

namespace {

// Centre and half-axes in normalised coordinates: x = readout, y = PE,
// z = slice, each spanning [-1, 1] across the field of view.
struct Ellipsoid {
  double cx, cy, cz;
  double ax, ay, az;
  double angle_rad; // in-plane rotation
  char const *tissue;
};

// Painter's order: later entries overwrite earlier ones.
Ellipsoid const kGeometry[] = {
    {0.00, 0.00, 0.00, 1.04, 1.05, 1.45, 0.0, "scalp"},
    {0.00, 0.00, 0.00, 0.93, 0.96, 1.35, 0.0, "gm"},
    {0.00, 0.02, 0.00, 0.80, 0.85, 1.22, 0.0, "wm"},
    {-0.20, 0.05, 0.05, 0.09, 0.30, 0.45, 0.30, "csf"},
    {0.20, 0.05, 0.05, 0.09, 0.30, 0.45, -0.30, "csf"},
    {0.00, 0.55, 0.00, 0.10, 0.05, 0.60, 0.0, "csf"},
    {-0.45, -0.30, 0.10, 0.14, 0.20, 0.40, 0.5, "gm"},
    {0.45, -0.30, -0.10, 0.14, 0.20, 0.40, -0.5, "gm"},
    {0.00, -0.55, 0.00, 0.25, 0.12, 0.50, 0.0, "gm"},
    {-0.30, 0.50, -0.20, 0.06, 0.06, 0.30, 0.0, "csf"},
    {0.32, 0.48, 0.25, 0.07, 0.05, 0.25, 0.0, "csf"},
};

bool inside(Ellipsoid const &e, double x, double y, double z) {
  double const dx = x - e.cx;
  double const dy = y - e.cy;
  double const c = std::cos(e.angle_rad);
  double const s = std::sin(e.angle_rad);
  double const u = (c * dx + s * dy) / e.ax;
  double const v = (-s * dx + c * dy) / e.ay;
  double const w = (z - e.cz) / e.az;
  return u * u + v * v + w * w <= 1.0;
}

double normalised(std::size_t i, std::size_t n) {
  if (n <= 1) {
    return 0.0;
  }
  return 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) - 1.0;
}

} // namespace

std::vector<TissueSpec> default_tissues() {
  return {
      {"scalp", 0.6, 30.0, 0.0},
      {"gm", 1.0, 60.0, 0.0},
      {"wm", 0.8, 50.0, 0.0},
      {"csf", 1.2, 200.0, 0.0},
  };
}

std::vector<double> PhantomSpec::default_echo_times(std::size_t echoes) {
  std::vector<double> te(echoes);
  for (std::size_t e = 0; e < echoes; ++e) {
    te[e] = 5.0 * static_cast<double>(e + 1);
  }
  return te;
}

MultiEchoVolume make_phantom(Dims dims, std::vector<double> const &te_ms,
                             std::vector<TissueSpec> const &tissues, std::uint64_t seed,
                             VoxelSize voxel_size_mm) {
  if (tissues.empty()) {
    throw std::invalid_argument("make_phantom: empty tissue list");
  }
  for (auto const &t : tissues) {
    if (!(t.t2star_ms > 0.0) || !(t.s0 >= 0.0)) {
      throw std::invalid_argument("make_phantom: tissue '" + t.label + "' needs T2* > 0 and s0 >= 0");
    }
  }
  MultiEchoVolume vol(dims, voxel_size_mm, te_ms, Space::Image);

  // Smooth quadratic background phase, radians.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coeff(-0.5, 0.5);
  double poly[9];
  for (double &c : poly) {
    c = coeff(rng);
  }
  // Inner structures move and resize slightly with the seed; the head outline stays fixed.
  std::vector<Ellipsoid> geometry(std::begin(kGeometry), std::end(kGeometry));
  std::uniform_real_distribution<double> jitter(-0.03, 0.03);
  for (std::size_t i = 3; i < geometry.size(); ++i) {
    auto &e = geometry[i];
    e.cx += jitter(rng);
    e.cy += jitter(rng);
    e.cz += jitter(rng);
    e.ax *= 1.0 + jitter(rng);
    e.ay *= 1.0 + jitter(rng);
    e.az *= 1.0 + jitter(rng);
  }

  for (std::size_t s = 0; s < dims.slices; ++s) {
    double const z = normalised(s, dims.slices);
    for (std::size_t p = 0; p < dims.lines; ++p) {
      double const y = normalised(p, dims.lines);
      for (std::size_t r = 0; r < dims.readout; ++r) {
        double const x = normalised(r, dims.readout);
        TissueSpec const *tissue = nullptr;
        for (auto const &e : geometry) {
          if (!inside(e, x, y, z)) {
            continue;
          }
          auto const it = std::find_if(tissues.begin(), tissues.end(),
                                       [&](TissueSpec const &t) { return t.label == e.tissue; });
          if (it != tissues.end()) {
            tissue = &*it;
          }
        }
        if (tissue == nullptr) {
          continue;
        }
        double const background = poly[0] * x + poly[1] * y + poly[2] * z + poly[3] * x * x +
                                  poly[4] * y * y + poly[5] * z * z + poly[6] * x * y +
                                  poly[7] * y * z + poly[8] * x * z;
        cdouble const phase = std::polar(1.0, tissue->phase0_rad + background);
        for (std::size_t e = 0; e < dims.echoes; ++e) {
          double const mag = tissue->s0 * std::exp(-te_ms[e] / tissue->t2star_ms);
          vol(e, s, p, r) = cfloat(mag * phase);
        }
      }
    }
  }
  return vol;
}

MultiEchoVolume make_phantom(PhantomSpec const &spec, std::uint64_t seed) {
  return make_phantom(spec.dims, spec.te_ms, spec.tissues, seed, spec.voxel_size_mm);
}

double background_fraction(MultiEchoVolume const &vol, std::size_t slice) {
  require_space(vol, Space::Image, "background_fraction");
  if (slice >= vol.dims().slices) {
    throw std::out_of_range("background_fraction: slice index out of range");
  }
  auto const plane = vol.plane(0, slice);
  double peak = 0.0;
  for (cfloat v : plane) {
    peak = std::max(peak, static_cast<double>(std::abs(v)));
  }
  double const threshold = kBackgroundLevel * peak;
  std::size_t below = 0;
  for (cfloat v : plane) {
    // An all-zero slice counts entirely as background.
    if (static_cast<double>(std::abs(v)) < threshold || peak == 0.0) {
      ++below;
    }
  }
  return static_cast<double>(below) / static_cast<double>(plane.size());
}

} // namespace t2motion::phantom
