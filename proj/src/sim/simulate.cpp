#include "t2motion/sim.hpp"

#include "t2motion/fft.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace t2motion::sim {

std::uint64_t state_seed(std::uint64_t base_seed, std::size_t segment) {
  std::uint64_t z = base_seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(segment) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

void check_inputs(MultiEchoVolume const &image, motion::MotionCurve const &curve,
                  AcquisitionScheme const &scheme, B0Map const &base_b0, SimConfig const &cfg) {
  require_space(image, Space::Image, "simulate");
  auto const &d = image.dims();
  if (scheme.n_pe() != d.lines || scheme.n_slices() != d.slices) {
    throw std::invalid_argument("simulate: acquisition scheme does not match volume lines/slices");
  }
  if (base_b0.dims.slices != d.slices || base_b0.dims.lines != d.lines || base_b0.dims.readout != d.readout ||
      base_b0.freq_hz.size() != d.slices * d.plane()) {
    throw std::invalid_argument("simulate: base B0 map shape does not match the volume");
  }
  if (!(cfg.d_min_mm > 0.0)) {
    throw std::invalid_argument("simulate: d_min must be positive");
  }
  if (scheme.scan_time() > curve.duration() + 1e-9) {
    std::ostringstream msg;
    msg << "simulate: motion curve (" << curve.duration() << " s) shorter than scan (" << scheme.scan_time()
        << " s)";
    throw std::invalid_argument(msg.str());
  }
}

// Contiguous runs of curve samples above the B0 threshold share one field
// perturbation; -1 marks samples below it.
std::vector<long> b0_segments(std::vector<double> const &displacement, double threshold) {
  std::vector<long> segment(displacement.size(), -1);
  long next = -1;
  bool inside = false;
  for (std::size_t i = 0; i < displacement.size(); ++i) {
    bool const above = displacement[i] > threshold;
    if (above && !inside) {
      ++next;
    }
    inside = above;
    if (above) {
      segment[i] = next;
    }
  }
  return segment;
}

// Row p of the unitary centred 2D DFT of a lines x readout plane: a direct
// DFT along the phase-encode axis followed by a 1D FFT along readout.
class RowTransform {
public:
  RowTransform(std::size_t lines, std::size_t readout) : lines_(lines), readout_(readout), fft_(1, readout), row_(readout) {
    std::size_t const c = lines / 2;
    twiddle_.resize(lines * lines);
    for (std::size_t k = 0; k < lines; ++k) {
      for (std::size_t n = 0; n < lines; ++n) {
        double const kk = static_cast<double>(k) - static_cast<double>(c);
        double const nn = static_cast<double>(n) - static_cast<double>(c);
        double const angle = -2.0 * std::numbers::pi * std::fmod(kk * nn, static_cast<double>(lines)) /
                             static_cast<double>(lines);
        twiddle_[k * lines + n] = std::polar(1.0 / std::sqrt(static_cast<double>(lines)), angle);
      }
    }
  }

  /// `line_phase`/`col_phase` (empty or of size lines/readout) multiply the
  /// plane separably before the transform.
  std::span<cdouble const> operator()(std::span<cdouble const> plane, std::size_t p,
                                      std::span<cdouble const> line_phase = {},
                                      std::span<cdouble const> col_phase = {}) {
    std::fill(row_.begin(), row_.end(), cdouble{});
    for (std::size_t n = 0; n < lines_; ++n) {
      cdouble const w = line_phase.empty() ? twiddle_[p * lines_ + n] : twiddle_[p * lines_ + n] * line_phase[n];
      cdouble const *src = plane.data() + n * readout_;
      for (std::size_t r = 0; r < readout_; ++r) {
        row_[r] += w * src[r];
      }
    }
    for (std::size_t r = 0; r < col_phase.size(); ++r) {
      row_[r] *= col_phase[r];
    }
    fft_.forward(row_);
    return row_;
  }

private:
  std::size_t lines_;
  std::size_t readout_;
  Fft2 fft_;
  std::vector<cdouble> row_;
  std::vector<cdouble> twiddle_;
};

// exp(-2*pi*i*f*TE) of a linear ramp factorises into per-line and per-column
// terms, laid out [echo][line] and [echo][col].
struct RampPhase {
  std::vector<cdouble> line;
  std::vector<cdouble> col;
};

RampPhase ramp_phase(B0Ramp const &ramp, Dims const &d, VoxelSize const &vs, std::size_t slice,
                     std::vector<double> const &te_s) {
  RampPhase out{std::vector<cdouble>(te_s.size() * d.lines), std::vector<cdouble>(te_s.size() * d.readout)};
  double const z = (static_cast<double>(slice) - 0.5 * (static_cast<double>(d.slices) - 1.0)) * vs[2];
  for (std::size_t e = 0; e < te_s.size(); ++e) {
    double const w = -2.0 * std::numbers::pi * te_s[e];
    cdouble const cz = std::polar(1.0, w * ramp.gradient_hz_per_mm.z() * z);
    for (std::size_t r = 0; r < d.readout; ++r) {
      double const x = (static_cast<double>(r) - 0.5 * (static_cast<double>(d.readout) - 1.0)) * vs[1];
      out.col[e * d.readout + r] = std::polar(1.0, w * ramp.gradient_hz_per_mm.x() * x);
    }
    for (std::size_t p = 0; p < d.lines; ++p) {
      double const y = (static_cast<double>(p) - 0.5 * (static_cast<double>(d.lines) - 1.0)) * vs[0];
      out.line[e * d.lines + p] = cz * std::polar(1.0, w * ramp.gradient_hz_per_mm.y() * y);
    }
  }
  return out;
}

void apply_base_phase(std::vector<cdouble> &state, B0Map const &base, std::size_t slice,
                      std::vector<double> const &te_s) {
  auto const &d = base.dims;
  for (std::size_t e = 0; e < te_s.size(); ++e) {
    double const w = -2.0 * std::numbers::pi * te_s[e];
    for (std::size_t p = 0; p < d.lines; ++p) {
      for (std::size_t r = 0; r < d.readout; ++r) {
        state[e * d.plane() + p * d.readout + r] *= std::polar(1.0, w * base(slice, p, r));
      }
    }
  }
}

} // namespace

SimResult simulate(MultiEchoVolume const &image, motion::MotionCurve const &curve,
                   AcquisitionScheme const &scheme, B0Map const &base_b0, SimConfig const &cfg) {
  check_inputs(image, curve, scheme, base_b0, cfg);
  auto const &d = image.dims();

  SimResult result{fft2_per_slice(image), labels::LineLabelMask(d.slices, d.lines, 1), {}, {}, {}, {}};

  // Recentering maps the median state to the identity; the displacement
  // ranking can shift afterwards, so only require an identity sample.
  double off_centre = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < curve.size(); ++i) {
    off_centre = std::min(off_centre, parameter_distance(curve[i], motion::RigidTransform::identity()));
  }
  if (off_centre > 1e-6) {
    std::ostringstream msg;
    msg << "motion curve is not recentered: no sample within " << off_centre << " of the reference pose";
    if (cfg.require_recentered) {
      throw std::invalid_argument("simulate: " + msg.str());
    }
    result.warnings.push_back(msg.str());
  }

  auto const sample_disp = curve.displacements(cfg.sphere_radius_mm);
  auto const segments = b0_segments(sample_disp, cfg.b0_threshold_mm);
  std::map<long, B0Ramp> ramps;

  std::size_t const n_lines = d.slices * d.lines;
  result.displacement_mm.resize(n_lines);
  result.acquisition_time_s.resize(n_lines);
  result.curve_index.resize(n_lines);

  motion::SliceResampler const resampler(image);
  RowTransform row_transform(d.lines, d.readout);
  std::vector<cdouble> state; // E image-space planes of the current (sample, slice) state
  std::optional<RampPhase> phase;
  long cached_sample = -1;
  long cached_slice = -1;
  std::vector<double> te_s(d.echoes);
  for (std::size_t e = 0; e < d.echoes; ++e) {
    te_s[e] = image.te_ms()[e] * 1e-3;
  }
  bool const base_nonzero =
      std::any_of(base_b0.freq_hz.begin(), base_b0.freq_hz.end(), [](double f) { return f != 0.0; });

  for (std::size_t s = 0; s < d.slices; ++s) {
    for (std::size_t p = 0; p < d.lines; ++p) {
      std::size_t const li = s * d.lines + p;
      double const t = curve.start() + scheme.acquisition_time(p, s);
      std::size_t const k = curve.nearest_index(t);
      result.acquisition_time_s[li] = t - curve.start();
      result.curve_index[li] = k;
      result.displacement_mm[li] = sample_disp[k];
      if (!(sample_disp[k] > cfg.d_min_mm)) {
        continue;
      }
      result.labels.set(s, p, 0);

      if (static_cast<long>(k) != cached_sample || static_cast<long>(s) != cached_slice) {
        resampler.resample(curve[k], s, state);
        phase.reset();
        if (cfg.enable_b0 && segments[k] >= 0) {
          auto it = ramps.find(segments[k]);
          if (it == ramps.end()) {
            it = ramps
                     .emplace(segments[k],
                              draw_b0_ramp(base_b0.dims, base_b0.voxel_size_mm,
                                           state_seed(cfg.seed, static_cast<std::size_t>(segments[k])),
                                           cfg.b0_max_dev_hz))
                     .first;
          }
          phase = ramp_phase(it->second, d, base_b0.voxel_size_mm, s, te_s);
          if (base_nonzero) {
            apply_base_phase(state, base_b0, s, te_s);
          }
        }
        cached_sample = static_cast<long>(k);
        cached_slice = static_cast<long>(s);
      }
      for (std::size_t e = 0; e < d.echoes; ++e) {
        auto const plane = std::span<cdouble const>(state).subspan(e * d.plane(), d.plane());
        auto const row = phase ? row_transform(plane, p,
                                               std::span<cdouble const>(phase->line).subspan(e * d.lines, d.lines),
                                               std::span<cdouble const>(phase->col).subspan(e * d.readout, d.readout))
                               : row_transform(plane, p);
        for (std::size_t r = 0; r < d.readout; ++r) {
          result.kspace(e, s, p, r) = cfloat(row[r]);
        }
      }
    }
  }
  return result;
}

} // namespace t2motion::sim
