#pragma once

#include "t2motion/labels.hpp"
#include "t2motion/volume.hpp"

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace t2motion {
class Fft2;
}

namespace t2motion::recon {

/// Row-major complex plane; rows run along PE, columns along readout.
struct Image2D {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<cdouble> data;

  Image2D() = default;
  Image2D(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}
  Image2D(std::size_t r, std::size_t c, std::vector<cdouble> d);

  cdouble &operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  cdouble operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

/// Forward differences along PE (`d_line`) and readout (`d_col`); the last
/// row/column difference is zero (Neumann boundary).
struct Gradient {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<cdouble> d_line;
  std::vector<cdouble> d_col;
};

Gradient finite_diff(Image2D const &x);
Image2D finite_diff_adjoint(Gradient const &g);

/// Sum of complex moduli of all finite differences.
double tv_norm(Image2D const &x);

/// Dual variable of the TV proximal step; pass the same instance across calls to warm-start.
struct TvDual {
  Gradient p;
};

/*
 * Approximate argmin_u ½‖u − z‖² + θ‖Φu‖₁ by accelerated projected gradient
 * on the dual (|p_i| ≤ 1 per difference), `inner_iter` steps. θ == 0 returns z.
 */
Image2D tv_prox(Image2D const &z, double theta, std::size_t inner_iter, TvDual *warm = nullptr);

double tv_prox_objective(Image2D const &u, Image2D const &z, double theta);

struct ReconConfig {
  double lambda = 2.0;
  std::size_t max_iter = 200;
  double step = 1.0;
  std::size_t tv_inner_iter = 20;
  double tol = 1e-5;
  double motion_weight = 0.25;
  double clean_weight = 1.0;
  /// Each 2D problem is scaled so max|Aᴴy| equals this before solving, which
  /// fixes what `lambda` means. At 1.0 the default lambda flattens the image.
  double scale_target = 300.0;

  void validate() const;
};

class ReconDiverged : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Per-PE-line data-consistency weights for one slice.
std::vector<double> dc_weights(std::span<std::uint8_t const> labels, ReconConfig const &cfg);

struct PlaneResult {
  Image2D image;
  std::vector<double> objective; // [0] is the initial iterate
  std::size_t iterations = 0;
  std::size_t best_iteration = 0;
  double scale = 1.0; // multiplier applied to the data before solving
};

/// One (slice, echo) problem: min ½‖W(Ax − y)‖² + λ‖Φx‖₁ with A the unitary centred DFT.
PlaneResult reconstruct_plane(Image2D const &kspace, std::span<double const> line_weights, ReconConfig const &cfg);

struct PlaneTrace {
  std::size_t slice = 0;
  std::size_t echo = 0;
  std::vector<double> objective;
  std::size_t iterations = 0;
  std::size_t best_iteration = 0;
  double scale = 1.0;
};

struct ReconResult {
  MultiEchoVolume image;
  std::vector<PlaneTrace> traces;
};

ReconResult weighted_tv_recon(MultiEchoVolume const &kspace, labels::LineLabelMask const &labels,
                              ReconConfig const &cfg);

/// Power-iteration estimate of ‖A‖ for the unitary rows x cols DFT.
double forward_operator_norm(std::size_t rows, std::size_t cols, std::size_t iterations, std::uint64_t seed);

} // namespace t2motion::recon
