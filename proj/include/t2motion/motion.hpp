#pragma once

#include "t2motion/volume.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace t2motion::motion {

/*
 * Six-parameter rigid-body transform.
 *
 * Axes: x = readout, y = phase encode, z = slice. A point p (in mm, relative
 * to the rotation pivot) maps to R*p + t with R = Rz * Ry * Rx. The pivot is
 * the volume centre when applied to images and the sphere centre for the
 * displacement metric.
 */
struct RigidTransform {
  Eigen::Vector3d translation_mm = Eigen::Vector3d::Zero();
  Eigen::Vector3d rotation_deg = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform from_matrix(Eigen::Matrix3d const &rotation, Eigen::Vector3d const &translation);

  Eigen::Matrix3d rotation_matrix() const;
  Eigen::Vector3d apply(Eigen::Vector3d const &p) const;

  bool is_identity() const;
  bool is_finite() const;
  bool operator==(RigidTransform const &) const = default;
};

/// outer ∘ inner: apply `inner` first, then `outer`.
RigidTransform compose(RigidTransform const &outer, RigidTransform const &inner);
RigidTransform inverse(RigidTransform const &t);

/// Largest absolute difference between the six parameters of two transforms.
double parameter_distance(RigidTransform const &a, RigidTransform const &b);

/// Resample a complex image under `t` about the volume centre (trilinear, zero fill).
MultiEchoVolume apply_rigid(MultiEchoVolume const &image, RigidTransform const &t);

/// Slice `slice` of apply_rigid(image, t), for all echoes, written PE-major into
/// `out` (size echoes * lines * readout). Avoids resampling the whole volume
/// when only one slice is consumed.
void apply_rigid_slice(MultiEchoVolume const &image, RigidTransform const &t, std::size_t slice,
                       std::vector<cdouble> &out);

/// Holds an echo-interleaved copy of an image so that repeated single-slice
/// resampling touches contiguous memory. Same output as apply_rigid_slice.
class SliceResampler {
public:
  explicit SliceResampler(MultiEchoVolume const &image);

  void resample(RigidTransform const &t, std::size_t slice, std::vector<cdouble> &out) const;
  Dims const &dims() const { return dims_; }

private:
  Dims dims_;
  VoxelSize voxel_size_mm_;
  std::vector<cdouble> data_; // [slice][line][readout][echo]
};

// --- sphere displacement ---------------------------------------------------

inline constexpr double kHeadRadiusMm = 64.0;
inline constexpr std::size_t kSpherePoints = 4096;

/// Deterministic low-discrepancy points uniform in the unit ball. seed == 0 is
/// the plain Halton(2,3,5) set; other seeds apply a Cranley-Patterson shift.
std::vector<Eigen::Vector3d> unit_ball_points(std::size_t count, std::uint64_t seed = 0);

/// Mean displacement ‖T·p − p‖ over points in a ball of radius `radius_mm`.
double sphere_displacement(RigidTransform const &t, double radius_mm = kHeadRadiusMm);
double sphere_displacement(RigidTransform const &t, double radius_mm,
                           std::vector<Eigen::Vector3d> const &unit_points);

// --- motion curves ----------------------------------------------------------

class MotionCurve {
public:
  MotionCurve(std::vector<double> t_s, std::vector<RigidTransform> params);

  std::size_t size() const { return t_s_.size(); }
  std::vector<double> const &times() const { return t_s_; }
  std::vector<RigidTransform> const &params() const { return params_; }
  RigidTransform const &operator[](std::size_t i) const { return params_[i]; }

  double start() const { return t_s_.front(); }
  double duration() const { return t_s_.back() - t_s_.front(); }

  /// Index of the sample nearest to absolute time t (ties resolve to the earlier one).
  std::size_t nearest_index(double t) const;
  RigidTransform const &at(double t) const { return params_[nearest_index(t)]; }

  /// Mean sphere displacement over all samples.
  double mean_displacement(double radius_mm = kHeadRadiusMm) const;
  std::vector<double> displacements(double radius_mm = kHeadRadiusMm) const;

private:
  std::vector<double> t_s_;
  std::vector<RigidTransform> params_;
};

/// Compose every sample with the inverse of the (lower) median-displacement sample.
MotionCurve recenter_to_median(MotionCurve const &curve, double radius_mm = kHeadRadiusMm);

/// Index of the lower-median sample by sphere displacement.
std::size_t median_state_index(MotionCurve const &curve, double radius_mm = kHeadRadiusMm);

/// Nearest-sample resampling onto an explicit time grid.
MotionCurve resample_nearest(MotionCurve const &curve, std::vector<double> const &grid);

void write_curve_csv(MotionCurve const &curve, std::ostream &out);
void write_curve(MotionCurve const &curve, std::filesystem::path const &path);
MotionCurve read_curve_csv(std::istream &in);
MotionCurve read_curve(std::filesystem::path const &path);

// --- PCA curve model --------------------------------------------------------

/*
 * Linear shape model of motion curves. Each curve is flattened sample-major to
 * a 6*n_t vector (tx, ty, tz, rx, ry, rz per sample). `components` holds every
 * non-degenerate mode of the training set (plus zero-variance fill when the
 * data has fewer modes than `n_components`); only the first `n_components`
 * modes are used when sampling.
 */
struct CurveModel {
  std::vector<double> t_s;
  Eigen::VectorXd mean;
  Eigen::MatrixXd components; // one column per mode, orthonormal
  Eigen::VectorXd eigenvalues; // sample variance per mode, non-increasing
  std::size_t n_components = 0;
  std::size_t n_training = 0;

  MotionCurve mean_curve() const;
};

std::size_t active_components(std::size_t n_curves);

Eigen::VectorXd flatten(MotionCurve const &curve);
MotionCurve unflatten(std::vector<double> const &t_s, Eigen::VectorXd const &flat);

/// Fit on curves resampled (nearest sample) to the time grid of the first curve.
CurveModel fit_curve_model(std::vector<MotionCurve> const &curves);

/// Mean plus sum of alpha_i * pc_i, alpha_i ~ N(0, eigenvalue_i) truncated at ±3σ.
MotionCurve sample_augmented_curve(CurveModel const &model, std::uint64_t seed);

/// The coefficients sample_augmented_curve draws for `seed`.
std::vector<double> sample_mode_weights(CurveModel const &model, std::uint64_t seed);

// --- synthetic recorded-style curves -----------------------------------------

struct SyntheticCurveSpec {
  std::size_t samples = 236;
  double dt_s = 1.0;
  /// Mean sphere displacement after recentering. <= 0 leaves the raw amplitude.
  double target_mean_mm = 0.89;
  double radius_mm = kHeadRadiusMm;
};

/// Slow drift plus a few abrupt shifts and small jitter, recentered to its
/// median state and scaled to the requested mean displacement.
MotionCurve make_synthetic_curve(SyntheticCurveSpec const &spec, std::uint64_t seed);

} // namespace t2motion::motion
