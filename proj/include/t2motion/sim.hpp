#pragma once

#include "t2motion/labels.hpp"
#include "t2motion/motion.hpp"
#include "t2motion/volume.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace t2motion::sim {

/*
 * Timing of a multi-slice 2D acquisition: one PE line per TR for every slice,
 * slices staggered inside the TR. acquisition_time(p, s) is relative to scan
 * start.
 */
class AcquisitionScheme {
public:
  AcquisitionScheme(std::size_t n_pe, std::size_t n_slices, double tr_s);
  AcquisitionScheme(std::size_t n_pe, std::size_t n_slices, double tr_s, std::vector<std::size_t> pe_order,
                    std::vector<double> slice_offsets_s);

  /// Even slices first, then odd ones, evenly spaced over the TR.
  static std::vector<double> interleaved_offsets(std::size_t n_slices, double tr_s);

  std::size_t n_pe() const { return n_pe_; }
  std::size_t n_slices() const { return n_slices_; }
  double tr_s() const { return tr_s_; }
  std::vector<std::size_t> const &pe_order() const { return pe_order_; }
  std::vector<double> const &slice_offsets_s() const { return slice_offsets_s_; }
  double echo_train_span_s() const { return echo_train_span_s_; }

  double acquisition_time(std::size_t line, std::size_t slice) const;
  double scan_time() const { return static_cast<double>(n_pe_) * tr_s_; }

private:
  std::size_t n_pe_;
  std::size_t n_slices_;
  double tr_s_;
  std::vector<std::size_t> pe_order_;
  std::vector<std::size_t> position_of_line_;
  std::vector<double> slice_offsets_s_;
  double echo_train_span_s_ = 0.060;
};

/// Off-resonance frequency per voxel in Hz, layout [slice, PE, readout].
struct B0Map {
  Dims dims{1, 1, 1, 1}; // echoes ignored
  VoxelSize voxel_size_mm{2.0, 2.0, 3.0};
  std::vector<double> freq_hz = std::vector<double>(1, 0.0);

  static B0Map zeros(MultiEchoVolume const &like);
  double operator()(std::size_t slice, std::size_t line, std::size_t col) const {
    return freq_hz[(slice * dims.lines + line) * dims.readout + col];
  }
};

/// The random linear field change added by perturb_b0 for one seed.
struct B0Ramp {
  Eigen::Vector3d gradient_hz_per_mm = Eigen::Vector3d::Zero(); // (x=readout, y=PE, z=slice)
  double peak_hz = 0.0;

  double at(Dims const &dims, VoxelSize const &voxel_size_mm, double slice, double line, double col) const;
};

B0Ramp draw_b0_ramp(Dims const &dims, VoxelSize const &voxel_size_mm, std::uint64_t state_seed,
                    double max_dev_hz);

/// base + linear ramp through the volume centre whose peak |deviation| is uniform in (0, max_dev_hz].
B0Map perturb_b0(B0Map const &base, std::uint64_t state_seed, double max_dev_hz);

/// Multiply echo e by exp(-2*pi*i * f * TE_e), TE in seconds.
MultiEchoVolume apply_phase(MultiEchoVolume const &image, B0Map const &b0);

struct SimConfig {
  double d_min_mm = 0.5;
  double b0_threshold_mm = 0.5;
  double b0_max_dev_hz = 5.0;
  double sphere_radius_mm = motion::kHeadRadiusMm;
  bool enable_b0 = true;
  /// Reject curves whose median state is not the identity instead of warning.
  bool require_recentered = false;
  std::uint64_t seed = 0;
};

struct SimResult {
  MultiEchoVolume kspace;
  labels::LineLabelMask labels;
  std::vector<double> displacement_mm; // [slice * lines + line]
  std::vector<double> acquisition_time_s;
  std::vector<std::size_t> curve_index; // curve sample driving each line
  std::vector<std::string> warnings;
};

/// Stable per-segment seed for B0 perturbations.
std::uint64_t state_seed(std::uint64_t base_seed, std::size_t segment);

SimResult simulate(MultiEchoVolume const &image, motion::MotionCurve const &curve,
                   AcquisitionScheme const &scheme, B0Map const &base_b0, SimConfig const &cfg);

// --- dataset generation -----------------------------------------------------

enum class Split { Train, Val, Test };
std::string to_string(Split split);
Split split_from_string(std::string const &name);

struct PhantomEntry {
  std::string id;
  MultiEchoVolume image;
  Split split = Split::Train;
};

struct DatasetSpec {
  std::size_t curves_per_phantom = 6;
  double max_background_fraction = 0.30;
  /// When set, training phantoms draw augmented curves from this model.
  std::optional<motion::CurveModel> curve_model;
  labels::NormAxes norm_axes = labels::NormAxes::EchoReadout;
};

struct SampleRecord {
  std::string id;
  std::string phantom_id;
  std::string curve_id;
  std::size_t slice = 0;
  Split split = Split::Train;
  std::string kspace_file;
  std::string labels_file;
  std::string displacement_file;
  double d_min_mm = 0.0;
  std::uint64_t seed = 0;
};

struct DatasetIndex {
  std::vector<SampleRecord> samples;
  std::vector<std::string> excluded; // "phantom:slice" entries dropped by the background rule
};

/// Deterministic phantom-level split: first ⌊f_train·n⌉ train, next val, rest test.
std::vector<Split> assign_splits(std::size_t n_phantoms, double train_fraction, double val_fraction);

/*
 * Simulates every (phantom, curve) pair and writes one sample per kept slice:
 * line-normalised k-space, target labels and displacement trace, plus
 * out_dir/index.json. `curves` supplies the motion for validation/test
 * phantoms (and training phantoms when no curve model is given), assigned
 * round-robin.
 */
DatasetIndex generate_dataset(std::vector<PhantomEntry> const &phantoms,
                              std::vector<motion::MotionCurve> const &curves, SimConfig const &cfg,
                              AcquisitionScheme const &scheme, DatasetSpec const &spec,
                              std::filesystem::path const &out_dir);

DatasetIndex read_dataset_index(std::filesystem::path const &index_json);

} // namespace t2motion::sim
