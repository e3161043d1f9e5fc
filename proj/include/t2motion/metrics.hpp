#pragma once

#include "t2motion/labels.hpp"
#include "t2motion/volume.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace t2motion::metrics {

/// Confusion totals with 1 = motion-free as the "clean" class.
struct ClassCounts {
  std::size_t clean_as_clean = 0;   // target 1, pred 1
  std::size_t motion_as_motion = 0; // target 0, pred 0
  std::size_t motion_missed = 0;    // target 0, pred 1 (non-detected)
  std::size_t clean_flagged = 0;    // target 1, pred 0 (wrongly detected)

  std::size_t total() const { return clean_as_clean + motion_as_motion + motion_missed + clean_flagged; }
  ClassCounts &operator+=(ClassCounts const &o);
};

struct ClassReport {
  double accuracy = 0.0;
  std::optional<double> nd_rate; // absent when no target line has motion
  std::optional<double> wd_rate; // absent when no target line is clean
  ClassCounts counts;
};

ClassCounts count_classes(labels::LineLabelMask const &pred, labels::LineLabelMask const &target);
ClassReport report_from_counts(ClassCounts const &counts);
ClassReport classification_report(labels::LineLabelMask const &pred, labels::LineLabelMask const &target);

/// 10·log10(range²/MSE), range = max(ref). Returns +inf for identical inputs.
double psnr(std::span<double const> x, std::span<double const> ref);

struct SsimOptions {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean SSIM over all fully contained Gaussian windows of a rows x cols image.
double ssim(std::span<double const> x, std::span<double const> ref, std::size_t rows, std::size_t cols,
            SsimOptions const &opt = {});

/// Magnitude metrics over a whole volume: PSNR pooled over all voxels, SSIM
/// averaged over (echo, slice) planes. Range = max |ref| over the volume.
struct ImageQuality {
  double psnr_db = 0.0;
  double ssim = 0.0;
};
ImageQuality image_quality(MultiEchoVolume const &x, MultiEchoVolume const &ref);

/// Per-echo normalised RMSE of magnitudes: ‖|x_e| − |ref_e|‖ / ‖|ref_e|‖.
std::vector<double> echo_nrmse(MultiEchoVolume const &x, MultiEchoVolume const &ref);

} // namespace t2motion::metrics
