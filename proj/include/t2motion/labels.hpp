#pragma once

#include "t2motion/volume.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace t2motion::labels {

/// Binary per-line labels for each slice: 1 = motion-free, 0 = motion-corrupted.
class LineLabelMask {
public:
  LineLabelMask() = default;
  LineLabelMask(std::size_t slices, std::size_t lines, std::uint8_t fill = 1);
  LineLabelMask(std::size_t slices, std::size_t lines, std::vector<std::uint8_t> values);

  std::size_t slices() const { return slices_; }
  std::size_t lines() const { return lines_; }
  std::size_t size() const { return values_.size(); }

  std::uint8_t operator()(std::size_t slice, std::size_t line) const {
    return values_[slice * lines_ + line];
  }
  void set(std::size_t slice, std::size_t line, std::uint8_t value);

  std::span<std::uint8_t const> values() const { return values_; }
  std::span<std::uint8_t const> row(std::size_t slice) const;

  bool all_clean() const;
  bool operator==(LineLabelMask const &) const = default;

private:
  std::size_t slices_ = 0;
  std::size_t lines_ = 0;
  std::vector<std::uint8_t> values_;
};

enum class NormAxes {
  EchoReadout, ///< unit energy per PE line, summing over echo and readout
  EchoPe,      ///< literal index reading: per readout column, summing over echo and PE
};

struct NormalizedLines {
  MultiEchoVolume kspace;
  /// Zero-energy groups left at zero. Indexed [slice * lines + line] for
  /// EchoReadout, [slice * readout + column] for EchoPe.
  std::vector<std::uint8_t> zero_flags;
  std::size_t zero_count = 0;
};

NormalizedLines normalize_lines(MultiEchoVolume const &kspace, NormAxes axes = NormAxes::EchoReadout);

/// 1 where displacement <= d_min, else 0. `displacement_mm` has one entry per
/// (slice, line), slice-major.
LineLabelMask make_target_labels(std::span<double const> displacement_mm, std::size_t slices,
                                 std::size_t lines, double d_min_mm);

/// Per-echo displacement traces [echo][slice * lines + line]: threshold each
/// echo, average the masks over echoes and round (ties count as clean).
LineLabelMask make_target_labels(std::vector<std::vector<double>> const &per_echo_displacement_mm,
                                 std::size_t slices, std::size_t lines, double d_min_mm);

void write_labels_csv(LineLabelMask const &mask, std::ostream &out, std::optional<double> d_min_mm);
void write_labels(LineLabelMask const &mask, std::filesystem::path const &path,
                  std::optional<double> d_min_mm = std::nullopt);
LineLabelMask read_labels_csv(std::istream &in);
LineLabelMask read_labels(std::filesystem::path const &path);

/// Same layout as the label file with real-valued entries (one row per slice).
void write_matrix_csv(std::span<double const> values, std::size_t rows, std::size_t cols,
                      std::filesystem::path const &path, char const *comment = nullptr);

} // namespace t2motion::labels
