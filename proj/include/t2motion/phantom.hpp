#pragma once

#include "t2motion/volume.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace t2motion::phantom {

struct TissueSpec {
  std::string label;
  double s0 = 1.0;
  double t2star_ms = 50.0;
  double phase0_rad = 0.0;
};

/// Literature-typical stand-ins for scalp, gray matter, white matter and CSF.
std::vector<TissueSpec> default_tissues();

struct PhantomSpec {
  Dims dims{12, 30, 92, 112};
  VoxelSize voxel_size_mm{2.0, 2.0, 3.0};
  std::vector<double> te_ms = default_echo_times(12);
  std::vector<TissueSpec> tissues = default_tissues();

  /// TE1 = 5 ms, spacing 5 ms.
  static std::vector<double> default_echo_times(std::size_t echoes);
};

/*
 * Ellipsoid-composed head phantom in image space.
 *
 * Each voxel takes the tissue of the last ellipsoid containing its centre and
 * carries s0 * exp(-TE/T2*) * exp(i*(phase0 + background)), where the
 * background phase is a smooth random quadratic fixed by `seed`. Ellipsoids
 * whose tissue label is missing from `tissues` are skipped.
 */
MultiEchoVolume make_phantom(Dims dims, std::vector<double> const &te_ms,
                             std::vector<TissueSpec> const &tissues, std::uint64_t seed,
                             VoxelSize voxel_size_mm = {2.0, 2.0, 3.0});

MultiEchoVolume make_phantom(PhantomSpec const &spec, std::uint64_t seed);

inline constexpr double kBackgroundLevel = 0.05;
inline constexpr double kMaxBackgroundFraction = 0.30;

/// Fraction of first-echo voxels in `slice` with magnitude below 5% of the slice maximum.
double background_fraction(MultiEchoVolume const &vol, std::size_t slice);

} // namespace t2motion::phantom
