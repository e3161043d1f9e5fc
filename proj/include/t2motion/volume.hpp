#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace t2motion {

using cfloat = std::complex<float>;
using cdouble = std::complex<double>;

/// Raised for malformed volume files and violated container invariants.
class VolumeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class Space { Image, KSpace };

std::string to_string(Space space);
Space space_from_string(std::string const &name);

/// Extents of a multi-echo volume in storage order [echo, slice, PE, readout].
struct Dims {
  std::size_t echoes = 1;
  std::size_t slices = 1;
  std::size_t lines = 1;
  std::size_t readout = 1;

  std::size_t size() const { return echoes * slices * lines * readout; }
  std::size_t plane() const { return lines * readout; }
  bool operator==(Dims const &) const = default;
};

/// Voxel spacing in millimetres, ordered (PE, readout, slice).
using VoxelSize = std::array<double, 3>;

/*
 * Complex multi-echo container shared by image and k-space data.
 *
 * Samples are stored contiguously in C-order over [echo, slice, PE, readout].
 * The space tag records which domain the samples live in; operations check it
 * on entry so that k-space is never interpolated as if it were an image.
 */
class MultiEchoVolume {
public:
  MultiEchoVolume() = default;
  MultiEchoVolume(Dims dims, VoxelSize voxel_size_mm, std::vector<double> te_ms, Space space);
  MultiEchoVolume(Dims dims, VoxelSize voxel_size_mm, std::vector<double> te_ms, Space space,
                  std::vector<cfloat> data);

  Dims const &dims() const { return dims_; }
  VoxelSize const &voxel_size_mm() const { return voxel_size_mm_; }
  std::vector<double> const &te_ms() const { return te_ms_; }
  Space space() const { return space_; }

  std::size_t index(std::size_t echo, std::size_t slice, std::size_t line, std::size_t col) const {
    return ((echo * dims_.slices + slice) * dims_.lines + line) * dims_.readout + col;
  }
  cfloat &operator()(std::size_t echo, std::size_t slice, std::size_t line, std::size_t col) {
    return data_[index(echo, slice, line, col)];
  }
  cfloat operator()(std::size_t echo, std::size_t slice, std::size_t line, std::size_t col) const {
    return data_[index(echo, slice, line, col)];
  }

  /// One (echo, slice) plane, PE-major.
  std::span<cfloat> plane(std::size_t echo, std::size_t slice);
  std::span<cfloat const> plane(std::size_t echo, std::size_t slice) const;

  std::span<cfloat> data() { return data_; }
  std::span<cfloat const> data() const { return data_; }

  /// Same geometry and echo times, different domain and payload.
  MultiEchoVolume with_data(Space space, std::vector<cfloat> data) const;

  /// Copy of a single slice as a volume with one slice.
  MultiEchoVolume extract_slice(std::size_t slice) const;

  bool operator==(MultiEchoVolume const &) const = default;

private:
  void validate() const;

  Dims dims_{};
  VoxelSize voxel_size_mm_{1.0, 1.0, 1.0};
  std::vector<double> te_ms_{0.0};
  Space space_ = Space::Image;
  std::vector<cfloat> data_ = std::vector<cfloat>(1);
};

/// Throws VolumeError unless the volume lives in the expected domain.
void require_space(MultiEchoVolume const &vol, Space expected, char const *operation);

void write_volume(MultiEchoVolume const &vol, std::filesystem::path const &path);
MultiEchoVolume read_volume(std::filesystem::path const &path);

/// Unitary centred 2D DFT over (PE, readout) for every (echo, slice).
MultiEchoVolume fft2_per_slice(MultiEchoVolume const &image);
MultiEchoVolume ifft2_per_slice(MultiEchoVolume const &kspace);

/// Magnitudes of all samples, same ordering as the data.
std::vector<double> magnitude(MultiEchoVolume const &vol);

double energy(MultiEchoVolume const &vol);

} // namespace t2motion
