#pragma once

#include "t2motion/volume.hpp"

#include <cstddef>
#include <memory>
#include <span>

namespace t2motion {

/*
 * Unitary, centred 2D DFT of a rows x cols complex plane (row-major).
 *
 * "Centred" means the image origin and the k-space DC sample both sit at
 * index (rows/2, cols/2); the transform is ifftshift -> DFT -> fftshift,
 * scaled by 1/sqrt(rows*cols) in both directions.
 *
 * An Fft2 instance owns its plans and a scratch buffer, so one instance must
 * not be shared between threads. Separate instances are independent.
 */
class Fft2 {
public:
  Fft2(std::size_t rows, std::size_t cols);
  ~Fft2();
  Fft2(Fft2 const &) = delete;
  Fft2 &operator=(Fft2 const &) = delete;
  Fft2(Fft2 &&) noexcept;
  Fft2 &operator=(Fft2 &&) noexcept;

  std::size_t rows() const;
  std::size_t cols() const;

  void forward(std::span<cdouble> plane);
  void inverse(std::span<cdouble> plane);

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace t2motion
