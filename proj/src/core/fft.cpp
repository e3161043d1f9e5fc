#include "t2motion/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace t2motion {

namespace {
// FFTW's planner is not re-entrant; execution on distinct arrays is.
std::mutex &planner_mutex() {
  static std::mutex m;
  return m;
}

// Move index 0 to the centre (fftshift) or back (ifftshift) along both axes.
void shift(std::span<cdouble const> in, std::span<cdouble> out, std::size_t rows, std::size_t cols,
           bool inverse) {
  std::size_t const row_off = inverse ? rows - rows / 2 : rows / 2;
  std::size_t const col_off = inverse ? cols - cols / 2 : cols / 2;
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t const rr = (r + row_off) % rows;
    for (std::size_t c = 0; c < cols; ++c) {
      out[rr * cols + (c + col_off) % cols] = in[r * cols + c];
    }
  }
}
} // namespace

struct Fft2::Impl {
  std::size_t rows;
  std::size_t cols;
  fftw_complex *buffer = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::vector<cdouble> scratch;

  Impl(std::size_t r, std::size_t c) : rows(r), cols(c), scratch(r * c) {
    std::lock_guard lock(planner_mutex());
    buffer = fftw_alloc_complex(rows * cols);
    if (buffer == nullptr) {
      throw std::bad_alloc();
    }
    int const n0 = static_cast<int>(rows);
    int const n1 = static_cast<int>(cols);
    fwd = fftw_plan_dft_2d(n0, n1, buffer, buffer, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_2d(n0, n1, buffer, buffer, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (fwd == nullptr || bwd == nullptr) {
      throw std::runtime_error("FFTW planning failed");
    }
  }

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (fwd != nullptr) {
      fftw_destroy_plan(fwd);
    }
    if (bwd != nullptr) {
      fftw_destroy_plan(bwd);
    }
    fftw_free(buffer);
  }

  void run(std::span<cdouble> plane, bool forward) {
    if (plane.size() != rows * cols) {
      throw std::invalid_argument("Fft2: plane size does not match plan");
    }
    auto *buf = reinterpret_cast<cdouble *>(buffer);
    std::span<cdouble> const b(buf, rows * cols);
    shift(plane, b, rows, cols, true);
    fftw_execute(forward ? fwd : bwd);
    shift(b, plane, rows, cols, false);
    double const scale = 1.0 / std::sqrt(static_cast<double>(rows * cols));
    for (auto &v : plane) {
      v *= scale;
    }
  }
};

Fft2::Fft2(std::size_t rows, std::size_t cols) : impl_(std::make_unique<Impl>(rows, cols)) {}
Fft2::~Fft2() = default;
Fft2::Fft2(Fft2 &&) noexcept = default;
Fft2 &Fft2::operator=(Fft2 &&) noexcept = default;

std::size_t Fft2::rows() const { return impl_->rows; }
std::size_t Fft2::cols() const { return impl_->cols; }

void Fft2::forward(std::span<cdouble> plane) { impl_->run(plane, true); }
void Fft2::inverse(std::span<cdouble> plane) { impl_->run(plane, false); }

} // namespace t2motion
