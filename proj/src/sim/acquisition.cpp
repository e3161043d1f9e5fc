#include "t2motion/sim.hpp"

#include <numeric>
#include <stdexcept>

namespace t2motion::sim {

std::vector<double> AcquisitionScheme::interleaved_offsets(std::size_t n_slices, double tr_s) {
  std::vector<double> offsets(n_slices);
  std::size_t slot = 0;
  for (std::size_t start : {std::size_t{0}, std::size_t{1}}) {
    for (std::size_t s = start; s < n_slices; s += 2) {
      offsets[s] = static_cast<double>(slot++) * tr_s / static_cast<double>(n_slices);
    }
  }
  return offsets;
}

namespace {
std::vector<std::size_t> linear_order(std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  return order;
}
} // namespace

AcquisitionScheme::AcquisitionScheme(std::size_t n_pe, std::size_t n_slices, double tr_s)
    : AcquisitionScheme(n_pe, n_slices, tr_s, linear_order(n_pe), interleaved_offsets(n_slices, tr_s)) {}

AcquisitionScheme::AcquisitionScheme(std::size_t n_pe, std::size_t n_slices, double tr_s,
                                     std::vector<std::size_t> pe_order, std::vector<double> slice_offsets_s)
    : n_pe_(n_pe), n_slices_(n_slices), tr_s_(tr_s), pe_order_(std::move(pe_order)),
      position_of_line_(n_pe, n_pe), slice_offsets_s_(std::move(slice_offsets_s)) {
  if (n_pe == 0 || n_slices == 0 || !(tr_s > 0.0)) {
    throw std::invalid_argument("acquisition scheme: need lines, slices and a positive TR");
  }
  if (pe_order_.size() != n_pe) {
    throw std::invalid_argument("acquisition scheme: PE order length differs from line count");
  }
  for (std::size_t k = 0; k < n_pe; ++k) {
    std::size_t const line = pe_order_[k];
    if (line >= n_pe || position_of_line_[line] != n_pe) {
      throw std::invalid_argument("acquisition scheme: PE order is not a permutation");
    }
    position_of_line_[line] = k;
  }
  if (slice_offsets_s_.size() != n_slices) {
    throw std::invalid_argument("acquisition scheme: one slice offset per slice required");
  }
  for (double o : slice_offsets_s_) {
    if (!(o >= 0.0 && o < tr_s)) {
      throw std::invalid_argument("acquisition scheme: slice offsets must lie in [0, TR)");
    }
  }
}

double AcquisitionScheme::acquisition_time(std::size_t line, std::size_t slice) const {
  return static_cast<double>(position_of_line_.at(line)) * tr_s_ + slice_offsets_s_.at(slice);
}

} // namespace t2motion::sim
