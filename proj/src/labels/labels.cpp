#include "t2motion/labels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

namespace t2motion::labels {

LineLabelMask::LineLabelMask(std::size_t slices, std::size_t lines, std::uint8_t fill)
    : LineLabelMask(slices, lines, std::vector<std::uint8_t>(slices * lines, fill)) {}

LineLabelMask::LineLabelMask(std::size_t slices, std::size_t lines, std::vector<std::uint8_t> values)
    : slices_(slices), lines_(lines), values_(std::move(values)) {
  if (values_.size() != slices_ * lines_) {
    throw std::invalid_argument("label mask: value count does not match slices * lines");
  }
  for (auto v : values_) {
    if (v > 1) {
      throw std::invalid_argument("label mask: values must be 0 or 1");
    }
  }
}

void LineLabelMask::set(std::size_t slice, std::size_t line, std::uint8_t value) {
  if (value > 1) {
    throw std::invalid_argument("label mask: values must be 0 or 1");
  }
  values_.at(slice * lines_ + line) = value;
}

std::span<std::uint8_t const> LineLabelMask::row(std::size_t slice) const {
  return std::span<std::uint8_t const>(values_).subspan(slice * lines_, lines_);
}

bool LineLabelMask::all_clean() const {
  return std::all_of(values_.begin(), values_.end(), [](std::uint8_t v) { return v == 1; });
}

NormalizedLines normalize_lines(MultiEchoVolume const &kspace, NormAxes axes) {
  require_space(kspace, Space::KSpace, "normalize_lines");
  for (cfloat v : kspace.data()) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw std::invalid_argument("normalize_lines: non-finite input");
    }
  }
  auto const &d = kspace.dims();
  std::vector<cfloat> out(kspace.data().begin(), kspace.data().end());
  NormalizedLines result{kspace, {}, 0};

  auto normalise_group = [&](auto &&for_each_index, std::size_t flag_index) {
    double sum = 0.0;
    for_each_index([&](std::size_t i) { sum += std::norm(cdouble(out[i])); });
    if (sum == 0.0) {
      result.zero_flags[flag_index] = 1;
      ++result.zero_count;
      return;
    }
    double const inv = 1.0 / std::sqrt(sum);
    for_each_index([&](std::size_t i) { out[i] = cfloat(cdouble(out[i]) * inv); });
  };

  if (axes == NormAxes::EchoReadout) {
    result.zero_flags.assign(d.slices * d.lines, 0);
    for (std::size_t s = 0; s < d.slices; ++s) {
      for (std::size_t p = 0; p < d.lines; ++p) {
        normalise_group(
            [&](auto &&fn) {
              for (std::size_t e = 0; e < d.echoes; ++e) {
                std::size_t const base = kspace.index(e, s, p, 0);
                for (std::size_t r = 0; r < d.readout; ++r) {
                  fn(base + r);
                }
              }
            },
            s * d.lines + p);
      }
    }
  } else {
    result.zero_flags.assign(d.slices * d.readout, 0);
    for (std::size_t s = 0; s < d.slices; ++s) {
      for (std::size_t r = 0; r < d.readout; ++r) {
        normalise_group(
            [&](auto &&fn) {
              for (std::size_t e = 0; e < d.echoes; ++e) {
                for (std::size_t p = 0; p < d.lines; ++p) {
                  fn(kspace.index(e, s, p, r));
                }
              }
            },
            s * d.readout + r);
      }
    }
  }
  result.kspace = kspace.with_data(Space::KSpace, std::move(out));
  return result;
}

LineLabelMask make_target_labels(std::span<double const> displacement_mm, std::size_t slices, std::size_t lines,
                                 double d_min_mm) {
  if (displacement_mm.size() != slices * lines) {
    throw std::invalid_argument("make_target_labels: displacement length does not match slices * lines");
  }
  std::vector<std::uint8_t> values(displacement_mm.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = displacement_mm[i] > d_min_mm ? 0 : 1;
  }
  return LineLabelMask(slices, lines, std::move(values));
}

LineLabelMask make_target_labels(std::vector<std::vector<double>> const &per_echo, std::size_t slices,
                                 std::size_t lines, double d_min_mm) {
  if (per_echo.empty()) {
    throw std::invalid_argument("make_target_labels: no echoes");
  }
  std::vector<double> mean(slices * lines, 0.0);
  for (auto const &trace : per_echo) {
    auto const mask = make_target_labels(trace, slices, lines, d_min_mm);
    for (std::size_t i = 0; i < mean.size(); ++i) {
      mean[i] += mask.values()[i];
    }
  }
  std::vector<std::uint8_t> values(mean.size());
  double const n = static_cast<double>(per_echo.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = mean[i] / n >= 0.5 ? 1 : 0;
  }
  return LineLabelMask(slices, lines, std::move(values));
}

void write_labels_csv(LineLabelMask const &mask, std::ostream &out, std::optional<double> d_min_mm) {
  if (d_min_mm) {
    out << "# d_min_mm=" << std::setprecision(17) << *d_min_mm << '\n';
  }
  out << "# convention: 1 = motion-free, 0 = motion-corrupted; one row per slice\n";
  for (std::size_t s = 0; s < mask.slices(); ++s) {
    for (std::size_t p = 0; p < mask.lines(); ++p) {
      if (p > 0) {
        out << ',';
      }
      out << static_cast<int>(mask(s, p));
    }
    out << '\n';
  }
}

void write_labels(LineLabelMask const &mask, std::filesystem::path const &path, std::optional<double> d_min_mm) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  }
  write_labels_csv(mask, out, d_min_mm);
}

LineLabelMask read_labels_csv(std::istream &in) {
  std::vector<std::uint8_t> values;
  std::size_t lines = 0;
  std::size_t slices = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty() || line.front() == '#') {
      continue;
    }
    std::istringstream row(line);
    std::string cell;
    std::size_t count = 0;
    while (std::getline(row, cell, ',')) {
      cell.erase(0, cell.find_first_not_of(" \t"));
      cell.erase(cell.find_last_not_of(" \t") + 1);
      if (cell != "0" && cell != "1") {
        throw std::runtime_error("label file: entries must be 0 or 1, got '" + cell + "'");
      }
      values.push_back(cell == "1" ? 1 : 0);
      ++count;
    }
    if (slices == 0) {
      lines = count;
    } else if (count != lines) {
      throw std::runtime_error("label file: rows have different lengths");
    }
    ++slices;
  }
  if (slices == 0 || lines == 0) {
    throw std::runtime_error("label file: no label rows");
  }
  return LineLabelMask(slices, lines, std::move(values));
}

LineLabelMask read_labels(std::filesystem::path const &path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() + "'");
  }
  return read_labels_csv(in);
}

void write_matrix_csv(std::span<double const> values, std::size_t rows, std::size_t cols,
                      std::filesystem::path const &path, char const *comment) {
  if (values.size() != rows * cols) {
    throw std::invalid_argument("write_matrix_csv: size mismatch");
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  }
  if (comment != nullptr) {
    out << "# " << comment << '\n';
  }
  out << std::setprecision(17);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (j > 0) {
        out << ',';
      }
      out << values[i * cols + j];
    }
    out << '\n';
  }
}

} // namespace t2motion::labels
