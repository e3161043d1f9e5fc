#include "t2motion/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace t2motion::metrics {

ClassCounts &ClassCounts::operator+=(ClassCounts const &o) {
  clean_as_clean += o.clean_as_clean;
  motion_as_motion += o.motion_as_motion;
  motion_missed += o.motion_missed;
  clean_flagged += o.clean_flagged;
  return *this;
}

ClassCounts count_classes(labels::LineLabelMask const &pred, labels::LineLabelMask const &target) {
  if (pred.size() != target.size() || pred.lines() != target.lines()) {
    throw std::invalid_argument("classification_report: prediction and target lengths differ");
  }
  ClassCounts c;
  auto const p = pred.values();
  auto const t = target.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (t[i] == 1) {
      (p[i] == 1 ? c.clean_as_clean : c.clean_flagged)++;
    } else {
      (p[i] == 0 ? c.motion_as_motion : c.motion_missed)++;
    }
  }
  return c;
}

ClassReport report_from_counts(ClassCounts const &c) {
  ClassReport r;
  r.counts = c;
  std::size_t const total = c.total();
  if (total == 0) {
    throw std::invalid_argument("classification_report: no lines");
  }
  r.accuracy = static_cast<double>(c.clean_as_clean + c.motion_as_motion) / static_cast<double>(total);
  std::size_t const motion = c.motion_as_motion + c.motion_missed;
  std::size_t const clean = c.clean_as_clean + c.clean_flagged;
  if (motion > 0) {
    r.nd_rate = static_cast<double>(c.motion_missed) / static_cast<double>(motion);
  }
  if (clean > 0) {
    r.wd_rate = static_cast<double>(c.clean_flagged) / static_cast<double>(clean);
  }
  return r;
}

ClassReport classification_report(labels::LineLabelMask const &pred, labels::LineLabelMask const &target) {
  return report_from_counts(count_classes(pred, target));
}

double psnr(std::span<double const> x, std::span<double const> ref) {
  if (x.size() != ref.size() || x.empty()) {
    throw std::invalid_argument("psnr: shape mismatch");
  }
  double range = 0.0;
  double mse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    range = std::max(range, ref[i]);
    double const d = x[i] - ref[i];
    mse += d * d;
  }
  mse /= static_cast<double>(x.size());
  if (mse == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return 10.0 * std::log10(range * range / mse);
}

namespace {

std::vector<double> gaussian_kernel(std::size_t size, double sigma) {
  std::vector<double> k(size);
  double const c = 0.5 * (static_cast<double>(size) - 1.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    double const d = static_cast<double>(i) - c;
    k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (auto &v : k) {
    v /= sum;
  }
  return k;
}

// Separable 'valid' filtering: output is (rows-w+1) x (cols-w+1).
std::vector<double> filter_valid(std::vector<double> const &img, std::size_t rows, std::size_t cols,
                                 std::vector<double> const &k) {
  std::size_t const w = k.size();
  std::size_t const orows = rows - w + 1;
  std::size_t const ocols = cols - w + 1;
  std::vector<double> tmp(rows * ocols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < ocols; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < w; ++t) {
        acc += k[t] * img[i * cols + j + t];
      }
      tmp[i * ocols + j] = acc;
    }
  }
  std::vector<double> out(orows * ocols);
  for (std::size_t i = 0; i < orows; ++i) {
    for (std::size_t j = 0; j < ocols; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < w; ++t) {
        acc += k[t] * tmp[(i + t) * ocols + j];
      }
      out[i * ocols + j] = acc;
    }
  }
  return out;
}

double ssim_with_range(std::span<double const> x, std::span<double const> ref, std::size_t rows,
                       std::size_t cols, double range, SsimOptions const &opt) {
  if (x.size() != rows * cols || ref.size() != rows * cols) {
    throw std::invalid_argument("ssim: shape mismatch");
  }
  if (rows < opt.window || cols < opt.window) {
    throw std::invalid_argument("ssim: image smaller than the window");
  }
  if (!(range > 0.0)) {
    throw std::invalid_argument("ssim: reference has zero dynamic range");
  }
  auto const k = gaussian_kernel(opt.window, opt.sigma);
  std::vector<double> a(x.begin(), x.end());
  std::vector<double> b(ref.begin(), ref.end());
  std::vector<double> aa(a.size());
  std::vector<double> bb(a.size());
  std::vector<double> ab(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  auto const mu_a = filter_valid(a, rows, cols, k);
  auto const mu_b = filter_valid(b, rows, cols, k);
  auto const e_aa = filter_valid(aa, rows, cols, k);
  auto const e_bb = filter_valid(bb, rows, cols, k);
  auto const e_ab = filter_valid(ab, rows, cols, k);
  double const c1 = (opt.k1 * range) * (opt.k1 * range);
  double const c2 = (opt.k2 * range) * (opt.k2 * range);
  double sum = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    double const ma = mu_a[i];
    double const mb = mu_b[i];
    double const va = e_aa[i] - ma * ma;
    double const vb = e_bb[i] - mb * mb;
    double const cov = e_ab[i] - ma * mb;
    sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return sum / static_cast<double>(mu_a.size());
}

} // namespace

double ssim(std::span<double const> x, std::span<double const> ref, std::size_t rows, std::size_t cols,
            SsimOptions const &opt) {
  double range = 0.0;
  for (double v : ref) {
    range = std::max(range, v);
  }
  return ssim_with_range(x, ref, rows, cols, range, opt);
}

ImageQuality image_quality(MultiEchoVolume const &x, MultiEchoVolume const &ref) {
  if (x.dims() != ref.dims()) {
    throw std::invalid_argument("image_quality: shape mismatch");
  }
  auto const mx = magnitude(x);
  auto const mr = magnitude(ref);
  double range = 0.0;
  for (double v : mr) {
    range = std::max(range, v);
  }
  ImageQuality q;
  q.psnr_db = psnr(mx, mr);
  auto const &d = x.dims();
  double sum = 0.0;
  for (std::size_t e = 0; e < d.echoes; ++e) {
    for (std::size_t s = 0; s < d.slices; ++s) {
      std::size_t const base = x.index(e, s, 0, 0);
      sum += ssim_with_range(std::span<double const>(mx).subspan(base, d.plane()),
                             std::span<double const>(mr).subspan(base, d.plane()), d.lines, d.readout, range, {});
    }
  }
  q.ssim = sum / static_cast<double>(d.echoes * d.slices);
  return q;
}

std::vector<double> echo_nrmse(MultiEchoVolume const &x, MultiEchoVolume const &ref) {
  if (x.dims() != ref.dims()) {
    throw std::invalid_argument("echo_nrmse: shape mismatch");
  }
  auto const &d = x.dims();
  std::vector<double> out(d.echoes);
  std::size_t const per_echo = d.slices * d.plane();
  auto const xd = x.data();
  auto const rd = ref.data();
  for (std::size_t e = 0; e < d.echoes; ++e) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = e * per_echo; i < (e + 1) * per_echo; ++i) {
      double const a = std::abs(cdouble(xd[i]));
      double const b = std::abs(cdouble(rd[i]));
      num += (a - b) * (a - b);
      den += b * b;
    }
    out[e] = den > 0.0 ? std::sqrt(num / den) : 0.0;
  }
  return out;
}

} // namespace t2motion::metrics
