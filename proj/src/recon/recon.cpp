#include "t2motion/recon.hpp"

#include "t2motion/fft.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace t2motion::recon {

void ReconConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("recon: lambda must be finite and >= 0");
  }
  if (max_iter < 1 || tv_inner_iter < 1) {
    throw std::invalid_argument("recon: iteration counts must be >= 1");
  }
  if (!(motion_weight > 0.0) || !(clean_weight > 0.0)) {
    throw std::invalid_argument("recon: data-consistency weights must be positive");
  }
  double const w_max = std::max(motion_weight, clean_weight);
  if (!(step > 0.0) || step > 1.0 / (w_max * w_max) * (1.0 + 1e-12)) {
    throw std::invalid_argument("recon: step must lie in (0, 1/max(w)^2]");
  }
  if (!(tol >= 0.0) || !(scale_target > 0.0)) {
    throw std::invalid_argument("recon: tol must be >= 0 and scale_target > 0");
  }
}

std::vector<double> dc_weights(std::span<std::uint8_t const> labels, ReconConfig const &cfg) {
  std::vector<double> w(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    w[i] = labels[i] == 1 ? cfg.clean_weight : cfg.motion_weight;
  }
  return w;
}

namespace {

double data_term(Image2D const &ax, Image2D const &y, std::span<double const> w) {
  double sum = 0.0;
  for (std::size_t i = 0; i < y.rows; ++i) {
    double const w2 = w[i] * w[i];
    for (std::size_t j = 0; j < y.cols; ++j) {
      sum += w2 * std::norm(ax(i, j) - y(i, j));
    }
  }
  return 0.5 * sum;
}

Image2D forward(Fft2 &fft, Image2D x) {
  fft.forward(x.data);
  return x;
}

} // namespace

PlaneResult reconstruct_plane(Image2D const &kspace, std::span<double const> line_weights, ReconConfig const &cfg) {
  cfg.validate();
  if (line_weights.size() != kspace.rows) {
    throw std::invalid_argument("recon: one weight per PE line required");
  }
  for (double w : line_weights) {
    if (!(w > 0.0)) {
      throw std::invalid_argument("recon: non-positive data-consistency weight");
    }
  }
  Fft2 fft(kspace.rows, kspace.cols);

  PlaneResult result;
  Image2D x = kspace;
  fft.inverse(x.data);
  double peak = 0.0;
  for (auto const &v : x.data) {
    peak = std::max(peak, std::abs(v));
  }
  if (peak == 0.0) {
    result.image = x;
    result.objective = {0.0};
    return result;
  }
  result.scale = cfg.scale_target / peak;
  Image2D y = kspace;
  for (auto &v : y.data) {
    v *= result.scale;
  }
  for (auto &v : x.data) {
    v *= result.scale;
  }

  Image2D ax = forward(fft, x);
  double const obj0 = data_term(ax, y, line_weights) + cfg.lambda * tv_norm(x);
  result.objective.push_back(obj0);
  Image2D best = x;
  double best_obj = obj0;

  TvDual dual;
  double const theta = cfg.step * cfg.lambda;
  for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
    // Gradient step on ½‖W(Ax − y)‖²: x − τ Aᴴ W²(Ax − y).
    Image2D residual(y.rows, y.cols);
    for (std::size_t i = 0; i < y.rows; ++i) {
      double const w2 = line_weights[i] * line_weights[i];
      for (std::size_t j = 0; j < y.cols; ++j) {
        residual(i, j) = w2 * (ax(i, j) - y(i, j));
      }
    }
    fft.inverse(residual.data);
    Image2D v = x;
    for (std::size_t k = 0; k < v.data.size(); ++k) {
      v.data[k] -= cfg.step * residual.data[k];
    }
    Image2D next = tv_prox(v, theta, cfg.tv_inner_iter, &dual);

    double diff = 0.0;
    double norm = 0.0;
    for (std::size_t k = 0; k < next.data.size(); ++k) {
      diff += std::norm(next.data[k] - x.data[k]);
      norm += std::norm(x.data[k]);
    }
    x = std::move(next);
    ax = forward(fft, x);
    double const obj = data_term(ax, y, line_weights) + cfg.lambda * tv_norm(x);
    result.objective.push_back(obj);
    result.iterations = it;
    if (!std::isfinite(obj) || obj > 10.0 * obj0) {
      std::ostringstream msg;
      msg << "recon diverged at iteration " << it << ": objective " << obj << " vs initial " << obj0;
      throw ReconDiverged(msg.str());
    }
    if (obj < best_obj) {
      best_obj = obj;
      best = x;
      result.best_iteration = it;
    }
    if (norm > 0.0 && std::sqrt(diff / norm) < cfg.tol) {
      break;
    }
  }

  for (auto &v : best.data) {
    v /= result.scale;
  }
  result.image = std::move(best);
  return result;
}

ReconResult weighted_tv_recon(MultiEchoVolume const &kspace, labels::LineLabelMask const &labels,
                              ReconConfig const &cfg) {
  require_space(kspace, Space::KSpace, "weighted_tv_recon");
  cfg.validate();
  auto const &d = kspace.dims();
  if (labels.lines() != d.lines || labels.slices() != d.slices) {
    throw std::invalid_argument("weighted_tv_recon: label mask must be slices x lines of the k-space");
  }
  std::vector<cfloat> out(d.size());
  ReconResult result{kspace, {}};
  for (std::size_t s = 0; s < d.slices; ++s) {
    auto const weights = dc_weights(labels.row(s), cfg);
    for (std::size_t e = 0; e < d.echoes; ++e) {
      auto const plane = kspace.plane(e, s);
      Image2D y(d.lines, d.readout, std::vector<cdouble>(plane.begin(), plane.end()));
      PlaneResult pr = reconstruct_plane(y, weights, cfg);
      std::size_t const base = kspace.index(e, s, 0, 0);
      for (std::size_t k = 0; k < pr.image.data.size(); ++k) {
        out[base + k] = cfloat(pr.image.data[k]);
      }
      result.traces.push_back({s, e, std::move(pr.objective), pr.iterations, pr.best_iteration, pr.scale});
    }
  }
  result.image = kspace.with_data(Space::Image, std::move(out));
  return result;
}

double forward_operator_norm(std::size_t rows, std::size_t cols, std::size_t iterations, std::uint64_t seed) {
  Fft2 fft(rows, cols);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<cdouble> v(rows * cols);
  for (auto &c : v) {
    c = {normal(rng), normal(rng)};
  }
  double estimate = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    double norm = 0.0;
    for (auto const &c : v) {
      norm += std::norm(c);
    }
    norm = std::sqrt(norm);
    for (auto &c : v) {
      c /= norm;
    }
    std::vector<cdouble> av = v;
    fft.forward(av);
    double an = 0.0;
    for (auto const &c : av) {
      an += std::norm(c);
    }
    estimate = std::sqrt(an);
    fft.inverse(av); // AᴴA v
    v = std::move(av);
  }
  return estimate;
}

} // namespace t2motion::recon
