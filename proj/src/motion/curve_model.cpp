#include "t2motion/motion.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace t2motion::motion {

std::size_t active_components(std::size_t n_curves) {
  // ceil(0.2 * N) in integer arithmetic.
  return (n_curves + 4) / 5;
}

Eigen::VectorXd flatten(MotionCurve const &curve) {
  Eigen::VectorXd out(6 * static_cast<Eigen::Index>(curve.size()));
  for (std::size_t i = 0; i < curve.size(); ++i) {
    auto const k = 6 * static_cast<Eigen::Index>(i);
    out.segment<3>(k) = curve[i].translation_mm;
    out.segment<3>(k + 3) = curve[i].rotation_deg;
  }
  return out;
}

MotionCurve unflatten(std::vector<double> const &t_s, Eigen::VectorXd const &flat) {
  if (flat.size() != 6 * static_cast<Eigen::Index>(t_s.size())) {
    throw std::invalid_argument("unflatten: vector length is not 6 * samples");
  }
  std::vector<RigidTransform> params(t_s.size());
  for (std::size_t i = 0; i < t_s.size(); ++i) {
    auto const k = 6 * static_cast<Eigen::Index>(i);
    params[i].translation_mm = flat.segment<3>(k);
    params[i].rotation_deg = flat.segment<3>(k + 3);
  }
  return MotionCurve(t_s, std::move(params));
}

MotionCurve CurveModel::mean_curve() const { return unflatten(t_s, mean); }

CurveModel fit_curve_model(std::vector<MotionCurve> const &curves) {
  if (curves.size() < 2) {
    throw std::invalid_argument("fit_curve_model: need at least 2 curves");
  }
  auto const &grid = curves.front().times();
  double const spacing = curves.front().duration() / static_cast<double>(grid.size() - 1);
  auto const n = static_cast<Eigen::Index>(curves.size());
  auto const dim = 6 * static_cast<Eigen::Index>(grid.size());

  Eigen::MatrixXd data(dim, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    auto const &c = curves[static_cast<std::size_t>(j)];
    if (std::abs(c.duration() - curves.front().duration()) > 0.5 * spacing) {
      throw std::invalid_argument("fit_curve_model: curves of mismatched duration after resampling");
    }
    // Align each curve to the grid relative to its own start time.
    std::vector<double> local(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      local[i] = c.start() + (grid[i] - grid.front());
    }
    data.col(j) = flatten(resample_nearest(c, local));
  }

  CurveModel model;
  model.t_s = grid;
  model.n_training = curves.size();
  model.n_components = active_components(curves.size());
  model.mean = data.rowwise().mean();
  Eigen::MatrixXd const centred = data.colwise() - model.mean;

  // Snapshot PCA: eigen-decompose the n x n Gram matrix instead of the dim x dim covariance.
  double const denom = static_cast<double>(n - 1);
  Eigen::MatrixXd const gram = centred.transpose() * centred / denom;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  Eigen::VectorXd const evals = solver.eigenvalues().reverse();
  Eigen::MatrixXd const evecs = solver.eigenvectors().rowwise().reverse();

  double const scale = std::max(1.0, evals.size() > 0 ? std::abs(evals(0)) : 0.0);
  double const tol = 1e-12 * scale * static_cast<double>(n);
  std::vector<Eigen::VectorXd> modes;
  std::vector<double> variances;
  for (Eigen::Index k = 0; k < evals.size(); ++k) {
    if (evals(k) <= tol) {
      break;
    }
    Eigen::VectorXd pc = centred * evecs.col(k);
    double const norm = pc.norm();
    if (norm == 0.0) {
      break;
    }
    modes.push_back(pc / norm);
    variances.push_back(evals(k));
  }

  // Pad with zero-variance directions orthogonal to the data modes.
  for (Eigen::Index axis = 0; modes.size() < model.n_components && axis < dim; ++axis) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(dim, axis);
    for (int pass = 0; pass < 2; ++pass) {
      for (auto const &m : modes) {
        v -= m.dot(v) * m;
      }
    }
    double const norm = v.norm();
    if (norm > 1e-6) {
      modes.push_back(v / norm);
      variances.push_back(0.0);
    }
  }

  model.components.resize(dim, static_cast<Eigen::Index>(modes.size()));
  model.eigenvalues.resize(static_cast<Eigen::Index>(modes.size()));
  for (std::size_t k = 0; k < modes.size(); ++k) {
    model.components.col(static_cast<Eigen::Index>(k)) = modes[k];
    model.eigenvalues(static_cast<Eigen::Index>(k)) = variances[k];
  }
  return model;
}

std::vector<double> sample_mode_weights(CurveModel const &model, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> alpha(model.n_components, 0.0);
  for (std::size_t i = 0; i < model.n_components; ++i) {
    double z = normal(rng);
    while (std::abs(z) > 3.0) {
      z = normal(rng);
    }
    alpha[i] = z * std::sqrt(model.eigenvalues(static_cast<Eigen::Index>(i)));
  }
  return alpha;
}

MotionCurve sample_augmented_curve(CurveModel const &model, std::uint64_t seed) {
  auto const alpha = sample_mode_weights(model, seed);
  Eigen::VectorXd flat = model.mean;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    flat += alpha[i] * model.components.col(static_cast<Eigen::Index>(i));
  }
  return unflatten(model.t_s, flat);
}

} // namespace t2motion::motion
