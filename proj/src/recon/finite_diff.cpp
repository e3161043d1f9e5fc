#include "t2motion/recon.hpp"

#include <cmath>
#include <stdexcept>

namespace t2motion::recon {

Image2D::Image2D(std::size_t r, std::size_t c, std::vector<cdouble> d) : rows(r), cols(c), data(std::move(d)) {
  if (data.size() != rows * cols) {
    throw std::invalid_argument("Image2D: data size does not match rows * cols");
  }
}

Gradient finite_diff(Image2D const &x) {
  Gradient g{x.rows, x.cols, std::vector<cdouble>(x.data.size()), std::vector<cdouble>(x.data.size())};
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < x.cols; ++j) {
      std::size_t const k = i * x.cols + j;
      if (i + 1 < x.rows) {
        g.d_line[k] = x.data[k + x.cols] - x.data[k];
      }
      if (j + 1 < x.cols) {
        g.d_col[k] = x.data[k + 1] - x.data[k];
      }
    }
  }
  return g;
}

Image2D finite_diff_adjoint(Gradient const &g) {
  Image2D out(g.rows, g.cols);
  for (std::size_t i = 0; i < g.rows; ++i) {
    for (std::size_t j = 0; j < g.cols; ++j) {
      std::size_t const k = i * g.cols + j;
      cdouble v{};
      if (i > 0) {
        v += g.d_line[k - g.cols];
      }
      if (i + 1 < g.rows) {
        v -= g.d_line[k];
      }
      if (j > 0) {
        v += g.d_col[k - 1];
      }
      if (j + 1 < g.cols) {
        v -= g.d_col[k];
      }
      out.data[k] = v;
    }
  }
  return out;
}

double tv_norm(Image2D const &x) {
  Gradient const g = finite_diff(x);
  double sum = 0.0;
  for (std::size_t k = 0; k < g.d_line.size(); ++k) {
    sum += std::sqrt(std::norm(g.d_line[k])) + std::sqrt(std::norm(g.d_col[k]));
  }
  return sum;
}

double tv_prox_objective(Image2D const &u, Image2D const &z, double theta) {
  double fit = 0.0;
  for (std::size_t k = 0; k < u.data.size(); ++k) {
    fit += std::norm(u.data[k] - z.data[k]);
  }
  return 0.5 * fit + theta * tv_norm(u);
}

namespace {

double modulus(cdouble c) { return std::sqrt(std::norm(c)); }

// u = z − θ Φᵀp
void primal(Image2D const &z, Gradient const &p, double theta, std::vector<cdouble> &u) {
  std::size_t const rows = z.rows;
  std::size_t const cols = z.cols;
  u.resize(z.data.size());
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      std::size_t const k = i * cols + j;
      cdouble v{};
      if (i > 0) {
        v += p.d_line[k - cols];
      }
      if (i + 1 < rows) {
        v -= p.d_line[k];
      }
      if (j > 0) {
        v += p.d_col[k - 1];
      }
      if (j + 1 < cols) {
        v -= p.d_col[k];
      }
      u[k] = z.data[k] - theta * v;
    }
  }
}

cdouble project_unit(cdouble c) {
  double const m = modulus(c);
  return m > 1.0 ? c / m : c;
}

} // namespace

Image2D tv_prox(Image2D const &z, double theta, std::size_t inner_iter, TvDual *warm) {
  if (theta < 0.0) {
    throw std::invalid_argument("tv_prox: theta must be non-negative");
  }
  if (theta == 0.0 || inner_iter == 0) {
    return z;
  }
  std::size_t const n = z.data.size();
  std::size_t const rows = z.rows;
  std::size_t const cols = z.cols;
  Gradient p{rows, cols, std::vector<cdouble>(n), std::vector<cdouble>(n)};
  if (warm != nullptr && warm->p.d_line.size() == n) {
    p = warm->p;
  }
  // ‖Φ‖² ≤ 8 for 2D forward differences.
  double const step = 1.0 / (8.0 * theta);
  Gradient r = p;
  std::vector<cdouble> u;
  double t = 1.0;
  for (std::size_t it = 0; it < inner_iter; ++it) {
    primal(z, r, theta, u);
    double const t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    double const momentum = (t - 1.0) / t_next;
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        std::size_t const k = i * cols + j;
        cdouble const gl = i + 1 < rows ? u[k + cols] - u[k] : cdouble{};
        cdouble const gc = j + 1 < cols ? u[k + 1] - u[k] : cdouble{};
        cdouble const nl = project_unit(r.d_line[k] + step * gl);
        cdouble const nc = project_unit(r.d_col[k] + step * gc);
        r.d_line[k] = nl + momentum * (nl - p.d_line[k]);
        r.d_col[k] = nc + momentum * (nc - p.d_col[k]);
        p.d_line[k] = nl;
        p.d_col[k] = nc;
      }
    }
    t = t_next;
  }
  if (warm != nullptr) {
    warm->p = p;
  }
  primal(z, p, theta, u);
  return Image2D(rows, cols, std::move(u));
}

} // namespace t2motion::recon
