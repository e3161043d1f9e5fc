#include "t2motion/motion.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace t2motion::motion {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
}

RigidTransform RigidTransform::from_matrix(Eigen::Matrix3d const &r, Eigen::Vector3d const &translation) {
  // R = Rz(c) * Ry(b) * Rx(a)  =>  R(2,0) = -sin b, R(2,1)/R(2,2) = tan a, R(1,0)/R(0,0) = tan c.
  double const sb = std::clamp(-r(2, 0), -1.0, 1.0);
  double const a = std::atan2(r(2, 1), r(2, 2));
  double const b = std::asin(sb);
  double const c = std::atan2(r(1, 0), r(0, 0));
  RigidTransform out;
  out.translation_mm = translation;
  out.rotation_deg = Eigen::Vector3d(a, b, c) / kDeg;
  return out;
}

Eigen::Matrix3d RigidTransform::rotation_matrix() const {
  Eigen::Vector3d const r = rotation_deg * kDeg;
  return (Eigen::AngleAxisd(r.z(), Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(r.y(), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(r.x(), Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

Eigen::Vector3d RigidTransform::apply(Eigen::Vector3d const &p) const {
  return rotation_matrix() * p + translation_mm;
}

bool RigidTransform::is_identity() const {
  return translation_mm.isZero(0.0) && rotation_deg.isZero(0.0);
}

bool RigidTransform::is_finite() const {
  return translation_mm.allFinite() && rotation_deg.allFinite();
}

RigidTransform compose(RigidTransform const &outer, RigidTransform const &inner) {
  Eigen::Matrix3d const ro = outer.rotation_matrix();
  return RigidTransform::from_matrix(ro * inner.rotation_matrix(),
                                     ro * inner.translation_mm + outer.translation_mm);
}

RigidTransform inverse(RigidTransform const &t) {
  Eigen::Matrix3d const rt = t.rotation_matrix().transpose();
  return RigidTransform::from_matrix(rt, -(rt * t.translation_mm));
}

double parameter_distance(RigidTransform const &a, RigidTransform const &b) {
  return std::max((a.translation_mm - b.translation_mm).cwiseAbs().maxCoeff(),
                  (a.rotation_deg - b.rotation_deg).cwiseAbs().maxCoeff());
}

namespace {

// Maps output voxel (slice, line, col) to a fractional source index by pulling
// through the inverse transform. Physical axes: x = col, y = line, z = slice.
struct SourceMap {
  Eigen::Matrix3d inv_rot;
  Eigen::Vector3d translation;
  Eigen::Vector3d centre; // (col, line, slice) index of the pivot
  Eigen::Vector3d spacing; // mm per index along (col, line, slice)

  SourceMap(Dims const &d, VoxelSize const &vs, RigidTransform const &t)
      : inv_rot(t.rotation_matrix().transpose()), translation(t.translation_mm),
        centre(0.5 * (static_cast<double>(d.readout) - 1.0), 0.5 * (static_cast<double>(d.lines) - 1.0),
               0.5 * (static_cast<double>(d.slices) - 1.0)),
        spacing(vs[1], vs[0], vs[2]) {}

  Eigen::Vector3d source(double col, double line, double slice) const {
    Eigen::Vector3d const q = (Eigen::Vector3d(col, line, slice) - centre).cwiseProduct(spacing);
    Eigen::Vector3d const p = inv_rot * (q - translation);
    return p.cwiseQuotient(spacing) + centre;
  }
};

struct Stencil {
  std::size_t offset[8];
  double weight[8];
  int count = 0;
};

// Trilinear stencil with neighbours outside the grid contributing zero.
Stencil make_stencil(Eigen::Vector3d const &src, Dims const &d) {
  Stencil st;
  double const fx = std::floor(src.x());
  double const fy = std::floor(src.y());
  double const fz = std::floor(src.z());
  double const wx = src.x() - fx;
  double const wy = src.y() - fy;
  double const wz = src.z() - fz;
  auto const x0 = static_cast<long>(fx);
  auto const y0 = static_cast<long>(fy);
  auto const z0 = static_cast<long>(fz);
  auto const nx = static_cast<long>(d.readout);
  auto const ny = static_cast<long>(d.lines);
  auto const nz = static_cast<long>(d.slices);
  for (int k = 0; k < 8; ++k) {
    long const x = x0 + (k & 1);
    long const y = y0 + ((k >> 1) & 1);
    long const z = z0 + ((k >> 2) & 1);
    if (x < 0 || y < 0 || z < 0 || x >= nx || y >= ny || z >= nz) {
      continue;
    }
    double const w = ((k & 1) ? wx : 1.0 - wx) * (((k >> 1) & 1) ? wy : 1.0 - wy) *
                     (((k >> 2) & 1) ? wz : 1.0 - wz);
    if (w == 0.0) {
      continue;
    }
    st.offset[st.count] = static_cast<std::size_t>((z * ny + y) * nx + x);
    st.weight[st.count] = w;
    ++st.count;
  }
  return st;
}

void check_input(MultiEchoVolume const &image, RigidTransform const &t) {
  require_space(image, Space::Image, "apply_rigid");
  if (!t.is_finite()) {
    throw std::invalid_argument("apply_rigid: non-finite transform parameters");
  }
}

} // namespace

SliceResampler::SliceResampler(MultiEchoVolume const &image)
    : dims_(image.dims()), voxel_size_mm_(image.voxel_size_mm()), data_(image.dims().size()) {
  require_space(image, Space::Image, "apply_rigid");
  std::size_t const n = dims_.slices * dims_.plane();
  auto const src = image.data();
  for (std::size_t e = 0; e < dims_.echoes; ++e) {
    for (std::size_t i = 0; i < n; ++i) {
      data_[i * dims_.echoes + e] = cdouble(src[e * n + i]);
    }
  }
}

void SliceResampler::resample(RigidTransform const &t, std::size_t slice, std::vector<cdouble> &out) const {
  if (!t.is_finite()) {
    throw std::invalid_argument("apply_rigid: non-finite transform parameters");
  }
  auto const &d = dims_;
  if (slice >= d.slices) {
    throw std::out_of_range("apply_rigid_slice: slice index out of range");
  }
  out.assign(d.echoes * d.plane(), cdouble{});
  std::size_t const E = d.echoes;
  if (t.is_identity()) {
    for (std::size_t i = 0; i < d.plane(); ++i) {
      for (std::size_t e = 0; e < E; ++e) {
        out[e * d.plane() + i] = data_[(slice * d.plane() + i) * E + e];
      }
    }
    return;
  }
  SourceMap const map(d, voxel_size_mm_, t);
  std::vector<cdouble> acc(E);
  for (std::size_t p = 0; p < d.lines; ++p) {
    for (std::size_t r = 0; r < d.readout; ++r) {
      Stencil const st = make_stencil(
          map.source(static_cast<double>(r), static_cast<double>(p), static_cast<double>(slice)), d);
      if (st.count == 0) {
        continue;
      }
      std::fill(acc.begin(), acc.end(), cdouble{});
      for (int k = 0; k < st.count; ++k) {
        cdouble const *src = data_.data() + st.offset[k] * E;
        double const w = st.weight[k];
        for (std::size_t e = 0; e < E; ++e) {
          acc[e] += w * src[e];
        }
      }
      for (std::size_t e = 0; e < E; ++e) {
        out[e * d.plane() + p * d.readout + r] = acc[e];
      }
    }
  }
}

void apply_rigid_slice(MultiEchoVolume const &image, RigidTransform const &t, std::size_t slice,
                       std::vector<cdouble> &out) {
  check_input(image, t);
  SliceResampler(image).resample(t, slice, out);
}

MultiEchoVolume apply_rigid(MultiEchoVolume const &image, RigidTransform const &t) {
  check_input(image, t);
  if (t.is_identity()) {
    return image;
  }
  auto const &d = image.dims();
  SliceResampler const resampler(image);
  std::vector<cfloat> out(d.size());
  std::vector<cdouble> slice_buf;
  for (std::size_t s = 0; s < d.slices; ++s) {
    resampler.resample(t, s, slice_buf);
    for (std::size_t e = 0; e < d.echoes; ++e) {
      std::size_t const dst = image.index(e, s, 0, 0);
      for (std::size_t i = 0; i < d.plane(); ++i) {
        out[dst + i] = cfloat(slice_buf[e * d.plane() + i]);
      }
    }
  }
  return image.with_data(Space::Image, std::move(out));
}

} // namespace t2motion::motion
