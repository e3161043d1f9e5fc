#include "t2motion/motion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

namespace t2motion::motion {

namespace {
constexpr char const *kCurveHeader = "t_s,tx_mm,ty_mm,tz_mm,rx_deg,ry_deg,rz_deg";
}

MotionCurve::MotionCurve(std::vector<double> t_s, std::vector<RigidTransform> params)
    : t_s_(std::move(t_s)), params_(std::move(params)) {
  if (t_s_.size() < 2) {
    throw std::invalid_argument("motion curve needs at least 2 samples");
  }
  if (t_s_.size() != params_.size()) {
    throw std::invalid_argument("motion curve: time and parameter counts differ");
  }
  for (std::size_t i = 1; i < t_s_.size(); ++i) {
    if (!(t_s_[i] > t_s_[i - 1])) {
      throw std::invalid_argument("motion curve: sample times not strictly increasing");
    }
  }
}

std::size_t MotionCurve::nearest_index(double t) const {
  auto const it = std::lower_bound(t_s_.begin(), t_s_.end(), t);
  if (it == t_s_.begin()) {
    return 0;
  }
  if (it == t_s_.end()) {
    return t_s_.size() - 1;
  }
  auto const hi = static_cast<std::size_t>(it - t_s_.begin());
  return (t - t_s_[hi - 1] <= t_s_[hi] - t) ? hi - 1 : hi;
}

std::vector<double> MotionCurve::displacements(double radius_mm) const {
  std::vector<double> out;
  out.reserve(params_.size());
  for (auto const &p : params_) {
    out.push_back(sphere_displacement(p, radius_mm));
  }
  return out;
}

double MotionCurve::mean_displacement(double radius_mm) const {
  auto const d = displacements(radius_mm);
  return std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
}

std::size_t median_state_index(MotionCurve const &curve, double radius_mm) {
  auto const d = curve.displacements(radius_mm);
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  return order[(order.size() - 1) / 2];
}

MotionCurve recenter_to_median(MotionCurve const &curve, double radius_mm) {
  RigidTransform const inv = inverse(curve[median_state_index(curve, radius_mm)]);
  std::vector<RigidTransform> params;
  params.reserve(curve.size());
  for (auto const &p : curve.params()) {
    params.push_back(compose(inv, p));
  }
  return MotionCurve(curve.times(), std::move(params));
}

MotionCurve resample_nearest(MotionCurve const &curve, std::vector<double> const &grid) {
  std::vector<RigidTransform> params;
  params.reserve(grid.size());
  for (double t : grid) {
    params.push_back(curve.at(t));
  }
  return MotionCurve(grid, std::move(params));
}

void write_curve_csv(MotionCurve const &curve, std::ostream &out) {
  out << "# rotation_order=Rz*Ry*Rx\n";
  out << "# pivot=volume_centre\n";
  out << kCurveHeader << '\n';
  out << std::setprecision(17);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    auto const &p = curve[i];
    out << curve.times()[i] << ',' << p.translation_mm.x() << ',' << p.translation_mm.y() << ','
        << p.translation_mm.z() << ',' << p.rotation_deg.x() << ',' << p.rotation_deg.y() << ','
        << p.rotation_deg.z() << '\n';
  }
}

void write_curve(MotionCurve const &curve, std::filesystem::path const &path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  }
  write_curve_csv(curve, out);
}

MotionCurve read_curve_csv(std::istream &in) {
  std::string line;
  bool header_seen = false;
  std::vector<double> t_s;
  std::vector<RigidTransform> params;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty() || line.front() == '#') {
      continue;
    }
    if (!header_seen) {
      if (line != kCurveHeader) {
        throw std::runtime_error("motion curve: unexpected header '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    std::string cell;
    double v[7];
    int n = 0;
    while (std::getline(row, cell, ',')) {
      if (n >= 7) {
        ++n;
        break;
      }
      try {
        std::size_t used = 0;
        v[n] = std::stod(cell, &used);
        if (used != cell.size()) {
          throw std::invalid_argument(cell);
        }
      } catch (std::exception const &) {
        throw std::runtime_error("motion curve: bad number on line " + std::to_string(line_no));
      }
      ++n;
    }
    if (n != 7) {
      throw std::runtime_error("motion curve: expected 7 columns on line " + std::to_string(line_no));
    }
    t_s.push_back(v[0]);
    RigidTransform t;
    t.translation_mm = {v[1], v[2], v[3]};
    t.rotation_deg = {v[4], v[5], v[6]};
    params.push_back(t);
  }
  if (!header_seen) {
    throw std::runtime_error("motion curve: missing header");
  }
  return MotionCurve(std::move(t_s), std::move(params));
}

MotionCurve read_curve(std::filesystem::path const &path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() + "'");
  }
  return read_curve_csv(in);
}

} // namespace t2motion::motion
