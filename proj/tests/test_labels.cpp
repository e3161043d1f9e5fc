#include "t2motion/labels.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace t2motion;
using namespace t2motion::labels;

namespace {

MultiEchoVolume random_kspace(Dims d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, 3.0f);
  std::vector<cfloat> data(d.size());
  for (auto &v : data) {
    v = {g(rng), g(rng)};
  }
  std::vector<double> te(d.echoes);
  for (std::size_t e = 0; e < d.echoes; ++e) {
    te[e] = 5.0 * static_cast<double>(e + 1);
  }
  return MultiEchoVolume(d, {2, 2, 3}, te, Space::KSpace, std::move(data));
}

double line_energy(MultiEchoVolume const &v, std::size_t s, std::size_t p) {
  double sum = 0.0;
  for (std::size_t e = 0; e < v.dims().echoes; ++e) {
    for (std::size_t r = 0; r < v.dims().readout; ++r) {
      sum += std::norm(cdouble(v(e, s, p, r)));
    }
  }
  return sum;
}

double max_abs_diff(MultiEchoVolume const &a, MultiEchoVolume const &b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    m = std::max(m, static_cast<double>(std::abs(a.data()[i] - b.data()[i])));
  }
  return m;
}

} // namespace

TEST_CASE("per-line normalisation gives unit energy and flags zero lines") {
  auto v = random_kspace({4, 2, 6, 5}, 1);
  for (std::size_t e = 0; e < 4; ++e) {
    for (std::size_t r = 0; r < 5; ++r) {
      v(e, 1, 3, r) = {};
    }
  }
  auto const n = normalize_lines(v);
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t p = 0; p < 6; ++p) {
      if (s == 1 && p == 3) {
        CHECK(line_energy(n.kspace, s, p) == 0.0);
        CHECK(n.zero_flags[s * 6 + p] == 1);
      } else {
        CHECK(std::abs(line_energy(n.kspace, s, p) - 1.0) < 1e-6);
        CHECK(n.zero_flags[s * 6 + p] == 0);
      }
    }
  }
  CHECK(n.zero_count == 1);
}

TEST_CASE("normalisation is idempotent and scale invariant") {
  auto const v = random_kspace({3, 2, 8, 7}, 2);
  auto const once = normalize_lines(v).kspace;
  CHECK(max_abs_diff(normalize_lines(once).kspace, once) < 1e-6);
  std::vector<cfloat> scaled(v.data().begin(), v.data().end());
  for (auto &x : scaled) {
    x *= 10.0f;
  }
  CHECK(max_abs_diff(normalize_lines(v.with_data(Space::KSpace, scaled)).kspace, once) < 1e-6);
}

TEST_CASE("literal echo/PE normalisation mode") {
  auto const v = random_kspace({3, 2, 8, 7}, 3);
  auto const n = normalize_lines(v, NormAxes::EchoPe);
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t r = 0; r < 7; ++r) {
      double sum = 0.0;
      for (std::size_t e = 0; e < 3; ++e) {
        for (std::size_t p = 0; p < 8; ++p) {
          sum += std::norm(cdouble(n.kspace(e, s, p, r)));
        }
      }
      CHECK(std::abs(sum - 1.0) < 1e-6);
    }
  }
  CHECK(n.zero_flags.size() == 2u * 7u);
}

TEST_CASE("normalisation input checks") {
  auto v = random_kspace({1, 1, 2, 2}, 4);
  v.data()[0] = {std::nanf(""), 0.0f};
  CHECK_THROWS(normalize_lines(v));
  auto const img = random_kspace({1, 1, 2, 2}, 4);
  std::vector<cfloat> d(img.data().begin(), img.data().end());
  CHECK_THROWS_AS(normalize_lines(img.with_data(Space::Image, d)), VolumeError);
}

TEST_CASE("target labels threshold and invert displacements") {
  std::vector<double> const d{0.1, 0.6, 0.4};
  auto const m = make_target_labels(d, 1, 3, 0.5);
  CHECK(std::vector<std::uint8_t>(m.values().begin(), m.values().end()) == std::vector<std::uint8_t>{1, 0, 1});
  std::vector<double> const zeros(6, 0.0);
  CHECK(make_target_labels(zeros, 2, 3, 0.5).all_clean());
  std::vector<double> const boundary{0.5};
  CHECK(make_target_labels(boundary, 1, 1, 0.5)(0, 0) == 1);
  CHECK_THROWS(make_target_labels(d, 2, 3, 0.5));
}

TEST_CASE("per-echo labels average then round") {
  // Identical per-echo traces: same result as the single trace.
  std::vector<double> const d{0.1, 0.6, 0.4, 0.9};
  std::vector<std::vector<double>> const same(12, d);
  CHECK(make_target_labels(same, 2, 2, 0.5) == make_target_labels(d, 2, 2, 0.5));
  // Split vote: ties count as clean; a clear majority decides.
  std::vector<std::vector<double>> const tie{{0.1}, {0.9}};
  CHECK(make_target_labels(tie, 1, 1, 0.5)(0, 0) == 1);
  std::vector<std::vector<double>> const majority{{0.9}, {0.9}, {0.1}};
  CHECK(make_target_labels(majority, 1, 1, 0.5)(0, 0) == 0);
}

TEST_CASE("label CSV round trip and validation") {
  LineLabelMask const m(2, 4, std::vector<std::uint8_t>{1, 0, 0, 1, 1, 1, 1, 0});
  std::stringstream ss;
  write_labels_csv(m, ss, 0.5);
  CHECK(ss.str().find("# d_min_mm=0.5") != std::string::npos);
  CHECK(ss.str().find("1 = motion-free") != std::string::npos);
  CHECK(read_labels_csv(ss) == m);

  std::stringstream bad_value("1,0,2\n");
  CHECK_THROWS(read_labels_csv(bad_value));
  std::stringstream ragged("1,0,1\n1,0\n");
  CHECK_THROWS(read_labels_csv(ragged));
  std::stringstream empty("# nothing\n");
  CHECK_THROWS(read_labels_csv(empty));
}

TEST_CASE("mask accessors") {
  LineLabelMask m(2, 3);
  CHECK(m.all_clean());
  m.set(1, 2, 0);
  CHECK(!m.all_clean());
  CHECK(m.row(1)[2] == 0);
  CHECK_THROWS(m.set(0, 0, 2));
  CHECK_THROWS(LineLabelMask(1, 2, std::vector<std::uint8_t>{1}));
}
