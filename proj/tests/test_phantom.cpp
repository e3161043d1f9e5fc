#include "t2motion/phantom.hpp"

#include <doctest.h>

#include <cmath>

using namespace t2motion;
using namespace t2motion::phantom;

namespace {

// Single-tissue phantom: every voxel inside the head outline is `tissue`.
MultiEchoVolume uniform_phantom(double s0, double t2s, std::vector<double> te) {
  std::vector<TissueSpec> const tissues{{"scalp", s0, t2s, 0.0}};
  return make_phantom({te.size(), 3, 16, 16}, te, tissues, 0);
}

} // namespace

TEST_CASE("mono-exponential decay per voxel") {
  auto const v = uniform_phantom(100.0, 50.0, {0.0, 50.0});
  // Centre voxel is inside the head.
  CHECK(std::abs(v(0, 1, 8, 8)) == doctest::Approx(100.0).epsilon(1e-6));
  CHECK(std::abs(v(1, 1, 8, 8)) == doctest::Approx(100.0 / std::exp(1.0)).epsilon(1e-6));
  CHECK(std::abs(v(1, 1, 8, 8)) == doctest::Approx(36.79).epsilon(1e-4));
}

TEST_CASE("default phantom: magnitude strictly decreasing over echoes inside the brain") {
  PhantomSpec const spec;
  auto const v = make_phantom(spec, 1);
  CHECK(v.dims() == Dims{12, 30, 92, 112});
  std::size_t brain = 0;
  for (std::size_t s = 0; s < 30; ++s) {
    for (std::size_t p = 0; p < 92; ++p) {
      for (std::size_t r = 0; r < 112; ++r) {
        if (std::abs(v(0, s, p, r)) == 0.0f) {
          continue;
        }
        ++brain;
        for (std::size_t e = 1; e < 12; ++e) {
          REQUIRE(std::abs(v(e, s, p, r)) < std::abs(v(e - 1, s, p, r)));
        }
      }
    }
  }
  CHECK(brain > 30u * 92u * 112u / 2u);
}

TEST_CASE("phantom determinism and seed dependence") {
  PhantomSpec spec;
  spec.dims = {3, 6, 24, 20};
  spec.te_ms = PhantomSpec::default_echo_times(3);
  CHECK(make_phantom(spec, 7) == make_phantom(spec, 7));
  CHECK(!(make_phantom(spec, 7) == make_phantom(spec, 8)));
}

TEST_CASE("phantom errors and tissue selection") {
  CHECK_THROWS(make_phantom({1, 2, 8, 8}, {5.0}, {}, 0));
  CHECK_THROWS(make_phantom({1, 2, 8, 8}, {5.0}, {{"gm", 1.0, -1.0, 0.0}}, 0));
  CHECK_THROWS(make_phantom({2, 2, 8, 8}, {5.0}, default_tissues(), 0));
  // Unknown labels paint nothing.
  auto const empty = make_phantom({1, 2, 8, 8}, {5.0}, {{"bone", 1.0, 10.0, 0.0}}, 0);
  for (auto v : empty.data()) {
    CHECK(v == cfloat{});
  }
}

TEST_CASE("baseline phase is carried") {
  std::vector<TissueSpec> const tissues{{"scalp", 2.0, 40.0, 0.0}};
  std::vector<TissueSpec> const shifted{{"scalp", 2.0, 40.0, 1.0}};
  auto const a = make_phantom({1, 3, 16, 16}, {5.0}, tissues, 3);
  auto const b = make_phantom({1, 3, 16, 16}, {5.0}, shifted, 3);
  cdouble const ratio = cdouble(b(0, 1, 8, 8)) / cdouble(a(0, 1, 8, 8));
  CHECK(std::arg(ratio) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("k-space energy is concentrated at low frequencies") {
  PhantomSpec spec;
  spec.dims = {2, 8, 92, 112};
  spec.te_ms = PhantomSpec::default_echo_times(2);
  auto const k = fft2_per_slice(make_phantom(spec, 2));
  double inner = 0.0;
  double total = 0.0;
  for (std::size_t e = 0; e < 2; ++e) {
    for (std::size_t s = 0; s < 8; ++s) {
      for (std::size_t p = 0; p < 92; ++p) {
        for (std::size_t r = 0; r < 112; ++r) {
          double const en = std::norm(cdouble(k(e, s, p, r)));
          total += en;
          if (p >= 23 && p < 69 && r >= 28 && r < 84) {
            inner += en;
          }
        }
      }
    }
  }
  CHECK(inner / total >= 0.9);
}

TEST_CASE("background fraction") {
  Dims const d{1, 3, 4, 4};
  MultiEchoVolume v(d, {1, 1, 1}, {5.0}, Space::Image);
  CHECK(background_fraction(v, 0) == 1.0);
  for (std::size_t p = 0; p < 4; ++p) {
    for (std::size_t r = 0; r < 4; ++r) {
      v(0, 1, p, r) = {1.0f + static_cast<float>(r), 0.0f};
      v(0, 2, p, r) = p < 2 ? cfloat{} : cfloat{3.0f, 4.0f};
    }
  }
  CHECK(background_fraction(v, 1) == 0.0);
  CHECK(background_fraction(v, 2) == 0.5);
  CHECK_THROWS(background_fraction(v, 3));
  CHECK_THROWS(background_fraction(fft2_per_slice(v), 0));

  auto const ph = make_phantom(PhantomSpec{}, 0);
  CHECK(background_fraction(ph, 15) < kMaxBackgroundFraction);
  CHECK(background_fraction(ph, 0) > kMaxBackgroundFraction);
}
