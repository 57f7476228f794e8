#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "thermoflux/errors.hpp"
#include "thermoflux/material.hpp"

using thermoflux::ConfigError;
using thermoflux::MaterialModel;

namespace {

// Independent quadrature oracle for the Kirchhoff integral: composite Simpson
// over K(T)/k_ref evaluated directly from the coefficient vector.
double theta_by_quadrature(const std::vector<double>& k_coeffs, double t_hi) {
  const double t_lo = MaterialModel::kReferenceTemperature;
  const int n = 4096;  // even
  const double h = (t_hi - t_lo) / n;
  auto k_rel = [&](double t) {
    double acc = 0.0, p = 1.0;
    const double r = t / MaterialModel::kReferenceTemperature;
    for (double c : k_coeffs) {
      acc += c * p;
      p *= r;
    }
    return acc;
  };
  double sum = k_rel(t_lo) + k_rel(t_hi);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * k_rel(t_lo + i * h);
  return sum * h / 3.0;
}

}  // namespace

TEST_CASE("conductivity: constant-coefficient case") {
  MaterialModel m(0.20, {1.0}, 1.7e6, {1.0});
  CHECK(m.conductivity(350.0) == doctest::Approx(0.20).epsilon(1e-14));
}

TEST_CASE("conductivity: normalization at the reference temperature") {
  MaterialModel m(0.20, {0.0, 1.0}, 1.7e6, {1.0});
  CHECK(m.conductivity(MaterialModel::kReferenceTemperature) ==
        doctest::Approx(0.20).epsilon(1e-14));
}

TEST_CASE("conductivity: hand-evaluated polynomial at 2x reference") {
  // Wide range so 596.3 K is a legal evaluation point.
  MaterialModel m(0.20, {0.5, 0.5}, 1.7e6, {1.0}, 250.0, 700.0);
  CHECK(m.conductivity(2.0 * MaterialModel::kReferenceTemperature) ==
        doctest::Approx(0.30).epsilon(1e-14));
}

TEST_CASE("conductivity: out-of-range temperature names the value") {
  MaterialModel m(0.20, {1.0}, 1.7e6, {1.0});
  CHECK_THROWS_WITH_AS(m.conductivity(500.0),
                       doctest::Contains("500"), std::domain_error);
  CHECK_THROWS_AS(m.conductivity(100.0), std::domain_error);
}

TEST_CASE("volumetric heat capacity: constant, normalization, hand case") {
  MaterialModel constant(0.2, {1.0}, 1.7e6, {1.0});
  CHECK(constant.volumetric_heat_capacity(320.0) == doctest::Approx(1.7e6));

  MaterialModel normalized(0.2, {1.0}, 1.7e6, {0.0, 1.0});
  CHECK(normalized.volumetric_heat_capacity(MaterialModel::kReferenceTemperature) ==
        doctest::Approx(1.7e6).epsilon(1e-14));

  MaterialModel hand(0.2, {1.0}, 1.0e6, {0.25, 0.75}, 250.0, 700.0);
  CHECK(hand.volumetric_heat_capacity(2.0 * MaterialModel::kReferenceTemperature) ==
        doctest::Approx(1.75e6).epsilon(1e-14));
}

TEST_CASE("kirchhoff_theta: constant K reduces to T - Tref") {
  MaterialModel m(0.20, {1.0}, 1.7e6, {1.0});
  CHECK(m.kirchhoff_theta(350.0) == doctest::Approx(51.85).epsilon(1e-12));
  CHECK(m.kirchhoff_theta(MaterialModel::kReferenceTemperature) == 0.0);
}

TEST_CASE("kirchhoff_theta: linear K closed form matches quadrature oracle") {
  MaterialModel m(0.20, {0.0, 1.0}, 1.7e6, {1.0});
  const double closed = m.kirchhoff_theta(350.0);
  const double tref = MaterialModel::kReferenceTemperature;
  CHECK(closed == doctest::Approx((350.0 * 350.0 - tref * tref) / (2.0 * tref))
                      .epsilon(1e-13));
  CHECK(closed == doctest::Approx(theta_by_quadrature({0.0, 1.0}, 350.0))
                      .epsilon(1e-12));
}

TEST_CASE("kirchhoff_inverse: linear case, zero, and round trip") {
  MaterialModel constant(0.20, {1.0}, 1.7e6, {1.0});
  CHECK(constant.kirchhoff_inverse(51.85) == doctest::Approx(350.0).epsilon(1e-12));
  CHECK(constant.kirchhoff_inverse(0.0) ==
        doctest::Approx(MaterialModel::kReferenceTemperature).epsilon(1e-14));

  MaterialModel linear(0.20, {0.0, 1.0}, 1.7e6, {1.0});
  const double theta = linear.kirchhoff_theta(350.0);
  CHECK(linear.kirchhoff_inverse(theta) == doctest::Approx(350.0).epsilon(1e-11));
}

TEST_CASE("kirchhoff_inverse: theta outside the image is a range error") {
  MaterialModel m(0.20, {1.0}, 1.7e6, {1.0});
  CHECK_THROWS_AS(m.kirchhoff_inverse(1.0e4), std::out_of_range);
  CHECK_THROWS_AS(m.kirchhoff_inverse(-1.0e4), std::out_of_range);
}

TEST_CASE("property: round trip over 1000 sampled temperatures") {
  MaterialModel m(0.19, {0.2, 0.5, 0.3}, 1.7e6, {0.6, 0.4});
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> dist(250.0, 450.0);
  for (int i = 0; i < 1000; ++i) {
    const double t = dist(rng);
    CHECK(std::abs(m.kirchhoff_inverse(m.kirchhoff_theta(t)) - t) < 1e-9);
  }
}

TEST_CASE("property: theta strictly increasing") {
  MaterialModel m(0.19, {0.2, 0.5, 0.3}, 1.7e6, {1.0});
  double prev = m.kirchhoff_theta(250.0);
  for (int i = 1; i <= 200; ++i) {
    const double t = 250.0 + i * 1.0;
    const double cur = m.kirchhoff_theta(t);
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("property: conductivity at Tref equals k_ref for any unit-sum coefficients") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> dist(0.05, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> c(3);
    double s = 0.0;
    for (double& v : c) {
      v = dist(rng);
      s += v;
    }
    for (double& v : c) v /= s;
    // Renormalize the rounding tail onto the leading coefficient.
    double sum = 0.0;
    for (double v : c) sum += v;
    c[0] += 1.0 - sum;
    MaterialModel m(0.19, c, 1.7e6, {1.0});
    CHECK(m.conductivity(MaterialModel::kReferenceTemperature) ==
          doctest::Approx(0.19).epsilon(1e-14));
  }
}

TEST_CASE("property: dtheta/dt matches central differences of theta") {
  MaterialModel m(0.19, {0.2, 0.5, 0.3}, 1.7e6, {1.0});
  const double h = 1e-4;
  for (double t = 260.0; t <= 440.0; t += 7.3) {
    const double fd = (m.kirchhoff_theta(t + h) - m.kirchhoff_theta(t - h)) / (2.0 * h);
    const double analytic = m.dtheta_dt(t);
    CHECK(std::abs(fd - analytic) / std::abs(analytic) < 1e-8);
  }
}

TEST_CASE("validation: coefficient sums and positivity") {
  CHECK_THROWS_AS(MaterialModel(0.2, {0.5, 0.4}, 1.7e6, {1.0}), ConfigError);
  CHECK_THROWS_AS(MaterialModel(0.2, {1.0}, 1.7e6, {0.9, 0.2}), ConfigError);
  CHECK_THROWS_AS(MaterialModel(-0.2, {1.0}, 1.7e6, {1.0}), ConfigError);
  CHECK_THROWS_AS(MaterialModel(0.2, {1.0}, -1.0, {1.0}), ConfigError);
  // K crosses zero inside the range: a = [3, -2] vanishes at T/Tref = 1.5.
  CHECK_THROWS_AS(MaterialModel(0.2, {3.0, -2.0}, 1.7e6, {1.0}), ConfigError);
}
