// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <doctest.h>

#include "stefanlab/enthalpy.hpp"

using namespace stefanlab;

namespace {

// Independent quadrature of the unnormalized bump.
double bump_mass() {
  boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate([](double t) { return std::exp(-1.0 / (1.0 - t * t)); }, -1.0, 1.0);
}

}  // namespace

TEST_CASE("two-valued graph") {
  CHECK(beta_graph(1.0).is_singleton());
  CHECK(beta_graph(1.0).lo == 1.0);
  CHECK(beta_graph(-1.0).hi == 0.0);
  const Interval mid = beta_graph(0.0);
  CHECK(mid.lo == 0.0);
  CHECK(mid.hi == 1.0);
}

TEST_CASE("mollifier normalization matches quadrature") {
  const Mollifier& m = Mollifier::standard();
  const double mass = bump_mass();
  CHECK(mass == doctest::Approx(0.443994).epsilon(1e-5));
  CHECK(m.normalization_constant() == doctest::Approx(1.0 / mass).epsilon(1e-12));
  CHECK(m.normalization_constant() == doctest::Approx(2.25228).epsilon(1e-5));
  CHECK(m.psi(1.0) == 0.0);
  CHECK(m.psi(-1.0) == 0.0);
  CHECK(m.cdf(1.0) == doctest::Approx(1.0).epsilon(1e-12));

  // Scaled bump psi_eps(x) = psi(x / eps) / eps integrates to one as well.
  boost::math::quadrature::tanh_sinh<double> q;
  const double eps = 0.05;
  const double scaled = q.integrate([&](double x) { return m.psi(x / eps) / eps; }, -eps, eps);
  CHECK(std::abs(scaled - 1.0) < 1e-10);
}

TEST_CASE("beta_eps values") {
  const Enthalpy e(0.1);
  CHECK(e.beta(0.2) == 1.0);
  CHECK(e.beta(-0.2) == 0.0);
  CHECK(e.beta(0.1) == 1.0);
  CHECK(e.beta(-0.1) == 0.0);
  CHECK(std::abs(e.beta(0.0) - 0.5) < 1e-10);
  CHECK(e.beta_prime(0.15) == 0.0);
  CHECK(e.beta_prime(-0.15) == 0.0);
  const double Z = 1.0 / bump_mass();
  CHECK(e.beta_prime(0.0) == doctest::Approx(Z * std::exp(-1.0) / 0.1).epsilon(1e-10));
}

TEST_CASE("beta_eps' has unit mass") {
  for (double eps : {0.2, 0.1, 0.05, 0.01}) {
    const Enthalpy e(eps);
    boost::math::quadrature::tanh_sinh<double> q;
    const double mass = q.integrate([&](double x) { return e.beta_prime(x); }, -eps, eps);
    CHECK(std::abs(mass - 1.0) < 1e-8);
  }
}

TEST_CASE("monotonicity on a dense grid") {
  const Enthalpy e(0.05);
  double prev_beta = e.beta(-0.2);
  double prev_b = e.b(-0.2);
  double prev_x = -0.2;
  for (int k = 1; k <= 4000; ++k) {
    const double x = -0.2 + 0.4 * k / 4000.0;
    const double bx = e.beta(x);
    CHECK(bx >= prev_beta);
    CHECK(bx >= 0.0);
    CHECK(bx <= 1.0);
    CHECK(e.b(x) - prev_b >= (x - prev_x) - 1e-15);
    prev_beta = bx;
    prev_b = e.b(x);
    prev_x = x;
  }
}

TEST_CASE("b and its inverse") {
  const Enthalpy e(0.1);
  CHECK(e.b(0.5) == 1.5);
  CHECK(e.b(-0.5) == -0.5);
  CHECK(std::abs(e.b_inverse(1.5) - 0.5) < 1e-10);
  for (int k = 0; k <= 400; ++k) {
    const double x = -0.3 + 0.6 * k / 400.0;
    CHECK(std::abs(e.b_inverse(e.b(x)) - x) < 1e-10);
  }
}

TEST_CASE("antiderivatives agree with quadrature") {
  const Enthalpy e(0.1);
  boost::math::quadrature::tanh_sinh<double> q;
  for (double x : {-0.3, -0.05, 0.0, 0.03, 0.1, 0.4}) {
    const double ref = x == 0.0 ? 0.0 : q.integrate([&](double t) { return e.beta(t); }, std::min(0.0, x), std::max(0.0, x));
    CHECK(e.beta_antiderivative(x) == doctest::Approx(x < 0.0 ? -ref : ref).epsilon(1e-9));
  }
}

TEST_CASE("normalized enthalpy") {
  const Enthalpy plain(0.1);
  const Enthalpy scaled(0.1, 2.0);
  for (double x : {-0.1, -0.02, 0.0, 0.01, 0.04}) {
    CHECK(scaled.beta(x) == doctest::Approx(plain.beta(2.0 * x) / 2.0).epsilon(1e-14));
  }
}

TEST_CASE("latent part of the truncated energy") {
  const Enthalpy e(0.1);
  // Above the transition layer beta' is zero, so nothing is left.
  CHECK(e.latent_truncation(0.7, 0.1, 1) == 0.0);
  CHECK(e.latent_truncation(-0.7, -0.1, -1) == 0.0);
  boost::math::quadrature::tanh_sinh<double> q;
  const double ref = q.integrate([&](double x) { return e.beta_prime(x) * (x - 0.0); }, 0.0, 0.08);
  CHECK(e.latent_truncation(0.08, 0.0, 1) == doctest::Approx(ref).epsilon(1e-8));
  const double ref_minus = q.integrate([&](double x) { return e.beta_prime(x) * (0.02 - x); }, -0.06, 0.02);
  CHECK(e.latent_truncation(-0.06, 0.02, -1) == doctest::Approx(ref_minus).epsilon(1e-8));
}
