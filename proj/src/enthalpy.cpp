// SPDX-License-Identifier: Apache-2.0

#include "stefanlab/enthalpy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "stefanlab/error.hpp"

namespace stefanlab {

namespace {

using Gauss = boost::math::quadrature::gauss<double, 15>;

double bump(double t) {
  const double q = 1.0 - t * t;
  if (q <= 0.0) return 0.0;
  return std::exp(-1.0 / q);
}

}  // namespace

Interval beta_graph(double xi) {
  if (xi > 0.0) return {1.0, 1.0};
  if (xi < 0.0) return {0.0, 0.0};
  return {0.0, 1.0};
}

const Mollifier& Mollifier::standard() {
  static const Mollifier instance;
  return instance;
}

Mollifier::Mollifier(int table_cells) : cells_(table_cells) {
  if (cells_ < 8) throw Error(Errc::invalid_argument, "mollifier table needs at least 8 cells");
  mass_.assign(cells_ + 1, 0.0);
  moment_.assign(cells_ + 1, 0.0);
  const double w = 1.0 / cells_;
  for (int k = 0; k < cells_; ++k) {
    const double a = -1.0 + k * w;
    const double c = a + w;
    mass_[k + 1] = mass_[k] + Gauss::integrate(bump, a, c);
    moment_[k + 1] = moment_[k] + Gauss::integrate([](double t) { return t * bump(t); }, a, c);
  }
  // Even bump: the half-line mass is half the total.
  z_ = 1.0 / (2.0 * mass_[cells_]);
  for (auto& v : mass_) v *= z_;
  for (auto& v : moment_) v *= z_;
}

double Mollifier::psi(double t) const { return z_ * bump(t); }

double Mollifier::psi_prime(double t) const {
  const double q = 1.0 - t * t;
  if (q <= 0.0) return 0.0;
  return psi(t) * (-2.0 * t / (q * q));
}

double Mollifier::raw_cumulative(const std::vector<double>& table, double t,
                                 bool first_moment) const {
  // t in [-1, 0]
  const double pos = (t + 1.0) * cells_;
  int k = static_cast<int>(std::floor(pos));
  k = std::clamp(k, 0, cells_ - 1);
  const double a = -1.0 + static_cast<double>(k) / cells_;
  if (t <= a) return table[k];
  const double piece =
      first_moment ? Gauss::integrate([this](double s) { return s * psi(s); }, a, t)
                   : Gauss::integrate([this](double s) { return psi(s); }, a, t);
  return table[k] + piece;
}

double Mollifier::cdf(double t) const {
  if (t <= -1.0) return 0.0;
  if (t >= 1.0) return 1.0;
  if (t > 0.0) return 1.0 - cdf(-t);
  return std::clamp(raw_cumulative(mass_, t, false), 0.0, 0.5);
}

double Mollifier::cdf_integral(double t) const {
  if (t <= -1.0) return 0.0;
  if (t >= 1.0) return t;
  if (t > 0.0) return t + cdf_integral(-t);
  // Integration by parts: int_{-1}^t cdf = t cdf(t) - int_{-1}^t s psi(s) ds.
  return t * cdf(t) - raw_cumulative(moment_, t, true);
}

Enthalpy::Enthalpy(double epsilon, double scale)
    : eps_(epsilon), scale_(scale), moll_(&Mollifier::standard()) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(Errc::invalid_argument, "epsilon must lie in (0,1), got " + std::to_string(epsilon));
  }
  if (!(scale > 0.0)) throw Error(Errc::invalid_argument, "enthalpy scale must be positive");
  cdf_integral_at_zero_ = moll_->cdf_integral(0.0);
}

double Enthalpy::beta(double xi) const {
  const double x = scale_ * xi;
  if (x <= -eps_) return 0.0;
  if (x >= eps_) return 1.0 / scale_;
  return moll_->cdf(x / eps_) / scale_;
}

double Enthalpy::beta_prime(double xi) const {
  const double x = scale_ * xi;
  if (x <= -eps_ || x >= eps_) return 0.0;
  return moll_->psi(x / eps_) / eps_;
}

double Enthalpy::beta_antiderivative(double xi) const {
  const double x = scale_ * xi;
  const double m2 = scale_ * scale_;
  if (x <= -eps_) return -eps_ * cdf_integral_at_zero_ / m2;
  if (x >= eps_) return (x - eps_ * cdf_integral_at_zero_) / m2;
  return eps_ * (moll_->cdf_integral(x / eps_) - cdf_integral_at_zero_) / m2;
}

double Enthalpy::b_inverse(double y) const { return b_inverse(y, y); }

double Enthalpy::b_inverse(double y, double guess) const {
  double lo = y - 1.0 / scale_;
  double hi = y;
  double x = std::clamp(guess, lo, hi);
  constexpr int max_iter = 200;
  double r = b(x) - y;
  for (int it = 0; it < max_iter && r != 0.0; ++it) {
    if (r > 0.0) hi = x;
    else lo = x;
    double next = x - r / b_prime(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) {
      x = next;
      r = b(x) - y;
      break;
    }
    x = next;
    r = b(x) - y;
  }
  if (!(std::abs(r) <= 1e-10)) {
    throw Error(Errc::no_convergence,
                "b_inverse residual " + std::to_string(r) + " above 1e-10 for y=" + std::to_string(y));
  }
  return x;
}

double Enthalpy::latent_truncation(double u, double k, int sign) const {
  // beta' vanishes beyond the transition layer, so so does the integral.
  if (sign > 0) {
    if (u <= k || scale_ * k >= eps_) return 0.0;
    // [beta(xi)(xi - k)]_k^u - int_k^u beta
    const double v = beta(u) * (u - k) - (beta_antiderivative(u) - beta_antiderivative(k));
    return std::max(v, 0.0);
  }
  if (u >= k || scale_ * k <= -eps_) return 0.0;
  const double v = (beta_antiderivative(k) - beta_antiderivative(u)) - beta(u) * (k - u);
  return std::max(v, 0.0);
}

}  // namespace stefanlab
