// SPDX-License-Identifier: Apache-2.0

#ifndef STEFANLAB_ENTHALPY_HPP
#define STEFANLAB_ENTHALPY_HPP

#include <memory>
#include <vector>

namespace stefanlab {

/// Closed interval [lo, hi]; a singleton when lo == hi.
struct Interval {
  double lo;
  double hi;
  bool is_singleton() const { return lo == hi; }
};

/// Value of the Heaviside-type maximal monotone graph: {0} below zero,
/// {1} above, and the whole [0, 1] at the origin.
Interval beta_graph(double xi);

/// The even bump psi(t) = Z exp(-1 / (1 - t^2)) on (-1, 1), zero elsewhere,
/// normalized to unit mass. Holds cumulative tables of psi and t * psi so
/// that integrals up to an arbitrary point cost one short Gauss rule.
class Mollifier {
 public:
  static constexpr double support_halfwidth = 1.0;

  /// Shared immutable instance (built once, thread-safe).
  static const Mollifier& standard();

  explicit Mollifier(int table_cells = 1024);

  double normalization_constant() const { return z_; }
  int table_cells() const { return cells_; }

  double psi(double t) const;
  double psi_prime(double t) const;
  /// Integral of psi over (-1, t].
  double cdf(double t) const;
  /// Integral of cdf over (-1, t].
  double cdf_integral(double t) const;

 private:
  double raw_cumulative(const std::vector<double>& table, double t, bool first_moment) const;

  int cells_;
  double z_ = 0.0;
  std::vector<double> mass_;    // int_{-1}^{tau_k} psi, tau_k = -1 + k / cells on [-1, 0]
  std::vector<double> moment_;  // int_{-1}^{tau_k} t psi
};

/// beta_eps = beta * psi_eps, the diffeomorphism b = id + beta_eps and the
/// antiderivatives used by the implicit step. `scale` M realizes the
/// normalized enthalpy beta_eps(M xi) / M; M = 1 is the plain one.
class Enthalpy {
 public:
  explicit Enthalpy(double epsilon, double scale = 1.0);

  double epsilon() const { return eps_; }
  double scale() const { return scale_; }

  double beta(double xi) const;
  double beta_prime(double xi) const;
  /// Integral of beta over [0, xi].
  double beta_antiderivative(double xi) const;

  double b(double xi) const { return xi + beta(xi); }
  double b_prime(double xi) const { return 1.0 + beta_prime(xi); }
  /// Antiderivative of b vanishing at 0.
  double b_antiderivative(double xi) const { return 0.5 * xi * xi + beta_antiderivative(xi); }

  /// Solves b(xi) = y by safeguarded Newton on the bracket [y - 1, y].
  /// Throws Errc::no_convergence when the residual stays above 1e-10.
  double b_inverse(double y) const;
  double b_inverse(double y, double guess) const;

  /// Integral of beta'(xi) |xi - k| over the part of [k, u] (or [u, k]) on
  /// the truncation side: sign > 0 takes u > k, sign < 0 takes u < k.
  double latent_truncation(double u, double k, int sign) const;

 private:
  double eps_;
  double scale_;
  const Mollifier* moll_;
  double cdf_integral_at_zero_;
};

}  // namespace stefanlab

#endif
