// SPDX-License-Identifier: Apache-2.0

#ifndef STEFANLAB_LATTICE_HPP
#define STEFANLAB_LATTICE_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace stefanlab {

using Point = std::array<double, 2>;
using LatticeIndex = std::array<long, 2>;

double distance(const Point& a, const Point& b, int dim);

/// Uniform lattice on the computational box, x = origin + i h. Nodes are
/// numbered with axis 0 fastest. Summations reach lattice sites beyond the
/// box up to distance r_inf; those take values from the exterior rule.
struct Grid {
  int dim = 1;
  std::array<long, 2> count{1, 1};
  Point origin{0.0, 0.0};
  double h = 1.0;
  double r_inf = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(count[0] * (dim == 2 ? count[1] : 1)); }
  double cell_volume() const { return dim == 2 ? h * h : h; }
  LatticeIndex lattice_index(std::size_t node) const;
  Point coord(const LatticeIndex& ij) const;
  Point coord(std::size_t node) const { return coord(lattice_index(node)); }
  bool in_box(const LatticeIndex& ij) const;
  std::size_t linear(const LatticeIndex& ij) const;
  /// Diameter of the box spanned by the nodes.
  double diameter() const;
  /// Throws Errc::invalid_argument on a malformed grid.
  void validate() const;

  static Grid line(double lo, double hi, long nodes, double r_inf);
  static Grid square(double lo, double hi, long nodes_per_axis, double r_inf);

  bool operator==(const Grid&) const = default;
};

/// Symmetric kernel k(x, y, t) with Lambda^-1 <= k <= Lambda.
struct KernelSpec {
  using Fn = std::function<double(const Point&, const Point&, double)>;
  double lambda = 1.0;
  Fn k;

  double operator()(const Point& x, const Point& y, double t) const { return k(x, y, t); }

  static KernelSpec constant(double value = 1.0, double lambda = 1.0);
  /// 1 + sin(x0 + y0) / 2, bounded by Lambda = 2.
  static KernelSpec sinusoidal();
};

/// Values of the datum g outside the stored box and its constant value
/// beyond the truncation radius.
struct ExteriorRule {
  std::function<double(const Point&, double)> value;
  double far_value = 0.0;

  double operator()(const Point& x, double t) const { return value(x, t); }
  static ExteriorRule constant(double c);
};

inline double phi_p(double tau, double p) {
  const double a = tau < 0.0 ? -tau : tau;
  if (a == 0.0) return 0.0;
  return tau * std::pow(a, p - 2.0);
}

/// Throws Errc::invalid_exponent unless p > 2 and 0 < s < 1.
void check_exponents(double s, double p);

/// Surface measure of the unit sphere in R^n (2 for n = 1, 2 pi for n = 2).
double unit_sphere_measure(int dim);

/// Integral of |y|^{-n-sp} over |y| > radius.
double exterior_weight(int dim, double radius, double s, double p);

/// Lattice offsets within r_inf (origin excluded) with collocation weights
/// h^n / |d|^{n+sp}, sorted by ascending linear offset.
struct Stencil {
  std::vector<LatticeIndex> offset;
  std::vector<double> distance;
  std::vector<double> weight;

  static Stencil build(const Grid& grid, double s, double p);
  std::size_t size() const { return offset.size(); }
};

/// Evaluates (L u)(x_i) = sum_{j != i} phi_p(u_i - u_j) k(x_i, x_j, t) h^n / |x_i - x_j|^{n+sp}
/// over lattice sites within r_inf, plus the far-field integral against the
/// constant exterior value. Entries outside `eval_mask` (when given) are 0.
std::vector<double> apply_operator(const Grid& grid, std::span<const double> values,
                                   const ExteriorRule& exterior, double t, const KernelSpec& kernel,
                                   double s, double p, std::span<const std::uint8_t> eval_mask = {},
                                   bool far_field = true, int threads = 1);

/// Time-indexed fields on the box, the input to tail-type functionals.
struct SpaceTimeSamples {
  const Grid* grid = nullptr;
  std::span<const double> times;
  std::span<const std::vector<double>> fields;
  const ExteriorRule* exterior = nullptr;
};

/// sup over stored t in [t_lo, t_hi] of
///   (rho^{sp} int_{|y - x0| > rho} |f(y,t)|^{p-1} / |x0 - y|^{n+sp} dy)^{1/(p-1)}
/// with f = transform(u). In 1-D each lattice cell is integrated exactly
/// against the singular weight; in 2-D a midpoint rule is used. Beyond r_inf
/// the exterior far value is integrated analytically.
/// Throws Errc::empty_window when no stored time falls in the window.
double tail(const SpaceTimeSamples& samples, const Point& x0, double rho, double t_lo, double t_hi,
            double s, double p, const std::function<double(double)>& transform = {});

struct KernelAuditReport {
  std::size_t samples = 0;
  double max_symmetry_defect = 0.0;
  std::size_t lower_bound_violations = 0;
  std::size_t upper_bound_violations = 0;
  bool pass() const {
    return max_symmetry_defect == 0.0 && lower_bound_violations == 0 && upper_bound_violations == 0;
  }
};

/// Samples (x, y, t) uniformly in [lo, hi]^n x [lo, hi]^n x [0, 1].
KernelAuditReport kernel_audit(const KernelSpec& kernel, int dim, std::size_t samples,
                               std::uint64_t seed, double lo = -2.0, double hi = 2.0);

// Field serialization: CSV (index, coordinates, value) with 17 significant
// digits and a raw little-endian float64 dump in node order.
void write_field_csv(const std::filesystem::path& path, const Grid& grid, std::span<const double> values);
std::vector<double> read_field_csv(const std::filesystem::path& path, const Grid& grid);
void write_field_binary(const std::filesystem::path& path, std::span<const double> values);
std::vector<double> read_field_binary(const std::filesystem::path& path);

}  // namespace stefanlab

#endif
