// SPDX-License-Identifier: Apache-2.0

#include "stefanlab/lattice.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "stefanlab/error.hpp"
#include "stefanlab/parallel.hpp"

namespace stefanlab {

double distance(const Point& a, const Point& b, int dim) {
  const double d0 = a[0] - b[0];
  if (dim == 1) return std::abs(d0);
  const double d1 = a[1] - b[1];
  return std::sqrt(d0 * d0 + d1 * d1);
}

LatticeIndex Grid::lattice_index(std::size_t node) const {
  const long n = static_cast<long>(node);
  if (dim == 1) return {n, 0};
  return {n % count[0], n / count[0]};
}

Point Grid::coord(const LatticeIndex& ij) const {
  Point x{origin[0] + static_cast<double>(ij[0]) * h, 0.0};
  if (dim == 2) x[1] = origin[1] + static_cast<double>(ij[1]) * h;
  return x;
}

bool Grid::in_box(const LatticeIndex& ij) const {
  if (ij[0] < 0 || ij[0] >= count[0]) return false;
  if (dim == 2 && (ij[1] < 0 || ij[1] >= count[1])) return false;
  return true;
}

std::size_t Grid::linear(const LatticeIndex& ij) const {
  if (dim == 1) return static_cast<std::size_t>(ij[0]);
  return static_cast<std::size_t>(ij[0] + count[0] * ij[1]);
}

double Grid::diameter() const {
  const double a = static_cast<double>(count[0] - 1) * h;
  if (dim == 1) return a;
  const double b = static_cast<double>(count[1] - 1) * h;
  return std::sqrt(a * a + b * b);
}

void Grid::validate() const {
  if (dim != 1 && dim != 2) throw Error(Errc::invalid_argument, "grid dimension must be 1 or 2");
  if (!(h > 0.0)) throw Error(Errc::invalid_argument, "grid spacing must be positive");
  if (count[0] < 2 || (dim == 2 && count[1] < 2)) {
    throw Error(Errc::invalid_argument, "grid needs at least 2 nodes per axis");
  }
  if (!(r_inf >= h)) throw Error(Errc::invalid_argument, "truncation radius must be at least one spacing");
}

Grid Grid::line(double lo, double hi, long nodes, double r_inf) {
  Grid g;
  g.dim = 1;
  g.count = {nodes, 1};
  g.origin = {lo, 0.0};
  g.h = (hi - lo) / static_cast<double>(nodes - 1);
  g.r_inf = r_inf;
  g.validate();
  return g;
}

Grid Grid::square(double lo, double hi, long nodes_per_axis, double r_inf) {
  Grid g;
  g.dim = 2;
  g.count = {nodes_per_axis, nodes_per_axis};
  g.origin = {lo, lo};
  g.h = (hi - lo) / static_cast<double>(nodes_per_axis - 1);
  g.r_inf = r_inf;
  g.validate();
  return g;
}

KernelSpec KernelSpec::constant(double value, double lambda) {
  return {lambda, [value](const Point&, const Point&, double) { return value; }};
}

KernelSpec KernelSpec::sinusoidal() {
  return {2.0, [](const Point& x, const Point& y, double) { return 1.0 + 0.5 * std::sin(x[0] + y[0]); }};
}

ExteriorRule ExteriorRule::constant(double c) {
  return {[c](const Point&, double) { return c; }, c};
}

void check_exponents(double s, double p) {
  if (!(p > 2.0)) throw Error(Errc::invalid_exponent, "p must exceed 2");
  if (!(s > 0.0 && s < 1.0)) throw Error(Errc::invalid_exponent, "s must lie in (0,1)");
}

double unit_sphere_measure(int dim) { return dim == 1 ? 2.0 : 2.0 * std::numbers::pi; }

double exterior_weight(int dim, double radius, double s, double p) {
  const double sp = s * p;
  return unit_sphere_measure(dim) * std::pow(radius, -sp) / sp;
}

Stencil Stencil::build(const Grid& grid, double s, double p) {
  check_exponents(s, p);
  grid.validate();
  const long reach = static_cast<long>(std::floor(grid.r_inf / grid.h)) + 1;
  const double exponent = grid.dim + s * p;
  Stencil st;
  const long lo1 = grid.dim == 2 ? -reach : 0;
  const long hi1 = grid.dim == 2 ? reach : 0;
  for (long o1 = lo1; o1 <= hi1; ++o1) {
    for (long o0 = -reach; o0 <= reach; ++o0) {
      if (o0 == 0 && o1 == 0) continue;
      const double d0 = static_cast<double>(o0) * grid.h;
      const double d1 = static_cast<double>(o1) * grid.h;
      const double d = std::sqrt(d0 * d0 + d1 * d1);
      if (d > grid.r_inf) continue;
      st.offset.push_back({o0, o1});
      st.distance.push_back(d);
      st.weight.push_back(grid.cell_volume() / std::pow(d, exponent));
    }
  }
  return st;
}

std::vector<double> apply_operator(const Grid& grid, std::span<const double> values,
                                   const ExteriorRule& exterior, double t, const KernelSpec& kernel,
                                   double s, double p, std::span<const std::uint8_t> eval_mask,
                                   bool far_field, int threads) {
  check_exponents(s, p);
  if (values.size() != grid.size()) throw Error(Errc::invalid_argument, "field size does not match grid");
  if (!eval_mask.empty() && eval_mask.size() != grid.size()) {
    throw Error(Errc::invalid_argument, "evaluation mask size does not match grid");
  }
  const Stencil st = Stencil::build(grid, s, p);
  const double far_w = exterior_weight(grid.dim, grid.r_inf, s, p);
  std::vector<double> out(grid.size(), 0.0);
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    if (!eval_mask.empty() && !eval_mask[i]) return;
    const LatticeIndex ij = grid.lattice_index(i);
    const Point xi = grid.coord(ij);
    const double ui = values[i];
    double acc = 0.0;
    for (std::size_t m = 0; m < st.size(); ++m) {
      const LatticeIndex jj{ij[0] + st.offset[m][0], ij[1] + st.offset[m][1]};
      const Point xj = grid.coord(jj);
      const double uj = grid.in_box(jj) ? values[grid.linear(jj)] : exterior(xj, t);
      acc += phi_p(ui - uj, p) * kernel(xi, xj, t) * st.weight[m];
    }
    if (far_field) {
      const Point xf{xi[0] + grid.r_inf, xi[1]};
      acc += phi_p(ui - exterior.far_value, p) * kernel(xi, xf, t) * far_w;
    }
    out[i] = acc;
  });
  return out;
}

namespace {

// Exact integral of d^{-1-sp} over distances [a, b] clipped to (rho, r_inf].
double radial_piece(double a, double b, double rho, double r_inf, double sp) {
  a = std::max(a, rho);
  b = std::min(b, r_inf);
  if (!(b > a)) return 0.0;
  return (std::pow(a, -sp) - std::pow(b, -sp)) / sp;
}

}  // namespace

double tail(const SpaceTimeSamples& samples, const Point& x0, double rho, double t_lo, double t_hi,
            double s, double p, const std::function<double(double)>& transform) {
  check_exponents(s, p);
  if (!(rho > 0.0)) throw Error(Errc::invalid_argument, "tail radius must be positive");
  const Grid& grid = *samples.grid;
  if (!(grid.r_inf > rho)) throw Error(Errc::invalid_argument, "truncation radius must exceed the tail radius");
  const double sp = s * p;
  const auto f = [&](double u) { return std::pow(std::abs(transform ? transform(u) : u), p - 1.0); };

  // Lattice sites that can contribute, as index ranges around x0.
  std::array<long, 2> lo{0, 0};
  std::array<long, 2> hi{0, 0};
  for (int a = 0; a < grid.dim; ++a) {
    lo[a] = static_cast<long>(std::floor((x0[a] - grid.r_inf - grid.origin[a]) / grid.h)) - 1;
    hi[a] = static_cast<long>(std::ceil((x0[a] + grid.r_inf - grid.origin[a]) / grid.h)) + 1;
  }

  double best = -1.0;
  for (std::size_t m = 0; m < samples.times.size(); ++m) {
    const double t = samples.times[m];
    if (t < t_lo || t > t_hi) continue;
    const std::vector<double>& u = samples.fields[m];
    double acc = 0.0;
    for (long i1 = lo[1]; i1 <= hi[1]; ++i1) {
      for (long i0 = lo[0]; i0 <= hi[0]; ++i0) {
        const LatticeIndex ij{i0, i1};
        const Point y = grid.coord(ij);
        double w = 0.0;
        if (grid.dim == 1) {
          const double c_lo = y[0] - 0.5 * grid.h - x0[0];
          const double c_hi = y[0] + 0.5 * grid.h - x0[0];
          if (c_hi > 0.0) w += radial_piece(std::max(c_lo, 0.0), c_hi, rho, grid.r_inf, sp);
          if (c_lo < 0.0) w += radial_piece(std::max(-c_hi, 0.0), -c_lo, rho, grid.r_inf, sp);
        } else {
          const double d = distance(y, x0, 2);
          if (d > rho && d <= grid.r_inf) w = grid.cell_volume() / std::pow(d, 2.0 + sp);
        }
        if (w == 0.0) continue;
        const double val = grid.in_box(ij) ? u[grid.linear(ij)] : (*samples.exterior)(y, t);
        acc += f(val) * w;
      }
    }
    acc += f(samples.exterior->far_value) * exterior_weight(grid.dim, grid.r_inf, s, p);
    const double value = std::pow(std::pow(rho, sp) * acc, 1.0 / (p - 1.0));
    best = std::max(best, value);
  }
  if (best < 0.0) throw Error(Errc::empty_window, "no stored time in the tail window");
  return best;
}

KernelAuditReport kernel_audit(const KernelSpec& kernel, int dim, std::size_t samples,
                               std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(lo, hi);
  std::uniform_real_distribution<double> time(0.0, 1.0);
  KernelAuditReport r;
  r.samples = samples;
  for (std::size_t n = 0; n < samples; ++n) {
    Point x{pos(rng), dim == 2 ? pos(rng) : 0.0};
    Point y{pos(rng), dim == 2 ? pos(rng) : 0.0};
    const double t = time(rng);
    const double kxy = kernel(x, y, t);
    const double kyx = kernel(y, x, t);
    r.max_symmetry_defect = std::max(r.max_symmetry_defect, std::abs(kxy - kyx));
    for (double v : {kxy, kyx}) {
      if (v < 1.0 / kernel.lambda) ++r.lower_bound_violations;
      if (v > kernel.lambda) ++r.upper_bound_violations;
    }
  }
  return r;
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_field_csv(const std::filesystem::path& path, const Grid& grid, std::span<const double> values) {
  if (values.size() != grid.size()) throw Error(Errc::invalid_argument, "field size does not match grid");
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot open " + path.string());
  out << (grid.dim == 1 ? "index,x,value\n" : "index,x,y,value\n");
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Point x = grid.coord(i);
    out << i << ',' << fmt17(x[0]) << ',';
    if (grid.dim == 2) out << fmt17(x[1]) << ',';
    out << fmt17(values[i]) << '\n';
  }
  if (!out) throw Error(Errc::io, "write failed for " + path.string());
}

std::vector<double> read_field_csv(const std::filesystem::path& path, const Grid& grid) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<double> values(grid.size(), 0.0);
  std::vector<bool> seen(grid.size(), false);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != static_cast<std::size_t>(grid.dim + 2)) {
      throw Error(Errc::io, "malformed field row in " + path.string());
    }
    const std::size_t idx = std::stoul(cells.front());
    if (idx >= grid.size() || seen[idx]) throw Error(Errc::io, "bad node index in " + path.string());
    values[idx] = std::stod(cells.back());
    seen[idx] = true;
    ++rows;
  }
  if (rows != grid.size()) throw Error(Errc::io, "field file has wrong node count: " + path.string());
  return values;
}

void write_field_binary(const std::filesystem::path& path, std::span<const double> values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot open " + path.string());
  for (double v : values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    out.write(bytes, 8);
  }
  if (!out) throw Error(Errc::io, "write failed for " + path.string());
}

std::vector<double> read_field_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::vector<double> values;
  char bytes[8];
  while (in.read(bytes, 8)) {
    std::uint64_t bits;
    std::memcpy(&bits, bytes, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    values.push_back(std::bit_cast<double>(bits));
  }
  if (in.gcount() != 0) throw Error(Errc::io, "truncated binary field " + path.string());
  return values;
}

}  // namespace stefanlab
