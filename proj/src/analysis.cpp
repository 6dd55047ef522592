// SPDX-License-Identifier: Apache-2.0

#include "stefanlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stefanlab/error.hpp"
#include "stefanlab/parallel.hpp"

namespace stefanlab {

namespace {

template <class F>
void for_each_sample(const Trajectory& traj, const Cylinder& cyl, F&& f) {
  const Grid& grid = traj.grid;
  for (std::size_t m = 0; m < traj.times.size(); ++m) {
    if (!cyl.contains_time(traj.times[m], traj.s, traj.p)) continue;
    const std::vector<double>& u = traj.fields[m];
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (cyl.contains_point(grid.coord(i), grid.dim)) f(u[i]);
    }
  }
}

void require_at_least_four(std::initializer_list<double> values, const char* what) {
  for (double v : values) {
    if (!(v >= 4.0)) throw Error(Errc::invalid_params, std::string(what) + " constants must be at least 4");
  }
}

void check_common(const IterationParams& q) {
  check_exponents(q.s, q.p);
  if (!(q.omega0 >= 1.0)) throw Error(Errc::invalid_params, "omega0 must be at least 1");
  if (!(q.rho0 > 0.0)) throw Error(Errc::invalid_params, "rho0 must be positive");
  if (!(q.epsilon >= 0.0)) throw Error(Errc::invalid_params, "epsilon must be nonnegative");
  if (q.max_levels < 1) throw Error(Errc::invalid_params, "max_levels must be positive");
}

// Shared driver for the two De Giorgi recursions. `floor_of` supplies any
// extra lower bound for omega_{i+1} beyond 4 eps.
template <class Floor>
SequenceResult run_recursion(const IterationParams& q, double log_f1_den, double f2_den, double theta_exp,
                             Floor&& floor_of) {
  const double floor = 4.0 * q.epsilon;
  const double decay = std::pow(2.0, -q.s);
  const auto theta = [&](double w) { return std::pow(w / 4.0, theta_exp); };

  SequenceResult out;
  Level cur{0, std::log(q.rho0), q.omega0, theta(q.omega0)};
  out.levels.push_back(cur);
  for (int i = 1; i < q.max_levels; ++i) {
    if (cur.omega <= floor) {
      out.reached_floor = true;
      break;
    }
    const double w = cur.omega;
    Level next;
    next.index = i;
    next.log_rho = cur.log_rho + q.M1 * std::log(w) - log_f1_den;
    next.omega = std::max({w * (1.0 - std::pow(w, q.M2) / f2_den), w * decay, floor, floor_of(cur)});
    next.theta = theta(next.omega);
    if (next.log_duration(q.s, q.p) > cur.log_duration(q.s, q.p) || next.log_rho >= cur.log_rho) {
      out.nested = false;
    }
    out.levels.push_back(next);
    cur = next;
  }
  if (cur.omega <= floor) out.reached_floor = true;
  return out;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double e = y[k] - (f.intercept + f.slope * x[k]);
    ss += e * e;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

}  // namespace

double oscillation(const Trajectory& traj, const Cylinder& cyl) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for_each_sample(traj, cyl, [&](double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  });
  if (lo > hi) throw Error(Errc::empty_cylinder, "no stored sample inside the cylinder");
  return hi - lo;
}

double IterationParams::initial_contraction() const { return std::max(7.0 / 8.0, std::pow(2.0, -s)); }

double Level::rho() const { return std::exp(log_rho); }

double Level::log_duration(double s, double p) const { return std::log(theta) + s * p * log_rho; }

SequenceResult interior_sequences(const IterationParams& q) {
  require_at_least_four({q.M1, q.N1, q.M2, q.N2}, "interior");
  check_common(q);
  const double lw0 = std::log(q.omega0);
  return run_recursion(q, std::log(q.N1) + q.M1 * lw0, q.N2 * std::pow(q.omega0, q.M2), 2.0 - q.p,
                       [](const Level&) { return 0.0; });
}

SequenceResult boundary_sequences(const IterationParams& q, const DatumOscillation& osc_g) {
  require_at_least_four({q.M1, q.N1, q.L1, q.M2, q.N2, q.L2}, "boundary");
  if (!(q.N0 >= 1.0)) throw Error(Errc::invalid_params, "N0 must be at least 1");
  check_common(q);
  const double lw0 = std::log(q.omega0);
  return run_recursion(q, std::log(q.N0) + std::log(q.N1) + q.L1 * lw0, q.N2 * std::pow(q.omega0, q.L2),
                       1.0 - q.p, [&](const Level& l) { return osc_g ? 2.0 * osc_g(l) : 0.0; });
}

IterationParams boundary_parameters(int dim, double s, double p, double c_g, double delta, double R,
                                    double epsilon) {
  check_exponents(s, p);
  if (dim != 1 && dim != 2) throw Error(Errc::invalid_params, "dimension must be 1 or 2");
  if (!(c_g > 0.0) || !(delta > 0.0 && delta < 1.0) || !(R > 0.0)) {
    throw Error(Errc::invalid_params, "modulus needs c_g > 0, delta in (0,1), R > 0");
  }
  const double sp = s * p;
  IterationParams q;
  q.s = s;
  q.p = p;
  q.epsilon = epsilon;
  q.omega0 = 1.0;
  q.M2 = 4.0 + 1.0 / (p - 2.0);
  q.L2 = (2.0 + dim / sp) * q.M2;
  q.M1 = 4.0 + q.M2 * (p - 1.0) / sp;
  q.L1 = 4.0 + q.L2 * (p - 1.0) / sp;
  q.N1 = std::pow(4.0, 2.0 * (p - 1.0) / s) + 1.0;
  q.N2 = 16.0;
  q.rho0 = R / std::pow(4.0, (p - 1.0) / sp);
  // (1 + (i+1) L) / (2 + i) is monotone in i, so the i = 0 and i -> inf
  // ends decide: L >= 2K - 1 and L >= K with K = (2 c_g)^{1/delta}.
  const double K = std::pow(2.0 * c_g, 1.0 / delta);
  q.N0 = std::max(1.0, std::exp(std::max(2.0 * K - 1.0, K)));
  return q;
}

DatumOscillation log_modulus_oscillation(double c_g, double delta, double R, double s, double p) {
  const double sp = s * p;
  return [=](const Level& l) {
    // log of rho (1 + theta^{1/(sp)}) without leaving log space.
    const double log_r = l.log_rho + std::log1p(std::pow(l.theta, 1.0 / sp));
    const double ratio = std::max(std::log(R) - log_r, 0.0);
    return c_g * std::pow(1.0 + ratio, -delta);
  };
}

SequenceResult initial_sequences(const IterationParams& q, const DatumOscillation& osc_g) {
  if (!(q.N >= 4.0)) throw Error(Errc::invalid_params, "N must be at least 4");
  check_common(q);
  const double m = q.initial_contraction();
  const double lN = std::log(q.N);
  const auto theta = [&](double w) { return std::pow(w / 4.0, 2.0 - q.p); };

  SequenceResult out;
  Level cur{0, std::log(q.rho0), q.omega0, theta(q.omega0)};
  out.levels.push_back(cur);
  for (int i = 1; i < q.max_levels; ++i) {
    Level next;
    next.index = i;
    next.log_rho = cur.log_rho - lN;
    next.omega = std::max(m * cur.omega, osc_g ? 2.0 * osc_g(cur) : 0.0);
    if (!(next.omega > 0.0)) break;
    next.theta = theta(next.omega);
    if (next.log_duration(q.s, q.p) > cur.log_duration(q.s, q.p)) out.nested = false;
    out.levels.push_back(next);
    cur = next;
  }
  return out;
}

double lemma_iter_epsilon(double M2, double N2, double L2) {
  require_at_least_four({M2, N2, L2}, "lemma");
  if (L2 < M2) throw Error(Errc::invalid_params, "L2 must be at least M2");
  const double q = M2 * N2 * std::sqrt(N2 * N2 - 1.0);
  return 0.5 * std::min(1.0 / (2.0 * M2), std::log2(q / (q - 1.0)));
}

IterVerdict lemma_iter_verify(double M2, double N2, double L2, double omega0, long n_max,
                              std::optional<double> epsilon_override) {
  if (!(omega0 >= 1.0)) throw Error(Errc::invalid_params, "omega0 must be at least 1");
  if (n_max < 1) throw Error(Errc::invalid_params, "n_max must be positive");
  IterVerdict v;
  v.epsilon = epsilon_override ? *epsilon_override : lemma_iter_epsilon(M2, N2, L2);
  const double head = std::pow(omega0, L2 / M2);
  const double den = N2 * std::pow(omega0, L2);
  const auto a = [&](long n) { return head * std::pow(1.0 + static_cast<double>(n), -v.epsilon); };
  v.worst_margin = std::numeric_limits<double>::infinity();
  double prev = a(0);
  for (long n = 1; n <= n_max; ++n) {
    const double cur = a(n);
    const double target = prev * (1.0 - std::pow(std::abs(prev), M2) / den);
    const double margin = (cur - target) / prev;
    v.worst_margin = std::min(v.worst_margin, margin);
    ++v.checked;
    if (cur < target && !v.first_violation) v.first_violation = n;
    prev = cur;
  }
  return v;
}

GeometricVerdict geometric_convergence(double c, double b, double alpha, double A0, int n_max) {
  if (!(c >= 1.0) || !(b >= 1.0) || !(alpha > 0.0)) {
    throw Error(Errc::invalid_params, "geometric convergence needs c >= 1, b >= 1, alpha > 0");
  }
  if (!(A0 >= 0.0)) throw Error(Errc::invalid_params, "A0 must be nonnegative");
  if (n_max < 0) throw Error(Errc::invalid_params, "n_max must be nonnegative");

  GeometricVerdict g;
  const double log_threshold = -std::log(c) / alpha - std::log(b) / (alpha * alpha);
  g.threshold = std::exp(log_threshold);
  g.values.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  if (A0 == 0.0) {
    g.below_threshold = g.decay_certified = g.bounded = g.pass = true;
    return g;
  }

  // Track A_i = A0 b^{-i/alpha} e^{r_i}. The recursion becomes affine in r,
  // r_{i+1} = (1 + alpha) r_i + alpha (ln A0 - ln threshold), which stays
  // exactly at zero on the threshold where the raw recursion would amplify
  // rounding like (1 + alpha)^i.
  // The threshold is itself rounded; A0 within a few ulps of it counts as
  // sitting exactly on it.
  double lA0 = std::log(A0);
  const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(log_threshold));
  if (std::abs(lA0 - log_threshold) <= slack) lA0 = log_threshold;
  const double kappa = alpha * (lA0 - log_threshold);
  const double lb = std::log(b);
  g.below_threshold = lA0 <= log_threshold;
  g.decay_certified = true;
  g.bounded = true;
  double r = 0.0;
  for (int i = 0; i <= n_max; ++i) {
    const double log_value = lA0 - i * lb / alpha + r;
    g.values[static_cast<std::size_t>(i)] = std::exp(log_value);
    if (r > 0.0) g.decay_certified = false;
    if (log_value > lA0) g.bounded = false;
    if (!std::isfinite(g.values[static_cast<std::size_t>(i)])) g.diverged = true;
    r = (1.0 + alpha) * r + kappa;
  }
  if (!g.diverged && !g.values.empty() && g.values.back() > A0 * 1e6) g.diverged = true;
  const bool claim = b > 1.0 ? g.decay_certified : g.bounded;
  g.pass = g.below_threshold && claim;
  return g;
}

double level_set_fraction(const Trajectory& traj, const Cylinder& cyl, LevelSide side, double level) {
  std::size_t total = 0;
  std::size_t hits = 0;
  for_each_sample(traj, cyl, [&](double v) {
    ++total;
    const bool below = v <= level;
    if (below == (side == LevelSide::below)) ++hits;
  });
  if (total == 0) throw Error(Errc::empty_cylinder, "no stored sample inside the cylinder");
  return static_cast<double>(hits) / static_cast<double>(total);
}

DensityReport measure_density(const Grid& grid, std::span<const std::uint8_t> omega_mask, const Point& x0,
                              std::span<const double> radii, double alpha0) {
  if (omega_mask.size() != grid.size()) throw Error(Errc::invalid_argument, "mask size does not match the grid");
  if (radii.empty()) throw Error(Errc::invalid_argument, "no radii given");
  DensityReport rep;
  rep.min_fraction = std::numeric_limits<double>::infinity();
  for (double r : radii) {
    if (!(r > 0.0)) throw Error(Errc::invalid_argument, "radii must be positive");
    const Cylinder ball{x0, 0.0, r, 1.0};
    std::array<long, 2> lo{0, 0};
    std::array<long, 2> hi{0, 0};
    for (int a = 0; a < grid.dim; ++a) {
      lo[a] = static_cast<long>(std::floor((x0[a] - r - grid.origin[a]) / grid.h)) - 1;
      hi[a] = static_cast<long>(std::ceil((x0[a] + r - grid.origin[a]) / grid.h)) + 1;
    }
    std::size_t total = 0;
    std::size_t outside = 0;
    for (long i1 = lo[1]; i1 <= hi[1]; ++i1) {
      for (long i0 = lo[0]; i0 <= hi[0]; ++i0) {
        const LatticeIndex ij{i0, i1};
        if (!ball.contains_point(grid.coord(ij), grid.dim)) continue;
        ++total;
        if (!grid.in_box(ij) || !omega_mask[grid.linear(ij)]) ++outside;
      }
    }
    const double frac = total ? static_cast<double>(outside) / static_cast<double>(total) : 0.0;
    rep.radii.push_back(r);
    rep.fractions.push_back(frac);
    rep.min_fraction = std::min(rep.min_fraction, frac);
  }
  rep.pass = rep.min_fraction >= alpha0;
  return rep;
}

ModulusReport fit_log_modulus(std::span<const ModulusSample> samples, double epsilon, double rho0,
                              ModulusModel model) {
  if (!(rho0 > 0.0) || !(epsilon >= 0.0)) throw Error(Errc::invalid_argument, "fit needs rho0 > 0, eps >= 0");
  if (samples.size() < 3) throw Error(Errc::insufficient_samples, "at least 3 samples are required");
  ModulusReport rep;
  rep.samples.assign(samples.begin(), samples.end());
  rep.epsilon = epsilon;
  rep.rho0 = rho0;
  rep.model = model;

  const double floor = 4.0 * epsilon + 1e-12;
  std::vector<double> x;
  std::vector<double> y;
  for (const ModulusSample& smp : samples) {
    if (!(smp.r > 0.0)) throw Error(Errc::invalid_argument, "sample radii must be positive");
    if (smp.osc <= floor) continue;
    const double arg = 1.0 + std::log(rho0 / smp.r);
    if (!(arg > 0.0)) throw Error(Errc::invalid_argument, "sample radius too large for rho0");
    x.push_back(std::log(arg));
    y.push_back(std::log(smp.osc - 4.0 * epsilon));
  }
  if (x.empty()) throw Error(Errc::nonpositive_excess, "every sample sits in the regularization floor");
  std::vector<double> distinct = x;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3) throw Error(Errc::insufficient_samples, "fewer than 3 distinct radii above the floor");

  const LineFit f = least_squares(x, y);
  rep.used = x.size();
  rep.varsigma = -2.0 * f.slope;
  rep.c = std::exp(f.intercept);
  rep.residual = f.rms;
  return rep;
}

std::vector<ModulusSample> oscillation_ladder(const Trajectory& traj, const Point& x0, double t0, double rho0,
                                              double ratio, int levels, double theta) {
  if (!(rho0 > 0.0) || !(ratio > 0.0 && ratio < 1.0) || levels < 1 || !(theta > 0.0)) {
    throw Error(Errc::invalid_argument, "ladder needs rho0 > 0, 0 < ratio < 1, levels >= 1, theta > 0");
  }
  std::vector<ModulusSample> out(static_cast<std::size_t>(levels));
  for (int k = 0; k < levels; ++k) {
    const double r = rho0 * std::pow(ratio, k);
    out[static_cast<std::size_t>(k)] = {r, oscillation(traj, Cylinder{x0, t0, r, theta})};
  }
  return out;
}

ModulusReport ladder_fit(const Trajectory& traj, const LadderSpec& spec, ModulusModel model) {
  const auto samples = oscillation_ladder(traj, spec.x0, spec.t0, spec.rho0, spec.ratio, spec.levels, spec.theta);
  return fit_log_modulus(samples, traj.epsilon, spec.rho0, model);
}

EnvelopeFit fit_power_envelope(std::span<const double> omegas) {
  if (omegas.size() < 2) throw Error(Errc::insufficient_samples, "envelope fit needs at least 2 values");
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    if (!(omegas[i] > 0.0)) throw Error(Errc::invalid_argument, "envelope values must be positive");
    x.push_back(std::log(1.0 + static_cast<double>(i)));
    y.push_back(std::log(omegas[i]));
  }
  EnvelopeFit e;
  e.varsigma = -least_squares(x, y).slope;
  for (std::size_t i = 0; i < omegas.size(); ++i) e.c = std::max(e.c, std::exp(y[i] + e.varsigma * x[i]));
  e.bounded = e.varsigma > 0.0 && std::isfinite(e.c);
  return e;
}

SequenceTailReport sequence_tail_report(const Trajectory& traj, const ExteriorRule& exterior,
                                        const Point& x0, double t0, std::span<const Level> levels) {
  const SpaceTimeSamples samples = traj.samples(exterior);
  std::vector<std::optional<TailLevelReport>> rows(levels.size());
  parallel_for(levels.size(), 1, [&](std::size_t k) {
    const Level& lvl = levels[k];
    const Cylinder cyl{x0, t0, lvl.rho(), lvl.theta};
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for_each_sample(traj, cyl, [&](double v) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    });
    if (lo > hi || !(traj.grid.r_inf > cyl.rho)) return;
    // The cylinder's time interval is open at the bottom, the tail window closed.
    const double t_lo = std::nextafter(cyl.t_begin(traj.s, traj.p), std::numeric_limits<double>::infinity());
    TailLevelReport row;
    row.index = lvl.index;
    row.mu_plus = hi;
    row.mu_minus = lo;
    try {
      row.tail_plus = tail(samples, x0, cyl.rho, t_lo, t0, traj.s, traj.p,
                           [hi](double u) { return std::max(u - hi, 0.0); });
      row.tail_minus = tail(samples, x0, cyl.rho, t_lo, t0, traj.s, traj.p,
                            [lo](double u) { return std::max(lo - u, 0.0); });
    } catch (const Error& e) {
      if (e.code() == Errc::empty_window) return;
      throw;
    }
    row.ratio = std::max(row.tail_plus, row.tail_minus) / lvl.omega;
    rows[k] = row;
  });
  SequenceTailReport rep;
  for (auto& r : rows) {
    if (!r) continue;
    rep.max_ratio = std::max(rep.max_ratio, r->ratio);
    rep.levels.push_back(*r);
  }
  return rep;
}

}  // namespace stefanlab
