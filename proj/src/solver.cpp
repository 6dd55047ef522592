// SPDX-License-Identifier: Apache-2.0

#include "stefanlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <Eigen/Cholesky>

#include "stefanlab/parallel.hpp"

namespace stefanlab {

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

std::size_t LatticeProblem::interior_count() const {
  return static_cast<std::size_t>(std::count(omega_mask.begin(), omega_mask.end(), std::uint8_t{1}));
}

void LatticeProblem::validate() const {
  check_exponents(s, p);
  grid.validate();
  if (omega_mask.size() != grid.size() || u0.size() != grid.size()) {
    throw Error(Errc::invalid_argument, "mask and initial datum must match the grid");
  }
  const std::size_t inside = interior_count();
  if (inside == 0) throw Error(Errc::invalid_argument, "Omega contains no lattice node");
  if (inside == grid.size()) throw Error(Errc::invalid_argument, "Omega complement contains no lattice node");
  if (!g) throw Error(Errc::invalid_argument, "exterior datum g is missing");
  if (!(T > 0.0)) throw Error(Errc::invalid_argument, "time horizon must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(Errc::invalid_argument, "epsilon must lie in (0,1)");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(u0[i])) throw Error(Errc::invalid_argument, "initial datum is not finite");
    if (!omega_mask[i]) {
      const double gi = g(grid.coord(i), t_start);
      if (std::abs(gi - u0[i]) > 1e-12 * std::max(1.0, std::abs(gi))) {
        throw Error(Errc::invalid_argument, "initial datum disagrees with g outside Omega");
      }
    }
  }
  if (!std::isfinite(g_far)) throw Error(Errc::invalid_argument, "far-field value is not finite");
}

void SolverConfig::validate() const {
  if (!(newton_tol > 0.0)) throw Error(Errc::invalid_argument, "newton tolerance must be positive");
  if (!(damping > 0.0 && damping < 1.0)) throw Error(Errc::invalid_argument, "damping must lie in (0,1)");
  if (newton_max < 1) throw Error(Errc::invalid_argument, "newton iteration cap must be positive");
  if (dt_policy == DtPolicy::fixed && steps < 1) throw Error(Errc::invalid_argument, "steps must be positive");
  if (dt_policy == DtPolicy::intrinsic && !(c_t > 0.0)) throw Error(Errc::invalid_argument, "c_t must be positive");
}

StepSystem::StepSystem(const LatticeProblem& problem, const Enthalpy& enthalpy,
                       std::span<const double> u_prev, double t_next, double dt, int threads)
    : enthalpy_(enthalpy), p_(problem.p), dt_(dt), threads_(threads) {
  const Grid& grid = problem.grid;
  if (u_prev.size() != grid.size()) throw Error(Errc::invalid_argument, "field size does not match grid");
  if (!(dt > 0.0)) throw Error(Errc::invalid_argument, "time step must be positive");

  std::vector<long> local(grid.size(), -1);
  pinned_.assign(u_prev.begin(), u_prev.end());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (problem.omega_mask[i]) {
      local[i] = static_cast<long>(nodes_.size());
      nodes_.push_back(i);
    } else {
      pinned_[i] = problem.g(grid.coord(i), t_next);
    }
  }
  b_prev_.resize(nodes_.size());
  for (std::size_t a = 0; a < nodes_.size(); ++a) b_prev_[a] = enthalpy.b(u_prev[nodes_[a]]);

  const Stencil st = Stencil::build(grid, problem.s, problem.p);
  const double far_w = exterior_weight(grid.dim, grid.r_inf, problem.s, problem.p);
  std::vector<std::vector<Link>> inner(nodes_.size());
  std::vector<std::vector<Fixed>> fixed(nodes_.size());
  parallel_for(nodes_.size(), threads, [&](std::size_t a) {
    const LatticeIndex ij = grid.lattice_index(nodes_[a]);
    const Point xi = grid.coord(ij);
    for (std::size_t m = 0; m < st.size(); ++m) {
      const LatticeIndex jj{ij[0] + st.offset[m][0], ij[1] + st.offset[m][1]};
      const Point xj = grid.coord(jj);
      const double c = problem.kernel(xi, xj, t_next) * st.weight[m];
      if (grid.in_box(jj)) {
        const std::size_t j = grid.linear(jj);
        if (local[j] >= 0) inner[a].push_back({static_cast<std::size_t>(local[j]), c});
        else fixed[a].push_back({pinned_[j], c});
      } else {
        fixed[a].push_back({problem.g(xj, t_next), c});
      }
    }
    const Point xf{xi[0] + grid.r_inf, xi[1]};
    fixed[a].push_back({problem.g_far, problem.kernel(xi, xf, t_next) * far_w});
  });
  inner_start_.assign(1, 0);
  fixed_start_.assign(1, 0);
  for (std::size_t a = 0; a < nodes_.size(); ++a) {
    inner_.insert(inner_.end(), inner[a].begin(), inner[a].end());
    fixed_.insert(fixed_.end(), fixed[a].begin(), fixed[a].end());
    inner_start_.push_back(inner_.size());
    fixed_start_.push_back(fixed_.size());
  }
}

std::vector<double> StepSystem::restrict_field(std::span<const double> box) const {
  std::vector<double> v(nodes_.size());
  for (std::size_t a = 0; a < nodes_.size(); ++a) v[a] = box[nodes_[a]];
  return v;
}

std::vector<double> StepSystem::extend(std::span<const double> v) const {
  std::vector<double> out = pinned_;
  for (std::size_t a = 0; a < nodes_.size(); ++a) out[nodes_[a]] = v[a];
  return out;
}

double StepSystem::energy(std::span<const double> v) const {
  std::vector<double> part(nodes_.size());
  parallel_for(nodes_.size(), threads_, [&](std::size_t a) {
    double acc = 0.0;
    for (std::size_t e = inner_start_[a]; e < inner_start_[a + 1]; ++e) {
      acc += 0.5 * std::pow(std::abs(v[a] - v[inner_[e].j]), p_) * inner_[e].coef;
    }
    for (std::size_t e = fixed_start_[a]; e < fixed_start_[a + 1]; ++e) {
      acc += std::pow(std::abs(v[a] - fixed_[e].value), p_) * fixed_[e].coef;
    }
    part[a] = acc / p_;
  });
  return std::accumulate(part.begin(), part.end(), 0.0);
}

double StepSystem::objective(std::span<const double> v) const {
  double acc = 0.0;
  for (std::size_t a = 0; a < nodes_.size(); ++a) {
    acc += enthalpy_.b_antiderivative(v[a]) - b_prev_[a] * v[a];
  }
  return acc + dt_ * energy(v);
}

std::vector<double> StepSystem::residual(std::span<const double> v) const {
  std::vector<double> r(nodes_.size());
  parallel_for(nodes_.size(), threads_, [&](std::size_t a) {
    double acc = 0.0;
    for (std::size_t e = inner_start_[a]; e < inner_start_[a + 1]; ++e) {
      acc += phi_p(v[a] - v[inner_[e].j], p_) * inner_[e].coef;
    }
    for (std::size_t e = fixed_start_[a]; e < fixed_start_[a + 1]; ++e) {
      acc += phi_p(v[a] - fixed_[e].value, p_) * fixed_[e].coef;
    }
    r[a] = enthalpy_.b(v[a]) - b_prev_[a] + dt_ * acc;
  });
  return r;
}

Eigen::MatrixXd StepSystem::jacobian(std::span<const double> v) const {
  const auto n = static_cast<Eigen::Index>(nodes_.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  const double q = p_ - 2.0;
  parallel_for(nodes_.size(), threads_, [&](std::size_t a) {
    double diag = 0.0;
    const auto row = static_cast<Eigen::Index>(a);
    for (std::size_t e = inner_start_[a]; e < inner_start_[a + 1]; ++e) {
      const double d = (p_ - 1.0) * std::pow(std::abs(v[a] - v[inner_[e].j]), q) * inner_[e].coef;
      J(row, static_cast<Eigen::Index>(inner_[e].j)) -= dt_ * d;
      diag += d;
    }
    for (std::size_t e = fixed_start_[a]; e < fixed_start_[a + 1]; ++e) {
      diag += (p_ - 1.0) * std::pow(std::abs(v[a] - fixed_[e].value), q) * fixed_[e].coef;
    }
    J(row, row) = enthalpy_.b_prime(v[a]) + dt_ * diag;
  });
  return J;
}

std::vector<double> implicit_step(const LatticeProblem& problem, std::span<const double> u_prev, double t,
                                  double dt, const SolverConfig& config, StepDiagnostics* diag) {
  const Enthalpy enthalpy = problem.enthalpy();
  const StepSystem sys(problem, enthalpy, u_prev, t + dt, dt, config.threads);
  StepDiagnostics d;
  d.t = t + dt;
  d.dt = dt;
  d.min_iteration_decrease = std::numeric_limits<double>::infinity();

  std::vector<double> v = sys.restrict_field(u_prev);
  double F = sys.objective(v);
  const double F0 = F;
  d.energy_before = sys.energy(v);
  std::vector<double> R = sys.residual(v);
  const auto n = static_cast<Eigen::Index>(v.size());
  std::vector<double> trial(v.size());

  int it = 0;
  for (;; ++it) {
    const double rn = max_abs(R);
    if (rn <= config.newton_tol) break;
    if (it >= config.newton_max) {
      d.residual = rn;
      d.newton_iterations = it;
      throw NewtonDivergence("newton residual " + std::to_string(rn) + " above tolerance at t=" +
                                 std::to_string(t + dt),
                             sys.extend(v), d);
    }
    const Eigen::MatrixXd J = sys.jacobian(v);
    const Eigen::Map<const Eigen::VectorXd> r(R.data(), n);
    Eigen::VectorXd dir;
    Eigen::LLT<Eigen::MatrixXd> llt(J);
    if (llt.info() == Eigen::Success) dir = -llt.solve(r);
    else dir = -J.ldlt().solve(r);

    const double slope = r.dot(dir);
    // Below this the objective change is lost in rounding; take the full step.
    const bool rounding = std::abs(slope) <= 1e-13 * (1.0 + std::abs(F));
    double alpha = 1.0;
    double Fn = F;
    for (;;) {
      for (std::size_t a = 0; a < v.size(); ++a) trial[a] = v[a] + alpha * dir(static_cast<Eigen::Index>(a));
      Fn = sys.objective(trial);
      if (rounding || Fn <= F + 1e-4 * alpha * slope) break;
      alpha *= config.damping;
      if (alpha < 1e-14) {
        d.residual = rn;
        d.newton_iterations = it;
        throw NewtonDivergence("line search stalled at t=" + std::to_string(t + dt), sys.extend(v), d);
      }
    }
    if (!rounding) d.min_iteration_decrease = std::min(d.min_iteration_decrease, F - Fn);
    v.swap(trial);
    F = Fn;
    R = sys.residual(v);
  }
  d.residual = max_abs(R);
  d.newton_iterations = it;
  d.objective_decrease = F0 - F;
  d.energy_after = sys.energy(v);
  if (diag) *diag = d;
  return sys.extend(v);
}

double gradient_defect(const StepSystem& system, std::span<const double> v, double step) {
  const std::vector<double> analytic = system.residual(v);
  std::vector<double> probe(v.begin(), v.end());
  double worst = 0.0;
  for (std::size_t a = 0; a < probe.size(); ++a) {
    const double keep = probe[a];
    const double dx = step * std::max(1.0, std::abs(keep));
    probe[a] = keep + dx;
    const double up = system.objective(probe);
    probe[a] = keep - dx;
    const double down = system.objective(probe);
    probe[a] = keep;
    const double numeric = (up - down) / (2.0 * dx);
    const double scale = std::max({std::abs(analytic[a]), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic[a] - numeric) / scale);
  }
  return worst;
}

Trajectory solve(const LatticeProblem& problem, const SolverConfig& config) {
  problem.validate();
  config.validate();
  Trajectory traj;
  traj.grid = problem.grid;
  traj.s = problem.s;
  traj.p = problem.p;
  traj.epsilon = problem.epsilon;
  traj.omega_mask = problem.omega_mask;
  traj.times.push_back(problem.t_start);
  traj.fields.push_back(problem.u0);

  const double t_end = problem.t_start + problem.T;
  const double sp = problem.s * problem.p;
  const double fixed_dt = problem.T / config.steps;
  double t = problem.t_start;
  int step = 0;
  while (true) {
    double dt = fixed_dt;
    if (config.dt_policy == DtPolicy::fixed) {
      if (step >= config.steps) break;
      if (step == config.steps - 1) dt = t_end - t;
    } else {
      if (t_end - t <= 1e-12 * problem.T) break;
      const std::vector<double>& u = traj.fields.back();
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::size_t i = 0; i < u.size(); ++i) {
        if (!problem.omega_mask[i]) continue;
        lo = std::min(lo, u[i]);
        hi = std::max(hi, u[i]);
      }
      const double omega = std::max(hi - lo, 4.0 * problem.epsilon);
      dt = config.c_t * std::pow(problem.grid.h, sp) * std::pow(omega / 4.0, 2.0 - problem.p);
      dt = std::min(dt, t_end - t);
    }
    StepDiagnostics d;
    try {
      traj.fields.push_back(implicit_step(problem, traj.fields.back(), t, dt, config, &d));
    } catch (NewtonDivergence& e) {
      e.partial = std::make_shared<Trajectory>(traj);
      throw;
    }
    t = (config.dt_policy == DtPolicy::fixed && step == config.steps - 1) ? t_end : t + dt;
    traj.times.push_back(t);
    traj.diagnostics.push_back(d);
    ++step;
  }
  return traj;
}

LatticeProblem normalize(const LatticeProblem& problem, double M, const Point& x0, double t0) {
  if (!(M > 0.0)) throw Error(Errc::invalid_argument, "normalization factor must be positive");
  LatticeProblem q = problem;
  q.name = problem.name + "/normalized";
  q.grid.origin = {problem.grid.origin[0] - x0[0], problem.grid.origin[1] - x0[1]};
  const Point shift = x0;
  auto g = problem.g;
  q.g = [g, shift, t0, M](const Point& x, double t) {
    return g(Point{x[0] + shift[0], x[1] + shift[1]}, t + t0) / M;
  };
  q.g_far = problem.g_far / M;
  for (double& v : q.u0) v /= M;
  const double factor = std::pow(M, problem.p - 2.0);
  auto k = problem.kernel.k;
  q.kernel.k = [k, shift, t0, factor](const Point& x, const Point& y, double t) {
    return factor * k(Point{x[0] + shift[0], x[1] + shift[1]}, Point{y[0] + shift[0], y[1] + shift[1]}, t + t0);
  };
  q.kernel.lambda = problem.kernel.lambda * std::max(factor, 1.0 / factor);
  q.t_start = problem.t_start - t0;
  q.enthalpy_scale = problem.enthalpy_scale * M;
  return q;
}

MaxPrincipleReport max_principle_check(const Trajectory& traj, const LatticeProblem& problem,
                                       double tolerance) {
  const Grid& grid = problem.grid;
  double bound = std::abs(problem.g_far);
  for (double v : problem.u0) bound = std::max(bound, std::abs(v));
  const long reach = static_cast<long>(std::floor(grid.r_inf / grid.h)) + 1;
  for (double t : traj.times) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!problem.omega_mask[i]) bound = std::max(bound, std::abs(problem.g(grid.coord(i), t)));
    }
    // Lattice sites beyond the box that the operator reaches.
    const long lo1 = grid.dim == 2 ? -reach : 0;
    const long hi1 = grid.dim == 2 ? grid.count[1] - 1 + reach : 0;
    for (long i1 = lo1; i1 <= hi1; ++i1) {
      for (long i0 = -reach; i0 < grid.count[0] + reach; ++i0) {
        const LatticeIndex ij{i0, i1};
        if (grid.in_box(ij)) continue;
        bound = std::max(bound, std::abs(problem.g(grid.coord(ij), t)));
      }
    }
  }
  MaxPrincipleReport rep;
  rep.data_bound = bound;
  for (const auto& u : traj.fields) rep.sup_solution = std::max(rep.sup_solution, max_abs(u));
  rep.defect = std::max(0.0, rep.sup_solution - bound);
  rep.pass = rep.defect <= tolerance;
  return rep;
}

double weak_residual(const Trajectory& traj, const LatticeProblem& problem,
                     const std::function<double(const Point&, double)>& test) {
  const Grid& grid = problem.grid;
  const Enthalpy enthalpy = problem.enthalpy();
  const Stencil st = Stencil::build(grid, problem.s, problem.p);
  const double far_w = exterior_weight(grid.dim, grid.r_inf, problem.s, problem.p);
  const double hn = grid.cell_volume();
  const double p = problem.p;
  double time_term = 0.0;
  double space_term = 0.0;
  for (std::size_t m = 1; m < traj.fields.size(); ++m) {
    const double t = traj.times[m];
    const double dt = traj.times[m] - traj.times[m - 1];
    const std::vector<double>& u = traj.fields[m];
    double tt = 0.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!problem.omega_mask[i]) continue;
      const LatticeIndex ij = grid.lattice_index(i);
      const Point xi = grid.coord(ij);
      const double phi_i = test(xi, t);
      // Exact integral of d_t phi over the step against the step's b(u).
      tt += enthalpy.b(u[i]) * (phi_i - test(xi, traj.times[m - 1]));
      for (std::size_t e = 0; e < st.size(); ++e) {
        const LatticeIndex jj{ij[0] + st.offset[e][0], ij[1] + st.offset[e][1]};
        const Point xj = grid.coord(jj);
        const bool box = grid.in_box(jj);
        const double uj = box ? u[grid.linear(jj)] : problem.g(xj, t);
        const double c = problem.kernel(xi, xj, t) * st.weight[e];
        if (box && problem.omega_mask[grid.linear(jj)]) {
          // Ordered pair (i, j); (j, i) is visited from j.
          ss += 0.5 * phi_p(u[i] - uj, p) * (phi_i - test(xj, t)) * c;
        } else {
          ss += phi_p(u[i] - uj, p) * phi_i * c;
        }
      }
      const Point xf{xi[0] + grid.r_inf, xi[1]};
      ss += phi_p(u[i] - problem.g_far, p) * phi_i * problem.kernel(xi, xf, t) * far_w;
    }
    time_term += tt * hn;
    space_term += dt * ss * hn;
  }
  return std::abs(-time_term + space_term);
}

RadialCutoff RadialCutoff::smooth(double radius) {
  RadialCutoff c;
  c.radius = radius;
  c.profile = [](double r) {
    if (r <= 0.5) return 1.0;
    if (r >= 1.0) return 0.0;
    const double c2 = std::cos(std::numbers::pi * (r - 0.5));
    return c2 * c2;
  };
  c.derivative = [](double r) {
    if (r <= 0.5 || r >= 1.0) return 0.0;
    return -std::numbers::pi * std::sin(2.0 * std::numbers::pi * (r - 0.5));
  };
  return c;
}

CaccioppoliReport caccioppoli_audit(const Trajectory& traj, const LatticeProblem& problem, double level,
                                    int sign, const RadialCutoff& cutoff, const Cylinder& cylinder,
                                    double c_audit) {
  const Grid& grid = problem.grid;
  const double s = problem.s;
  const double p = problem.p;
  const double sp = s * p;
  const double R = cylinder.rho;
  if (!(cutoff.radius > 0.0 && cutoff.radius < R)) {
    throw Error(Errc::invalid_argument, "cutoff radius must lie in (0, R)");
  }
  const Enthalpy enthalpy = problem.enthalpy();
  const double hn = grid.cell_volume();
  const double t_lo = cylinder.t_begin(s, p);

  std::vector<std::size_t> ball;
  std::vector<double> phi;
  std::vector<double> grad;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point x = grid.coord(i);
    if (!cylinder.contains_point(x, grid.dim)) continue;
    const double r = distance(x, cylinder.x0, grid.dim) / cutoff.radius;
    ball.push_back(i);
    phi.push_back(cutoff.profile(r));
    grad.push_back(std::abs(cutoff.derivative(r)) / cutoff.radius);
  }
  if (std::none_of(phi.begin(), phi.end(), [](double v) { return v > 0.0; })) {
    throw Error(Errc::degenerate_cutoff, "cutoff vanishes on every lattice node of the cylinder");
  }
  const auto trunc = [&](double u) { return sign > 0 ? std::max(u - level, 0.0) : std::max(level - u, 0.0); };
  const auto opposite = [&](double u) { return sign > 0 ? std::max(level - u, 0.0) : std::max(u - level, 0.0); };

  CaccioppoliReport rep;
  const long reach = static_cast<long>(std::floor(grid.r_inf / grid.h)) + 1;
  const double far_w = exterior_weight(grid.dim, grid.r_inf, s, p);
  const auto slice_energy = [&](const std::vector<double>& u, double* latent) {
    double acc = 0.0;
    for (std::size_t a = 0; a < ball.size(); ++a) {
      const double w = trunc(u[ball[a]]);
      const double G = enthalpy.latent_truncation(u[ball[a]], level, sign);
      *latent += std::pow(phi[a], p) * G * hn;
      acc += std::pow(phi[a], p) * (w * w + G) * hn;
    }
    return acc;
  };

  bool any = false;
  for (std::size_t m = 1; m < traj.fields.size(); ++m) {
    const double t = traj.times[m];
    if (!cylinder.contains_time(t, s, p)) continue;
    any = true;
    const double dt = traj.times[m] - std::max(traj.times[m - 1], t_lo);
    const std::vector<double>& u = traj.fields[m];
    double latent = 0.0;
    rep.energy_sup = std::max(rep.energy_sup, slice_energy(u, &latent));
    rep.latent_contribution = std::max(rep.latent_contribution, latent);

    double semi = 0.0;
    double mixed = 0.0;
    double gradient = 0.0;
    double exterior = 0.0;
    for (std::size_t a = 0; a < ball.size(); ++a) {
      const std::size_t i = ball[a];
      const Point xi = grid.coord(i);
      const double wi = trunc(u[i]);
      const double wphi = wi * phi[a];
      const double wphip = wi * std::pow(phi[a], p);
      gradient += std::pow(wi, p) * std::pow(grad[a], p) * hn;
      for (std::size_t b = 0; b < ball.size(); ++b) {
        if (b == a) continue;
        const Point xj = grid.coord(ball[b]);
        const double kern = 1.0 / std::pow(distance(xi, xj, grid.dim), grid.dim + sp) * hn * hn;
        semi += std::pow(std::abs(wphi - trunc(u[ball[b]]) * phi[b]), p) * kern;
        mixed += std::pow(opposite(u[ball[b]]), p - 1.0) * wphip * kern;
      }
      if (wphip == 0.0) continue;
      // Exterior of the ball: lattice sites within r_inf of x_i, then the far field.
      const LatticeIndex ij = grid.lattice_index(i);
      const long lo1 = grid.dim == 2 ? -reach : 0;
      const long hi1 = grid.dim == 2 ? reach : 0;
      for (long o1 = lo1; o1 <= hi1; ++o1) {
        for (long o0 = -reach; o0 <= reach; ++o0) {
          const LatticeIndex jj{ij[0] + o0, ij[1] + o1};
          const Point y = grid.coord(jj);
          const double d = distance(xi, y, grid.dim);
          if (d == 0.0 || d > grid.r_inf || cylinder.contains_point(y, grid.dim)) continue;
          const double uy = grid.in_box(jj) ? u[grid.linear(jj)] : problem.g(y, t);
          exterior += std::pow(trunc(uy), p - 1.0) * wphip / std::pow(d, grid.dim + sp) * hn * hn;
        }
      }
      exterior += std::pow(trunc(problem.g_far), p - 1.0) * wphip * far_w * hn;
    }
    rep.seminorm += dt * semi;
    rep.mixed += dt * mixed;
    rep.gradient_term += dt * gradient;
    rep.exterior_term += dt * exterior;
  }
  if (!any) throw Error(Errc::empty_cylinder, "no stored time inside the audit cylinder");
  rep.gradient_term *= std::pow(R, p * (1.0 - s));

  // Initial slice: last stored time at or before the cylinder's bottom.
  std::size_t m0 = 0;
  for (std::size_t m = 0; m < traj.times.size(); ++m) {
    if (traj.times[m] <= t_lo) m0 = m;
  }
  double latent0 = 0.0;
  rep.initial_term = slice_energy(traj.fields[m0], &latent0);
  rep.time_term = 0.0;  // time-independent cutoff

  rep.lhs = rep.energy_sup + rep.seminorm + rep.mixed;
  rep.rhs = rep.gradient_term + rep.time_term + rep.exterior_term + rep.initial_term;
  if (rep.lhs == 0.0) rep.ratio = 0.0;
  else if (rep.rhs == 0.0) rep.ratio = std::numeric_limits<double>::infinity();
  else rep.ratio = rep.lhs / rep.rhs;
  rep.pass = rep.ratio <= c_audit;
  return rep;
}

}  // namespace stefanlab
