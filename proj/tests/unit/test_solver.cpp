// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "stefanlab/config.hpp"
#include "stefanlab/solver.hpp"

using namespace stefanlab;

namespace {

// Small melt-type problem: u0 = -1 on (-1, 1), g = 1 outside.
LatticeProblem small_melt(long nodes = 33, double T = 0.05) {
  ProblemSpec spec;
  spec.nodes = nodes;
  spec.T = T;
  spec.epsilon = 0.1;
  spec.omega = {"interval", -1.0, 1.0};
  spec.g.value = 1.0;
  spec.u0.value = -1.0;
  return spec.build();
}

LatticeProblem constant_problem(double c) {
  ProblemSpec spec;
  spec.nodes = 33;
  spec.T = 0.05;
  spec.g.value = c;
  spec.u0.value = c;
  return spec.build();
}

SolverConfig steps(int n) {
  SolverConfig sc;
  sc.steps = n;
  return sc;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("constants are stationary") {
  const LatticeProblem pb = constant_problem(0.3);
  const Trajectory tr = solve(pb, steps(10));
  REQUIRE(tr.fields.size() == 11);
  for (const auto& f : tr.fields) {
    for (double v : f) CHECK(v == 0.3);
  }
  const MaxPrincipleReport mp = max_principle_check(tr, pb, 1e-9);
  CHECK(mp.defect == 0.0);
  CHECK(mp.pass);
}

TEST_CASE("residual is the gradient of the step objective") {
  const LatticeProblem pb = small_melt();
  const Enthalpy e = pb.enthalpy();
  const StepSystem sys(pb, e, pb.u0, 0.01, 0.01);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-0.3, 0.3);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> v(sys.unknowns());
    for (double& x : v) x = U(rng);
    CHECK(gradient_defect(sys, v, 1e-5) < 1e-6);
  }
}

TEST_CASE("short step agrees with explicit Euler") {
  ProblemSpec spec;
  spec.nodes = 33;
  spec.epsilon = 0.1;
  spec.omega = {"interval", -1.0, 1.0};
  spec.g.value = 0.0;
  spec.u0.type = "sine";
  spec.u0.amplitude = 0.05;
  spec.u0.frequency = 3.0;
  const LatticeProblem pb = spec.build();
  const Enthalpy e = pb.enthalpy();
  const double dt = 1e-6;
  SolverConfig sc;
  sc.newton_tol = 1e-13;
  const std::vector<double> v = implicit_step(pb, pb.u0, 0.0, dt, sc);
  const std::vector<double> Lu = apply_operator(pb.grid, pb.u0, pb.exterior(), 0.0, pb.kernel, pb.s, pb.p,
                                                pb.omega_mask);
  double scale = 0.0;
  double err = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!pb.omega_mask[i]) continue;
    const double predicted = -dt * Lu[i] / e.b_prime(pb.u0[i]);
    scale = std::max(scale, std::abs(predicted));
    err = std::max(err, std::abs(v[i] - pb.u0[i] - predicted));
  }
  REQUIRE(scale > 0.0);
  CHECK(err < 1e-3 * scale);
}

TEST_CASE("ordered data stay ordered") {
  const LatticeProblem lo = small_melt();
  LatticeProblem hi = lo;
  for (std::size_t i = 0; i < hi.u0.size(); ++i) {
    if (hi.omega_mask[i]) hi.u0[i] += 0.25;
  }
  const Trajectory a = solve(lo, steps(20));
  const Trajectory b = solve(hi, steps(20));
  double defect = 0.0;
  for (std::size_t m = 0; m < a.fields.size(); ++m) {
    for (std::size_t i = 0; i < a.fields[m].size(); ++i) defect = std::max(defect, a.fields[m][i] - b.fields[m][i]);
  }
  CHECK(defect <= 1e-9);
}

TEST_CASE("melting is monotone in time and respects the data bound") {
  const LatticeProblem pb = small_melt();
  const Trajectory tr = solve(pb, steps(20));
  for (const auto& d : tr.diagnostics) CHECK(d.residual <= 1e-10);
  for (std::size_t m = 1; m < tr.fields.size(); ++m) {
    for (std::size_t i = 0; i < tr.fields[m].size(); ++i) CHECK(tr.fields[m][i] >= tr.fields[m - 1][i] - 1e-9);
  }
  CHECK(max_principle_check(tr, pb, 1e-9).pass);
}

TEST_CASE("injected spike is reported") {
  const LatticeProblem pb = small_melt();
  Trajectory tr = solve(pb, steps(4));
  tr.fields[2][16] = 3.0;
  const MaxPrincipleReport mp = max_principle_check(tr, pb, 1e-9);
  CHECK(mp.defect == doctest::Approx(2.0));
  CHECK_FALSE(mp.pass);
}

TEST_CASE("normalization") {
  const LatticeProblem pb = small_melt();
  const Trajectory direct = solve(pb, steps(20));

  const LatticeProblem same = normalize(pb, 1.0, {0.0, 0.0}, 0.0);
  CHECK(same.u0 == pb.u0);
  CHECK(same.grid == pb.grid);

  const Trajectory scaled = solve(normalize(pb, 2.0, {0.0, 0.0}, 0.0), steps(20));
  double defect = 0.0;
  for (std::size_t m = 0; m < direct.fields.size(); ++m) {
    for (std::size_t i = 0; i < direct.fields[m].size(); ++i) {
      defect = std::max(defect, std::abs(2.0 * scaled.fields[m][i] - direct.fields[m][i]));
    }
  }
  CHECK(defect <= 1e-9);

  // Pure translation moves the nodes and leaves the values alone.
  const LatticeProblem moved = normalize(pb, 1.0, {0.5, 0.0}, 0.0);
  CHECK(moved.grid.origin[0] == doctest::Approx(pb.grid.origin[0] - 0.5));
  CHECK(moved.u0 == pb.u0);
}

TEST_CASE("threads give bit-identical trajectories") {
  const LatticeProblem pb = small_melt(65);
  SolverConfig one = steps(10);
  SolverConfig four = steps(10);
  four.threads = 4;
  const Trajectory a = solve(pb, one);
  const Trajectory b = solve(pb, four);
  CHECK(a.fields == b.fields);
}

TEST_CASE("weak residual") {
  const LatticeProblem pb = constant_problem(0.3);
  const Trajectory tr = solve(pb, steps(10));
  const auto bump = [](const Point& x, double t) {
    const double r = x[0] / 0.5;
    return std::abs(r) < 1.0 ? (1.0 - r * r) * (1.0 - r * r) * t * (0.05 - t) : 0.0;
  };
  CHECK(weak_residual(tr, pb, bump) < 1e-12);
  CHECK(weak_residual(solve(small_melt(), steps(10)), small_melt(), [](const Point&, double) { return 0.0; }) == 0.0);
}

TEST_CASE("weak residual shrinks under refinement") {
  const auto bump = [](const Point& x, double t) {
    const double r = (x[0] + 0.5) / 0.4;
    return std::abs(r) < 1.0 ? (1.0 - r * r) * (1.0 - r * r) * std::sin(std::acos(-1.0) * t / 0.05) : 0.0;
  };
  const LatticeProblem coarse = small_melt(33);
  const LatticeProblem fine = small_melt(65);
  const double rc = weak_residual(solve(coarse, steps(20)), coarse, bump);
  const double rf = weak_residual(solve(fine, steps(40)), fine, bump);
  CHECK(rf < rc);
}

TEST_CASE("energy audit") {
  const LatticeProblem c = constant_problem(0.3);
  const Trajectory tc = solve(c, steps(10));
  const Cylinder cyl{{0.0, 0.0}, tc.times.back(), 0.25, 0.2};
  const CaccioppoliReport flat = caccioppoli_audit(tc, c, 0.5, 1, RadialCutoff::smooth(0.2), cyl, 10.0);
  CHECK(flat.lhs == 0.0);
  CHECK(flat.rhs == 0.0);
  CHECK(flat.ratio == 0.0);

  // Truncating at k = eps leaves the transition layer out entirely.
  const LatticeProblem pb = small_melt(65, 0.2);
  const Trajectory tr = solve(pb, steps(40));
  const Cylinder mid{{-0.5, 0.0}, tr.times.back(), 0.25, 2.0};
  const CaccioppoliReport r = caccioppoli_audit(tr, pb, pb.epsilon, 1, RadialCutoff::smooth(0.2), mid, 10.0);
  CHECK(r.latent_contribution == 0.0);
  CHECK(std::isfinite(r.ratio));

  CHECK_THROWS(caccioppoli_audit(tr, pb, 0.0, 1, RadialCutoff::smooth(0.25), mid, 10.0));
}

TEST_CASE("malformed problems are rejected") {
  LatticeProblem pb = small_melt();
  pb.p = 2.0;
  CHECK_THROWS(solve(pb, steps(2)));
  pb = small_melt();
  pb.u0.pop_back();
  CHECK_THROWS(solve(pb, steps(2)));
}

TEST_CASE("each step dissipates the kernel energy") {
  // The step minimizes a convex objective started from u_m, and B lies above
  // its tangent, so the p-energy at the new iterate cannot exceed the old one.
  const LatticeProblem pb = small_melt(65, 0.1);
  const Trajectory tr = solve(pb, steps(20));
  for (const StepDiagnostics& d : tr.diagnostics) {
    CHECK(d.objective_decrease >= 0.0);
    CHECK(d.energy_after <= d.energy_before * (1.0 + 1e-12) + 1e-14);
  }
}
