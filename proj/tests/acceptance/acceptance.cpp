// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one line per criterion, nonzero exit when any is red.
// Regression baselines live in STEFANLAB_BASELINE_DIR and are recorded on
// the first run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stefanlab/analysis.hpp"
#include "stefanlab/config.hpp"
#include "stefanlab/continuation.hpp"
#include "stefanlab/enthalpy.hpp"
#include "stefanlab/solver.hpp"

using namespace stefanlab;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Suite {
 public:
  void run(int id, const std::string& name, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char head[96];
    std::snprintf(head, sizeof head, "[%s] %2d %-26s (%7.2f s) ", o.pass ? "PASS" : "FAIL", id, name.c_str(), sec);
    std::cout << head << o.detail << std::endl;
    ++total_;
    if (o.pass) ++passed_;
  }
  int summary() const {
    std::cout << passed_ << "/" << total_ << " criteria passed" << std::endl;
    return passed_ == total_ ? 0 : 1;
  }

 private:
  int total_ = 0;
  int passed_ = 0;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream o;
  o.precision(digits);
  o << v;
  return o.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream b;
  b << in.rdbuf();
  return b.str();
}

// Shared melt1d state: criterion 5 solves it, 6 and 10 reuse the result.
struct Melt {
  RunConfig cfg = preset("melt1d");
  LatticeProblem problem = cfg.problem.build();
  Trajectory traj;
  double solve_seconds = 0.0;
};

Trajectory solve_with_threads(const Melt& m, int threads) {
  SolverConfig sc = m.cfg.solver;
  sc.threads = threads;
  return solve(m.problem, sc);
}

Outcome lemma_iter_grid() {
  const auto t0 = std::chrono::steady_clock::now();
  int cases = 0;
  int violations = 0;
  for (double M2 : {4.0, 8.0, 16.0}) {
    for (double N2 : {4.0, 8.0, 16.0}) {
      for (double L2 : {4.0, 8.0, 16.0}) {
        if (L2 < M2) continue;
        for (double w0 : {1.0, 2.0, 10.0}) {
          ++cases;
          if (!lemma_iter_verify(M2, N2, L2, w0, 100000).pass()) ++violations;
        }
      }
    }
  }
  const double sec = seconds_since(t0);
  return {violations == 0 && sec < 10.0,
          std::to_string(cases) + " cases, " + std::to_string(violations) + " violations, n <= 1e5"};
}

Outcome lemma_tech1() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> uc(1.0, 4.0);
  std::uniform_real_distribution<double> ub(0.0, 1.0);
  std::uniform_real_distribution<double> ua(0.25, 2.0);
  int failures = 0;
  for (int k = 0; k < 20; ++k) {
    const double c = uc(rng);
    const double b = 4.0 - 3.0 * ub(rng);
    const double a = ua(rng);
    const double A0 = std::pow(c, -1.0 / a) * std::pow(b, -1.0 / (a * a));
    const GeometricVerdict g = geometric_convergence(c, b, a, A0, 1000);
    bool ok = g.pass;
    for (int i = 0; i <= 1000 && ok; ++i) {
      // Direct check of the decay bound on the reported iterates; subnormal
      // values carry too few digits for a relative comparison.
      ok = g.values[i] <= A0 * std::pow(b, -i / a) * (1.0 + 1e-9) + std::numeric_limits<double>::min();
    }
    if (!ok) ++failures;
  }
  const GeometricVerdict neg = geometric_convergence(1.0, 2.0, 1.0, 1.5 * 0.5, 1000);
  const double sec = seconds_since(t0);
  return {failures == 0 && neg.diverged && sec < 1.0,
          "20 random cases, " + std::to_string(failures) + " failures; negative control " +
              (neg.diverged ? "diverged" : "did not diverge")};
}

Outcome tail_oracle() {
  const double rho = 0.5;
  const Grid grid = Grid::line(-2.0 * rho, 2.0 * rho, 257, 1000.0 * rho);  // h = rho / 64
  const std::vector<double> times{0.0};
  const std::vector<std::vector<double>> fields{std::vector<double>(grid.size(), 1.0)};
  const ExteriorRule one = ExteriorRule::constant(1.0);
  const double t = tail({&grid, times, fields, &one}, {0.0, 0.0}, rho, 0.0, 0.0, 0.5, 3.0);
  const double exact = std::sqrt(4.0 / 3.0);
  const double rel = std::abs(t / exact - 1.0);
  return {rel < 1e-3 && grid.h == rho / 64.0, "tail " + fmt(t, 10) + " vs " + fmt(exact, 10) + ", rel " + fmt(rel, 3)};
}

Outcome enthalpy_suite() {
  const Mollifier& moll = Mollifier::standard();
  bool exact = true;
  double worst_mass = 0.0;
  double worst_inverse = 0.0;
  double worst_mid = 0.0;
  for (double eps : {0.2, 0.1, 0.05, 0.025}) {
    const Enthalpy e(eps);
    double prev = -1.0;
    for (int k = 0; k <= 20000; ++k) {
      const double x = -2.0 * eps + 4.0 * eps * k / 20000.0;
      const double v = e.beta(x);
      exact = exact && v >= 0.0 && v <= 1.0 && v >= prev;
      if (x <= -eps) exact = exact && v == 0.0;
      if (x >= eps) exact = exact && v == 1.0;
      if (std::abs(x) >= eps) exact = exact && e.beta_prime(x) == 0.0;
      prev = v;
      worst_inverse = std::max(worst_inverse, std::abs(e.b_inverse(e.b(x)) - x));
    }
    // beta' = psi_eps; its mass is the mollifier's cumulative mass at the edge.
    worst_mass = std::max(worst_mass, std::abs(moll.cdf(1.0) - 1.0));
    // Independent composite Simpson rule on the derivative itself.
    const int n = 20000;
    const double hq = 2.0 * eps / n;
    double acc = e.beta_prime(-eps) + e.beta_prime(eps);
    for (int k = 1; k < n; ++k) acc += (k % 2 ? 4.0 : 2.0) * e.beta_prime(-eps + k * hq);
    worst_mass = std::max(worst_mass, std::abs(acc * hq / 3.0 - 1.0));
    worst_mid = std::max(worst_mid, std::abs(e.beta(0.0) - 0.5));
  }
  const bool ok = exact && worst_mass <= 1e-8 && worst_inverse <= 1e-10 && worst_mid <= 1e-10;
  return {ok, std::string("range/support/monotone ") + (exact ? "exact" : "VIOLATED") + ", |int beta' - 1| " +
                  fmt(worst_mass, 2) + ", round trip " + fmt(worst_inverse, 2) + ", |beta(0) - 1/2| " + fmt(worst_mid, 2)};
}

Outcome solver_contracts(Melt& m) {
  const auto t0 = std::chrono::steady_clock::now();
  const double tau = m.cfg.solver.newton_tol;
  m.traj = solve(m.problem, m.cfg.solver);
  m.solve_seconds = seconds_since(t0);
  const bool shape = m.problem.grid.size() == 257 && m.cfg.solver.steps == 400 && m.problem.epsilon == 0.05;

  double worst_res = 0.0;
  for (const auto& d : m.traj.diagnostics) worst_res = std::max(worst_res, d.residual);
  const MaxPrincipleReport mp = max_principle_check(m.traj, m.problem, 1e-9);

  LatticeProblem lower = m.problem;
  for (std::size_t i = 0; i < lower.u0.size(); ++i) {
    if (lower.omega_mask[i]) lower.u0[i] -= 0.25;
  }
  const Trajectory below = solve(lower, m.cfg.solver);
  double cmp = 0.0;
  for (std::size_t k = 0; k < below.fields.size(); ++k) {
    for (std::size_t i = 0; i < below.fields[k].size(); ++i) cmp = std::max(cmp, below.fields[k][i] - m.traj.fields[k][i]);
  }

  const Trajectory scaled = solve(normalize(m.problem, 2.0, {0.0, 0.0}, 0.0), m.cfg.solver);
  double nd = 0.0;
  for (std::size_t k = 0; k < scaled.fields.size(); ++k) {
    for (std::size_t i = 0; i < scaled.fields[k].size(); ++i) {
      nd = std::max(nd, std::abs(2.0 * scaled.fields[k][i] - m.traj.fields[k][i]));
    }
  }

  const Enthalpy e = m.problem.enthalpy();
  const double dt = m.problem.T / m.cfg.solver.steps;
  const StepSystem sys(m.problem, e, m.problem.u0, dt, dt);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-0.1, 0.1);
  double grad = 0.0;
  for (int k = 0; k < 10; ++k) {
    std::vector<double> v(sys.unknowns());
    for (double& x : v) x = U(rng);
    grad = std::max(grad, gradient_defect(sys, v, 1e-5));
  }
  const double sec = seconds_since(t0);
  const bool ok = shape && worst_res <= tau && mp.defect <= 1e-9 && cmp <= 1e-9 && nd <= 1e-9 && grad <= 1e-6 &&
                  sec < 300.0;
  return {ok, "residual " + fmt(worst_res, 3) + ", max principle " + fmt(mp.defect, 3) + ", comparison " +
                  fmt(cmp, 3) + ", normalization " + fmt(nd, 3) + ", gradient " + fmt(grad, 3)};
}

Outcome oscillation_decay(const Melt& m) {
  if (m.traj.fields.empty()) return {false, "melt1d trajectory unavailable"};
  LadderSpec ladder = m.cfg.analysis.ladder;
  ladder.t0 = m.traj.times.back();
  if (!m.cfg.problem.omega.contains(ladder.x0, 1)) return {false, "ladder center is not interior"};
  const std::vector<ModulusSample> samples =
      oscillation_ladder(m.traj, ladder.x0, ladder.t0, ladder.rho0, ladder.ratio, ladder.levels, ladder.theta);
  bool nonincreasing = samples.size() == 8;
  for (std::size_t k = 1; k < samples.size(); ++k) nonincreasing = nonincreasing && samples[k].osc <= samples[k - 1].osc;
  const ModulusReport fit = fit_log_modulus(samples, m.traj.epsilon, ladder.rho0);

  // Empirical companions recorded next to the fit.
  const AnalysisSpec& an = m.cfg.analysis;
  const Cylinder cyl{an.audit_x0, m.traj.times.back(), an.audit_radius, an.audit_theta};
  const CaccioppoliReport cr = caccioppoli_audit(m.traj, m.problem, an.audit_level, an.audit_sign,
                                                 RadialCutoff::smooth(0.9 * an.audit_radius), cyl, an.c_audit);
  std::vector<Level> levels;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double env = fit.c * std::pow(1.0 + std::log(ladder.rho0 / samples[k].r), -fit.varsigma / 2.0) +
                       4.0 * m.traj.epsilon;
    levels.push_back({static_cast<int>(k), std::log(samples[k].r), env, ladder.theta});
  }
  const SequenceTailReport tails = sequence_tail_report(m.traj, m.problem.exterior(), ladder.x0, ladder.t0, levels);

  const fs::path base = fs::path(STEFANLAB_BASELINE_DIR) / "melt1d_modulus.json";
  std::string baseline_note;
  bool within = true;
  if (fs::exists(base)) {
    const json b = json::parse(slurp(base));
    const double ref = b.at("varsigma").get<double>();
    within = std::abs(fit.varsigma - ref) <= 0.2 * std::abs(ref);
    baseline_note = ", baseline " + fmt(ref) + (within ? " (within 20%)" : " (DRIFTED beyond 20%)");
    const double cref = b.at("caccioppoli_ratio").get<double>();
    const double tref = b.at("max_tail_ratio").get<double>();
    baseline_note += ", energy ratio " + fmt(cr.ratio) + " vs " + fmt(cref) + ", tail ratio " +
                     fmt(tails.max_ratio) + " vs " + fmt(tref);
  } else {
    json b;
    b["varsigma"] = fit.varsigma;
    b["c"] = fit.c;
    b["residual"] = fit.residual;
    b["caccioppoli_ratio"] = cr.ratio;
    b["max_tail_ratio"] = tails.max_ratio;
    fs::create_directories(base.parent_path());
    std::ofstream(base) << b.dump(2) << '\n';
    baseline_note = ", baseline recorded";
  }
  const bool ok = nonincreasing && fit.varsigma > 0.0 && fit.residual < 0.1 && within;
  return {ok, std::string("osc ") + (nonincreasing ? "nonincreasing" : "NOT monotone") + " over " +
                  std::to_string(samples.size()) + " levels, varsigma " + fmt(fit.varsigma) + ", residual " +
                  fmt(fit.residual, 3) + baseline_note};
}

Outcome continuation_family() {
  const RunConfig cfg = preset("melt1d");
  const LatticeProblem pb = cfg.problem.build();
  const std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
  const FamilyResult fam = run_family(pb, eps, cfg.solver);
  for (const auto& e : fam.entries) {
    if (!e.ok()) return {false, "entry eps " + fmt(e.epsilon) + " failed: " + e.message};
  }
  const std::vector<double> d = fam.successive();
  bool dist_ok = d.size() == 3;
  for (std::size_t k = 1; k < d.size(); ++k) dist_ok = dist_ok && d[k] <= d[k - 1];

  const double delta = 0.05;
  const LimitPair lp = limit_pair(fam, delta);
  bool w_ok = true;
  for (std::size_t m = 0; m < lp.w.size(); ++m) {
    const auto& u = lp.u->fields[m];
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double w = lp.w[m][i];
      w_ok = w_ok && w >= 0.0 && w <= 1.0;
      if (u[i] > delta) w_ok = w_ok && w == 1.0;
      if (u[i] < -delta) w_ok = w_ok && w == 0.0;
    }
  }

  std::vector<double> band;
  for (const auto& e : fam.entries) band.push_back(band_fraction(*e.trajectory, delta));
  bool band_ok = true;
  for (std::size_t k = 1; k < band.size(); ++k) band_ok = band_ok && band[k] < band[k - 1];

  std::string ds;
  for (double x : d) ds += (ds.empty() ? "" : " ") + fmt(x);
  std::string bs;
  for (double x : band) bs += (bs.empty() ? "" : " ") + fmt(x);
  return {dist_ok && w_ok && band_ok, std::string("distances [") + ds + "] " + (dist_ok ? "nonincreasing" : "NOT monotone") +
                                          ", w rules " + (w_ok ? "hold" : "VIOLATED") + ", band fractions [" + bs + "] " +
                                          (band_ok ? "decreasing" : "NOT decreasing")};
}

Outcome measure_density_and_boundary() {
  ProblemSpec half;
  half.omega = {"halfline", 0.0, 0.0};
  half.g.value = 1.0;
  half.u0.value = -1.0;
  const LatticeProblem pb = half.build();
  const std::vector<double> radii{0.0625, 0.125, 0.25, 0.5, 1.0};
  const DensityReport dr = measure_density(pb.grid, pb.omega_mask, {0.0, 0.0}, radii, 0.25);
  bool dens_ok = true;
  double worst = 0.0;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double slack = std::abs(dr.fractions[k] - 0.5) / (2.0 * pb.grid.h / radii[k]);
    worst = std::max(worst, slack);
    dens_ok = dens_ok && slack <= 1.0;
  }

  const RunConfig lb = preset("logbdy");
  const FieldSpec& g = lb.problem.g;
  const IterationParams ip =
      boundary_parameters(lb.problem.dim, lb.problem.s, lb.problem.p, g.c_g, g.delta, g.R, lb.problem.epsilon);
  const SequenceResult seq = boundary_sequences(ip, log_modulus_oscillation(g.c_g, g.delta, g.R, ip.s, ip.p));
  std::vector<double> omegas;
  for (const Level& l : seq.levels) omegas.push_back(l.omega);
  const EnvelopeFit env = fit_power_envelope(omegas);
  bool under = true;
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    under = under && omegas[i] <= env.c * std::pow(1.0 + static_cast<double>(i), -env.varsigma) * (1.0 + 1e-12);
  }
  const bool ok = dens_ok && env.bounded && under && env.varsigma > 0.0;
  return {ok, "half-line fractions within " + fmt(worst, 3) + " of the 2h/r band; boundary ladder " +
                  std::to_string(omegas.size()) + " levels, envelope c " + fmt(env.c) + ", varsigma " +
                  fmt(env.varsigma)};
}

Outcome synthetic_modulus() {
  const double rho0 = 0.5;
  std::vector<ModulusSample> samples;
  for (int k = 0; k < 16; ++k) {
    const double r = rho0 * std::pow(0.5, k);
    samples.push_back({r, 2.0 * std::pow(1.0 + std::log(rho0 / r), -0.25)});
  }
  const ModulusReport fit = fit_log_modulus(samples, 0.0, rho0);
  const double ec = std::abs(fit.c - 2.0);
  const double es = std::abs(fit.varsigma - 0.5);
  return {ec <= 1e-6 && es <= 1e-6, "c " + fmt(fit.c, 12) + ", varsigma " + fmt(fit.varsigma, 12)};
}

Outcome determinism(const Melt& m) {
  if (m.traj.fields.empty()) return {false, "melt1d trajectory unavailable"};
  const fs::path root = fs::temp_directory_path() / "stefanlab_acceptance_determinism";
  fs::remove_all(root);
  const std::string echo = emit_config(m.cfg);
  write_trajectory(root / "t1", m.traj, echo);
  std::size_t compared = 0;
  std::size_t differing = 0;
  for (int threads : {2, 8}) {
    const fs::path dir = root / ("t" + std::to_string(threads));
    write_trajectory(dir, solve_with_threads(m, threads), echo);
    for (const auto& entry : fs::directory_iterator(root / "t1")) {
      if (entry.path().extension() != ".csv") continue;
      ++compared;
      if (slurp(entry.path()) != slurp(dir / entry.path().filename())) ++differing;
    }
  }
  fs::remove_all(root);
  return {compared > 0 && differing == 0,
          std::to_string(compared) + " CSV comparisons (1 vs 2 and 8 threads), " + std::to_string(differing) +
              " differ"};
}

}  // namespace

int main() {
  Suite suite;
  Melt melt;
  suite.run(1, "lemma iter exhaustive", lemma_iter_grid);
  suite.run(2, "lemma tech1 geometric", lemma_tech1);
  suite.run(3, "tail analytic oracle", tail_oracle);
  suite.run(4, "enthalpy suite", enthalpy_suite);
  suite.run(5, "solver contracts melt1d", [&] { return solver_contracts(melt); });
  suite.run(6, "oscillation decay", [&] { return oscillation_decay(melt); });
  suite.run(7, "continuation family", continuation_family);
  suite.run(8, "measure density", measure_density_and_boundary);
  suite.run(9, "synthetic modulus", synthetic_modulus);
  suite.run(10, "determinism", [&] { return determinism(melt); });
  return suite.summary();
}
