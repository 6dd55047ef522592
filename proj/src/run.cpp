// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "stefanlab/analysis.hpp"
#include "stefanlab/config.hpp"
#include "stefanlab/continuation.hpp"

namespace stefanlab {

using ordered = nlohmann::ordered_json;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no NaN/inf; those become null.
ordered num(double v) { return std::isfinite(v) ? ordered(v) : ordered(nullptr); }

std::string step_stem(std::size_t m) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%05zu", m);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot open " + path.string());
  out << text;
  if (!out) throw Error(Errc::io, "write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ordered diagnostics_json(const StepDiagnostics& d) {
  ordered o;
  o["t"] = d.t;
  o["dt"] = d.dt;
  o["residual"] = d.residual;
  o["newton_iterations"] = d.newton_iterations;
  o["objective_decrease"] = num(d.objective_decrease);
  o["min_iteration_decrease"] = num(d.min_iteration_decrease);
  o["energy_before"] = d.energy_before;
  o["energy_after"] = d.energy_after;
  return o;
}

SolverConfig solver_of(const RunConfig& cfg, const RunOptions& opt) {
  SolverConfig sc = cfg.solver;
  sc.threads = opt.threads;
  return sc;
}

fs::path out_dir_of(const RunConfig& cfg, const RunOptions& opt) {
  fs::path dir = opt.out_dir.empty() ? fs::path(cfg.output) : opt.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

// Reuses a trajectory written by an earlier `solve` with the same config.
Trajectory obtain_trajectory(const RunConfig& cfg, const RunOptions& opt, const fs::path& dir) {
  const fs::path tdir = dir / "trajectory";
  const std::string echo = emit_config(cfg);
  if (fs::exists(tdir / "manifest.json")) {
    const json manifest = json::parse(read_text(tdir / "manifest.json"));
    if (manifest.contains("config") && manifest["config"] == json::parse(echo)) return read_trajectory(tdir);
  }
  Trajectory traj = solve(cfg.problem.build(), solver_of(cfg, opt));
  write_trajectory(tdir, traj, echo);
  return traj;
}

double max_residual(const Trajectory& t) {
  double r = 0.0;
  for (const auto& d : t.diagnostics) r = std::max(r, d.residual);
  return r;
}

RunOutcome run_solve(const RunConfig& cfg, const RunOptions& opt) {
  const fs::path dir = out_dir_of(cfg, opt);
  const LatticeProblem problem = cfg.problem.build();
  Trajectory traj;
  try {
    traj = solve(problem, solver_of(cfg, opt));
  } catch (const NewtonDivergence& e) {
    if (e.partial) write_trajectory(dir / "trajectory", *e.partial, emit_config(cfg));
    throw;
  }
  write_trajectory(dir / "trajectory", traj, emit_config(cfg));
  int iters = 0;
  for (const auto& d : traj.diagnostics) iters = std::max(iters, d.newton_iterations);
  ordered s;
  s["subcommand"] = "solve";
  s["problem"] = problem.name;
  s["stored_times"] = traj.times.size();
  s["final_time"] = traj.times.back();
  s["max_residual"] = max_residual(traj);
  s["max_newton_iterations"] = iters;
  s["trajectory"] = (dir / "trajectory").string();
  return {true, s.dump(2)};
}

LadderSpec ladder_of(const RunConfig& cfg, const Trajectory& traj) {
  LadderSpec l = cfg.analysis.ladder;
  if (cfg.analysis.ladder_t0_is_T) l.t0 = traj.times.back();
  return l;
}

// Lateral model when the ladder sits on the closure's boundary.
ModulusModel model_of(const RunConfig& cfg, const Trajectory& traj, const LadderSpec& l) {
  if (l.t0 - traj.times.front() <= 0.0) return ModulusModel::initial;
  const Grid& grid = traj.grid;
  std::size_t nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = distance(grid.coord(i), l.x0, grid.dim);
    if (d < best) {
      best = d;
      nearest = i;
    }
  }
  (void)cfg;
  return traj.omega_mask[nearest] ? ModulusModel::interior : ModulusModel::lateral;
}

const char* model_name(ModulusModel m) {
  switch (m) {
    case ModulusModel::interior: return "interior";
    case ModulusModel::lateral: return "lateral";
    case ModulusModel::initial: return "initial";
  }
  return "interior";
}

ordered sequence_json(const SequenceResult& seq) {
  ordered rows = ordered::array();
  for (const Level& l : seq.levels) {
    rows.push_back({{"level", l.index}, {"log_rho", l.log_rho}, {"omega", l.omega}, {"theta", l.theta}});
  }
  ordered o;
  o["nested"] = seq.nested;
  o["reached_floor"] = seq.reached_floor;
  o["levels"] = rows;
  return o;
}

RunOutcome run_modulus(const RunConfig& cfg, const RunOptions& opt) {
  const fs::path dir = out_dir_of(cfg, opt);
  const Trajectory traj = obtain_trajectory(cfg, opt, dir);
  const LatticeProblem problem = cfg.problem.build();
  const LadderSpec ladder = ladder_of(cfg, traj);
  const ModulusModel model = model_of(cfg, traj, ladder);
  const std::vector<ModulusSample> samples =
      oscillation_ladder(traj, ladder.x0, ladder.t0, ladder.rho0, ladder.ratio, ladder.levels, ladder.theta);
  const ModulusReport fit = fit_log_modulus(samples, traj.epsilon, ladder.rho0, model);

  std::vector<Level> levels;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double envelope =
        fit.c * std::pow(1.0 + std::log(ladder.rho0 / samples[k].r), -fit.varsigma / 2.0) + 4.0 * traj.epsilon;
    levels.push_back({static_cast<int>(k), std::log(samples[k].r), envelope, ladder.theta});
  }
  const SequenceTailReport tails = sequence_tail_report(traj, problem.exterior(), ladder.x0, ladder.t0, levels);

  std::ostringstream csv;
  csv << "level,rho,omega,theta,osc,tail_ratio\n";
  bool nonincreasing = true;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (k > 0 && samples[k].osc > samples[k - 1].osc) nonincreasing = false;
    double ratio = std::numeric_limits<double>::quiet_NaN();
    for (const auto& row : tails.levels) {
      if (row.index == static_cast<int>(k)) ratio = row.ratio;
    }
    csv << k << ',' << fmt17(samples[k].r) << ',' << fmt17(levels[k].omega) << ',' << fmt17(ladder.theta) << ','
        << fmt17(samples[k].osc) << ',' << fmt17(ratio) << '\n';
  }
  write_text(dir / "ladder.csv", csv.str());

  ordered s;
  s["subcommand"] = "analyze-modulus";
  s["model"] = model_name(model);
  s["x0"] = ordered::array({ladder.x0[0], ladder.x0[1]});
  s["t0"] = ladder.t0;
  s["rho0"] = ladder.rho0;
  s["theta"] = ladder.theta;
  s["epsilon"] = traj.epsilon;
  s["c"] = fit.c;
  s["varsigma"] = fit.varsigma;
  s["residual"] = fit.residual;
  s["used_samples"] = fit.used;
  s["osc_nonincreasing"] = nonincreasing;
  s["max_tail_ratio"] = tails.max_ratio;
  if (cfg.problem.g.type == "log_modulus") {
    const FieldSpec& g = cfg.problem.g;
    IterationParams q =
        boundary_parameters(cfg.problem.dim, cfg.problem.s, cfg.problem.p, g.c_g, g.delta, g.R, traj.epsilon);
    const SequenceResult seq = boundary_sequences(q, log_modulus_oscillation(g.c_g, g.delta, g.R, q.s, q.p));
    std::vector<double> omegas;
    for (const Level& l : seq.levels) omegas.push_back(l.omega);
    const EnvelopeFit env = fit_power_envelope(omegas);
    s["boundary_sequences"] = sequence_json(seq);
    s["boundary_envelope"] = {{"c", env.c}, {"varsigma", env.varsigma}, {"bounded", env.bounded}};
  }
  write_text(dir / "modulus.json", s.dump(2) + "\n");
  const bool ok = nonincreasing && fit.varsigma > 0.0;
  return {ok, s.dump(2)};
}

RunOutcome run_continuation(const RunConfig& cfg, const RunOptions& opt) {
  const fs::path dir = out_dir_of(cfg, opt);
  const LatticeProblem problem = cfg.problem.build();
  const FamilyResult family = run_family(problem, cfg.continuation.eps_list, solver_of(cfg, opt));

  std::vector<ModulusReport> fits;
  ordered entries = ordered::array();
  bool all_ok = true;
  for (std::size_t k = 0; k < family.entries.size(); ++k) {
    const FamilyEntry& e = family.entries[k];
    ordered row;
    row["epsilon"] = e.epsilon;
    ModulusReport fit;
    fit.varsigma = std::numeric_limits<double>::quiet_NaN();
    if (e.ok()) {
      RunConfig member = cfg;
      member.problem.epsilon = e.epsilon;
      const fs::path edir = dir / ("eps_" + std::to_string(k));
      write_trajectory(edir, *e.trajectory, emit_config(member));
      row["trajectory"] = edir.string();
      row["band_fraction"] = band_fraction(*e.trajectory, cfg.continuation.delta_resolve);
      try {
        fit = ladder_fit(*e.trajectory, ladder_of(cfg, *e.trajectory));
        row["fit"] = {{"c", fit.c}, {"varsigma", fit.varsigma}, {"residual", fit.residual}};
      } catch (const Error& err) {
        row["fit_error"] = std::string(errc_name(err.code()));
      }
    } else {
      all_ok = false;
      row["error"] = {{"code", std::string(errc_name(*e.error))}, {"message", e.message}};
    }
    fits.push_back(fit);
    entries.push_back(row);
  }

  ordered s;
  s["subcommand"] = "continuation";
  s["eps_list"] = cfg.continuation.eps_list;
  s["entries"] = entries;
  ordered dist = ordered::array();
  for (const auto& row : family.distance) {
    ordered r = ordered::array();
    for (double d : row) r.push_back(num(d));
    dist.push_back(r);
  }
  s["distance"] = dist;
  const std::vector<double> succ = family.successive();
  ordered succ_json = ordered::array();
  bool monotone = true;
  for (std::size_t i = 0; i < succ.size(); ++i) {
    succ_json.push_back(num(succ[i]));
    if (i > 0 && !(succ[i] <= succ[i - 1])) monotone = false;
  }
  s["successive"] = succ_json;
  s["successive_nonincreasing"] = monotone;
  all_ok = all_ok && monotone;
  if (family.entries.size() >= 2) {
    const ConvergenceReport rep = convergence_report(family, fits, cfg.continuation.max_spread);
    s["varsigma_spread"] = num(rep.varsigma_spread);
    s["varsigma_stable"] = rep.stable;
    s["consistent"] = rep.consistent;
    s["issues"] = rep.issues;
  }
  const LimitPair pair = limit_pair(family, cfg.continuation.delta_resolve, cfg.continuation.max_band_fraction);
  s["limit"] = {{"epsilon_min", pair.epsilon_min},
                {"delta_resolve", pair.delta},
                {"band_fraction", pair.band_fraction}};
  std::ostringstream csv;
  csv << "index,value_u,value_w,value_v\n";
  const std::size_t last = pair.w.size() - 1;
  for (std::size_t i = 0; i < pair.w[last].size(); ++i) {
    csv << i << ',' << fmt17(pair.u->fields[last][i]) << ',' << fmt17(pair.w[last][i]) << ','
        << fmt17(pair.v[last][i]) << '\n';
  }
  write_text(dir / "limit_final.csv", csv.str());
  write_text(dir / "family.json", s.dump(2) + "\n");
  return {all_ok, s.dump(2)};
}

RunOutcome run_lemma(const RunConfig& cfg, const RunOptions& opt) {
  const fs::path dir = out_dir_of(cfg, opt);
  const long n_max = cfg.analysis.lemma_n_max;
  bool ok = true;

  std::ostringstream iter_csv;
  iter_csv << "M2,N2,L2,omega0,epsilon,checked,first_violation,worst_margin,pass\n";
  long cases = 0;
  long failures = 0;
  for (double M2 : {4.0, 8.0, 16.0}) {
    for (double N2 : {4.0, 8.0, 16.0}) {
      for (double L2 : {4.0, 8.0, 16.0}) {
        if (L2 < M2) continue;
        for (double w0 : {1.0, 2.0, 10.0}) {
          const IterVerdict v = lemma_iter_verify(M2, N2, L2, w0, n_max);
          ++cases;
          if (!v.pass()) ++failures;
          iter_csv << M2 << ',' << N2 << ',' << L2 << ',' << w0 << ',' << fmt17(v.epsilon) << ',' << v.checked << ','
                   << (v.first_violation ? std::to_string(*v.first_violation) : "") << ',' << fmt17(v.worst_margin)
                   << ',' << (v.pass() ? "true" : "false") << '\n';
        }
      }
    }
  }
  write_text(dir / "lemma_iter.csv", iter_csv.str());
  // Negative control: an exponent 32 times the closed form must break the goal inequality.
  const double eps444 = lemma_iter_epsilon(4, 4, 4);
  const IterVerdict control = lemma_iter_verify(4, 4, 4, 1.0, n_max, 32.0 * eps444);
  ok = ok && failures == 0 && !control.pass();

  std::ostringstream tech_csv;
  tech_csv << std::boolalpha << "case,c,b,alpha,A0,threshold,below_threshold,decay_certified,bounded,diverged,pass\n";
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> uc(1.0, 4.0);
  std::uniform_real_distribution<double> ub(0.0, 1.0);
  std::uniform_real_distribution<double> ua(0.25, 2.0);
  long tech_fail = 0;
  const auto row = [&](const std::string& name, double c, double b, double a, double A0, const GeometricVerdict& g) {
    tech_csv << name << ',' << fmt17(c) << ',' << fmt17(b) << ',' << fmt17(a) << ',' << fmt17(A0) << ','
             << fmt17(g.threshold) << ',' << g.below_threshold << ',' << g.decay_certified << ',' << g.bounded << ','
             << g.diverged << ',' << g.pass << '\n';
  };
  for (int k = 0; k < cfg.analysis.tech1_cases; ++k) {
    const double c = uc(rng);
    const double b = 4.0 - 3.0 * ub(rng);  // (1, 4]
    const double a = ua(rng);
    const double A0 = std::pow(c, -1.0 / a) * std::pow(b, -1.0 / (a * a));
    const GeometricVerdict g = geometric_convergence(c, b, a, A0, cfg.analysis.tech1_n_max);
    if (!g.pass) ++tech_fail;
    row(std::to_string(k), c, b, a, A0, g);
  }
  const GeometricVerdict neg = geometric_convergence(1.0, 2.0, 1.0, 1.5 * 0.5, cfg.analysis.tech1_n_max);
  row("negative_control", 1.0, 2.0, 1.0, 0.75, neg);
  const GeometricVerdict flat = geometric_convergence(1.0, 1.0, 1.0, 1.0, cfg.analysis.tech1_n_max);
  row("b_equals_1", 1.0, 1.0, 1.0, 1.0, flat);
  write_text(dir / "lemma_tech1.csv", tech_csv.str());
  ok = ok && tech_fail == 0 && neg.diverged && flat.pass;

  ordered s;
  s["subcommand"] = "lemma-check";
  s["iter"] = {{"cases", cases}, {"failures", failures}, {"n_max", n_max}};
  s["iter_negative_control"] = {{"epsilon", control.epsilon},
                                {"violation_found", !control.pass()},
                                {"first_violation", control.first_violation ? *control.first_violation : -1}};
  s["tech1"] = {{"cases", cfg.analysis.tech1_cases}, {"failures", tech_fail}};
  s["tech1_negative_control_diverged"] = neg.diverged;
  s["tech1_b_equals_1_bounded"] = flat.bounded;
  s["pass"] = ok;
  write_text(dir / "lemma.json", s.dump(2) + "\n");
  return {ok, s.dump(2)};
}

RunOutcome run_verify(const RunConfig& cfg, const RunOptions& opt) {
  const fs::path dir = out_dir_of(cfg, opt);
  const LatticeProblem problem = cfg.problem.build();
  const SolverConfig sc = solver_of(cfg, opt);
  const double tol = 10.0 * sc.newton_tol;
  const Trajectory traj = obtain_trajectory(cfg, opt, dir);
  ordered s;
  s["subcommand"] = "verify";
  bool ok = true;

  const MaxPrincipleReport mp = max_principle_check(traj, problem, tol);
  s["max_principle"] = {{"defect", mp.defect}, {"data_bound", mp.data_bound}, {"pass", mp.pass}};
  ok = ok && mp.pass;

  // Ordered initial data under the same exterior datum.
  LatticeProblem lower = problem;
  for (std::size_t i = 0; i < lower.u0.size(); ++i) {
    if (lower.omega_mask[i]) lower.u0[i] -= 0.25;
  }
  const Trajectory low = solve(lower, sc);
  double cmp = 0.0;
  for (std::size_t m = 0; m < low.fields.size(); ++m) {
    for (std::size_t i = 0; i < low.fields[m].size(); ++i) cmp = std::max(cmp, low.fields[m][i] - traj.fields[m][i]);
  }
  s["comparison"] = {{"defect", cmp}, {"pass", cmp <= tol}};
  ok = ok && cmp <= tol;

  const double M = 2.0;
  const Trajectory scaled = solve(normalize(problem, M, {0.0, 0.0}, problem.t_start), sc);
  double nd = 0.0;
  for (std::size_t m = 0; m < scaled.fields.size(); ++m) {
    for (std::size_t i = 0; i < scaled.fields[m].size(); ++i) {
      nd = std::max(nd, std::abs(M * scaled.fields[m][i] - traj.fields[m][i]));
    }
  }
  s["normalization"] = {{"M", M}, {"defect", nd}, {"pass", nd <= tol}};
  ok = ok && nd <= tol;

  const AnalysisSpec& an = cfg.analysis;
  // Cutoff supported strictly inside the cylinder ball.
  const Cylinder cyl{an.audit_x0, traj.times.back(), an.audit_radius, an.audit_theta};
  try {
    const CaccioppoliReport cr = caccioppoli_audit(traj, problem, an.audit_level, an.audit_sign,
                                                   RadialCutoff::smooth(0.9 * an.audit_radius), cyl, an.c_audit);
    s["caccioppoli"] = {{"lhs", cr.lhs}, {"rhs", cr.rhs}, {"ratio", num(cr.ratio)},
                        {"latent_contribution", cr.latent_contribution}, {"pass", cr.pass}};
    ok = ok && cr.pass;
  } catch (const Error& e) {
    s["caccioppoli"] = {{"error", std::string(errc_name(e.code()))}, {"message", e.what()}};
    ok = false;
  }

  const DensityReport dr = measure_density(problem.grid, problem.omega_mask, an.density_x0, an.density_radii, an.alpha0);
  s["measure_density"] = {{"x0", ordered::array({an.density_x0[0], an.density_x0[1]})},
                          {"radii", dr.radii},
                          {"fractions", dr.fractions},
                          {"min_fraction", dr.min_fraction},
                          {"alpha0", an.alpha0},
                          {"pass", dr.pass}};
  ok = ok && dr.pass;

  const KernelAuditReport ka = kernel_audit(problem.kernel, problem.grid.dim, 1000, opt.seed);
  s["kernel_audit"] = {{"samples", ka.samples},
                       {"max_symmetry_defect", ka.max_symmetry_defect},
                       {"lower_bound_violations", ka.lower_bound_violations},
                       {"upper_bound_violations", ka.upper_bound_violations},
                       {"pass", ka.pass()}};
  ok = ok && ka.pass();

  // Gradient consistency of the step objective at seeded random states.
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const std::size_t mid = traj.fields.size() / 2;
  const StepSystem sys(problem, problem.enthalpy(), traj.fields[mid], traj.times[mid] + 1e-3, 1e-3, 1);
  double gd = 0.0;
  for (int k = 0; k < 3; ++k) {
    std::vector<double> v(sys.unknowns());
    for (double& x : v) x = unit(rng);
    gd = std::max(gd, gradient_defect(sys, v, 1e-5));
  }
  s["objective_gradient"] = {{"max_relative_defect", gd}, {"pass", gd <= 1e-6}};
  ok = ok && gd <= 1e-6;

  s["pass"] = ok;
  write_text(dir / "verify.json", s.dump(2) + "\n");
  return {ok, s.dump(2)};
}

RunOutcome run_tail(const RunConfig& cfg, const RunOptions& opt) {
  const fs::path dir = out_dir_of(cfg, opt);
  const Trajectory traj = obtain_trajectory(cfg, opt, dir);
  const LatticeProblem problem = cfg.problem.build();
  const ExteriorRule ext = problem.exterior();
  const SpaceTimeSamples samples = traj.samples(ext);
  ordered rows = ordered::array();
  for (const TailQuery& q : cfg.analysis.tails) {
    double lo = q.t_lo;
    double hi = q.t_hi;
    if (!(hi > lo)) {
      lo = traj.times.front();
      hi = traj.times.back();
    }
    const double value = tail(samples, q.x0, q.rho, lo, hi, traj.s, traj.p);
    rows.push_back({{"x0", ordered::array({q.x0[0], q.x0[1]})}, {"rho", q.rho}, {"t_lo", lo}, {"t_hi", hi},
                    {"tail", value}});
  }
  ordered s;
  s["subcommand"] = "tail";
  s["tails"] = rows;
  write_text(dir / "tail.json", s.dump(2) + "\n");
  return {true, s.dump(2)};
}

}  // namespace

std::vector<std::string> subcommands() {
  return {"solve", "analyze-modulus", "continuation", "lemma-check", "verify", "tail"};
}

RunOutcome run(const std::string& subcommand, const RunConfig& config, const RunOptions& options) {
  if (options.threads < 1) throw Error(Errc::invalid_argument, "threads must be positive");
  if (subcommand == "solve") return run_solve(config, options);
  if (subcommand == "analyze-modulus") return run_modulus(config, options);
  if (subcommand == "continuation") return run_continuation(config, options);
  if (subcommand == "lemma-check") return run_lemma(config, options);
  if (subcommand == "verify") return run_verify(config, options);
  if (subcommand == "tail") return run_tail(config, options);
  throw Error(Errc::invalid_argument, "unknown subcommand '" + subcommand + "'");
}

void write_trajectory(const fs::path& dir, const Trajectory& traj, const std::string& config_echo) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create " + dir.string() + ": " + ec.message());
  ordered files = ordered::array();
  for (std::size_t m = 0; m < traj.fields.size(); ++m) {
    const std::string stem = step_stem(m);
    write_field_csv(dir / (stem + ".csv"), traj.grid, traj.fields[m]);
    write_field_binary(dir / (stem + ".bin"), traj.fields[m]);
    files.push_back(stem);
  }
  ordered grid;
  grid["dim"] = traj.grid.dim;
  grid["count"] = ordered::array({traj.grid.count[0], traj.grid.count[1]});
  grid["origin"] = ordered::array({traj.grid.origin[0], traj.grid.origin[1]});
  grid["h"] = traj.grid.h;
  grid["r_inf"] = traj.grid.r_inf;
  ordered diag = ordered::array();
  for (const StepDiagnostics& d : traj.diagnostics) diag.push_back(diagnostics_json(d));
  ordered m;
  m["grid"] = grid;
  m["s"] = traj.s;
  m["p"] = traj.p;
  m["epsilon"] = traj.epsilon;
  m["omega_mask"] = traj.omega_mask;
  m["times"] = traj.times;
  m["files"] = files;
  m["diagnostics"] = diag;
  m["config"] = config_echo.empty() ? ordered(nullptr) : ordered::parse(config_echo);
  write_text(dir / "manifest.json", m.dump(1) + "\n");
}

Trajectory read_trajectory(const fs::path& dir) {
  json m;
  try {
    m = json::parse(read_text(dir / "manifest.json"));
    Trajectory t;
    const json& g = m.at("grid");
    t.grid.dim = g.at("dim").get<int>();
    t.grid.count = {g.at("count")[0].get<long>(), g.at("count")[1].get<long>()};
    t.grid.origin = {g.at("origin")[0].get<double>(), g.at("origin")[1].get<double>()};
    t.grid.h = g.at("h").get<double>();
    t.grid.r_inf = g.at("r_inf").get<double>();
    t.grid.validate();
    t.s = m.at("s").get<double>();
    t.p = m.at("p").get<double>();
    t.epsilon = m.at("epsilon").get<double>();
    t.omega_mask = m.at("omega_mask").get<std::vector<std::uint8_t>>();
    t.times = m.at("times").get<std::vector<double>>();
    for (const auto& stem : m.at("files")) {
      std::vector<double> f = read_field_binary(dir / (stem.get<std::string>() + ".bin"));
      if (f.size() != t.grid.size()) throw Error(Errc::io, "field dump has wrong size in " + dir.string());
      t.fields.push_back(std::move(f));
    }
    for (const auto& d : m.at("diagnostics")) {
      StepDiagnostics s;
      s.t = d.at("t").get<double>();
      s.dt = d.at("dt").get<double>();
      s.residual = d.at("residual").get<double>();
      s.newton_iterations = d.at("newton_iterations").get<int>();
      const auto opt = [](const json& v) {
        return v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
      };
      s.objective_decrease = opt(d.at("objective_decrease"));
      s.min_iteration_decrease = opt(d.at("min_iteration_decrease"));
      s.energy_before = d.at("energy_before").get<double>();
      s.energy_after = d.at("energy_after").get<double>();
      t.diagnostics.push_back(s);
    }
    if (t.fields.size() != t.times.size()) throw Error(Errc::io, "manifest lists mismatched times and files");
    return t;
  } catch (const json::exception& e) {
    throw Error(Errc::io, "malformed manifest in " + dir.string() + ": " + e.what());
  }
}

}  // namespace stefanlab
