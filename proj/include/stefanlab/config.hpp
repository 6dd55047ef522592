// SPDX-License-Identifier: Apache-2.0

#ifndef STEFANLAB_CONFIG_HPP
#define STEFANLAB_CONFIG_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stefanlab/analysis.hpp"
#include "stefanlab/error.hpp"
#include "stefanlab/solver.hpp"

namespace stefanlab {

/// Domain Omega inside the box: an interval (a square in 2-D), a half-line
/// x_0 > lo, or an open ball.
struct DomainSpec {
  std::string type = "interval";
  double lo = -1.0;
  double hi = 1.0;
  Point center{0.0, 0.0};
  double radius = 1.0;

  bool contains(const Point& x, int dim) const;
};

/// Scalar field x -> value used for g and u0. `log_modulus` is
/// c_g (1 + ln(R / min(|x - center|, R)))^{-delta}, which vanishes at the center.
struct FieldSpec {
  std::string type = "constant";
  double value = 0.0;
  double amplitude = 1.0;
  double frequency = 1.0;
  double c_g = 0.5;
  double delta = 0.9;
  double R = 1.0;
  Point center{0.0, 0.0};

  double operator()(const Point& x, int dim) const;
  /// Value the field takes far away (used beyond the truncation radius).
  double far_value() const;
};

struct ProblemSpec {
  std::string preset;  // empty for inline problems
  int dim = 1;
  double box_lo = -2.0;
  double box_hi = 2.0;
  long nodes = 257;
  double r_inf = 4.0;
  double s = 0.5;
  double p = 3.0;
  std::string kernel = "constant";
  double lambda = 1.0;
  double epsilon = 0.05;
  double T = 0.3;
  DomainSpec omega;
  FieldSpec g;
  FieldSpec u0;

  LatticeProblem build() const;
};

struct TailQuery {
  Point x0{0.0, 0.0};
  double rho = 0.5;
  double t_lo = 0.0;
  double t_hi = 0.0;  // <= t_lo means "the whole horizon"
};

struct AnalysisSpec {
  LadderSpec ladder;
  bool ladder_t0_is_T = true;
  std::vector<TailQuery> tails;
  // Caccioppoli audit cylinder and truncation.
  Point audit_x0{-0.5, 0.0};
  double audit_radius = 0.25;
  double audit_theta = 4.0;
  double audit_level = 0.0;
  int audit_sign = 1;
  double c_audit = 10.0;
  // Measure density at a boundary point.
  Point density_x0{-1.0, 0.0};
  std::vector<double> density_radii{0.125, 0.25, 0.5, 1.0};
  double alpha0 = 0.25;
  long lemma_n_max = 100000;
  int tech1_cases = 20;
  int tech1_n_max = 1000;
};

struct ContinuationSpec {
  std::vector<double> eps_list{0.2, 0.1, 0.05, 0.025};
  double delta_resolve = 0.05;
  double max_band_fraction = 1.0;
  double max_spread = 0.5;
};

struct RunConfig {
  ProblemSpec problem;
  SolverConfig solver;
  AnalysisSpec analysis;
  ContinuationSpec continuation;
  std::string output = "out";
};

/// Schema failures carry every violation as "<json pointer>: <message>".
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  std::vector<std::string> violations;
};

/// Presets: melt1d, twophase1d, logbdy, constant.
std::vector<std::string> preset_names();
/// Throws Errc::invalid_argument for unknown names.
RunConfig preset(const std::string& name);

/// Strict JSON parser: unknown keys, wrong types and violated
/// preconditions are all collected before a ConfigError is thrown.
/// A "preset" entry in "problem" seeds defaults that explicit keys override.
RunConfig parse_config(const std::string& text);

/// Canonical JSON with a fixed key order and 17 significant digits.
std::string emit_config(const RunConfig& config);

struct RunOptions {
  std::filesystem::path out_dir;  // empty: use config.output
  int threads = 1;
  std::uint64_t seed = 1;
};

struct RunOutcome {
  bool ok = true;
  std::string summary;  // JSON document
};

std::vector<std::string> subcommands();

/// Executes one of solve, analyze-modulus, continuation, lemma-check,
/// verify, tail and writes its artifacts. A failed contract yields
/// ok = false with the report in the summary; hard errors throw.
RunOutcome run(const std::string& subcommand, const RunConfig& config, const RunOptions& options);

/// Trajectory directories: step_<m>.csv / .bin per stored time and a
/// manifest.json with times, diagnostics and the config echo.
void write_trajectory(const std::filesystem::path& dir, const Trajectory& traj, const std::string& config_echo);
Trajectory read_trajectory(const std::filesystem::path& dir);

}  // namespace stefanlab

#endif
