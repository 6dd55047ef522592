// SPDX-License-Identifier: Apache-2.0

#ifndef STEFANLAB_ANALYSIS_HPP
#define STEFANLAB_ANALYSIS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stefanlab/cylinder.hpp"
#include "stefanlab/solver.hpp"

namespace stefanlab {

/// sup - inf of u over box nodes in the closed ball and stored times in
/// (t0 - theta rho^{sp}, t0]. Throws Errc::empty_cylinder.
double oscillation(const Trajectory& traj, const Cylinder& cyl);

/// Constants of the cylinder recursions. Exponents are real-valued since
/// the explicit boundary choices (e.g. M2 = 4 + 1/(p-2)) are not integers.
struct IterationParams {
  double M1 = 4.0, N1 = 4.0, M2 = 4.0, N2 = 4.0;
  double L1 = 4.0, L2 = 4.0, N0 = 1.0;  // lateral boundary only
  double N = 4.0;                       // initial level only
  double s = 0.5, p = 3.0;
  double epsilon = 0.01;
  double omega0 = 1.0;
  double rho0 = 1.0;
  int max_levels = 64;

  /// m = max{7/8, 2^{-s}}.
  double initial_contraction() const;
};

/// One level of a cylinder ladder. rho is carried in log form since the
/// recursions shrink it far below the double range within a few dozen levels.
struct Level {
  int index = 0;
  double log_rho = 0.0;
  double omega = 0.0;
  double theta = 0.0;
  double rho() const;
  /// log of the cylinder's time length theta rho^{sp}.
  double log_duration(double s, double p) const;
};

struct SequenceResult {
  std::vector<Level> levels;
  bool nested = true;          // time length nonincreasing level to level
  bool reached_floor = false;  // omega hit 4 eps
};

/// Callback returning the oscillation of the boundary datum on a level.
using DatumOscillation = std::function<double(const Level&)>;

/// rho_{i+1} = f1(omega_i) rho_i, omega_{i+1} = max{omega_i f2(omega_i), omega_i / 2^s, 4 eps},
/// theta_i = (omega_i / 4)^{2-p}, with f1(x) = x^{M1} / (N1 omega0^{M1}),
/// f2(x) = 1 - x^{M2} / (N2 omega0^{M2}). Stops at the first level with
/// omega = 4 eps or at max_levels. Throws Errc::invalid_params.
SequenceResult interior_sequences(const IterationParams& params);

/// Lateral-boundary recursion: f1(x) = x^{M1} / (N0 N1 omega0^{L1}),
/// f2(x) = 1 - x^{M2} / (N2 omega0^{L2}), theta_i = (omega_i / 4)^{1-p} and
/// 2 osc g folded into the max.
SequenceResult boundary_sequences(const IterationParams& params, const DatumOscillation& osc_g);

/// Explicit lateral-boundary constants at omega0 = 1: M2 = 4 + 1/(p-2),
/// L2 = (2 + n/(sp)) M2, M1 = 4 + M2 (p-1)/(sp), L1 = 4 + L2 (p-1)/(sp),
/// N1 = 4^{2(p-1)/s} + 1, N2 = 16, rho0 = R / 4^{(p-1)/(sp)}, and the
/// smallest N0 with c_g (1 + (i+1) ln N0)^{-delta} <= (2+i)^{-delta} / 2 for all i.
IterationParams boundary_parameters(int dim, double s, double p, double c_g, double delta, double R,
                                    double epsilon);

/// osc of a datum with modulus c_g (1 + ln(R/r))^{-delta} on the lateral
/// cylinder of a level, r = rho (1 + theta^{1/(sp)}) capped at R.
DatumOscillation log_modulus_oscillation(double c_g, double delta, double R, double s, double p);

/// Initial-level recursion rho_{i+1} = rho_i / N, omega_{i+1} = max{m omega_i, 2 osc g}.
SequenceResult initial_sequences(const IterationParams& params, const DatumOscillation& osc_g);

/// (1/2) min{1/(2 M2), log2(q / (q - 1))}, q = M2 N2 sqrt(N2^2 - 1).
double lemma_iter_epsilon(double M2, double N2, double L2);

struct IterVerdict {
  double epsilon = 0.0;
  long checked = 0;
  std::optional<long> first_violation;
  double worst_margin = 0.0;  // min over n of a_n - a_{n-1} g(a_{n-1}), relative to a_{n-1}
  bool pass() const { return !first_violation; }
};

/// Brute-force check of a_n >= a_{n-1} g(a_{n-1}) for n = 1..n_max with
/// a_n = omega0^{L2/M2} (1+n)^{-eps}, g(x) = 1 - |x|^{M2} / (N2 omega0^{L2}).
/// `epsilon_override` replaces the closed-form eps (negative controls).
IterVerdict lemma_iter_verify(double M2, double N2, double L2, double omega0, long n_max,
                              std::optional<double> epsilon_override = std::nullopt);

struct GeometricVerdict {
  std::vector<double> values;  // A_0..A_n (may overflow to inf)
  double threshold = 0.0;      // c^{-1/alpha} b^{-1/alpha^2}
  bool below_threshold = false;
  bool decay_certified = false;  // A_i <= A_0 b^{-i/alpha} for every i
  bool bounded = false;          // sup A_i <= A_0
  bool diverged = false;
  bool pass = false;
};

/// Iterates the extremal recursion A_{i+1} = c b^i A_i^{1+alpha}. For b = 1
/// the decay certificate is vacuous and the verdict asks for boundedness.
GeometricVerdict geometric_convergence(double c, double b, double alpha, double A0, int n_max);

enum class LevelSide { below, above };

/// Fraction of sampled space-time nodes in the cylinder with u <= level
/// (below) or u > level (above).
double level_set_fraction(const Trajectory& traj, const Cylinder& cyl, LevelSide side, double level);

struct DensityReport {
  std::vector<double> radii;
  std::vector<double> fractions;
  double min_fraction = 0.0;
  bool pass = false;
};

/// |B_r(x0) \ Omega| / |B_r| by lattice-site counting (sites beyond the box
/// count as exterior). pass iff every fraction is >= alpha0.
DensityReport measure_density(const Grid& grid, std::span<const std::uint8_t> omega_mask, const Point& x0,
                              std::span<const double> radii, double alpha0);

struct ModulusSample {
  double r = 0.0;
  double osc = 0.0;
};

enum class ModulusModel { interior, lateral, initial };

struct ModulusReport {
  std::vector<ModulusSample> samples;
  std::size_t used = 0;
  double c = 0.0;
  double varsigma = 0.0;
  double epsilon = 0.0;
  double rho0 = 0.0;
  double residual = 0.0;
  ModulusModel model = ModulusModel::interior;
};

/// Least squares of ln(osc - 4 eps) on ln(1 + ln(rho0 / r)): slope -varsigma/2,
/// intercept ln c. Samples with osc <= 4 eps + 1e-12 are dropped. Throws
/// Errc::insufficient_samples / Errc::nonpositive_excess.
ModulusReport fit_log_modulus(std::span<const ModulusSample> samples, double epsilon, double rho0,
                              ModulusModel model = ModulusModel::interior);

/// Nested ladder r_k = rho0 q^k of cylinders Q_{r_k}^{(theta)}(z0) sharing
/// t0 and theta; returns (r, osc) samples.
std::vector<ModulusSample> oscillation_ladder(const Trajectory& traj, const Point& x0, double t0, double rho0,
                                              double ratio, int levels, double theta);

/// Ladder placement shared by the modulus fit and the CLI.
struct LadderSpec {
  Point x0{0.0, 0.0};
  double t0 = 0.0;
  double rho0 = 0.5;
  double ratio = 0.9;
  int levels = 8;
  double theta = 4.0;
};

/// oscillation_ladder followed by fit_log_modulus with rho0 from the spec.
ModulusReport ladder_fit(const Trajectory& traj, const LadderSpec& spec,
                         ModulusModel model = ModulusModel::interior);

/// Power-law envelope omega_i <= c (1+i)^{-varsigma}: slope from least
/// squares in log-log, c the smallest constant making it an upper bound.
struct EnvelopeFit {
  double c = 0.0;
  double varsigma = 0.0;
  bool bounded = false;
};
EnvelopeFit fit_power_envelope(std::span<const double> omegas);

struct TailLevelReport {
  int index = 0;
  double mu_plus = 0.0;
  double mu_minus = 0.0;
  double tail_plus = 0.0;
  double tail_minus = 0.0;
  double ratio = 0.0;
};

struct SequenceTailReport {
  std::vector<TailLevelReport> levels;
  double max_ratio = 0.0;
};

/// Tail((u - mu_i^+)_+; Q_i) and Tail((u - mu_i^-)_-; Q_i) over omega_i for
/// each level with an intrinsic cylinder at z0; levels whose cylinder holds
/// no lattice node or stored time are skipped.
SequenceTailReport sequence_tail_report(const Trajectory& traj, const ExteriorRule& exterior,
                                        const Point& x0, double t0, std::span<const Level> levels);

}  // namespace stefanlab

#endif
