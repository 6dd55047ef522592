// SPDX-License-Identifier: Apache-2.0

#ifndef STEFANLAB_CONTINUATION_HPP
#define STEFANLAB_CONTINUATION_HPP

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stefanlab/analysis.hpp"
#include "stefanlab/solver.hpp"

namespace stefanlab {

struct FamilyEntry {
  double epsilon = 0.0;
  std::shared_ptr<const Trajectory> trajectory;  // null when the solve failed
  std::optional<Errc> error;
  std::string message;

  bool ok() const { return trajectory != nullptr; }
};

struct FamilyResult {
  std::vector<FamilyEntry> entries;
  /// Sup-norm distances over common nodes and times; NaN where an entry
  /// failed or the samples do not line up. Empty for a single entry.
  std::vector<std::vector<double>> distance;

  /// d_{i,i+1} in entry order.
  std::vector<double> successive() const;
};

/// Sup of |u - v| over all nodes and stored times; throws
/// Errc::inconsistent_family when grids or time samples differ.
double sup_distance(const Trajectory& a, const Trajectory& b);

/// Solves the problem once per epsilon (strictly decreasing, each in (0, 1))
/// with everything else shared. The time step is forced to the fixed policy
/// so samples align. A failing entry is recorded, not rethrown.
FamilyResult run_family(const LatticeProblem& problem, std::span<const double> eps_list, SolverConfig config);

/// Fraction of (interior node, stored time) samples with |u| <= delta.
double band_fraction(const Trajectory& traj, double delta);

struct LimitPair {
  std::shared_ptr<const Trajectory> u;
  std::vector<std::vector<double>> w;
  std::vector<std::vector<double>> v;
  double epsilon_min = 0.0;
  double delta = 0.0;
  double band_fraction = 0.0;
};

/// u from the finest successful entry; w = 1 where u > delta, 0 where
/// u < -delta, beta_{eps_min}(u) clamped to [0, 1] in between; v = u + w.
/// Throws Errc::unresolved_band_too_wide when the band fraction exceeds
/// `max_band_fraction`, Errc::inconsistent_family when no entry succeeded.
LimitPair limit_pair(const FamilyResult& family, double delta, double max_band_fraction = 1.0);

struct ConvergenceReport {
  std::vector<double> epsilons;
  std::vector<double> successive;
  std::vector<double> c;
  std::vector<double> varsigma;
  double varsigma_spread = 0.0;  // (max - min) / mean |varsigma|
  bool stable = false;
  bool consistent = true;
  std::vector<std::string> issues;
};

/// Tabulates successive distances and per-entry fits; `fits` is aligned
/// with the family entries. Grid or sampling mismatches are flagged in
/// `issues` rather than thrown.
ConvergenceReport convergence_report(const FamilyResult& family, std::span<const ModulusReport> fits,
                                     double max_spread = 0.5);

}  // namespace stefanlab

#endif
