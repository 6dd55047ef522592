// SPDX-License-Identifier: Apache-2.0

#include "stefanlab/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "stefanlab/error.hpp"

namespace stefanlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool same_sampling(const Trajectory& a, const Trajectory& b) {
  return a.grid == b.grid && a.times == b.times && a.fields.size() == b.fields.size();
}

}  // namespace

std::vector<double> FamilyResult::successive() const {
  std::vector<double> d;
  for (std::size_t i = 0; i + 1 < entries.size(); ++i) d.push_back(distance[i][i + 1]);
  return d;
}

double sup_distance(const Trajectory& a, const Trajectory& b) {
  if (!same_sampling(a, b)) throw Error(Errc::inconsistent_family, "trajectories do not share grid and time samples");
  double d = 0.0;
  for (std::size_t m = 0; m < a.fields.size(); ++m) {
    for (std::size_t i = 0; i < a.fields[m].size(); ++i) d = std::max(d, std::abs(a.fields[m][i] - b.fields[m][i]));
  }
  return d;
}

FamilyResult run_family(const LatticeProblem& problem, std::span<const double> eps_list, SolverConfig config) {
  if (eps_list.empty()) throw Error(Errc::invalid_argument, "epsilon list is empty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0 && eps_list[i] < 1.0)) throw Error(Errc::invalid_argument, "each epsilon must lie in (0, 1)");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) {
      throw Error(Errc::invalid_argument, "epsilon list must be strictly decreasing");
    }
  }
  config.dt_policy = DtPolicy::fixed;

  std::vector<std::future<std::shared_ptr<const Trajectory>>> jobs;
  jobs.reserve(eps_list.size());
  for (double eps : eps_list) {
    LatticeProblem member = problem;
    member.epsilon = eps;
    jobs.push_back(std::async(std::launch::async, [member = std::move(member), config] {
      return std::shared_ptr<const Trajectory>(std::make_shared<Trajectory>(solve(member, config)));
    }));
  }

  FamilyResult out;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    FamilyEntry e;
    e.epsilon = eps_list[k];
    try {
      e.trajectory = jobs[k].get();
    } catch (const Error& err) {
      e.error = err.code();
      e.message = err.what();
    }
    out.entries.push_back(std::move(e));
  }

  const std::size_t n = out.entries.size();
  if (n < 2) return out;
  out.distance.assign(n, std::vector<double>(n, kNaN));
  for (std::size_t i = 0; i < n; ++i) {
    if (out.entries[i].ok()) out.distance[i][i] = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!out.entries[i].ok() || !out.entries[j].ok()) continue;
      const double d = sup_distance(*out.entries[i].trajectory, *out.entries[j].trajectory);
      out.distance[i][j] = out.distance[j][i] = d;
    }
  }
  return out;
}

double band_fraction(const Trajectory& traj, double delta) {
  std::size_t total = 0;
  std::size_t band = 0;
  for (const auto& u : traj.fields) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (!traj.omega_mask[i]) continue;
      ++total;
      if (std::abs(u[i]) <= delta) ++band;
    }
  }
  return total ? static_cast<double>(band) / static_cast<double>(total) : 0.0;
}

LimitPair limit_pair(const FamilyResult& family, double delta, double max_band_fraction) {
  if (!(delta >= 0.0)) throw Error(Errc::invalid_argument, "delta must be nonnegative");
  const FamilyEntry* finest = nullptr;
  for (const FamilyEntry& e : family.entries) {
    if (e.ok() && (!finest || e.epsilon < finest->epsilon)) finest = &e;
  }
  if (!finest) throw Error(Errc::inconsistent_family, "no successful family entry");

  LimitPair pair;
  pair.u = finest->trajectory;
  pair.epsilon_min = finest->epsilon;
  pair.delta = delta;
  pair.band_fraction = band_fraction(*pair.u, delta);
  if (pair.band_fraction > max_band_fraction) {
    throw Error(Errc::unresolved_band_too_wide, "unresolved band fraction " + std::to_string(pair.band_fraction) +
                                                    " exceeds " + std::to_string(max_band_fraction));
  }
  const Enthalpy beta(pair.epsilon_min);
  for (const auto& u : pair.u->fields) {
    std::vector<double> w(u.size());
    std::vector<double> v(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (u[i] > delta) {
        w[i] = 1.0;
      } else if (u[i] < -delta) {
        w[i] = 0.0;
      } else {
        w[i] = std::clamp(beta.beta(u[i]), 0.0, 1.0);
      }
      v[i] = u[i] + w[i];
    }
    pair.w.push_back(std::move(w));
    pair.v.push_back(std::move(v));
  }
  return pair;
}

ConvergenceReport convergence_report(const FamilyResult& family, std::span<const ModulusReport> fits,
                                     double max_spread) {
  ConvergenceReport rep;
  if (family.entries.size() < 2) throw Error(Errc::insufficient_samples, "convergence report needs 2 entries");
  if (fits.size() != family.entries.size()) {
    throw Error(Errc::invalid_argument, "one modulus fit per family entry is required");
  }
  const Trajectory* ref = nullptr;
  for (std::size_t k = 0; k < family.entries.size(); ++k) {
    const FamilyEntry& e = family.entries[k];
    rep.epsilons.push_back(e.epsilon);
    rep.c.push_back(fits[k].c);
    rep.varsigma.push_back(fits[k].varsigma);
    if (!e.ok()) {
      rep.consistent = false;
      rep.issues.push_back("entry eps=" + std::to_string(e.epsilon) + " failed: " + e.message);
      continue;
    }
    if (!ref) {
      ref = e.trajectory.get();
    } else if (!(ref->grid == e.trajectory->grid)) {
      rep.consistent = false;
      rep.issues.push_back("entry eps=" + std::to_string(e.epsilon) + " uses a different grid");
    } else if (ref->times != e.trajectory->times) {
      rep.consistent = false;
      rep.issues.push_back("entry eps=" + std::to_string(e.epsilon) + " uses different time samples");
    }
  }
  for (std::size_t i = 0; i + 1 < family.entries.size(); ++i) {
    double d = kNaN;
    if (rep.consistent && i + 1 < family.distance.size()) d = family.distance[i][i + 1];
    rep.successive.push_back(d);
  }
  const auto [lo, hi] = std::minmax_element(rep.varsigma.begin(), rep.varsigma.end());
  double mean = 0.0;
  for (double v : rep.varsigma) mean += std::abs(v);
  mean /= static_cast<double>(rep.varsigma.size());
  rep.varsigma_spread = mean > 0.0 ? (*hi - *lo) / mean : 0.0;
  rep.stable = rep.consistent && rep.varsigma_spread <= max_spread;
  return rep;
}

}  // namespace stefanlab
