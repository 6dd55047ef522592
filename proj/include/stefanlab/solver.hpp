// SPDX-License-Identifier: Apache-2.0

#ifndef STEFANLAB_SOLVER_HPP
#define STEFANLAB_SOLVER_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stefanlab/cylinder.hpp"
#include "stefanlab/enthalpy.hpp"
#include "stefanlab/error.hpp"
#include "stefanlab/lattice.hpp"

namespace stefanlab {

/// Initial-boundary value problem for d_t(u + beta_eps(u)) + L u = 0 in
/// Omega x (t_start, t_start + T], u = g outside Omega, u = u0 at t_start.
struct LatticeProblem {
  std::string name;
  double s = 0.5;
  double p = 3.0;
  KernelSpec kernel = KernelSpec::constant();
  Grid grid;
  std::vector<std::uint8_t> omega_mask;
  std::function<double(const Point&, double)> g;
  double g_far = 0.0;
  std::vector<double> u0;
  double T = 1.0;
  double epsilon = 0.1;
  double t_start = 0.0;
  /// Normalization factor M of the enthalpy, beta_eps(M xi) / M.
  double enthalpy_scale = 1.0;

  ExteriorRule exterior() const { return {g, g_far}; }
  Enthalpy enthalpy() const { return Enthalpy(epsilon, enthalpy_scale); }
  std::size_t interior_count() const;
  /// Throws Errc::invalid_argument / invalid_exponent on inconsistent data.
  void validate() const;
};

enum class DtPolicy { fixed, intrinsic };

struct SolverConfig {
  DtPolicy dt_policy = DtPolicy::fixed;
  /// Number of steps for the fixed policy (dt = T / steps).
  int steps = 100;
  /// C_t in dt = C_t h^{sp} (omega / 4)^{2-p} for the intrinsic policy.
  double c_t = 1.0;
  double newton_tol = 1e-10;
  int newton_max = 60;
  double damping = 0.5;
  int threads = 1;

  void validate() const;
};

struct StepDiagnostics {
  double t = 0.0;
  double dt = 0.0;
  double residual = 0.0;
  int newton_iterations = 0;
  /// Objective drop from the initial guess to the accepted iterate.
  double objective_decrease = 0.0;
  /// Smallest per-iteration objective drop among iterations outside the
  /// rounding regime (+inf when there were none).
  double min_iteration_decrease = 0.0;
  double energy_before = 0.0;
  double energy_after = 0.0;
};

struct Trajectory {
  Grid grid;
  double s = 0.5;
  double p = 3.0;
  double epsilon = 0.1;
  std::vector<std::uint8_t> omega_mask;
  std::vector<double> times;
  std::vector<std::vector<double>> fields;
  std::vector<StepDiagnostics> diagnostics;

  SpaceTimeSamples samples(const ExteriorRule& exterior) const {
    return {&grid, times, fields, &exterior};
  }
};

class NewtonDivergence : public Error {
 public:
  NewtonDivergence(const std::string& what, std::vector<double> last, StepDiagnostics diag)
      : Error(Errc::newton_divergence, what), last_iterate(std::move(last)), diagnostics(diag) {}
  std::vector<double> last_iterate;
  StepDiagnostics diagnostics;
  std::shared_ptr<Trajectory> partial;
};

/// Nonlinear system of one backward-Euler step restricted to the interior
/// unknowns. residual() is the gradient of objective(), a strictly convex
/// functional built from the antiderivative of b and the kernel p-energy.
class StepSystem {
 public:
  StepSystem(const LatticeProblem& problem, const Enthalpy& enthalpy, std::span<const double> u_prev,
             double t_next, double dt, int threads = 1);

  std::size_t unknowns() const { return nodes_.size(); }
  const std::vector<std::size_t>& interior_nodes() const { return nodes_; }
  std::vector<double> restrict_field(std::span<const double> box) const;
  /// Box field with interior values v and exterior nodes pinned to g(., t_next).
  std::vector<double> extend(std::span<const double> v) const;

  double objective(std::span<const double> v) const;
  /// Kernel p-energy alone (no enthalpy terms, no dt factor).
  double energy(std::span<const double> v) const;
  std::vector<double> residual(std::span<const double> v) const;
  Eigen::MatrixXd jacobian(std::span<const double> v) const;

 private:
  struct Link {
    std::size_t j;
    double coef;
  };
  struct Fixed {
    double value;
    double coef;
  };

  const Enthalpy& enthalpy_;
  double p_;
  double dt_;
  int threads_;
  std::vector<std::size_t> nodes_;
  std::vector<double> pinned_;  // box field with exterior values at t_next
  std::vector<double> b_prev_;
  std::vector<std::size_t> inner_start_;
  std::vector<Link> inner_;
  std::vector<std::size_t> fixed_start_;
  std::vector<Fixed> fixed_;
};

/// Largest relative mismatch between residual() and central differences of
/// objective() at v, relative to max(|analytic|, |numeric|, 1e-8) per entry.
double gradient_defect(const StepSystem& system, std::span<const double> v, double step = 1e-6);

/// One implicit step from u_prev (box field at time t) to t + dt.
/// Throws NewtonDivergence when the residual stays above tol at the cap.
std::vector<double> implicit_step(const LatticeProblem& problem, std::span<const double> u_prev, double t,
                                  double dt, const SolverConfig& config, StepDiagnostics* diag = nullptr);

/// Integrates from t_start to t_start + T. A NewtonDivergence carries the
/// partial trajectory.
Trajectory solve(const LatticeProblem& problem, const SolverConfig& config);

/// Translate by z0 = (x0, t0) and divide the solution by M: data / M, kernel
/// times M^{p-2}, enthalpy beta_eps(M xi) / M. Grid nodes move with x0.
LatticeProblem normalize(const LatticeProblem& problem, double M, const Point& x0, double t0);

struct MaxPrincipleReport {
  double data_bound = 0.0;
  double sup_solution = 0.0;
  double defect = 0.0;
  bool pass = false;
};

/// (sup |u| - sup |g|)_+ over stored times, the bound taken over the
/// exterior datum and the initial datum.
MaxPrincipleReport max_principle_check(const Trajectory& traj, const LatticeProblem& problem,
                                       double tolerance);

/// Discrete weak-form identity for a test function phi(x, t): the time term
/// sum_m b(u_m) (phi(t_m) - phi(t_{m-1})) (summation by parts) against the
/// symmetric double sum of phi_p(u(x) - u(y)) (phi(x) - phi(y)) k / |x - y|^{n+sp};
/// returns |total|.
double weak_residual(const Trajectory& traj, const LatticeProblem& problem,
                     const std::function<double(const Point&, double)>& test);

/// Radial cutoff phi(x) = profile(|x - x0| / radius), profile supported in [0, 1].
struct RadialCutoff {
  double radius = 1.0;
  std::function<double(double)> profile;
  std::function<double(double)> derivative;

  /// 1 on [0, 1/2], cos^2 ramp to 0 at 1.
  static RadialCutoff smooth(double radius);
};

struct CaccioppoliReport {
  double energy_sup = 0.0;
  double seminorm = 0.0;
  double mixed = 0.0;
  double gradient_term = 0.0;
  double time_term = 0.0;
  double exterior_term = 0.0;
  double initial_term = 0.0;
  double latent_contribution = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool pass = false;
};

/// Discrete sides of the truncated energy estimate for (u - k)_{+} (sign > 0)
/// or (u - k)_{-} (sign < 0) on the cylinder B_R(x0) x (t0 - theta R^{sp}, t0].
/// Throws Errc::degenerate_cutoff when the cutoff vanishes on every node.
CaccioppoliReport caccioppoli_audit(const Trajectory& traj, const LatticeProblem& problem, double level,
                                    int sign, const RadialCutoff& cutoff, const Cylinder& cylinder,
                                    double c_audit);

}  // namespace stefanlab

#endif
