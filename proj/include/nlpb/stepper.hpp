#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nlpb/grid.hpp"
#include "nlpb/nlop.hpp"

namespace nlpb {

enum class StepMode { Implicit, Explicit };

/// Minimiser used for the per-step energy E(w).
enum class InnerSolver {
  /// Gradient descent, Barzilai–Borwein step proposal, Armijo backtracking.
  BarzilaiBorwein,
  /// Same Armijo line search along the Newton direction of a banded
  /// Hessian (1/h)I + AᵀDA. For p < 2, D = max(|g|, 1e-6·max|g|)^{p-2}
  /// (reweighted least squares) instead of the unbounded true curvature.
  Newton,
};

struct StepperConfig {
  PExponent p{2.0};
  double h = 0.005;
  double T = 1.0;
  StepMode mode = StepMode::Implicit;
  InnerSolver solver = InnerSolver::Newton;
  /// Absolute Euler–Lagrange residual tolerance; <= 0 selects
  /// 1e-8·max(1, ‖u₀‖₂) at the start of `evolve`.
  double inner_tol = 0.0;
  /// Additionally stop only once ‖∇E‖ <= inner_rel_tol·‖u_prev‖/h, so steps
  /// stay accurate after the solution has decayed far below inner_tol.
  double inner_rel_tol = 1e-10;
  int inner_max_iters = 5000;
  int record_every = 1;
  /// Optional flux regularisation δ (0 = exact |g|^{p-2}g).
  double flux_delta = 0.0;
  /// Keep per-iteration E values in StepReport::energy_history.
  bool trace_inner = false;

  /// Throws DomainError when h, T, tolerances or the schedule are invalid.
  void validate() const;
  int step_count() const;
  static double default_tolerance(double u0_norm);
};

struct StepReport {
  int iterations = 0;
  double residual = 0.0;   // ‖∇E(w)‖_{L²(Ω)} at exit
  double tolerance = 0.0;  // tolerance the step was held to
  std::vector<double> energy_history;
};

/// Scalars recorded at every step j = 0..m (index 0 is the initial state)
/// plus the states at the recording schedule.
struct Trajectory {
  std::string operator_name;
  double h = 0.0;
  double p = 2.0;
  double inner_tol = 0.0;
  std::vector<double> times;
  std::vector<double> l2_sq;         // ‖u^j‖²_{L²(Ω)}
  std::vector<double> energies;      // (1/p)‖Aũ^j‖^p_{L^p(Ω_E)}
  std::vector<double> increment_sq;  // ‖u^j - u^{j-1}‖²_{L²(Ω)}, 0 at j = 0
  std::vector<int> inner_iters;
  std::vector<double> residuals;
  std::vector<double> tolerances;
  std::vector<int> recorded_steps;
  std::vector<Field> states;

  std::size_t step_count() const { return times.empty() ? 0 : times.size() - 1; }

  /// CSV `step,time,l2_sq,energy,increment_sq,inner_iters,residual`; local
  /// trajectories carry an extra `operator` column.
  void write_csv(std::ostream& out) const;
};

/// E(w) = (1/2h)‖w‖² - (1/h)⟨u_prev, w⟩ + (1/p)‖Aw̃‖^p_{L^p(Ω_E)}.
double step_energy(const Field& w, const Field& u_prev, const LaplaceOperator& op,
                   const StepperConfig& cfg);
double step_energy(const Field& w, const Field& u_prev, const Stencil& st, const StepperConfig& cfg);

/// L²(Ω) gradient of E: (w - u_prev)/h + A(p_flux(Aw̃)), zero on the exterior.
Field step_gradient(const Field& w, const Field& u_prev, const LaplaceOperator& op,
                    const StepperConfig& cfg);
Field step_gradient(const Field& w, const Field& u_prev, const Stencil& st, const StepperConfig& cfg);

/// One Rothe step: the minimiser of E, warm-started at u_prev. Throws
/// InnerSolveFailed if the residual tolerance is not met.
Field implicit_step(const Field& u_prev, const LaplaceOperator& op, const StepperConfig& cfg,
                    StepReport* report = nullptr);
Field implicit_step(const Field& u_prev, const Stencil& st, const StepperConfig& cfg,
                    StepReport* report = nullptr);

/// Largest p = 2 forward-Euler step admitted: 0.9·2/‖A‖², with ‖A‖ <= 2Σw_d.
double explicit_step_bound(const LaplaceOperator& op);

/// u_prev + h·rhs(u_prev); throws StabilityViolation if the p-energy grows.
Field explicit_step(const Field& u_prev, const LaplaceOperator& op, const StepperConfig& cfg);
Field explicit_step(const Field& u_prev, const Stencil& st, const StepperConfig& cfg);

/// m = ceil(T/h) steps from u0. Step failures are rethrown with the step index.
Trajectory evolve(const Field& u0, const LaplaceOperator& op, StepperConfig cfg);
Trajectory evolve(const Field& u0, const Stencil& st, StepperConfig cfg);

}  // namespace nlpb
