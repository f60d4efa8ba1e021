#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "nlpb/grid.hpp"
#include "nlpb/kernel.hpp"
#include "nlpb/nlop.hpp"
#include "nlpb/stepper.hpp"

namespace nlpb {

/// Outcome of one named assertion inside a study.
struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Table of study results plus run metadata and named summary values.
struct StudyReport {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::pair<std::string, double>> summary;
  std::vector<Check> checks;

  double summary_value(const std::string& key) const;  // NaN when absent
  bool all_passed() const;
  void write_csv(std::ostream& out) const;
  /// `key,value` rows for metadata followed by summary values.
  void write_metadata_csv(std::ostream& out) const;
};

/// Grid parameters shared by the runs of a study; padding follows each ε.
struct GridSetup {
  int dim = 1;
  Box box{};
  std::array<int, 2> nx{64, 64};
};

/// Smooth function with its exact Laplacian, sampled on all of Ω_E.
struct TestFunction {
  std::string name;
  std::function<double(std::array<double, 2>)> value;
  std::function<double(std::array<double, 2>)> laplacian;
};

TestFunction sine_test_function(double wavenumber = 2.0);  // sin(kπx) (·sin(kπy) in 2D)
TestFunction quadratic_test_function();                    // |x|²
TestFunction constant_test_function(double c = 1.0);

/// Least-squares slope of log(error) against log(parameter); NaN when fewer
/// than two positive errors are available.
double fitted_order(const std::vector<double>& params, const std::vector<double>& errors);

/// ‖Δ_NL^{J_ε} φ - Δφ‖_{L^q(Ω)} per ε with the fitted order in ε. Columns
/// `epsilon,error,error_over_dx2`; summary `fitted_order`. 1D only.
StudyReport consistency_study(const TestFunction& phi, const Kernel& kernel,
                              const std::vector<double>& eps_list, const GridSetup& grid,
                              double q = 2.0);

enum class DecayModel { Exponential, Polynomial };

/// Fit of the tail of ‖u(t)‖² to e^{-C₁t}·const (p = 2) or to
/// (C₂t + C₃)^{-2/(p-2)} (p > 2, linear in ‖u‖^{-(p-2)}).
struct DecayFit {
  DecayModel model = DecayModel::Exponential;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double slope = 0.0;      // of the transformed data
  double intercept = 0.0;
  /// c1 for p = 2; (p-2)/2·c2 for p > 2 (the rate in d/dt f^{-(p-2)/2}).
  double rate = 0.0;
  double r_squared = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t points = 0;
};

/// Window defaults to the last 75% of the time range. Throws DomainError for
/// p < 2 or fewer than 20 steps; DecayFitDegenerate if ‖u‖² < 1e-300 inside it.
DecayFit decay_fit(const Trajectory& traj, double p);
DecayFit decay_fit(const Trajectory& traj, double p, double t_lo, double t_hi);

/// ∫_Ω∫_{Ω_E} J_ε(x-y)|ũ(y) - u(x)|² dy dx evaluated directly on the grid.
double poincare_quadratic_form(const Field& u, const Stencil& stencil);

struct PoincareResult {
  double constant = 0.0;    // 1/λ_min
  double lambda_min = 0.0;
  int iterations = 0;
  std::vector<double> eigenvector;  // interior ranks, unit Euclidean norm
};

/// Smallest eigenvalue of the quadratic form above relative to ‖u‖²_{L²(Ω)}
/// by shifted inverse power iteration; stops when the Rayleigh quotient
/// changes by less than `tol` (relative). Throws ConvergenceError after
/// `max_iters`.
PoincareResult poincare_analysis(const DomainSpec& spec, const Stencil& stencil, double shift = 0.0,
                                 double tol = 1e-8, int max_iters = 10000);
/// Only q = 2 is supported (DomainError otherwise).
double poincare_constant(const DomainSpec& spec, const Stencil& stencil, double q = 2.0);

/// C such that ‖u‖²_{L²(Ω)} <= C ‖Δ_NL ũ‖²_{L²(Ω_E)} follows from the
/// Poincaré constant: C = 4·C_P².
double reverse_bound_constant(double poincare);

/// sin² bump supported on the middle 80% of each axis (product in 2D).
std::function<double(std::array<double, 2>)> bump_profile(const Box& box, int dim);
Field sample_interior(const std::function<double(std::array<double, 2>)>& f, const DomainSpec& spec);

/// Σ_k a_k sin(kπ(x-lo)/L) with a_k ~ U(-1,1)/k, k <= modes (tensor form in
/// 2D), scaled by `amplitude`; continuous across ∂Ω.
Field random_smooth_field(const DomainSpec& spec, std::uint64_t seed, int modes = 6,
                          double amplitude = 1.0);
/// Independent U(-1,1) interior values.
Field random_field(const DomainSpec& spec, std::uint64_t seed);

/// Runs the local reference once and the nonlocal evolution per ε, all on
/// the same interior grid and time steps, and reports sup_j ‖u_ε - u‖_{L^p(Ω)}
/// over recorded times. Columns `epsilon,sup_error`. 1D only.
StudyReport nonlocal_to_local_study(const std::function<double(std::array<double, 2>)>& u0,
                                    const Kernel& kernel, const std::vector<double>& eps_list,
                                    const GridSetup& grid, StepperConfig cfg);

/// ‖u_a(t) - u_b(t)‖_{L²(Ω)} per step; flags increases above 10·inner_tol.
StudyReport contraction_study(const Field& u0_a, const Field& u0_b, const LaplaceOperator& op,
                              StepperConfig cfg);

/// Per-step and cumulative energy-dissipation slacks plus the per-time
/// aggregate ½‖u(t)‖² + Σ‖Δu‖²/h + E(t) <= ½‖u₀‖² + E(0). Inequalities may
/// fail by at most Σ_j residual_j·‖u^j - u^{j-1}‖ + relative_tolerance·(½‖u₀‖² + E(0)).
StudyReport energy_audit(const Trajectory& traj, double relative_tolerance = 0.0);

}  // namespace nlpb
