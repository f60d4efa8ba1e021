#pragma once

#include <array>
#include <functional>

#include "nlpb/grid.hpp"
#include "nlpb/nlop.hpp"
#include "nlpb/stepper.hpp"

namespace nlpb {

/// Standard second-order Laplacian (3-point in 1D, 5-point in 2D) of the
/// zero extension, evaluated on Ω and on the first ghost ring (whose stencil
/// reaches the second, also zero, ring). Counting the ghost ring in the
/// energy is what makes u = 0 and ∂u/∂n = 0 both hold in the limit; with
/// Ω-only rows the minimisation would leave Δu = 0 at the wall instead.
class LocalLaplacian final : public LaplaceOperator {
 public:
  /// Requires at least two padding cells. Output vanishes beyond the first ghost ring.
  explicit LocalLaplacian(DomainSpec spec);

  const DomainSpec& spec() const override { return spec_; }
  std::string_view name() const override { return "local"; }
  Field apply(const Field& f) const override;
  double norm_bound() const override;
  const std::vector<std::size_t>& coupled_rows() const override { return rows_; }
  void row_entries(std::size_t row, std::vector<std::pair<std::size_t, double>>& out) const override;
  std::size_t interior_bandwidth() const override;

 private:
  DomainSpec spec_;
  std::vector<std::size_t> rows_;
  std::vector<unsigned char> in_rows_;
};

Field local_laplacian(const Field& u);

/// Rothe evolution of ∂u/∂t = -Δ_h(|Δ_h u|^{p-2} Δ_h u) with the same inner
/// minimiser as `evolve`.
Trajectory local_evolve(const Field& u0, const StepperConfig& cfg);

/// Smooth space-time test function with its time derivative and Laplacian.
struct SpaceTimeFunction {
  std::function<double(std::array<double, 2>, double)> value;
  std::function<double(std::array<double, 2>, double)> time_derivative;
  std::function<double(std::array<double, 2>, double)> laplacian;
};

/// Left-point quadrature of
///   -∬ u ∂φ/∂t + ∬ |Δu|^{p-2}Δu Δφ
/// over the recorded trajectory, with Δu → Δ_h u^j and φ's derivatives
/// evaluated exactly. Needs a state at every step (record_every = 1).
double weak_residual(const Trajectory& traj, const SpaceTimeFunction& phi);

}  // namespace nlpb
