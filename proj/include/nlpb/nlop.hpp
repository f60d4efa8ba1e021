#pragma once

#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

#include "nlpb/grid.hpp"
#include "nlpb/kernel.hpp"

namespace nlpb {

/// Exponent p of the p-biharmonic flux, 1 < p < ∞.
class PExponent {
 public:
  explicit PExponent(double p);
  double value() const { return p_; }

 private:
  double p_;
};

/// A self-adjoint, negative semidefinite linear operator A on fields over
/// Ω_E. The evolution ∂u/∂t = -A(|Aũ|^{p-2} Aũ) and its step energies are
/// written against this interface so the nonlocal and the finite-difference
/// operators share one time integrator.
class LaplaceOperator {
 public:
  virtual ~LaplaceOperator() = default;

  virtual const DomainSpec& spec() const = 0;
  virtual std::string_view name() const = 0;
  virtual Field apply(const Field& f) const = 0;
  /// Upper bound on the spectral norm of A (Gershgorin).
  virtual double norm_bound() const = 0;

  /// Rows of A with at least one nonzero in an interior column.
  virtual const std::vector<std::size_t>& coupled_rows() const = 0;
  /// Nonzeros (interior rank, value) of row `row` restricted to interior columns.
  virtual void row_entries(std::size_t row, std::vector<std::pair<std::size_t, double>>& out) const = 0;
  /// Half-bandwidth of AᵀDA restricted to interior nodes in rank order.
  virtual std::size_t interior_bandwidth() const = 0;
};

/// Δ_NL with the quadrature stencil of J_ε. Neighbours outside the padded
/// array are dropped from both terms, i.e. the integral runs over Ω_E.
class NonlocalLaplacian final : public LaplaceOperator {
 public:
  NonlocalLaplacian(DomainSpec spec, Stencil stencil);

  const DomainSpec& spec() const override { return spec_; }
  const Stencil& stencil() const { return stencil_; }
  std::string_view name() const override { return "nonlocal"; }
  Field apply(const Field& f) const override;
  double norm_bound() const override;
  const std::vector<std::size_t>& coupled_rows() const override { return coupled_; }
  void row_entries(std::size_t row, std::vector<std::pair<std::size_t, double>>& out) const override;
  std::size_t interior_bandwidth() const override;

 private:
  DomainSpec spec_;
  Stencil stencil_;
  std::vector<std::size_t> coupled_;
};

/// (Δ_NL f)_i = Σ_d w_d (f_{i+d} - f_i) at every node of Ω_E.
Field nonlocal_laplacian(const Field& f, const Stencil& stencil);

/// sign(g)|g|^{p-1}, exactly 0 at g = 0. With delta > 0 the regularised
/// (g² + δ²)^{(p-2)/2} g is used instead.
double p_flux(double g, double p, double delta = 0.0);
Field p_flux(const Field& g, PExponent p, double delta = 0.0);

/// -A(p_flux(Aũ)) with exterior nodes zeroed.
Field p_biharmonic_rhs(const Field& u, const LaplaceOperator& op, PExponent p, double delta = 0.0);
Field p_biharmonic_rhs(const Field& u, const Stencil& stencil, PExponent p);

/// Integrand of the p-energy: |g|^p / p, or ((g²+δ²)^{p/2} - δ^p)/p when regularised.
double p_energy_density(double g, double p, double delta = 0.0);

/// (1/p) ‖Aũ‖^p_{L^p(Ω_E)}.
double dirichlet_energy(const Field& u, const LaplaceOperator& op, PExponent p, double delta = 0.0);
double dirichlet_energy(const Field& u, const Stencil& stencil, PExponent p);

}  // namespace nlpb
