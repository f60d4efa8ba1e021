#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "nlpb/grid.hpp"

namespace nlpb {

enum class Profile { Tent, Quartic, Cosine };

/// Nonnegative, nonincreasing radial profile J(r) with support [0, 1).
///   tent     J(r) = max(0, 1 - r)
///   quartic  J(r) = max(0, 1 - r²)²
///   cosine   J(r) = cos(πr/2) for r ≤ 1
class Kernel {
 public:
  explicit Kernel(Profile profile, int dim = 1);

  /// Accepts "tent", "quartic" or "cosine"; throws DomainError otherwise.
  static Kernel from_name(std::string_view name, int dim = 1);

  double operator()(double r) const;

  Profile profile() const { return profile_; }
  int dim() const { return dim_; }
  double support_radius() const { return 1.0; }
  std::string name() const;
  /// All built-in profiles are nonincreasing in r.
  bool is_nonincreasing() const { return true; }

 private:
  Profile profile_;
  int dim_;
};

/// C_J with C_J^{-1} = ½ ∫_{R^dim} J(|z|) |z|² dz, by midpoint quadrature over
/// the support box. Results are cached per (profile, dim).
double normalization_constant(const Kernel& kernel, int dim);

/// J_ε(x) = C_J ε^{-(N+2)} J(|x|/ε), supported on |x| < ε·R_J.
class RescaledKernel {
 public:
  RescaledKernel(Kernel base, double epsilon);

  const Kernel& base() const { return base_; }
  double epsilon() const { return epsilon_; }
  double c_j() const { return c_j_; }
  double support() const { return epsilon_ * base_.support_radius(); }

  /// J_ε evaluated at distance r = |x|.
  double operator()(double r) const;
  double at(std::array<double, 2> x) const;

 private:
  Kernel base_;
  double epsilon_;
  double c_j_;
  double scale_;  // C_J ε^{-(N+2)}
};

/// Throws DomainError for ε ≤ 0.
RescaledKernel rescale(const Kernel& kernel, double epsilon);

/// How stencil weights are scaled after sampling J_ε at the offsets.
enum class MomentNormalization {
  /// w_d = J_ε(d·dx)·dx^N exactly.
  Sampled,
  /// Sampled weights multiplied by one scalar so that ½ Σ w_d |d·dx|² = 1,
  /// which makes the discrete operator exact on quadratics.
  Discrete,
};

/// Quadrature carrier of J_ε on a grid: offsets d with |d·dx| < ε·R_J.
struct Stencil {
  int dim = 1;
  double dx = 0.0;
  double support = 0.0;
  int radius_cells = 0;  // max |d| along an axis
  std::vector<std::array<int, 2>> offsets;
  std::vector<double> weights;
  double diag = 0.0;            // Σ weights, including d = 0
  double sampled_moment = 0.0;  // ½ Σ J_ε(d dx) dx^N |d dx|² before normalisation
  double moment_scale = 1.0;    // factor applied to the sampled weights
  MomentNormalization normalization = MomentNormalization::Discrete;

  /// Tolerance on |sampled_moment - 1| reported as metadata.
  static constexpr double kMomentTolerance = 0.1;
  bool moment_within_tolerance() const;
  double second_moment() const;  // ½ Σ w_d |d dx|² of the final weights
};

/// Throws DomainError if ε·R_J < 2·dx.
Stencil discretize(const RescaledKernel& rk, const DomainSpec& spec,
                   MomentNormalization normalization = MomentNormalization::Discrete);

/// CSV `dx_offset[,dy_offset],weight`.
void write_csv(const Stencil& stencil, std::ostream& out);

}  // namespace nlpb
