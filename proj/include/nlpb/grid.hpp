#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace nlpb {

class Kernel;

/// Where a reduction is taken: the box Ω, the padded domain Ω_E, or the
/// collar Ω_E \ Ω̄ between them.
enum class Region { Omega, Extended, Exterior };

enum class NodeTag : std::uint8_t { Interior, Exterior };

struct Box {
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};

  bool operator==(const Box&) const = default;
};

/// Uniform cell-centred grid over Ω = box, padded by `pad_cells` cells on
/// every side to form Ω_E. Node i along an axis sits at
/// lo + (i - pad_cells + 1/2) dx, so no node lies on ∂Ω.
struct DomainSpec {
  int dim = 1;
  Box omega;
  std::array<int, 2> nx{0, 1};  // interior nodes per axis; nx[1] == 1 in 1D
  double dx = 0.0;
  int pad_cells = 0;

  /// Builds a spec directly from a cell count; used by `make_domain` and by
  /// callers (the local reference solver, images) that size padding themselves.
  static DomainSpec uniform(int dim, const Box& box, std::array<int, 2> nx, int pad_cells);

  double pad() const { return pad_cells * dx; }
  int padded(int axis) const { return axis < dim ? nx[axis] + 2 * pad_cells : 1; }
  std::size_t node_count() const {
    return static_cast<std::size_t>(padded(0)) * static_cast<std::size_t>(padded(1));
  }
  std::size_t interior_count() const {
    return static_cast<std::size_t>(nx[0]) * static_cast<std::size_t>(dim == 2 ? nx[1] : 1);
  }
  /// Quadrature weight of every node (midpoint rule).
  double cell_volume() const { return dim == 2 ? dx * dx : dx; }

  std::size_t index(int ix, int iy = 0) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(padded(0)) +
           static_cast<std::size_t>(ix);
  }
  int ix(std::size_t idx) const { return static_cast<int>(idx % static_cast<std::size_t>(padded(0))); }
  int iy(std::size_t idx) const { return static_cast<int>(idx / static_cast<std::size_t>(padded(0))); }

  bool is_interior(std::size_t idx) const;
  NodeTag tag(std::size_t idx) const {
    return is_interior(idx) ? NodeTag::Interior : NodeTag::Exterior;
  }
  bool in_region(std::size_t idx, Region region) const;
  std::array<double, 2> coord(std::size_t idx) const;

  /// Padded index of the k-th interior node in row-major interior order.
  std::size_t interior_node(std::size_t k) const;
  /// Inverse of `interior_node`; only valid for interior indices.
  std::size_t interior_rank(std::size_t idx) const;

  bool operator==(const DomainSpec&) const = default;
};

/// Ω = box with `nx` interior nodes per axis, padded by 2·ε·R_J rounded up
/// to whole cells (plus `extra_pad_cells`). Throws DomainError when nx < 4
/// or when ε·R_J < 2·dx.
DomainSpec make_domain(int dim, const Box& box, std::array<int, 2> nx, const Kernel& kernel,
                       double epsilon, int extra_pad_cells = 0);
DomainSpec make_domain(int dim, const Box& box, int nx, const Kernel& kernel, double epsilon,
                       int extra_pad_cells = 0);

/// Grid values over Ω_E. Every library operation that produces a
/// constrained field leaves exterior nodes at exactly zero.
class Field {
 public:
  Field() = default;
  explicit Field(DomainSpec spec);
  Field(DomainSpec spec, std::vector<double> values);

  const DomainSpec& spec() const { return spec_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Mutable access for in-place arithmetic inside the library.
  std::span<double> data() { return values_; }

  std::vector<double> interior_values() const;
  double max_abs(Region region) const;
  bool all_finite() const;

 private:
  DomainSpec spec_;
  std::vector<double> values_;
};

/// Copies `interior` (row-major, nx[0] fastest) into Ω and zeros Ω_E \ Ω̄.
Field zero_extend(std::span<const double> interior, const DomainSpec& spec);

/// Zeros every exterior node.
Field restrict_to_omega(Field f);

/// (Σ_region dx^dim |f_i|^q)^{1/q}; throws DomainError for q < 1.
double lp_norm(const Field& f, double q, Region region);

/// Σ_region dx^dim f_i g_i; throws DomainError when the specs differ.
double inner_product(const Field& f, const Field& g, Region region);

/// CSV with header `x[,y],value,region`, one node per row, 17 significant digits.
void write_csv(const Field& f, std::ostream& out);

}  // namespace nlpb
