#include "nlpb/grid.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "nlpb/csv.hpp"
#include "nlpb/errors.hpp"
#include "nlpb/kernel.hpp"

namespace nlpb {

DomainSpec DomainSpec::uniform(int dim, const Box& box, std::array<int, 2> nx, int pad_cells) {
  if (dim != 1 && dim != 2) throw DomainError("dimension must be 1 or 2, got " + std::to_string(dim));
  if (nx[0] < 4 || (dim == 2 && nx[1] < 4))
    throw DomainError("need at least 4 interior nodes per axis");
  if (pad_cells < 0) throw DomainError("negative padding");

  DomainSpec s;
  s.dim = dim;
  s.omega = box;
  s.nx = {nx[0], dim == 2 ? nx[1] : 1};
  s.dx = (box.hi[0] - box.lo[0]) / nx[0];
  if (!(s.dx > 0.0) || !std::isfinite(s.dx)) throw DomainError("box must have positive extent");
  if (dim == 2) {
    const double dy = (box.hi[1] - box.lo[1]) / nx[1];
    if (std::abs(dy - s.dx) > 1e-12 * s.dx)
      throw DomainError("grid spacing must be equal along both axes");
  } else {
    s.omega.lo[1] = 0.0;
    s.omega.hi[1] = 0.0;
  }
  s.pad_cells = pad_cells;
  return s;
}

bool DomainSpec::is_interior(std::size_t idx) const {
  const int i = ix(idx);
  if (i < pad_cells || i >= pad_cells + nx[0]) return false;
  if (dim == 1) return true;
  const int j = iy(idx);
  return j >= pad_cells && j < pad_cells + nx[1];
}

bool DomainSpec::in_region(std::size_t idx, Region region) const {
  switch (region) {
    case Region::Extended: return true;
    case Region::Omega: return is_interior(idx);
    case Region::Exterior: return !is_interior(idx);
  }
  return false;
}

std::array<double, 2> DomainSpec::coord(std::size_t idx) const {
  std::array<double, 2> x{omega.lo[0] + (ix(idx) - pad_cells + 0.5) * dx, 0.0};
  if (dim == 2) x[1] = omega.lo[1] + (iy(idx) - pad_cells + 0.5) * dx;
  return x;
}

std::size_t DomainSpec::interior_node(std::size_t k) const {
  const auto n0 = static_cast<std::size_t>(nx[0]);
  const int i = static_cast<int>(k % n0) + pad_cells;
  const int j = dim == 2 ? static_cast<int>(k / n0) + pad_cells : 0;
  return index(i, j);
}

std::size_t DomainSpec::interior_rank(std::size_t idx) const {
  const auto i = static_cast<std::size_t>(ix(idx) - pad_cells);
  if (dim == 1) return i;
  return static_cast<std::size_t>(iy(idx) - pad_cells) * static_cast<std::size_t>(nx[0]) + i;
}

DomainSpec make_domain(int dim, const Box& box, std::array<int, 2> nx, const Kernel& kernel,
                       double epsilon, int extra_pad_cells) {
  if (nx[0] < 4 || (dim == 2 && nx[1] < 4))
    throw DomainError("need at least 4 interior nodes per axis");
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  const double dx = (box.hi[0] - box.lo[0]) / nx[0];
  const double reach = epsilon * kernel.support_radius();
  if (reach < 2.0 * dx)
    throw DomainError("kernel support under-resolved: eps*R_J = " + csv::num(reach) +
                      " < 2*dx = " + csv::num(2.0 * dx));
  // Small relative slack keeps exact multiples (0.25 / (1/32)) from rounding up.
  const int pad = static_cast<int>(std::ceil(2.0 * reach / dx - 1e-9));
  return DomainSpec::uniform(dim, box, nx, pad + extra_pad_cells);
}

DomainSpec make_domain(int dim, const Box& box, int nx, const Kernel& kernel, double epsilon,
                       int extra_pad_cells) {
  return make_domain(dim, box, {nx, nx}, kernel, epsilon, extra_pad_cells);
}

Field::Field(DomainSpec spec) : spec_(spec), values_(spec.node_count(), 0.0) {}

Field::Field(DomainSpec spec, std::vector<double> values)
    : spec_(spec), values_(std::move(values)) {
  if (values_.size() != spec_.node_count())
    throw DomainError("field has " + std::to_string(values_.size()) + " values, grid has " +
                      std::to_string(spec_.node_count()) + " nodes");
}

std::vector<double> Field::interior_values() const {
  std::vector<double> out(spec_.interior_count());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = values_[spec_.interior_node(k)];
  return out;
}

double Field::max_abs(Region region) const {
  double m = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (spec_.in_region(i, region)) m = std::max(m, std::abs(values_[i]));
  return m;
}

bool Field::all_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

Field zero_extend(std::span<const double> interior, const DomainSpec& spec) {
  if (interior.empty() || interior.size() != spec.interior_count())
    throw DomainError("interior array has " + std::to_string(interior.size()) +
                      " entries, expected " + std::to_string(spec.interior_count()));
  Field f(spec);
  auto v = f.data();
  for (std::size_t k = 0; k < interior.size(); ++k) v[spec.interior_node(k)] = interior[k];
  return f;
}

Field restrict_to_omega(Field f) {
  const auto& spec = f.spec();
  auto v = f.data();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!spec.is_interior(i)) v[i] = 0.0;
  return f;
}

double lp_norm(const Field& f, double q, Region region) {
  if (!(q >= 1.0)) throw DomainError("lp_norm needs q >= 1");
  const auto& spec = f.spec();
  const auto v = f.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!spec.in_region(i, region)) continue;
    const double a = std::abs(v[i]);
    sum += q == 2.0 ? a * a : (q == 1.0 ? a : std::pow(a, q));
  }
  sum *= spec.cell_volume();
  return q == 2.0 ? std::sqrt(sum) : (q == 1.0 ? sum : std::pow(sum, 1.0 / q));
}

double inner_product(const Field& f, const Field& g, Region region) {
  if (!(f.spec() == g.spec())) throw DomainError("inner_product: fields live on different grids");
  const auto& spec = f.spec();
  const auto a = f.values();
  const auto b = g.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (spec.in_region(i, region)) sum += a[i] * b[i];
  return sum * spec.cell_volume();
}

void write_csv(const Field& f, std::ostream& out) {
  const auto& spec = f.spec();
  out << (spec.dim == 2 ? "x,y,value,region\n" : "x,value,region\n");
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto x = spec.coord(i);
    out << csv::num(x[0]) << ',';
    if (spec.dim == 2) out << csv::num(x[1]) << ',';
    out << csv::num(f[i]) << ',' << (spec.is_interior(i) ? "interior" : "exterior") << '\n';
  }
}

}  // namespace nlpb
