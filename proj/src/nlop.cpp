#include "nlpb/nlop.hpp"

#include <cmath>
#include <string>

#include "nlpb/errors.hpp"
#include "nlpb/parallel.hpp"

namespace nlpb {

PExponent::PExponent(double p) : p_(p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("exponent p must satisfy 1 < p < inf");
}

NonlocalLaplacian::NonlocalLaplacian(DomainSpec spec, Stencil stencil)
    : spec_(spec), stencil_(std::move(stencil)) {
  if (stencil_.dim != spec_.dim) throw DomainError("stencil and grid dimensions differ");
  if (std::abs(stencil_.dx - spec_.dx) > 1e-14 * spec_.dx)
    throw DomainError("stencil was built for dx = " + std::to_string(stencil_.dx) +
                      ", grid has dx = " + std::to_string(spec_.dx));
  const int r = stencil_.radius_cells;
  const int lo = spec_.pad_cells - r;
  for (std::size_t idx = 0; idx < spec_.node_count(); ++idx) {
    const int i = spec_.ix(idx);
    const int j = spec_.iy(idx);
    const bool x_ok = i >= lo && i < spec_.pad_cells + spec_.nx[0] + r;
    const bool y_ok = spec_.dim == 1 || (j >= lo && j < spec_.pad_cells + spec_.nx[1] + r);
    if (x_ok && y_ok) coupled_.push_back(idx);
  }
}

Field NonlocalLaplacian::apply(const Field& f) const {
  if (!(f.spec() == spec_)) throw DomainError("nonlocal_laplacian: field grid does not match operator grid");
  const int npx = spec_.padded(0);
  const int npy = spec_.padded(1);
  const int r = stencil_.radius_cells;
  const int ry = spec_.dim == 2 ? r : 0;
  const auto& offs = stencil_.offsets;
  const auto& w = stencil_.weights;
  std::vector<std::ptrdiff_t> shift(offs.size());
  for (std::size_t k = 0; k < offs.size(); ++k)
    shift[k] = static_cast<std::ptrdiff_t>(offs[k][1]) * npx + offs[k][0];

  const auto in = f.values();
  std::vector<double> out(in.size(), 0.0);
  parallel_for(in.size(), in.size() * offs.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t idx = b; idx < e; ++idx) {
      const int i = static_cast<int>(idx % npx);
      const int j = static_cast<int>(idx / npx);
      const double fi = in[idx];
      double acc = 0.0;
      if (i >= r && i < npx - r && j >= ry && j < npy - ry) {
        for (std::size_t k = 0; k < offs.size(); ++k)
          acc += w[k] * (in[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(idx) + shift[k])] - fi);
      } else {
        for (std::size_t k = 0; k < offs.size(); ++k) {
          const int ii = i + offs[k][0];
          const int jj = j + offs[k][1];
          if (ii < 0 || ii >= npx || jj < 0 || jj >= npy) continue;
          acc += w[k] * (in[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(idx) + shift[k])] - fi);
        }
      }
      out[idx] = acc;
    }
  });
  return Field(spec_, std::move(out));
}

double NonlocalLaplacian::norm_bound() const { return 2.0 * stencil_.diag; }

void NonlocalLaplacian::row_entries(std::size_t row,
                                    std::vector<std::pair<std::size_t, double>>& out) const {
  out.clear();
  const int npx = spec_.padded(0);
  const int npy = spec_.padded(1);
  const int i = spec_.ix(row);
  const int j = spec_.iy(row);
  double diag = 0.0;
  for (std::size_t k = 0; k < stencil_.offsets.size(); ++k) {
    const auto& d = stencil_.offsets[k];
    if (d[0] == 0 && d[1] == 0) continue;
    const int ii = i + d[0];
    const int jj = j + d[1];
    if (ii < 0 || ii >= npx || jj < 0 || jj >= npy) continue;
    diag += stencil_.weights[k];
    const std::size_t col = spec_.index(ii, jj);
    if (spec_.is_interior(col)) out.emplace_back(spec_.interior_rank(col), stencil_.weights[k]);
  }
  if (spec_.is_interior(row)) out.emplace_back(spec_.interior_rank(row), -diag);
}

std::size_t NonlocalLaplacian::interior_bandwidth() const {
  const auto reach = static_cast<std::size_t>(2 * stencil_.radius_cells);
  if (spec_.dim == 1) return reach;
  return reach * static_cast<std::size_t>(spec_.nx[0]) + reach;
}

Field nonlocal_laplacian(const Field& f, const Stencil& stencil) {
  return NonlocalLaplacian(f.spec(), stencil).apply(f);
}

double p_flux(double g, double p, double delta) {
  if (delta > 0.0) return std::pow(g * g + delta * delta, 0.5 * (p - 2.0)) * g;
  if (g == 0.0) return 0.0;
  if (p == 2.0) return g;
  const double a = std::abs(g);
  const double m = p == 3.0 ? a * a : std::pow(a, p - 1.0);
  return g < 0.0 ? -m : m;
}

Field p_flux(const Field& g, PExponent p, double delta) {
  std::vector<double> out(g.size());
  const auto in = g.values();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = p_flux(in[i], p.value(), delta);
  return Field(g.spec(), std::move(out));
}

Field p_biharmonic_rhs(const Field& u, const LaplaceOperator& op, PExponent p, double delta) {
  Field r = op.apply(p_flux(op.apply(u), p, delta));
  auto v = r.data();
  for (double& x : v) x = -x;
  return restrict_to_omega(std::move(r));
}

Field p_biharmonic_rhs(const Field& u, const Stencil& stencil, PExponent p) {
  return p_biharmonic_rhs(u, NonlocalLaplacian(u.spec(), stencil), p);
}

double p_energy_density(double g, double p, double delta) {
  if (delta > 0.0) return (std::pow(g * g + delta * delta, 0.5 * p) - std::pow(delta, p)) / p;
  const double a = std::abs(g);
  return (p == 2.0 ? a * a : std::pow(a, p)) / p;
}

double dirichlet_energy(const Field& u, const LaplaceOperator& op, PExponent p, double delta) {
  const Field g = op.apply(u);
  double sum = 0.0;
  for (double v : g.values()) sum += p_energy_density(v, p.value(), delta);
  return sum * u.spec().cell_volume();
}

double dirichlet_energy(const Field& u, const Stencil& stencil, PExponent p) {
  return dirichlet_energy(u, NonlocalLaplacian(u.spec(), stencil), p);
}

}  // namespace nlpb
