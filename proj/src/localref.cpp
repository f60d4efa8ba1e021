#include "nlpb/localref.hpp"

#include <cmath>

#include "nlpb/errors.hpp"

namespace nlpb {

LocalLaplacian::LocalLaplacian(DomainSpec spec) : spec_(spec) {
  if (spec_.pad_cells < 2) throw DomainError("local Laplacian needs two ghost layers of padding");
  const auto npx = static_cast<std::size_t>(spec_.padded(0));
  for (std::size_t idx = 0; idx < spec_.node_count(); ++idx) {
    bool row = spec_.is_interior(idx);
    const int i = spec_.ix(idx);
    const int j = spec_.iy(idx);
    if (!row && i > 0 && i + 1 < spec_.padded(0))
      row = spec_.is_interior(idx - 1) || spec_.is_interior(idx + 1);
    if (!row && spec_.dim == 2 && j > 0 && j + 1 < spec_.padded(1))
      row = spec_.is_interior(idx - npx) || spec_.is_interior(idx + npx);
    if (row) rows_.push_back(idx);
  }
  in_rows_.assign(spec_.node_count(), 0);
  for (std::size_t idx : rows_) in_rows_[idx] = 1;
}

Field LocalLaplacian::apply(const Field& f) const {
  if (!(f.spec() == spec_)) throw DomainError("local_laplacian: field grid does not match operator grid");
  const auto in = f.values();
  std::vector<double> out(in.size(), 0.0);
  const double inv = 1.0 / (spec_.dx * spec_.dx);
  const auto npx = static_cast<std::size_t>(spec_.padded(0));
  // Symmetric on Ω plus the ghost ring; values further out are read as zero.
  auto val = [&](std::size_t idx) { return in_rows_[idx] ? in[idx] : 0.0; };
  for (std::size_t idx : rows_) {
    const double c = val(idx);
    double s = val(idx - 1) + val(idx + 1) - 2.0 * c;
    if (spec_.dim == 2) s += val(idx - npx) + val(idx + npx) - 2.0 * c;
    out[idx] = s * inv;
  }
  return Field(spec_, std::move(out));
}

double LocalLaplacian::norm_bound() const { return 4.0 * spec_.dim / (spec_.dx * spec_.dx); }

void LocalLaplacian::row_entries(std::size_t row, std::vector<std::pair<std::size_t, double>>& out) const {
  out.clear();
  const double inv = 1.0 / (spec_.dx * spec_.dx);
  const auto npx = static_cast<std::size_t>(spec_.padded(0));
  auto push = [&](std::size_t idx) {
    if (spec_.is_interior(idx)) out.emplace_back(spec_.interior_rank(idx), inv);
  };
  push(row - 1);
  push(row + 1);
  if (spec_.dim == 2) {
    push(row - npx);
    push(row + npx);
  }
  if (spec_.is_interior(row)) out.emplace_back(spec_.interior_rank(row), -2.0 * spec_.dim * inv);
}

std::size_t LocalLaplacian::interior_bandwidth() const {
  return spec_.dim == 1 ? 2 : 2 * static_cast<std::size_t>(spec_.nx[0]);
}

Field local_laplacian(const Field& u) { return LocalLaplacian(u.spec()).apply(u); }

Trajectory local_evolve(const Field& u0, const StepperConfig& cfg) {
  return evolve(u0, LocalLaplacian(u0.spec()), cfg);
}

double weak_residual(const Trajectory& traj, const SpaceTimeFunction& phi) {
  const std::size_t m = traj.step_count();
  if (m == 0) return 0.0;
  if (traj.states.size() != m + 1) throw DomainError("weak_residual needs a recorded state at every step");
  const DomainSpec& spec = traj.states.front().spec();
  const LocalLaplacian lap(spec);
  const PExponent p(traj.p);
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const Field& u = traj.states[j];
    const Field flux = p_flux(lap.apply(u), p);
    const double t = traj.times[j];
    double s = 0.0;
    for (std::size_t k = 0; k < spec.interior_count(); ++k) {
      const std::size_t idx = spec.interior_node(k);
      const auto x = spec.coord(idx);
      s += flux[idx] * phi.laplacian(x, t) - u[idx] * phi.time_derivative(x, t);
    }
    total += traj.h * spec.cell_volume() * s;
  }
  return total;
}

}  // namespace nlpb
