#include "nlpb/kernel.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <utility>

#include "nlpb/csv.hpp"
#include "nlpb/errors.hpp"

namespace nlpb {

Kernel::Kernel(Profile profile, int dim) : profile_(profile), dim_(dim) {
  if (dim != 1 && dim != 2) throw DomainError("kernel dimension must be 1 or 2");
}

Kernel Kernel::from_name(std::string_view name, int dim) {
  if (name == "tent") return Kernel(Profile::Tent, dim);
  if (name == "quartic") return Kernel(Profile::Quartic, dim);
  if (name == "cosine") return Kernel(Profile::Cosine, dim);
  throw DomainError("unknown kernel '" + std::string(name) + "' (tent, quartic, cosine)");
}

double Kernel::operator()(double r) const {
  r = std::abs(r);
  if (r >= 1.0) return 0.0;
  switch (profile_) {
    case Profile::Tent: return 1.0 - r;
    case Profile::Quartic: {
      const double s = 1.0 - r * r;
      return s * s;
    }
    case Profile::Cosine: return std::cos(0.5 * std::numbers::pi * r);
  }
  return 0.0;
}

std::string Kernel::name() const {
  switch (profile_) {
    case Profile::Tent: return "tent";
    case Profile::Quartic: return "quartic";
    case Profile::Cosine: return "cosine";
  }
  return "?";
}

namespace {

// ½ ∫ J(|z|)|z|² dz by the midpoint rule on the positive orthant (the
// integrand is even in every coordinate).
double half_second_moment(const Kernel& kernel, int dim) {
  const double R = kernel.support_radius();
  if (dim == 1) {
    constexpr int n = 1 << 16;
    const double h = R / n;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double z = (i + 0.5) * h;
      sum += kernel(z) * z * z;
    }
    return sum * h;  // ½ · 2 · ∫_0^R
  }
  constexpr int n = 4096;
  const double h = R / n;
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    const double y = (j + 0.5) * h;
    double row = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = (i + 0.5) * h;
      const double r2 = x * x + y * y;
      if (r2 >= R * R) break;
      row += kernel(std::sqrt(r2)) * r2;
    }
    total += row;
  }
  return 2.0 * total * h * h;  // ½ · 4 · ∫∫_quadrant
}

}  // namespace

double normalization_constant(const Kernel& kernel, int dim) {
  static std::mutex mutex;
  static std::map<std::pair<Profile, int>, double> cache;
  const auto key = std::make_pair(kernel.profile(), dim);
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const double moment = half_second_moment(kernel, dim);
  if (!(moment > 0.0) || !std::isfinite(moment))
    throw DomainError("kernel second moment is not a positive finite number");
  const double c = 1.0 / moment;
  std::lock_guard lock(mutex);
  cache.emplace(key, c);
  return c;
}

RescaledKernel::RescaledKernel(Kernel base, double epsilon)
    : base_(base), epsilon_(epsilon), c_j_(0.0), scale_(0.0) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw DomainError("epsilon must be positive");
  c_j_ = normalization_constant(base_, base_.dim());
  // ε^{N+2} by repeated products so that (2ε, 2dx) stencils scale exactly.
  double p = epsilon * epsilon * epsilon;
  if (base_.dim() == 2) p *= epsilon;
  scale_ = c_j_ * (1.0 / p);
}

double RescaledKernel::operator()(double r) const {
  r = std::abs(r);
  if (r >= support()) return 0.0;
  return scale_ * base_(r / epsilon_);
}

double RescaledKernel::at(std::array<double, 2> x) const {
  return (*this)(std::sqrt(x[0] * x[0] + x[1] * x[1]));
}

RescaledKernel rescale(const Kernel& kernel, double epsilon) { return {kernel, epsilon}; }

bool Stencil::moment_within_tolerance() const {
  return std::abs(sampled_moment - 1.0) <= kMomentTolerance;
}

double Stencil::second_moment() const {
  double m = 0.0;
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    const double d2 = static_cast<double>(offsets[k][0]) * offsets[k][0] +
                      static_cast<double>(offsets[k][1]) * offsets[k][1];
    m += weights[k] * d2 * dx * dx;
  }
  return 0.5 * m;
}

Stencil discretize(const RescaledKernel& rk, const DomainSpec& spec,
                   MomentNormalization normalization) {
  if (rk.base().dim() != spec.dim) throw DomainError("kernel and grid dimensions differ");
  const double support = rk.support();
  if (support < 2.0 * spec.dx)
    throw DomainError("kernel support under-resolved: eps*R_J = " + csv::num(support) +
                      " < 2*dx = " + csv::num(2.0 * spec.dx));

  Stencil st;
  st.dim = spec.dim;
  st.dx = spec.dx;
  st.support = support;
  st.normalization = normalization;
  const double dx = spec.dx;
  const double vol = spec.dim == 2 ? dx * dx : dx;
  int r = static_cast<int>(std::ceil(support / dx));
  while (r > 0 && !(r * dx < support)) --r;
  st.radius_cells = r;

  const int ry = spec.dim == 2 ? r : 0;
  for (int j = -ry; j <= ry; ++j) {
    for (int i = -r; i <= r; ++i) {
      const double d2 = static_cast<double>(i) * i + static_cast<double>(j) * j;
      if (!(d2 * dx * dx < support * support)) continue;
      const double dist = (spec.dim == 2 ? std::sqrt(d2) : std::abs(static_cast<double>(i))) * dx;
      st.offsets.push_back({i, j});
      st.weights.push_back(rk(dist) * vol);
    }
  }

  st.sampled_moment = st.second_moment();
  if (normalization == MomentNormalization::Discrete) {
    st.moment_scale = 1.0 / st.sampled_moment;
    for (double& w : st.weights) w *= st.moment_scale;
  }
  for (double w : st.weights) st.diag += w;
  return st;
}

void write_csv(const Stencil& st, std::ostream& out) {
  out << (st.dim == 2 ? "dx_offset,dy_offset,weight\n" : "dx_offset,weight\n");
  for (std::size_t k = 0; k < st.offsets.size(); ++k) {
    out << st.offsets[k][0] << ',';
    if (st.dim == 2) out << st.offsets[k][1] << ',';
    out << csv::num(st.weights[k]) << '\n';
  }
}

}  // namespace nlpb
