#include "nlpb/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>

#include "nlpb/banded.hpp"
#include "nlpb/csv.hpp"
#include "nlpb/errors.hpp"

namespace nlpb {

void StepperConfig::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("time step h must be positive");
  if (!(T >= h * (1.0 - 1e-12))) throw DomainError("final time T must be at least h");
  if (!(inner_rel_tol > 0.0)) throw DomainError("inner_rel_tol must be positive");
  if (inner_max_iters < 1) throw DomainError("inner_max_iters must be at least 1");
  if (record_every < 1) throw DomainError("record_every must be at least 1");
  if (flux_delta < 0.0) throw DomainError("flux_delta must be nonnegative");
}

int StepperConfig::step_count() const {
  return std::max(1, static_cast<int>(std::ceil(T / h - 1e-9)));
}

double StepperConfig::default_tolerance(double u0_norm) { return 1e-8 * std::max(1.0, u0_norm); }

namespace {

// Rounding-error level of the gradient evaluation, in units of machine
// epsilon times the magnitudes that enter it.
constexpr double kResidualFloorFactor = 256.0;
constexpr double kArmijo = 1e-4;
constexpr double kBacktrack = 0.5;
constexpr int kMaxBacktracks = 60;
constexpr double kUnresolvableEnergy = 1e-250;
constexpr double kProgress = 1e-6;
constexpr double kTinyStep = 1e-6;
constexpr int kFlatLimit = 50;

double omega_dot(const DomainSpec& spec, std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (spec.is_interior(i)) s += a[i] * b[i];
  return s * spec.cell_volume();
}

double omega_norm(const DomainSpec& spec, std::span<const double> a) {
  return std::sqrt(omega_dot(spec, a, a));
}

// Per-step problem: E(w), its L² gradient and cancellation-free energy
// differences along a search line.
class StepProblem {
 public:
  StepProblem(const Field& u_prev, const LaplaceOperator& op, const StepperConfig& cfg)
      : u_(u_prev), op_(op), spec_(op.spec()), h_(cfg.h), p_(cfg.p.value()), delta_(cfg.flux_delta) {
    if (!(u_prev.spec() == spec_)) throw DomainError("field grid does not match operator grid");
  }

  double energy(const Field& w, const Field& aw) const {
    const auto wv = w.values();
    const auto uv = u_.values();
    double quad = 0.0;
    for (std::size_t i = 0; i < wv.size(); ++i)
      if (spec_.is_interior(i)) quad += 0.5 * wv[i] * wv[i] - uv[i] * wv[i];
    double pe = 0.0;
    for (double g : aw.values()) pe += p_energy_density(g, p_, delta_);
    return spec_.cell_volume() * (quad / h_ + pe);
  }

  // Gradient at w given Aw; also returns the flux magnitude for the residual floor.
  Field gradient(const Field& w, const Field& aw, double* flux_norm = nullptr) const {
    Field flux = p_flux(aw, PExponent(p_), delta_);
    if (flux_norm) *flux_norm = lp_norm(flux, 2.0, Region::Extended);
    Field g = op_.apply(flux);
    auto gv = g.data();
    const auto wv = w.values();
    const auto uv = u_.values();
    for (std::size_t i = 0; i < gv.size(); ++i)
      gv[i] = spec_.is_interior(i) ? (wv[i] - uv[i]) / h_ + gv[i] : 0.0;
    return g;
  }

  // E(w + t d) - E(w), accumulated node by node.
  double energy_change(const Field& w, const Field& aw, const Field& d, const Field& ad, double t) const {
    const auto wv = w.values();
    const auto uv = u_.values();
    const auto dv = d.values();
    double quad = 0.0;
    for (std::size_t i = 0; i < wv.size(); ++i)
      if (spec_.is_interior(i)) quad += t * dv[i] * (wv[i] - uv[i] + 0.5 * t * dv[i]);
    const auto gv = aw.values();
    const auto gd = ad.values();
    double pe = 0.0;
    if (p_ == 2.0 && delta_ == 0.0) {
      for (std::size_t i = 0; i < gv.size(); ++i) pe += t * gd[i] * (gv[i] + 0.5 * t * gd[i]);
    } else {
      for (std::size_t i = 0; i < gv.size(); ++i)
        if (gd[i] != 0.0)
          pe += p_energy_density(gv[i] + t * gd[i], p_, delta_) - p_energy_density(gv[i], p_, delta_);
    }
    return spec_.cell_volume() * (quad / h_ + pe);
  }

  double residual_floor(const Field& w, double flux_norm) const {
    const double eps = std::numeric_limits<double>::epsilon();
    const double scale = (omega_norm(spec_, w.values()) + omega_norm(spec_, u_.values())) / h_ +
                         op_.norm_bound() * flux_norm;
    return kResidualFloorFactor * eps * scale;
  }

  // Bound on the gradient noise once the line search can no longer decrease
  // E. Each Aw entry carries an absolute rounding error δ; the flux turns
  // that into min((p-1)|g|^{p-2}δ, 2^{2-p}δ^{p-1}) when p < 2.
  double stall_floor(const Field& w, const Field& aw, double flux_norm) const {
    const double eps = std::numeric_limits<double>::epsilon();
    const double nb = op_.norm_bound();
    const double delta = kResidualFloorFactor * eps * nb * w.max_abs(Region::Extended);
    double sum = 0.0;
    for (double g : aw.values()) {
      const double a = std::abs(g);
      double n = 0.0;
      if (delta_ > 0.0 || p_ >= 2.0) {
        n = (p_ - 1.0) * std::pow(a + delta + delta_, p_ - 2.0) * delta;
      } else {
        n = std::pow(2.0, 2.0 - p_) * std::pow(delta, p_ - 1.0);
        if (a > 0.0) n = std::min(n, (p_ - 1.0) * std::pow(a, p_ - 2.0) * delta);
      }
      sum += n * n;
    }
    // Energies this small sit at the bottom of the double range, where
    // Armijo decreases cannot be represented at all.
    if (energy_scale(w, aw) < kUnresolvableEnergy) return std::numeric_limits<double>::infinity();
    return residual_floor(w, flux_norm) + nb * std::sqrt(sum * spec_.cell_volume());
  }

  double energy_scale(const Field& w, const Field& aw) const {
    double s = 0.0;
    const auto wv = w.values();
    for (std::size_t i = 0; i < wv.size(); ++i) s += wv[i] * wv[i] / h_;
    for (double g : aw.values()) s += p_energy_density(g, p_, delta_);
    return s * spec_.cell_volume();
  }

  // Hessian of E (divided by the cell volume) restricted to interior ranks.
  BandedSpdMatrix hessian(const Field& aw) const {
    const std::size_t n = spec_.interior_count();
    BandedSpdMatrix H(n, op_.interior_bandwidth());
    H.add_diagonal(1.0 / h_);
    const auto gv = aw.values();
    double gmax = 0.0;
    for (double g : gv) gmax = std::max(gmax, std::abs(g));
    const double gfloor = 1e-6 * gmax;
    std::vector<std::pair<std::size_t, double>> row;
    for (std::size_t k : op_.coupled_rows()) {
      const double D = curvature(gv[k], gfloor);
      if (D == 0.0) continue;
      op_.row_entries(k, row);
      for (const auto& [ci, ai] : row)
        for (const auto& [cj, aj] : row)
          if (cj <= ci) H.add(ci, cj, D * ai * aj);
    }
    return H;
  }

  bool constant_hessian() const { return p_ == 2.0 && delta_ == 0.0; }

  const DomainSpec& spec() const { return spec_; }
  const LaplaceOperator& op() const { return op_; }
  double h() const { return h_; }
  const Field& u_prev() const { return u_; }

 private:
  double curvature(double g, double gfloor) const {
    if (delta_ > 0.0) {
      const double s = g * g + delta_ * delta_;
      return std::pow(s, 0.5 * (p_ - 4.0)) * ((p_ - 1.0) * g * g + delta_ * delta_);
    }
    if (p_ == 2.0) return 1.0;
    double a = std::abs(g);
    if (p_ < 2.0) {
      a = std::max(a, gfloor);
      if (a == 0.0) return 0.0;
      // |g|^{p-2} rather than the true (p-1)|g|^{p-2}: the quadratic with
      // this weight majorises |g|^p/p, so the model never undershoots the
      // curvature near g = 0.
      return std::pow(a, p_ - 2.0);
    }
    return (p_ - 1.0) * std::pow(a, p_ - 2.0);
  }

  const Field& u_;
  const LaplaceOperator& op_;
  const DomainSpec& spec_;
  double h_;
  double p_;
  double delta_;
};

Field axpy(const Field& x, double t, const Field& d) {
  std::vector<double> out(x.size());
  const auto xv = x.values();
  const auto dv = d.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] + t * dv[i];
  return Field(x.spec(), std::move(out));
}

// Newton direction -H^{-1} g on interior ranks.
Field newton_direction(const StepProblem& prob, const BandedSpdMatrix& H, const Field& g) {
  const auto& spec = prob.spec();
  std::vector<double> rhs(spec.interior_count());
  for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = -g[spec.interior_node(k)];
  H.solve(rhs);
  return zero_extend(rhs, spec);
}

class RotheSolver {
 public:
  RotheSolver(const LaplaceOperator& op, const StepperConfig& cfg)
      : op_(op), cfg_(cfg), newton_(cfg.solver == InnerSolver::Newton) {}

  Field step(const Field& u_prev, StepReport* report) {
    const StepProblem prob(u_prev, op_, cfg_);
    const double abs_tol = cfg_.inner_tol > 0.0
                               ? cfg_.inner_tol
                               : StepperConfig::default_tolerance(lp_norm(u_prev, 2.0, Region::Omega));
    Field w = u_prev;
    Field aw = op_.apply(w);
    double flux_norm = 0.0;
    Field g = prob.gradient(w, aw, &flux_norm);
    double res = omega_norm(prob.spec(), g.values());
    // Relative to the larger of the two terms balanced in the E-L equation;
    // at w = u_prev the residual is exactly the flux term.
    const double rel_tol =
        cfg_.inner_rel_tol * std::max(omega_norm(prob.spec(), u_prev.values()) / cfg_.h, res);
    const double target = std::min(abs_tol, rel_tol);
    double tol = std::max(target, prob.residual_floor(w, flux_norm));

    StepReport local;
    StepReport& rep = report ? *report : local;
    rep = StepReport{};
    if (cfg_.trace_inner) rep.energy_history.push_back(prob.energy(w, aw));

    double bb_step = cfg_.h;
    int it = 0;
    bool stalled = false;
    double best = res;
    int flat = 0;  // consecutive tiny steps without residual progress
    while (res > tol && it < cfg_.inner_max_iters) {
      Field d = direction(prob, aw, g, bb_step);
      double slope = omega_dot(prob.spec(), g.values(), d.values());
      if (!(slope < 0.0)) {
        d = axpy(Field(prob.spec()), -1.0, g);
        slope = -res * res;
      }
      const Field ad = op_.apply(d);
      const double t0 = newton_ ? 1.0 : bb_step;
      double t = t0;
      bool accepted = false;
      for (int b = 0; b < kMaxBacktracks; ++b) {
        const double change = prob.energy_change(w, aw, d, ad, t);
        if (change <= kArmijo * t * slope) {
          accepted = true;
          break;
        }
        t *= kBacktrack;
      }
      ++it;
      if (!accepted) {  // no representable decrease left along d
        stalled = true;
        break;
      }

      Field w_next = axpy(w, t, d);
      Field aw_next = axpy(aw, t, ad);
      Field g_next = prob.gradient(w_next, aw_next, &flux_norm);
      if (!newton_) {
        // s = t d, y = g_next - g
        double sy = 0.0;
        double ss = 0.0;
        const auto dv = d.values();
        for (std::size_t i = 0; i < dv.size(); ++i) {
          if (!prob.spec().is_interior(i)) continue;
          const double s = t * dv[i];
          sy += s * (g_next[i] - g[i]);
          ss += s * s;
        }
        bb_step = sy > 0.0 ? std::clamp(ss / sy, 1e-20, 1e20) : cfg_.h;
      }
      w = std::move(w_next);
      aw = std::move(aw_next);
      g = std::move(g_next);
      res = omega_norm(prob.spec(), g.values());
      tol = std::max(target, prob.residual_floor(w, flux_norm));
      // Newton steps that are tiny and leave the residual where it was mean
      // the line search is chasing rounding noise in the flux. (The BB
      // residual is not monotone, so this test would misfire there.)
      if (res < (1.0 - kProgress) * best) {
        best = res;
        flat = 0;
      } else if (newton_ && t < kTinyStep * t0 && ++flat >= kFlatLimit) {
        stalled = true;
        if (cfg_.trace_inner) rep.energy_history.push_back(step_energy(w, u_prev, op_, cfg_));
        break;
      }
      if (cfg_.trace_inner) rep.energy_history.push_back(step_energy(w, u_prev, op_, cfg_));
    }

    // A stalled line search certifies the iterate only down to round-off.
    if (res > tol && stalled) tol = std::max(tol, prob.stall_floor(w, aw, flux_norm));
    rep.iterations = it;
    rep.residual = res;
    rep.tolerance = tol;
    if (res > tol)
      throw InnerSolveFailed("inner solve stopped at residual " + csv::num(res) + " > tolerance " +
                                 csv::num(tol) + " after " + std::to_string(it) + " iterations",
                             res, it);
    return w;
  }

 private:
  Field direction(const StepProblem& prob, const Field& aw, const Field& g, double bb_step) {
    if (!newton_) {
      (void)bb_step;
      return axpy(Field(prob.spec()), -1.0, g);
    }
    if (prob.constant_hessian()) {
      if (!cached_) {
        cached_ = prob.hessian(aw);
        cached_->factorize();
      }
      return newton_direction(prob, *cached_, g);
    }
    BandedSpdMatrix H = prob.hessian(aw);
    H.factorize();
    return newton_direction(prob, H, g);
  }

  const LaplaceOperator& op_;
  const StepperConfig& cfg_;
  bool newton_;
  std::optional<BandedSpdMatrix> cached_;
};

}  // namespace

void Trajectory::write_csv(std::ostream& out) const {
  const bool tagged = operator_name == "local";
  out << "step,time,l2_sq,energy,increment_sq,inner_iters,residual" << (tagged ? ",operator" : "")
      << '\n';
  for (std::size_t j = 0; j < times.size(); ++j) {
    out << j << ',' << csv::num(times[j]) << ',' << csv::num(l2_sq[j]) << ',' << csv::num(energies[j])
        << ',' << csv::num(increment_sq[j]) << ',' << inner_iters[j] << ',' << csv::num(residuals[j]);
    if (tagged) out << ",local";
    out << '\n';
  }
}

double step_energy(const Field& w, const Field& u_prev, const LaplaceOperator& op,
                   const StepperConfig& cfg) {
  const StepProblem prob(u_prev, op, cfg);
  return prob.energy(w, op.apply(w));
}

double step_energy(const Field& w, const Field& u_prev, const Stencil& st, const StepperConfig& cfg) {
  return step_energy(w, u_prev, NonlocalLaplacian(w.spec(), st), cfg);
}

Field step_gradient(const Field& w, const Field& u_prev, const LaplaceOperator& op,
                    const StepperConfig& cfg) {
  const StepProblem prob(u_prev, op, cfg);
  return prob.gradient(w, op.apply(w));
}

Field step_gradient(const Field& w, const Field& u_prev, const Stencil& st, const StepperConfig& cfg) {
  return step_gradient(w, u_prev, NonlocalLaplacian(w.spec(), st), cfg);
}

Field implicit_step(const Field& u_prev, const LaplaceOperator& op, const StepperConfig& cfg,
                    StepReport* report) {
  cfg.validate();
  RotheSolver solver(op, cfg);
  return solver.step(u_prev, report);
}

Field implicit_step(const Field& u_prev, const Stencil& st, const StepperConfig& cfg,
                    StepReport* report) {
  return implicit_step(u_prev, NonlocalLaplacian(u_prev.spec(), st), cfg, report);
}

double explicit_step_bound(const LaplaceOperator& op) {
  const double b = op.norm_bound();
  return 0.9 * 2.0 / (b * b);
}

Field explicit_step(const Field& u_prev, const LaplaceOperator& op, const StepperConfig& cfg) {
  const Field rhs = p_biharmonic_rhs(u_prev, op, cfg.p, cfg.flux_delta);
  Field next = axpy(u_prev, cfg.h, rhs);
  const double before = dirichlet_energy(u_prev, op, cfg.p, cfg.flux_delta);
  const double after = dirichlet_energy(next, op, cfg.p, cfg.flux_delta);
  if (!std::isfinite(after) || after > before * (1.0 + 1e-12))
    throw StabilityViolation("explicit step raised the p-energy from " + csv::num(before) + " to " +
                             csv::num(after) + " (h = " + csv::num(cfg.h) + ", p = 2 bound " +
                             csv::num(explicit_step_bound(op)) + ")");
  return next;
}

Field explicit_step(const Field& u_prev, const Stencil& st, const StepperConfig& cfg) {
  return explicit_step(u_prev, NonlocalLaplacian(u_prev.spec(), st), cfg);
}

Trajectory evolve(const Field& u0, const LaplaceOperator& op, StepperConfig cfg) {
  cfg.validate();
  if (!(u0.spec() == op.spec())) throw DomainError("initial field grid does not match operator grid");
  if (!u0.all_finite()) throw DomainError("initial field has non-finite values");
  if (u0.max_abs(Region::Exterior) != 0.0) throw DomainError("initial field violates the zero extension");
  if (cfg.inner_tol <= 0.0) cfg.inner_tol = StepperConfig::default_tolerance(lp_norm(u0, 2.0, Region::Omega));

  const int m = cfg.step_count();
  Trajectory traj;
  traj.operator_name = std::string(op.name());
  traj.h = cfg.h;
  traj.p = cfg.p.value();
  traj.inner_tol = cfg.inner_tol;
  auto record_scalars = [&](int j, const Field& u, double inc, int iters, double res, double tol) {
    const double l2 = lp_norm(u, 2.0, Region::Omega);
    traj.times.push_back(j * cfg.h);
    traj.l2_sq.push_back(l2 * l2);
    traj.energies.push_back(dirichlet_energy(u, op, cfg.p, cfg.flux_delta));
    traj.increment_sq.push_back(inc);
    traj.inner_iters.push_back(iters);
    traj.residuals.push_back(res);
    traj.tolerances.push_back(tol);
    if (j % cfg.record_every == 0 || j == m) {
      traj.recorded_steps.push_back(j);
      traj.states.push_back(u);
    }
  };

  record_scalars(0, u0, 0.0, 0, 0.0, cfg.inner_tol);
  RotheSolver solver(op, cfg);
  Field u = u0;
  for (int j = 1; j <= m; ++j) {
    Field next;
    StepReport rep;
    try {
      next = cfg.mode == StepMode::Implicit ? solver.step(u, &rep) : explicit_step(u, op, cfg);
    } catch (const InnerSolveFailed& e) {
      throw InnerSolveFailed("step " + std::to_string(j) + ": " + e.what(), e.residual(), e.iterations());
    } catch (const StabilityViolation& e) {
      throw StabilityViolation("step " + std::to_string(j) + ": " + e.what());
    }
    const double inc = [&] {
      double s = 0.0;
      for (std::size_t i = 0; i < next.size(); ++i) {
        const double d = next[i] - u[i];
        s += d * d;
      }
      return s * next.spec().cell_volume();
    }();
    u = std::move(next);
    record_scalars(j, u, inc, rep.iterations, rep.residual, rep.tolerance);
  }
  return traj;
}

Trajectory evolve(const Field& u0, const Stencil& st, StepperConfig cfg) {
  return evolve(u0, NonlocalLaplacian(u0.spec(), st), std::move(cfg));
}

}  // namespace nlpb
