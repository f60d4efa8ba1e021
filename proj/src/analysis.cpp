#include "nlpb/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include "nlpb/banded.hpp"
#include "nlpb/csv.hpp"
#include "nlpb/errors.hpp"
#include "nlpb/localref.hpp"
#include "nlpb/parallel.hpp"

namespace nlpb {

double StudyReport::summary_value(const std::string& key) const {
  for (const auto& [k, v] : summary)
    if (k == key) return v;
  return std::numeric_limits<double>::quiet_NaN();
}

bool StudyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

void StudyReport::write_csv(std::ostream& out) const {
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv::num(row[c]);
    out << '\n';
  }
}

void StudyReport::write_metadata_csv(std::ostream& out) const {
  out << "key,value\n";
  for (const auto& [k, v] : metadata) out << k << ',' << v << '\n';
  for (const auto& [k, v] : summary) out << k << ',' << csv::num(v) << '\n';
}

TestFunction sine_test_function(double k) {
  const double w = k * std::numbers::pi;
  return {"sin",
          [w](std::array<double, 2> x) { return std::sin(w * x[0]) * (x[1] == 0.0 ? 1.0 : std::sin(w * x[1])); },
          [w](std::array<double, 2> x) {
            if (x[1] == 0.0) return -w * w * std::sin(w * x[0]);
            return -2.0 * w * w * std::sin(w * x[0]) * std::sin(w * x[1]);
          }};
}

TestFunction quadratic_test_function() {
  return {"quadratic", [](std::array<double, 2> x) { return x[0] * x[0] + x[1] * x[1]; },
          [](std::array<double, 2> x) { return x[1] == 0.0 ? 2.0 : 4.0; }};
}

TestFunction constant_test_function(double c) {
  return {"const", [c](std::array<double, 2>) { return c; }, [](std::array<double, 2>) { return 0.0; }};
}

double fitted_order(const std::vector<double>& params, const std::vector<double>& errors) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < params.size() && i < errors.size(); ++i) {
    if (errors[i] > 0.0 && params[i] > 0.0) {
      lx.push_back(std::log(params[i]));
      ly.push_back(std::log(errors[i]));
    }
  }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

namespace {

void require_decreasing(const std::vector<double>& eps_list) {
  if (eps_list.empty()) throw DomainError("epsilon list is empty");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw DomainError("epsilon list must be strictly decreasing");
}

Field sample_everywhere(const std::function<double(std::array<double, 2>)>& f, const DomainSpec& spec) {
  std::vector<double> v(spec.node_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(spec.coord(i));
  return Field(spec, std::move(v));
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    ss_res += r * r;
  }
  f.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : (ss_res == 0.0 ? 1.0 : 0.0);
  return f;
}

std::string describe(double v) { return csv::num(v); }

}  // namespace

StudyReport consistency_study(const TestFunction& phi, const Kernel& kernel,
                              const std::vector<double>& eps_list, const GridSetup& grid, double q) {
  require_decreasing(eps_list);
  if (grid.dim != 1) throw DomainError("consistency_study compares against the 1D Laplacian only");
  StudyReport rep;
  rep.name = "consistency";
  rep.columns = {"epsilon", "error", "error_over_dx2"};
  std::vector<double> errors(eps_list.size());
  double dx = 0.0;
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    const DomainSpec spec = make_domain(grid.dim, grid.box, grid.nx, kernel, eps_list[k]);
    dx = spec.dx;
    const Stencil st = discretize(rescale(kernel, eps_list[k]), spec);
    const Field f = sample_everywhere(phi.value, spec);
    Field diff = nonlocal_laplacian(f, st);
    auto d = diff.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= phi.laplacian(spec.coord(i));
    errors[k] = lp_norm(diff, q, Region::Omega);
    rep.rows.push_back({eps_list[k], errors[k], errors[k] / (dx * dx)});
  }
  rep.metadata = {{"kernel", kernel.name()}, {"function", phi.name}, {"q", describe(q)},
                  {"nx", std::to_string(grid.nx[0])}, {"dx", describe(dx)}};
  rep.summary = {{"fitted_order", fitted_order(eps_list, errors)}};
  return rep;
}

DecayFit decay_fit(const Trajectory& traj, double p) {
  if (traj.times.empty()) throw DomainError("empty trajectory");
  const double t0 = traj.times.front();
  const double t1 = traj.times.back();
  return decay_fit(traj, p, t0 + 0.25 * (t1 - t0), t1);
}

DecayFit decay_fit(const Trajectory& traj, double p, double t_lo, double t_hi) {
  if (p < 2.0) throw DomainError("decay_fit covers p >= 2 only");
  if (traj.step_count() < 20) throw DomainError("decay_fit needs at least 20 steps");
  std::vector<double> x;
  std::vector<double> y;
  const double slack = 1e-9 * std::max(1.0, std::abs(t_hi));
  for (std::size_t j = 0; j < traj.times.size(); ++j) {
    const double t = traj.times[j];
    if (t < t_lo - slack || t > t_hi + slack) continue;
    const double f = traj.l2_sq[j];
    if (!(f >= 1e-300)) throw DecayFitDegenerate("l2_sq = " + csv::num(f) + " at t = " + csv::num(t));
    x.push_back(t);
    y.push_back(p == 2.0 ? std::log(f) : std::pow(f, -0.5 * (p - 2.0)));
  }
  if (x.size() < 2) throw DomainError("decay_fit window holds fewer than two samples");
  const LineFit line = fit_line(x, y);
  DecayFit fit;
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.r_squared = line.r_squared;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  fit.points = x.size();
  if (p == 2.0) {
    fit.model = DecayModel::Exponential;
    fit.c1 = -line.slope;
    fit.rate = fit.c1;
  } else {
    fit.model = DecayModel::Polynomial;
    fit.c2 = line.slope;
    fit.c3 = line.intercept;
    fit.rate = 0.5 * (p - 2.0) * fit.c2;
  }
  return fit;
}

double poincare_quadratic_form(const Field& u, const Stencil& st) {
  const auto& spec = u.spec();
  double total = 0.0;
  for (std::size_t k = 0; k < spec.interior_count(); ++k) {
    const std::size_t idx = spec.interior_node(k);
    const int i = spec.ix(idx);
    const int j = spec.iy(idx);
    for (std::size_t o = 0; o < st.offsets.size(); ++o) {
      const int ii = i + st.offsets[o][0];
      const int jj = j + st.offsets[o][1];
      if (ii < 0 || ii >= spec.padded(0) || jj < 0 || jj >= spec.padded(1)) continue;
      const double diff = u[spec.index(ii, jj)] - u[idx];
      total += st.weights[o] * diff * diff;
    }
  }
  return total * spec.cell_volume();
}

namespace {

BandedSpdMatrix poincare_matrix(const DomainSpec& spec, const Stencil& st) {
  const std::size_t n = spec.interior_count();
  const auto r = static_cast<std::size_t>(st.radius_cells);
  const std::size_t bw = spec.dim == 1 ? r : r * static_cast<std::size_t>(spec.nx[0]) + r;
  BandedSpdMatrix K(n, bw);
  for (std::size_t a = 0; a < n; ++a) {
    const std::size_t idx = spec.interior_node(a);
    const int i = spec.ix(idx);
    const int j = spec.iy(idx);
    for (std::size_t o = 0; o < st.offsets.size(); ++o) {
      if (st.offsets[o][0] == 0 && st.offsets[o][1] == 0) continue;
      const double w = st.weights[o];
      const int ii = i + st.offsets[o][0];
      const int jj = j + st.offsets[o][1];
      if (ii < 0 || ii >= spec.padded(0) || jj < 0 || jj >= spec.padded(1)) {
        K.add(a, a, w);
        continue;
      }
      const std::size_t nb = spec.index(ii, jj);
      K.add(a, a, w);
      if (spec.is_interior(nb)) {
        const std::size_t b = spec.interior_rank(nb);
        K.add(b, b, w);
        K.add(a, b, -w);
      }
    }
  }
  return K;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

PoincareResult poincare_analysis(const DomainSpec& spec, const Stencil& st, double shift, double tol,
                                 int max_iters) {
  const BandedSpdMatrix K = poincare_matrix(spec, st);
  BandedSpdMatrix shifted = K;
  shifted.add_diagonal(-shift);
  shifted.factorize();

  const std::size_t n = spec.interior_count();
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> kx(n);
  K.multiply(x, kx);
  double rho = dot(x, kx);
  for (int it = 1; it <= max_iters; ++it) {
    shifted.solve(x);
    const double norm = std::sqrt(dot(x, x));
    for (double& v : x) v /= norm;
    K.multiply(x, kx);
    const double next = dot(x, kx);
    const bool done = std::abs(next - rho) <= tol * std::abs(next);
    rho = next;
    if (done) {
      if (!(rho > 0.0)) throw ConvergenceError("Poincare form has a nonpositive eigenvalue");
      return {1.0 / rho, rho, it, x};
    }
  }
  throw ConvergenceError("inverse power iteration did not converge in " + std::to_string(max_iters) +
                         " iterations");
}

double poincare_constant(const DomainSpec& spec, const Stencil& st, double q) {
  if (q != 2.0) throw DomainError("poincare_constant supports q = 2 only");
  return poincare_analysis(spec, st).constant;
}

double reverse_bound_constant(double poincare) { return 4.0 * poincare * poincare; }

std::function<double(std::array<double, 2>)> bump_profile(const Box& box, int dim) {
  return [box, dim](std::array<double, 2> x) {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) {
      const double len = box.hi[a] - box.lo[a];
      const double lo = box.lo[a] + 0.1 * len;
      const double hi = box.hi[a] - 0.1 * len;
      if (x[a] <= lo || x[a] >= hi) return 0.0;
      const double s = std::sin(std::numbers::pi * (x[a] - lo) / (hi - lo));
      v *= s * s;
    }
    return v;
  };
}

Field sample_interior(const std::function<double(std::array<double, 2>)>& f, const DomainSpec& spec) {
  std::vector<double> v(spec.interior_count());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(spec.coord(spec.interior_node(k)));
  return zero_extend(v, spec);
}

Field random_smooth_field(const DomainSpec& spec, std::uint64_t seed, int modes, double amplitude) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int my = spec.dim == 2 ? modes : 1;
  std::vector<double> coeff(static_cast<std::size_t>(modes * my));
  for (int l = 0; l < my; ++l)
    for (int k = 0; k < modes; ++k) coeff[static_cast<std::size_t>(l * modes + k)] = unit(rng) / ((k + 1) * (l + 1));
  const Box& b = spec.omega;
  auto f = [&](std::array<double, 2> x) {
    double v = 0.0;
    for (int l = 0; l < my; ++l) {
      const double sy =
          spec.dim == 2 ? std::sin((l + 1) * std::numbers::pi * (x[1] - b.lo[1]) / (b.hi[1] - b.lo[1])) : 1.0;
      for (int k = 0; k < modes; ++k)
        v += coeff[static_cast<std::size_t>(l * modes + k)] * sy *
             std::sin((k + 1) * std::numbers::pi * (x[0] - b.lo[0]) / (b.hi[0] - b.lo[0]));
    }
    return amplitude * v;
  };
  return sample_interior(f, spec);
}

Field random_field(const DomainSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> v(spec.interior_count());
  for (double& x : v) x = unit(rng);
  return zero_extend(v, spec);
}

StudyReport nonlocal_to_local_study(const std::function<double(std::array<double, 2>)>& u0,
                                    const Kernel& kernel, const std::vector<double>& eps_list,
                                    const GridSetup& grid, StepperConfig cfg) {
  require_decreasing(eps_list);
  if (grid.dim != 1) throw DomainError("nonlocal_to_local_study compares against the 1D local solver only");
  cfg.validate();

  const std::size_t runs = eps_list.size() + 1;  // slot 0 is the local reference
  std::vector<Trajectory> traj(runs);
  parallel_tasks(runs, [&](std::size_t r) {
    if (r == 0) {
      const DomainSpec spec = DomainSpec::uniform(grid.dim, grid.box, grid.nx, 2);
      traj[0] = local_evolve(sample_interior(u0, spec), cfg);
    } else {
      const double eps = eps_list[r - 1];
      const DomainSpec spec = make_domain(grid.dim, grid.box, grid.nx, kernel, eps);
      const Stencil st = discretize(rescale(kernel, eps), spec);
      traj[r] = evolve(sample_interior(u0, spec), NonlocalLaplacian(spec, st), cfg);
    }
  });

  const double p = cfg.p.value();
  const DomainSpec& local_spec = traj[0].states.front().spec();
  const double vol = local_spec.cell_volume();
  StudyReport rep;
  rep.name = "nonlocal_to_local";
  rep.columns = {"epsilon", "sup_error"};
  std::vector<double> errors;
  for (std::size_t r = 1; r < runs; ++r) {
    if (traj[r].recorded_steps != traj[0].recorded_steps)
      throw DomainError("recording schedules of the nonlocal and local runs differ");
    double sup = 0.0;
    for (std::size_t s = 0; s < traj[0].states.size(); ++s) {
      const auto a = traj[r].states[s].interior_values();
      const auto b = traj[0].states[s].interior_values();
      double sum = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) sum += std::pow(std::abs(a[k] - b[k]), p);
      sup = std::max(sup, std::pow(sum * vol, 1.0 / p));
    }
    errors.push_back(sup);
    rep.rows.push_back({eps_list[r - 1], sup});
  }

  bool decreasing = true;
  for (std::size_t k = 1; k < errors.size(); ++k) decreasing = decreasing && errors[k] < errors[k - 1];
  const double ratio = errors.front() > 0.0 ? errors.back() / errors.front() : 0.0;
  rep.metadata = {{"kernel", kernel.name()}, {"p", describe(p)}, {"nx", std::to_string(grid.nx[0])},
                  {"h", describe(cfg.h)}, {"T", describe(cfg.T)}};
  rep.summary = {{"error_ratio_last_first", ratio}};
  if (errors.size() > 1) {
    rep.checks.push_back({"errors strictly decreasing", decreasing, ""});
    rep.checks.push_back({"err(last) <= 0.5 err(first)", ratio <= 0.5, "ratio " + describe(ratio)});
  }
  return rep;
}

StudyReport contraction_study(const Field& u0_a, const Field& u0_b, const LaplaceOperator& op,
                              StepperConfig cfg) {
  cfg.record_every = 1;
  if (cfg.inner_tol <= 0.0) {
    const double n = std::max(lp_norm(u0_a, 2.0, Region::Omega), lp_norm(u0_b, 2.0, Region::Omega));
    cfg.inner_tol = StepperConfig::default_tolerance(n);
  }
  Trajectory a;
  Trajectory b;
  parallel_tasks(2, [&](std::size_t r) { (r == 0 ? a : b) = evolve(r == 0 ? u0_a : u0_b, op, cfg); });

  StudyReport rep;
  rep.name = "contraction";
  rep.columns = {"step", "time", "distance"};
  double prev = 0.0;
  double worst = -std::numeric_limits<double>::infinity();
  int flagged = 0;
  for (std::size_t j = 0; j < a.states.size(); ++j) {
    Field diff = a.states[j];
    auto d = diff.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= b.states[j][i];
    const double dist = lp_norm(diff, 2.0, Region::Omega);
    if (j > 0) {
      const double allowance = 10.0 * std::max({cfg.inner_tol, a.tolerances[j], b.tolerances[j]});
      const double growth = dist - prev;
      worst = std::max(worst, growth);
      if (growth > allowance) ++flagged;
    }
    rep.rows.push_back({static_cast<double>(j), a.times[j], dist});
    prev = dist;
  }
  rep.metadata = {{"operator", std::string(op.name())}, {"p", describe(cfg.p.value())},
                  {"h", describe(cfg.h)}, {"inner_tol", describe(cfg.inner_tol)}};
  rep.summary = {{"max_growth", worst}, {"flagged_steps", static_cast<double>(flagged)}};
  rep.checks.push_back({"distance nonincreasing within 10*inner_tol", flagged == 0,
                        std::to_string(flagged) + " flagged steps"});
  return rep;
}

StudyReport energy_audit(const Trajectory& traj, double relative_tolerance) {
  StudyReport rep;
  rep.name = "energy_audit";
  rep.columns = {"step", "step_slack", "cumulative_slack", "aggregate_slack"};
  const std::size_t m = traj.step_count();
  if (traj.times.empty()) return rep;
  const double e0 = traj.energies[0];
  const double mass0 = 0.5 * traj.l2_sq[0];
  double increments = 0.0;
  double allowance = relative_tolerance * (mass0 + e0);
  double worst_step = m > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  double worst_aggregate = worst_step;
  double cumulative = 0.0;
  rep.rows.push_back({0.0, 0.0, 0.0, 0.0});
  for (std::size_t j = 1; j <= m; ++j) {
    const double inc = traj.increment_sq[j] / traj.h;
    increments += inc;
    allowance += traj.residuals[j] * std::sqrt(traj.increment_sq[j]) +
                 1e-12 * std::max(traj.energies[j - 1], 0.0);
    const double step = traj.energies[j - 1] - traj.energies[j] - inc;
    cumulative = e0 - traj.energies[j] - increments;
    const double aggregate = mass0 + e0 - 0.5 * traj.l2_sq[j] - increments - traj.energies[j];
    worst_step = std::min(worst_step, step);
    worst_aggregate = std::min(worst_aggregate, aggregate);
    rep.rows.push_back({static_cast<double>(j), step, cumulative, aggregate});
  }
  rep.metadata = {{"operator", traj.operator_name}, {"p", describe(traj.p)}, {"h", describe(traj.h)}};
  rep.summary = {{"worst_step_slack", worst_step},
                 {"cumulative_slack", cumulative},
                 {"worst_aggregate_slack", worst_aggregate},
                 {"allowance", allowance},
                 {"initial_energy", e0}};
  rep.checks.push_back({"per-step dissipation", worst_step >= -allowance, "worst " + describe(worst_step)});
  rep.checks.push_back({"cumulative dissipation", cumulative >= -allowance, "slack " + describe(cumulative)});
  rep.checks.push_back({"aggregate bound", worst_aggregate >= -allowance, "worst " + describe(worst_aggregate)});
  return rep;
}

}  // namespace nlpb
