#include "nlpb/run.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "nlpb/analysis.hpp"
#include "nlpb/csv.hpp"
#include "nlpb/errors.hpp"
#include "nlpb/pgm.hpp"

namespace nlpb {

std::string config_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

class Session {
 public:
  Session(const ExperimentConfig& cfg, std::filesystem::path dir, std::ostream& out)
      : cfg_(cfg), dir_(std::move(dir)), out_(out) {}

  std::ofstream open(const std::string& name) const {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw IoError("cannot write '" + (dir_ / name).string() + "'");
    return f;
  }

  void check(const std::string& name, bool passed, const std::string& detail = "") {
    out_ << (passed ? "PASS " : "FAIL ") << name;
    if (!detail.empty()) out_ << " (" << detail << ")";
    out_ << '\n';
    failed_ = failed_ || !passed;
  }

  void checks(const StudyReport& rep) {
    for (const Check& c : rep.checks) check(rep.name + ": " + c.name, c.passed, c.detail);
  }

  void report(const StudyReport& rep, const std::string& stem) {
    auto f = open(stem + ".csv");
    rep.write_csv(f);
    auto m = open(stem + "_summary.csv");
    rep.write_metadata_csv(m);
    checks(rep);
  }

  bool failed() const { return failed_; }
  const ExperimentConfig& cfg() const { return cfg_; }

 private:
  const ExperimentConfig& cfg_;
  std::filesystem::path dir_;
  std::ostream& out_;
  bool failed_ = false;
};

Box config_box(const ExperimentConfig& c) {
  Box b;
  b.lo = {c.lo, c.dim == 2 ? c.lo : 0.0};
  b.hi = {c.hi, c.dim == 2 ? c.hi : 1.0};
  return b;
}

GridSetup grid_setup(const ExperimentConfig& c) { return {c.dim, config_box(c), {c.nx, c.ny}}; }

struct NonlocalSetup {
  DomainSpec spec;
  Stencil stencil;
};

NonlocalSetup nonlocal_setup(const ExperimentConfig& c, const Box& box, std::array<int, 2> nx) {
  const Kernel k = Kernel::from_name(c.kernel, c.dim);
  DomainSpec spec = make_domain(c.dim, box, nx, k, c.epsilon);
  Stencil st = discretize(rescale(k, c.epsilon), spec);
  return {spec, std::move(st)};
}

Field initial_field(const ExperimentConfig& c, const DomainSpec& spec) {
  if (c.initial == "zero") return Field(spec);
  if (c.initial == "random") return random_smooth_field(spec, c.seed, 6, c.amplitude);
  if (c.initial == "bump") {
    const auto f = bump_profile(spec.omega, spec.dim);
    return sample_interior([&](std::array<double, 2> x) { return c.amplitude * f(x); }, spec);
  }
  const Box b = spec.omega;
  return sample_interior(
      [&](std::array<double, 2> x) {
        double v = c.amplitude * std::sin(M_PI * (x[0] - b.lo[0]) / (b.hi[0] - b.lo[0]));
        if (spec.dim == 2) v *= std::sin(M_PI * (x[1] - b.lo[1]) / (b.hi[1] - b.lo[1]));
        return v;
      },
      spec);
}

void write_trajectory(Session& s, const Trajectory& traj) {
  auto f = s.open("trajectory.csv");
  traj.write_csv(f);
  if (!traj.states.empty()) {
    auto g = s.open("final_state.csv");
    write_csv(traj.states.back(), g);
  }
}

void cmd_evolve(Session& s) {
  const auto& c = s.cfg();
  const NonlocalSetup ns = nonlocal_setup(c, config_box(c), {c.nx, c.ny});
  const Trajectory traj = evolve(initial_field(c, ns.spec), ns.stencil, c.stepper());
  write_trajectory(s, traj);
  s.report(energy_audit(traj, c.mode == StepMode::Explicit ? 1e-2 : 0.0), "energy_audit");
}

void cmd_consistency(Session& s) {
  const auto& c = s.cfg();
  const TestFunction phi = c.test_function == "sin" ? sine_test_function(2.0) : quadratic_test_function();
  const StudyReport rep =
      consistency_study(phi, Kernel::from_name(c.kernel, c.dim), c.epsilon_list, grid_setup(c), c.q);
  s.report(rep, "consistency");
  const double order = rep.summary_value("fitted_order");
  if (c.test_function == "sin") {
    s.check("consistency: fitted order >= 1", order >= 1.0, "order " + csv::num(order));
  } else {
    bool ok = true;
    for (const auto& row : rep.rows) ok = ok && row[2] <= 5.0;
    s.check("consistency: error <= 5 dx^2 at every epsilon", ok);
  }
}

void cmd_converge(Session& s) {
  const auto& c = s.cfg();
  const GridSetup g = grid_setup(c);
  s.report(nonlocal_to_local_study(bump_profile(g.box, g.dim), Kernel::from_name(c.kernel, c.dim),
                                   c.epsilon_list, g, c.stepper()),
           "converge");
}

void cmd_decay(Session& s) {
  const auto& c = s.cfg();
  const NonlocalSetup ns = nonlocal_setup(c, config_box(c), {c.nx, c.ny});
  const Trajectory traj = evolve(initial_field(c, ns.spec), ns.stencil, c.stepper());
  write_trajectory(s, traj);
  const DecayFit fit = decay_fit(traj, c.p);
  auto f = s.open("decay_fit.csv");
  f << "model,c1,c2,c3,slope,intercept,rate,r_squared,t_lo,t_hi,points\n"
    << (fit.model == DecayModel::Exponential ? "exponential" : "polynomial") << ',' << csv::num(fit.c1) << ','
    << csv::num(fit.c2) << ',' << csv::num(fit.c3) << ',' << csv::num(fit.slope) << ','
    << csv::num(fit.intercept) << ',' << csv::num(fit.rate) << ',' << csv::num(fit.r_squared) << ','
    << csv::num(fit.t_lo) << ',' << csv::num(fit.t_hi) << ',' << fit.points << '\n';
  if (c.p == 2.0) {
    s.check("decay: log-linear tail r^2 >= 0.99", fit.r_squared >= 0.99, "r^2 " + csv::num(fit.r_squared));
    s.check("decay: C1 > 0", fit.c1 > 0.0, "C1 " + csv::num(fit.c1));
  } else {
    s.check("decay: transformed tail r^2 >= 0.95", fit.r_squared >= 0.95, "r^2 " + csv::num(fit.r_squared));
    s.check("decay: slope > 0", fit.slope > 0.0, "slope " + csv::num(fit.slope));
  }
  s.report(energy_audit(traj), "energy_audit");
}

void cmd_poincare(Session& s) {
  const auto& c = s.cfg();
  auto f = s.open("poincare.csv");
  f << "nx,constant,lambda_min,iterations\n";
  std::vector<double> constants;
  for (int scale : {1, 2}) {
    const NonlocalSetup ns = nonlocal_setup(c, config_box(c), {c.nx * scale, c.ny * scale});
    const PoincareResult r = poincare_analysis(ns.spec, ns.stencil);
    f << c.nx * scale << ',' << csv::num(r.constant) << ',' << csv::num(r.lambda_min) << ',' << r.iterations
      << '\n';
    constants.push_back(r.constant);
    if (scale == 1) {
      bool ok = r.constant > 0.0 && std::isfinite(r.constant);
      for (int t = 0; t < 20; ++t) {
        const Field u = random_field(ns.spec, c.seed + static_cast<std::uint64_t>(t));
        const double l2 = lp_norm(u, 2.0, Region::Omega);
        ok = ok && poincare_quadratic_form(u, ns.stencil) >= r.lambda_min * l2 * l2 * (1.0 - 1e-8);
      }
      s.check("poincare: quadratic form >= ||u||^2 / C on random fields", ok);
    }
  }
  const double rel = std::abs(constants[1] - constants[0]) / constants[1];
  s.check("poincare: constant stable within 10% under refinement", rel <= 0.1, "relative change " + csv::num(rel));
}

void cmd_contraction(Session& s) {
  const auto& c = s.cfg();
  const NonlocalSetup ns = nonlocal_setup(c, config_box(c), {c.nx, c.ny});
  const NonlocalLaplacian op(ns.spec, ns.stencil);
  auto f = s.open("contraction.csv");
  f << "pair,step,time,distance\n";
  for (int k = 0; k < c.pairs; ++k) {
    const auto seed = c.seed + static_cast<std::uint64_t>(k);
    const Field a = random_smooth_field(ns.spec, seed, 6, c.amplitude);
    Field b = a;
    const Field d = random_smooth_field(ns.spec, seed + 1000, 6, c.perturbation * c.amplitude);
    for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] += d[i];
    const StudyReport rep = contraction_study(a, b, op, c.stepper());
    for (const auto& row : rep.rows)
      f << k << ',' << static_cast<long long>(row[0]) << ',' << csv::num(row[1]) << ',' << csv::num(row[2]) << '\n';
    for (const Check& ch : rep.checks) s.check("contraction pair " + std::to_string(k) + ": " + ch.name, ch.passed, ch.detail);
  }
}

double total_variation(const PgmImage& img) {
  double tv = 0.0;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const double v = img.pixels[static_cast<std::size_t>(y * img.width + x)];
      if (x + 1 < img.width) tv += std::abs(img.pixels[static_cast<std::size_t>(y * img.width + x + 1)] - v);
      if (y + 1 < img.height) tv += std::abs(img.pixels[static_cast<std::size_t>((y + 1) * img.width + x)] - v);
    }
  return tv;
}

void cmd_denoise(Session& s, const std::filesystem::path& dir) {
  const auto& c = s.cfg();
  const PgmImage img = read_pgm_image(c.input);
  double mean = 0.0;
  for (double v : img.pixels) mean += v;
  mean /= static_cast<double>(img.pixels.size());

  Box box;
  box.hi = {static_cast<double>(img.width), static_cast<double>(img.height)};
  const NonlocalSetup ns = nonlocal_setup(c, box, {img.width, img.height});
  std::vector<double> centred(img.pixels);
  for (double& v : centred) v -= mean;
  const Field u0 = zero_extend(centred, ns.spec);
  StepperConfig sc = c.stepper();
  sc.record_every = sc.step_count();
  const Trajectory traj = evolve(u0, ns.stencil, sc);
  const Field& u = traj.states.back();

  PgmImage result = img;
  result.pixels = u.interior_values();
  for (double& v : result.pixels) v += mean;
  write_pgm_image(result, dir / c.output);

  const NonlocalLaplacian op(ns.spec, ns.stencil);
  const PExponent p(c.p);
  const double e_in = dirichlet_energy(u0, op, p);
  const double e_out = dirichlet_energy(u, op, p);
  const double tv_in = total_variation(img);
  const double tv_out = total_variation(result);
  auto f = s.open("denoise.csv");
  f << "quantity,input,output\n"
    << "dirichlet_energy," << csv::num(e_in) << ',' << csv::num(e_out) << '\n'
    << "total_variation," << csv::num(tv_in) << ',' << csv::num(tv_out) << '\n'
    << "mean," << csv::num(mean) << ',' << csv::num(mean) << '\n';
  s.check("denoise: Dirichlet energy decreases", e_out < e_in, csv::num(e_in) + " -> " + csv::num(e_out));
  s.check("denoise: total variation decreases", tv_out < tv_in, csv::num(tv_in) + " -> " + csv::num(tv_out));
}

}  // namespace

int run(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err) {
  try {
    std::error_code ec;
    if (!std::filesystem::is_directory(out_dir, ec))
      throw IoError("output directory '" + out_dir.string() + "' does not exist");
    Session s(cfg, out_dir, out);
    {
      auto m = s.open("manifest.csv");
      m << "command,config_hash,version\n" << command_name(cfg.command) << ',' << config_hash(cfg.source) << ','
        << kVersion << '\n';
    }
    switch (cfg.command) {
      case Command::Evolve: cmd_evolve(s); break;
      case Command::Consistency: cmd_consistency(s); break;
      case Command::Converge: cmd_converge(s); break;
      case Command::Decay: cmd_decay(s); break;
      case Command::Poincare: cmd_poincare(s); break;
      case Command::Contraction: cmd_contraction(s); break;
      case Command::Denoise: cmd_denoise(s, out_dir); break;
    }
    return s.failed() ? 1 : 0;
  } catch (const Error& e) {
    err << "ERROR " << e.code() << ' ' << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "ERROR INTERNAL " << e.what() << '\n';
  }
  return 2;
}

}  // namespace nlpb
