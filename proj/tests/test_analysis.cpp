#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "nlpb/analysis.hpp"
#include "nlpb/errors.hpp"
#include "nlpb/localref.hpp"
#include "oracles.hpp"

using namespace nlpb;

namespace {

Trajectory planted(const std::function<double(double)>& l2, int steps, double T) {
  Trajectory tr;
  tr.h = T / steps;
  for (int j = 0; j <= steps; ++j) {
    tr.times.push_back(j * tr.h);
    tr.l2_sq.push_back(l2(j * tr.h));
  }
  return tr;
}

StepperConfig config(double p, double h, double T) {
  StepperConfig c;
  c.p = PExponent(p);
  c.h = h;
  c.T = T;
  return c;
}

}  // namespace

TEST_CASE("fitted order recovers a planted power law") {
  CHECK(fitted_order({0.4, 0.2, 0.1}, {3.2, 0.8, 0.2}) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fitted_order({0.4, 0.2, 0.1}, {1.0, 0.5, 0.25}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::isnan(fitted_order({0.4}, {1.0})));
}

TEST_CASE("consistency of the sine test function") {
  const auto rep = consistency_study(sine_test_function(), Kernel(Profile::Tent), {0.2, 0.1, 0.05},
                                     GridSetup{1, Box{}, {512, 1}});
  REQUIRE(rep.rows.size() == 3);
  for (std::size_t k = 1; k < 3; ++k) CHECK(rep.rows[k][1] < rep.rows[k - 1][1]);
  const double order = rep.summary_value("fitted_order");
  MESSAGE("fitted order " << order);
  CHECK(order >= 1.0);
  CHECK(order == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("consistency of quadratic and constant functions") {
  for (const auto& phi : {quadratic_test_function(), constant_test_function(2.5)}) {
    const auto rep = consistency_study(phi, Kernel(Profile::Tent), {0.2, 0.1, 0.05}, GridSetup{1, Box{}, {512, 1}});
    for (const auto& row : rep.rows) CHECK(row[2] <= 5.0);
  }
  const auto rep = consistency_study(constant_test_function(), Kernel(Profile::Quartic), {0.3}, GridSetup{1, Box{}, {64, 1}});
  CHECK(rep.rows[0][1] == 0.0);
  CHECK_THROWS_AS(consistency_study(sine_test_function(), Kernel(Profile::Tent), {0.1, 0.2}, GridSetup{}), DomainError);
  CHECK_THROWS_AS(consistency_study(sine_test_function(), Kernel(Profile::Tent), {0.2, 0.01}, GridSetup{1, Box{}, {64, 1}}),
                  DomainError);
}

TEST_CASE("decay fit recovers planted constants") {
  const DecayFit e = decay_fit(planted([](double t) { return std::exp(-3.0 * t); }, 100, 2.0), 2.0);
  CHECK(e.model == DecayModel::Exponential);
  CHECK(std::abs(e.c1 - 3.0) <= 1e-6);
  CHECK(e.r_squared > 0.999999);
  CHECK(e.t_lo == doctest::Approx(0.5));
  CHECK(e.points == 76);

  const DecayFit q = decay_fit(planted([](double t) { return std::pow(2 * t + 1, -2.0); }, 100, 2.0), 3.0);
  CHECK(q.model == DecayModel::Polynomial);
  CHECK(std::abs(q.rate - 1.0) <= 1e-6);
  CHECK(std::abs(q.c2 - 2.0) <= 1e-6);
  CHECK(std::abs(q.c3 - 1.0) <= 1e-6);
  CHECK(q.r_squared > 0.999999);

  // p = 4: ||u||² = (C₂t + C₃)^{-1}
  const DecayFit r = decay_fit(planted([](double t) { return 1.0 / (0.5 * t + 2.0); }, 40, 1.0), 4.0);
  CHECK(std::abs(r.c2 - 0.5) <= 1e-6);
  CHECK(std::abs(r.rate - 0.5) <= 1e-6);
}

TEST_CASE("decay fit preconditions") {
  CHECK_THROWS_AS(decay_fit(planted([](double) { return 1.0; }, 10, 1.0), 2.0), DomainError);
  CHECK_THROWS_AS(decay_fit(planted([](double) { return 1.0; }, 50, 1.0), 1.5), DomainError);
  CHECK_THROWS_AS(decay_fit(planted([](double t) { return std::exp(-1000 * t); }, 50, 1.0), 2.0), DecayFitDegenerate);
}

TEST_CASE("decay of a real p = 2 run") {
  const Kernel k(Profile::Tent);
  const DomainSpec s = make_domain(1, Box{}, 64, k, 0.2);
  const Stencil st = discretize(rescale(k, 0.2), s);
  const Trajectory tr = evolve(random_smooth_field(s, 3), st, config(2.0, 0.005, 0.5));
  const DecayFit f = decay_fit(tr, 2.0);
  CHECK(f.slope < 0.0);
  CHECK(f.r_squared >= 0.99);
}

TEST_CASE("poincare constant matches a dense eigensolve") {
  for (int dim : {1, 2}) {
    const int nx = dim == 1 ? 32 : 12;
    const Kernel k(Profile::Tent, dim);
    const DomainSpec s = make_domain(dim, Box{}, nx, k, 0.25);
    const Stencil st = discretize(rescale(k, 0.25), s);
    const oracle::Mat K = oracle::poincare_matrix(oracle::nonlocal_matrix(s, oracle::tent, 0.25), s);
    const Eigen::SelfAdjointEigenSolver<oracle::Mat> eig(K);
    const double ref = 1.0 / eig.eigenvalues()(0);
    const PoincareResult res = poincare_analysis(s, st);
    CAPTURE(dim);
    CHECK(std::abs(res.constant - ref) <= 1e-6 * ref);
    CHECK(poincare_constant(s, st) == res.constant);
    CHECK(res.constant > 0.0);
    CHECK(std::isfinite(res.constant));

    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const Field u = zero_extend(oracle::uniform(s.interior_count(), seed), s);
      const double n = lp_norm(u, 2.0, Region::Omega);
      const oracle::Vec v = oracle::interior(u);
      CHECK(poincare_quadratic_form(u, st) == doctest::Approx(s.cell_volume() * v.dot(K * v)).epsilon(1e-12));
      CHECK(poincare_quadratic_form(u, st) >= n * n / res.constant * (1 - 1e-8));
    }
  }
  const Kernel k(Profile::Tent);
  const DomainSpec s = make_domain(1, Box{}, 32, k, 0.25);
  CHECK_THROWS_AS(poincare_constant(s, discretize(rescale(k, 0.25), s), 3.0), DomainError);
}

TEST_CASE("poincare constant is stable under refinement") {
  const Kernel k(Profile::Tent);
  std::vector<double> c;
  for (int nx : {64, 128}) {
    const DomainSpec s = make_domain(1, Box{}, nx, k, 0.2);
    c.push_back(poincare_constant(s, discretize(rescale(k, 0.2), s)));
  }
  CHECK(std::abs(c[1] - c[0]) <= 0.1 * c[0]);
}

TEST_CASE("reverse bound holds for mean-zero fields") {
  const Kernel k(Profile::Tent);
  const DomainSpec s = make_domain(1, Box{}, 64, k, 0.2);
  const Stencil st = discretize(rescale(k, 0.2), s);
  const double C = reverse_bound_constant(poincare_constant(s, st));
  CHECK(C == doctest::Approx(4.0 * std::pow(poincare_constant(s, st), 2)));
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto v = oracle::uniform(s.interior_count(), seed);
    double mean = 0.0;
    for (double x : v) mean += x / static_cast<double>(v.size());
    for (double& x : v) x -= mean;
    const Field u = zero_extend(v, s);
    const double a = lp_norm(u, 2.0, Region::Omega);
    const double b = lp_norm(nonlocal_laplacian(u, st), 2.0, Region::Extended);
    CHECK(a * a <= C * b * b * 1.1);
  }
}

TEST_CASE("initial data helpers") {
  const DomainSpec s = DomainSpec::uniform(1, Box{}, {100, 1}, 3);
  const Field b = sample_interior(bump_profile(Box{}, 1), s);
  CHECK(b.max_abs(Region::Exterior) == 0.0);
  for (std::size_t k = 0; k < 100; ++k) {
    const double x = s.coord(s.interior_node(k))[0];
    if (x < 0.1 || x > 0.9) CHECK(b[s.interior_node(k)] == 0.0);
  }
  CHECK(b.max_abs(Region::Omega) == doctest::Approx(1.0).epsilon(1e-3));

  const Field r1 = random_smooth_field(s, 5);
  const Field r2 = random_smooth_field(s, 5);
  const Field r3 = random_smooth_field(s, 6);
  CHECK(std::equal(r1.values().begin(), r1.values().end(), r2.values().begin()));
  CHECK_FALSE(std::equal(r1.values().begin(), r1.values().end(), r3.values().begin()));
  CHECK(r1.max_abs(Region::Exterior) == 0.0);
  const Field rf = random_field(s, 5);
  CHECK(rf.max_abs(Region::Omega) <= 1.0);
  CHECK(rf.max_abs(Region::Exterior) == 0.0);
}

TEST_CASE("nonlocal-to-local with zero data and one epsilon") {
  const auto rep = nonlocal_to_local_study([](std::array<double, 2>) { return 0.0; }, Kernel(Profile::Tent), {0.2},
                                           GridSetup{1, Box{}, {32, 1}}, config(2.0, 1e-3, 5e-3));
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0][1] == 0.0);
  CHECK(rep.checks.empty());
}

TEST_CASE("nonlocal-to-local errors shrink with epsilon") {
  const auto rep = nonlocal_to_local_study(bump_profile(Box{}, 1), Kernel(Profile::Tent), {0.4, 0.2, 0.1},
                                           GridSetup{1, Box{}, {128, 1}}, config(2.0, 2e-4, 4e-3));
  MESSAGE("errors " << rep.rows[0][1] << " " << rep.rows[1][1] << " " << rep.rows[2][1]);
  CHECK(rep.all_passed());
}

TEST_CASE("contraction") {
  const Kernel k(Profile::Tent);
  const DomainSpec s = make_domain(1, Box{}, 64, k, 0.2);
  const NonlocalLaplacian op(s, discretize(rescale(k, 0.2), s));
  const Field a = random_smooth_field(s, 1);
  const auto same = contraction_study(a, a, op, config(1.5, 0.005, 0.1));
  for (const auto& row : same.rows) CHECK(row[2] == 0.0);
  CHECK(same.all_passed());

  for (double p : {1.5, 2.0, 3.0}) {
    const auto rep = contraction_study(a, random_smooth_field(s, 2), op, config(p, 0.005, 0.25));
    CAPTURE(p);
    CHECK(rep.rows.size() == 51);
    CHECK(rep.all_passed());
  }
}

TEST_CASE("energy audit") {
  Trajectory zero;
  zero.h = 0.1;
  for (int j = 0; j <= 5; ++j) {
    zero.times.push_back(0.1 * j);
    zero.l2_sq.push_back(0.0);
    zero.energies.push_back(0.0);
    zero.increment_sq.push_back(0.0);
    zero.residuals.push_back(0.0);
  }
  const auto z = energy_audit(zero);
  for (const auto& row : z.rows)
    for (std::size_t c = 1; c < row.size(); ++c) CHECK(row[c] == 0.0);
  CHECK(z.all_passed());

  const Kernel k(Profile::Tent);
  const DomainSpec s = make_domain(1, Box{}, 64, k, 0.2);
  const NonlocalLaplacian op(s, discretize(rescale(k, 0.2), s));
  for (double p : {1.5, 2.0, 3.0}) {
    const auto rep = energy_audit(evolve(random_smooth_field(s, 4), op, config(p, 0.005, 0.2)));
    CAPTURE(p);
    CHECK(rep.all_passed());
    CHECK(rep.summary_value("worst_step_slack") >= -rep.summary_value("allowance"));
  }
}

TEST_CASE("energy audit of forward Euler") {
  // For p = 2, u' = u - hKu gives E(u') + ||u' - u||²/h - E(u) = (h²/2)·uᵀK³u·dx
  // exactly, i.e. a defect of hλ/(2 - hλ) of each mode's energy.
  const Kernel k(Profile::Tent);
  const DomainSpec s = make_domain(1, Box{}, 64, k, 0.2);
  const NonlocalLaplacian op(s, discretize(rescale(k, 0.2), s));
  const oracle::Mat AP = oracle::nonlocal_matrix(s, oracle::tent, 0.2) * oracle::embedding(s);
  const oracle::Mat K = AP.transpose() * AP;
  const Field u0 = sample_interior(bump_profile(Box{}, 1), s);

  for (double frac : {0.9, 0.1}) {
    StepperConfig c = config(2.0, frac * explicit_step_bound(op), 1.0);
    c.T = 200 * c.h;
    c.mode = StepMode::Explicit;
    const Trajectory tr = evolve(u0, op, c);
    const auto rep = energy_audit(tr, 1e-2);
    double defect = 0.0;
    oracle::Vec u = oracle::interior(u0);
    for (int j = 0; j < 200; ++j) {
      const oracle::Vec ku = K * u;
      defect += 0.5 * c.h * c.h * s.dx * ku.dot(K * ku);
      u -= c.h * ku;
    }
    const double slack = rep.summary_value("cumulative_slack");
    CAPTURE(frac);
    MESSAGE("explicit cumulative slack / E0 = " << slack / tr.energies[0]);
    CHECK(slack == doctest::Approx(-defect).epsilon(1e-6));
    if (frac < 0.5) {
      CHECK(slack >= -1e-2 * tr.energies[0]);
      CHECK(rep.all_passed());
    }
  }
}

TEST_CASE("report csv") {
  StudyReport r;
  r.columns = {"a", "b"};
  r.rows = {{1.0, 0.1}};
  r.metadata = {{"kernel", "tent"}};
  r.summary = {{"order", 2.0}};
  std::ostringstream out;
  r.write_csv(out);
  CHECK(out.str() == "a,b\n1,0.10000000000000001\n");
  std::ostringstream meta;
  r.write_metadata_csv(meta);
  CHECK(meta.str() == "key,value\nkernel,tent\norder,2\n");
  CHECK(std::isnan(r.summary_value("missing")));
}
