#include "fixtures.hpp"

#include "mhcv/log.hpp"

#include <doctest.h>

#include <sstream>

using namespace mhcv;
using fixtures::double_well_1d;

namespace {

const auto kProp = RandomWalkProposal::isotropic(1, 1.0);

}  // namespace

TEST_CASE("kernel rows are probability vectors") {
  const auto model = double_well_1d();
  const auto a = build_1d(-8.0, 7.0, 30);
  Rng rng(1);
  for (double x : {-8.0, -7.75, -3.0, 0.2, 4.0, 6.9, 12.0, -30.0}) {
    const Vector row = estimate_kernel_row(model, kProp, make_point({x}), a, 50, 50, rng);
    REQUIRE(row.size() == 31);
    CHECK(row.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(row.minCoeff() >= 0.0);
  }
}

TEST_CASE("undersampled rows are clamped with a warning") {
  // a narrow proposal next to a cell boundary: one uniform draw in the
  // neighbouring unit cell often lands near x and overshoots
  const auto model = TargetModel::mixture_1d({1.0}, {0.0}, {1.0});
  const auto prop = RandomWalkProposal::isotropic(1, 0.01);
  const auto a = build_1d(-3.0, 3.0, 6);
  std::vector<std::string> messages;
  set_warning_sink([&](std::string_view m) { messages.emplace_back(m); });
  Rng rng(3);
  std::size_t clamped_total = 0;
  for (int i = 0; i < 200; ++i) {
    bool clamped = false;
    const Vector row = estimate_kernel_row(model, prop, make_point({0.001}), a, 1, 1, rng, &clamped);
    CHECK(row.minCoeff() >= 0.0);
    CHECK(row.sum() == doctest::Approx(1.0).epsilon(1e-12));
    if (clamped) CHECK(row(4) == 0.0);
    clamped_total += clamped ? 1 : 0;
  }
  set_warning_sink(nullptr);
  CHECK(clamped_total > 0);
  CHECK(messages.size() == clamped_total);
}

TEST_CASE("exact kernel rows by quadrature") {
  const auto model = double_well_1d();
  const auto a = build_1d(-8.0, 7.0, 30);
  const Matrix p = exact_transition_matrix_1d(model, kProp, a);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    CHECK(p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(p(i, i) > 0.0);
  }
  // independent check of one entry against a direct integral
  const double x = a.representative(5)(0);
  const auto& cell = a.cell(9);
  const double direct = fixtures::integrate(
      [&](double y) {
        return acceptance(model, kProp, make_point({x}), make_point({y})) * kProp.density(make_point({x}), make_point({y}));
      },
      cell.lower(0), cell.upper(0));
  CHECK(p(5, 9) == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("kernel estimate is unbiased against quadrature") {
  const auto model = double_well_1d();
  const auto a = build_1d(-8.0, 7.0, 30);
  const Matrix exact = exact_transition_matrix_1d(model, kProp, a);
  const std::size_t i = 14;
  const int seeds = 100;
  Vector sum = Vector::Zero(31), sum2 = Vector::Zero(31);
  for (int s = 0; s < seeds; ++s) {
    Rng rng(derive_seed(600, {static_cast<std::uint64_t>(s)}));
    const Vector row = estimate_kernel_row(model, kProp, a.representative(i), a, 1000, 1000, rng);
    sum += row;
    sum2 += row.cwiseProduct(row);
  }
  const Vector mean = sum / seeds;
  for (Eigen::Index j = 0; j < 31; ++j) {
    const double var = std::max(0.0, sum2(j) / seeds - mean(j) * mean(j)) * seeds / (seeds - 1);
    const double se = std::sqrt(var / seeds);
    const double e = exact(static_cast<Eigen::Index>(i), j);
    CHECK_MESSAGE(std::abs(mean(j) - e) <= 3.0 * (se > 0.0 ? se : std::sqrt(e / (seeds * 1000.0))), j);
  }
}

TEST_CASE("a cell in the far tail gets a negligible entry") {
  const auto model = double_well_1d();
  const auto a = build_1d(-20.0, 0.0, 20);  // cell 1 is (-20, -19]
  const Matrix exact = exact_transition_matrix_1d(model, kProp, a);
  const double x = a.representative(2)(0);
  const double bound = a.volume(1) * kProp.density(make_point({x}), make_point({-19.0})) *
                       model.density(make_point({-19.0})) / model.density(make_point({x}));
  CHECK(exact(2, 1) <= bound);
  CHECK(exact(2, 1) < 1e-3);
  Rng rng(5);
  const Vector row = estimate_kernel_row(model, kProp, a.representative(20), a, 1000, 1000, rng);
  CHECK(row(1) < 1e-20);
}

TEST_CASE("transition matrix estimate") {
  const auto model = double_well_1d();
  const auto a = build_1d(-8.0, 7.0, 30);
  const auto chain = estimate_transition_matrix(model, kProp, a, 1000, 1000, 11);
  CHECK(chain.transition.rows() == 31);
  for (Eigen::Index i = 0; i < 31; ++i) {
    CHECK(chain.transition.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(chain.transition.row(i).minCoeff() >= 0.0);
    CHECK(chain.transition(i, i) > 0.0);
  }
  CHECK(chain.stationary.sum() == doctest::Approx(1.0).epsilon(1e-12));
  const Vector drift = chain.stationary.transpose() * chain.transition - chain.stationary.transpose();
  CHECK(drift.cwiseAbs().maxCoeff() < 1e-10);

  const auto again = estimate_transition_matrix(model, kProp, a, 1000, 1000, 11);
  CHECK(again.transition == chain.transition);
}

TEST_CASE("matrix entries fluctuate at the Monte Carlo scale") {
  const auto model = double_well_1d();
  const auto a = build_1d(-8.0, 7.0, 10);
  const Matrix exact = exact_transition_matrix_1d(model, kProp, a);
  const int seeds = 50;
  Matrix sum = Matrix::Zero(11, 11), sum2 = Matrix::Zero(11, 11);
  for (int s = 0; s < seeds; ++s) {
    const auto chain = estimate_transition_matrix(model, kProp, a, 1000, 1000, 900 + s);
    sum += chain.transition;
    sum2 += chain.transition.cwiseProduct(chain.transition);
  }
  const Matrix mean = sum / seeds;
  int outliers = 0;
  for (Eigen::Index i = 0; i < 11; ++i)
    for (Eigen::Index j = 0; j < 11; ++j) {
      double se = std::sqrt(std::max(0.0, sum2(i, j) / seeds - mean(i, j) * mean(i, j)) / seeds);
      // no hits at all: fall back to the Bernoulli variance bound under the exact value
      if (se == 0.0) se = std::sqrt(exact(i, j) / (seeds * 1000.0));
      if (std::abs(mean(i, j) - exact(i, j)) > 3.0 * se) ++outliers;
    }
  // 121 entries at 3 SE: a handful of exceedances is expected by chance
  CHECK(outliers <= 3);
}

TEST_CASE("one bounded cell gives a 2x2 chain") {
  const auto model = double_well_1d();
  const auto a = build_1d(-2.0, 3.0, 1);
  const auto chain = estimate_transition_matrix(model, kProp, a, 1000, 1000, 2);
  REQUIRE(chain.transition.rows() == 2);
  CHECK(chain.transition.row(0).sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(chain.transition.row(1).sum() == doctest::Approx(1.0).epsilon(1e-12));
  // a box holding all the mass: no proposal from a_1 reaches J_0, so the
  // estimate is reducible and rejected
  CHECK_THROWS_WITH_AS(estimate_transition_matrix(model, kProp, build_1d(-20.0, 20.0, 1), 1000, 1000, 2),
                       doctest::Contains("reducible"), NumericalError);
}

TEST_CASE("stationary distribution examples") {
  Matrix ds(3, 3);
  ds << 0.2, 0.3, 0.5, 0.5, 0.2, 0.3, 0.3, 0.5, 0.2;
  const Vector u = stationary_distribution(ds);
  for (int i = 0; i < 3; ++i) CHECK(u(i) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  Matrix two(2, 2);
  two << 0.8, 0.2, 0.3, 0.7;
  const Vector pi = stationary_distribution(two);
  CHECK(pi(0) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(pi(1) == doctest::Approx(0.4).epsilon(1e-14));

  Rng rng(10);
  for (int n : {2, 5, 17, 40}) {
    const Matrix p = fixtures::random_stochastic(n, rng);
    CHECK((stationary_distribution(p) - fixtures::power_stationary(p)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("reducible chains are rejected") {
  Matrix p(3, 3);
  p << 0.5, 0.5, 0.0, 0.5, 0.5, 0.0, 0.0, 0.0, 1.0;
  CHECK_THROWS_AS(require_irreducible(p), NumericalError);
  CHECK_THROWS_AS(stationary_distribution(p), NumericalError);
  CHECK_THROWS_AS(solve_poisson(p, Vector::Ones(3)), NumericalError);
}

TEST_CASE("Poisson examples") {
  Rng rng(12);
  const Matrix p = fixtures::random_stochastic(6, rng);
  const PoissonSolution flat = solve_poisson(p, Vector::Constant(6, 3.5));
  CHECK(flat.values.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(flat.coarse_mean == doctest::Approx(3.5));

  Matrix half(2, 2);
  half << 0.5, 0.5, 0.5, 0.5;
  Vector f(2);
  f << 1.0, 0.0;
  const auto sol = solve_poisson(half, f);
  CHECK(sol.values(0) == 0.0);
  CHECK(sol.values(1) == doctest::Approx(-1.0).epsilon(1e-14));
  const Vector lhs = sol.values - half * sol.values;
  CHECK(lhs(0) == doctest::Approx(0.5));
  CHECK(lhs(1) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(solve_poisson(half, Vector::Ones(3)), InputError);
}

TEST_CASE("Poisson solve matches the truncated series") {
  Rng rng(13);
  const Matrix p = fixtures::random_stochastic(5, rng);
  Vector f(5);
  std::normal_distribution<double> n;
  for (int i = 0; i < 5; ++i) f(i) = n(rng);
  const auto sol = solve_poisson(p, f);
  const Vector pi = fixtures::power_stationary(p);
  CHECK(poisson_residual(p, f, sol.values, sol.coarse_mean) <= 1e-10);
  CHECK(fixtures::gauge_distance(sol.values, fixtures::series_poisson(p, f, pi, 10000)) <= 1e-6);
  CHECK(sol.coarse_mean == doctest::Approx(pi.dot(f)).epsilon(1e-12));
}

TEST_CASE("gauge freedom of the pin") {
  Rng rng(14);
  const Matrix p = fixtures::random_stochastic(12, rng);
  Vector f(12);
  std::normal_distribution<double> n;
  for (int i = 0; i < 12; ++i) f(i) = n(rng);
  const auto base = solve_poisson(p, f, 0);
  for (std::size_t pin = 1; pin < 12; ++pin) {
    const auto other = solve_poisson(p, f, pin);
    CHECK(other.values(static_cast<Eigen::Index>(pin)) == 0.0);
    CHECK(fixtures::gauge_distance(base.values, other.values) <= 1e-10);
  }
  // pi(p g - g) = 0
  const Vector pi = stationary_distribution(p);
  CHECK(std::abs(pi.dot(p * base.values - base.values)) <= 1e-10);
}

TEST_CASE("control variate is piecewise constant") {
  const auto a = build_1d(-8.0, 7.0, 30);
  Vector values(31);
  for (int j = 0; j < 31; ++j) values(j) = std::sin(j) * 10.0;
  PoissonSolution sol{values, 0.0, 0};
  const auto cv = build_control_variate(a, sol);
  for (std::size_t j = 0; j <= 30; ++j) CHECK(cv(a.representative(j)) == values(static_cast<Eigen::Index>(j)));
  Rng rng(15);
  std::uniform_real_distribution<double> u(-12.0, 12.0);
  PoissonSolution shifted{values.array() + 2.5, 0.0, 0};
  const auto cv2 = build_control_variate(a, shifted);
  for (int i = 0; i < 10000; ++i) {
    const Point x = make_point({u(rng)});
    const Point y = make_point({u(rng)});
    CHECK(cv(x) == cv(a.representative_of(x)));
    CHECK(cv2(x) - cv(x) == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(cv2(x) - cv2(y) == doctest::Approx(cv(x) - cv(y)).epsilon(1e-12));
  }
  const auto inner = build_control_variate(a, sol, 1, 10, false);
  CHECK(inner(make_point({-100.0})) == 0.0);
  CHECK(inner(a.representative(3)) == values(3));
  CHECK_THROWS_AS(build_control_variate(a, PoissonSolution{Vector::Zero(5), 0.0, 0}), InputError);
}

TEST_CASE("matrix and vector text output") {
  Matrix p(2, 2);
  p << 0.25, 0.75, 0.5, 0.5;
  std::ostringstream m;
  write_matrix(m, p);
  CHECK(m.str() == "2 2\n0.25 0.75\n0.5 0.5\n");
  std::ostringstream v;
  write_vector(v, Vector::Constant(2, 0.1));
  CHECK(v.str() == "2\n0.1 0.1\n");
}
