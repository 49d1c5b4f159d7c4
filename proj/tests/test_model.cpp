#include "fixtures.hpp"

#include <doctest.h>

using namespace mhcv;
using fixtures::double_well_1d;

TEST_CASE("density of the 1d double well at -3") {
  const auto model = double_well_1d();
  const double expected = 0.4 * fixtures::normal_pdf(-3.0, -3.0, 1.0) + 0.6 * fixtures::normal_pdf(-3.0, 4.0, 0.5);
  CHECK(model.density(make_point({-3.0})) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(model.density(make_point({-3.0})) == doctest::Approx(0.1595).epsilon(1e-3));
}

TEST_CASE("single component density at its mean") {
  std::vector<MixtureComponent> c(1);
  c[0].weight = 1.0;
  c[0].mean = make_point({1.0, -2.0});
  c[0].covariance.resize(2, 2);
  c[0].covariance << 2.0, 0.5, 0.5, 1.0;
  const TargetModel model(c);
  const double det = 2.0 * 1.0 - 0.25;
  CHECK(model.density(c[0].mean) == doctest::Approx(1.0 / (2.0 * std::numbers::pi * std::sqrt(det))).epsilon(1e-14));
}

TEST_CASE("symmetric mixture is even") {
  const auto model = TargetModel::mixture_1d({0.5, 0.5}, {-2.0, 2.0}, {0.7, 0.7});
  for (double x : {0.0, 0.3, 1.7, 5.0, 12.0})
    CHECK(model.density(make_point({x})) == doctest::Approx(model.density(make_point({-x}))).epsilon(1e-14));
}

TEST_CASE("density is positive far in the tails via log space") {
  const auto model = double_well_1d();
  CHECK(std::isfinite(model.log_density(make_point({200.0}))));
  CHECK(model.log_density(make_point({200.0})) < -1e4);
  CHECK_THROWS_AS(model.density(make_point({std::nan("")})), InputError);
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(TargetModel::mixture_1d({0.5, 0.6}, {0.0, 1.0}, {1.0, 1.0}), InputError);
  CHECK_THROWS_AS(TargetModel::mixture_1d({1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}), InputError);
  CHECK_THROWS_AS(TargetModel::mixture_1d({1.0}, {0.0}, {0.0}), InputError);
  std::vector<MixtureComponent> c(1);
  c[0].mean = make_point({0.0, 0.0});
  c[0].covariance.resize(2, 2);
  c[0].covariance << 1.0, 0.2, 0.3, 1.0;
  CHECK_THROWS_AS(TargetModel{c}, InputError);
  c[0].covariance << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(TargetModel{c}, InputError);
}

TEST_CASE("mixture integrates to one") {
  const auto m1 = double_well_1d();
  const double mass = fixtures::integrate([&](double x) { return m1.density(make_point({x})); }, -11.0, 8.0);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));

  const auto m2 = fixtures::double_well_2d();
  const double mass2 = fixtures::integrate(
      [&](double x) {
        return fixtures::integrate([&](double y) { return m2.density(make_point({x, y})); }, -8.0, 8.0);
      },
      -11.0, 8.0);
  CHECK(mass2 == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("sampling moments and component frequencies") {
  const auto model = double_well_1d();
  Rng rng(12345);
  const int n = 1'000'000;
  double sum = 0.0, sum2 = 0.0;
  int right = 0;
  for (int i = 0; i < n; ++i) {
    const double x = model.sample(rng)(0);
    sum += x;
    sum2 += x * x;
    if (x > 0.5) ++right;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  CHECK(std::abs(mean - 1.2) < 3.0 * se);
  // the components are separated enough that x > 0.5 identifies the right one
  const double freq = static_cast<double>(right) / n;
  CHECK(std::abs(freq - 0.6) < 3.0 * std::sqrt(0.24 / n) + 1e-4);
}

TEST_CASE("standard normal sample mean") {
  std::vector<MixtureComponent> c(1);
  c[0].mean = Point::Zero(3);
  c[0].covariance = SquareMatrix::Identity(3, 3);
  const TargetModel model(c);
  Rng rng(7);
  Point acc = Point::Zero(3);
  const int n = 100000;
  for (int i = 0; i < n; ++i) acc += model.sample(rng);
  CHECK((acc / n).cwiseAbs().maxCoeff() < 4.0 / std::sqrt(n));
}

TEST_CASE("closed-form moments") {
  const auto model = double_well_1d();
  CHECK(model.coordinate_moment(0, 1) == doctest::Approx(1.2));
  const double m3 = 0.4 * (-27.0 + 3.0 * -3.0 * 1.0) + 0.6 * (64.0 + 3.0 * 4.0 * 0.25);
  CHECK(model.coordinate_moment(0, 3) == doctest::Approx(m3).epsilon(1e-15));
  CHECK(m3 == doctest::Approx(25.8));
  const double quad =
      fixtures::integrate([&](double x) { return x * x * x * model.density(make_point({x})); }, -14.0, 10.0);
  CHECK(model.coordinate_moment(0, 3) == doctest::Approx(quad).epsilon(1e-9));
  CHECK(ForceFunction::cube(model).exact_mean.value() == doctest::Approx(25.8));
  CHECK(ForceFunction::coordinate(fixtures::double_well_2d(), 0).exact_mean.value() == doctest::Approx(-0.2));
  const auto poly = ForceFunction::polynomial(model, 0, {1.0, -2.0, 0.5});
  CHECK(poly(make_point({2.0})) == doctest::Approx(1.0 - 4.0 + 2.0));
}

TEST_CASE("acceptance probability") {
  const auto model = TargetModel::mixture_1d({1.0}, {0.0}, {1.0});
  const auto prop = RandomWalkProposal::isotropic(1, 1.0);
  CHECK(acceptance(model, prop, make_point({1.0}), make_point({-1.0})) == 1.0);
  CHECK(acceptance(model, prop, make_point({1.0}), make_point({0.5})) == 1.0);
  // pi(y) / pi(x) = 0.5
  const double x = 0.5;
  const double y = std::sqrt(x * x + 2.0 * std::log(2.0));
  CHECK(acceptance(model, prop, make_point({x}), make_point({y})) == doctest::Approx(0.5).epsilon(1e-14));
  const double ninf = -std::numeric_limits<double>::infinity();
  CHECK(acceptance_from_logs(ninf, 0.0, -3.0, 0.0) == 1.0);
  CHECK(acceptance_from_logs(0.0, ninf, -3.0, 0.0) == 1.0);
}

TEST_CASE("detailed balance on random pairs") {
  const auto model = double_well_1d();
  const auto prop = RandomWalkProposal::isotropic(1, 1.0);
  Rng rng(99);
  std::uniform_real_distribution<double> u(-12.0, 12.0);
  double worst = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const Point x = make_point({u(rng)});
    const Point y = make_point({u(rng)});
    const double a = std::log(acceptance(model, prop, x, y)) + model.log_density(x) + prop.log_density(x, y);
    const double b = std::log(acceptance(model, prop, y, x)) + model.log_density(y) + prop.log_density(y, x);
    // relative error of the two fluxes
    worst = std::max(worst, std::abs(std::expm1(a - b)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("proposal symmetry and translation invariance") {
  SquareMatrix cov(2, 2);
  cov << 1.0, 0.3, 0.3, 0.5;
  const RandomWalkProposal prop(cov);
  const Point x = make_point({0.2, -1.0});
  const Point y = make_point({1.5, 0.4});
  const Point s = make_point({10.0, -7.0});
  CHECK(prop.log_density(x, y) == doctest::Approx(prop.log_density(y, x)).epsilon(1e-15));
  CHECK(prop.log_density(x, y) == doctest::Approx(prop.log_density(x + s, y + s)).epsilon(1e-13));
  CHECK(prop.density(x, x) > prop.density(x, y));
}

TEST_CASE("drift function") {
  const auto model = double_well_1d();
  const DriftFunction v(model, 0.25);
  for (const auto& m : model.modes()) CHECK(v(m) >= 1.0);
  const Point top = model.density(model.modes()[0]) > model.density(model.modes()[1]) ? model.modes()[0]
                                                                                      : model.modes()[1];
  CHECK(v(top) == doctest::Approx(1.0).epsilon(1e-12));
  for (double x = -10.0; x <= 10.0; x += 1e-3) CHECK_MESSAGE(v(make_point({x})) >= 1.0, x);
  // the mode search agrees with a dense grid
  double grid_sup = 0.0;
  for (double x = -10.0; x <= 10.0; x += 1e-4) grid_sup = std::max(grid_sup, model.density(make_point({x})));
  CHECK(std::exp(model.log_sup_density()) >= grid_sup * (1.0 - 1e-12));
  CHECK(std::exp(model.log_sup_density()) == doctest::Approx(grid_sup).epsilon(1e-7));

  // pi(x) = sup pi / 16 gives V_{1/4} = 2
  const double target = model.log_sup_density() - std::log(16.0);
  double lo = 4.0, hi = 9.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (model.log_density(make_point({mid})) > target ? lo : hi) = mid;
  }
  CHECK(v(make_point({lo})) == doctest::Approx(2.0).epsilon(1e-9));

  CHECK_THROWS_AS(DriftFunction(model, 0.5), InputError);
  CHECK_THROWS_AS(DriftFunction(model, 0.0), InputError);
}
