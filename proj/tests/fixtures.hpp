#pragma once

#include "mhcv/estimator.hpp"
#include "mhcv/random.hpp"
#include "mhcv/scheme.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

namespace fixtures {

using namespace mhcv;

inline TargetModel double_well_1d() { return TargetModel::mixture_1d({0.4, 0.6}, {-3.0, 4.0}, {1.0, 0.5}); }

inline TargetModel double_well_2d() {
  std::vector<MixtureComponent> c(2);
  c[0].weight = 0.6;
  c[0].mean = make_point({-3.0, 0.0});
  c[0].covariance = SquareMatrix::Identity(2, 2);
  c[1].weight = 0.4;
  c[1].mean = make_point({4.0, 0.0});
  c[1].covariance = SquareMatrix::Identity(2, 2) * 0.25;
  return TargetModel(std::move(c));
}

inline Allotment boxes_2d() {
  const int counts[2] = {3, 2};
  return build_boxes(make_point({-7.0, -4.0}), make_point({6.0, 4.0}), counts);
}

inline double normal_pdf(double x, double mu, double sd) {
  const double z = (x - mu) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

template <typename F>
double integrate(F f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

// Power iteration from the uniform vector.
inline Vector power_stationary(const Matrix& p, int iterations = 200000) {
  Vector pi = Vector::Constant(p.rows(), 1.0 / static_cast<double>(p.rows()));
  for (int i = 0; i < iterations; ++i) {
    Vector next = p.transpose() * pi;
    next /= next.sum();
    if ((next - pi).cwiseAbs().maxCoeff() < 1e-16) return next;
    pi = next;
  }
  return pi;
}

// sum_{k=0}^{K} (p^k f - pi(f)).
inline Vector series_poisson(const Matrix& p, const Vector& f, const Vector& pi, int terms) {
  const double mean = pi.dot(f);
  Vector term = f;
  Vector acc = Vector::Zero(f.size());
  for (int k = 0; k <= terms; ++k) {
    acc.array() += term.array() - mean;
    term = p * term;
  }
  return acc;
}

inline Matrix random_stochastic(int n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Matrix p(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p(i, j) = u(rng);
  for (int i = 0; i < n; ++i) p.row(i) /= p.row(i).sum();
  return p;
}

// sup |(a - a[0]) - (b - b[0])|
inline double gauge_distance(const Vector& a, const Vector& b) {
  return ((a.array() - a(0)) - (b.array() - b(0))).abs().maxCoeff();
}

}  // namespace fixtures
