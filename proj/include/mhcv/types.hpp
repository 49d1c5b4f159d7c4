#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace mhcv {

/// Largest supported state-space dimension. Points live on the stack so the
/// per-step loops of the sampler and the kernel estimator never allocate.
inline constexpr int kMaxDim = 8;

using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using SquareMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

using Rng = std::mt19937_64;

/// Invalid arguments, malformed configs, violated preconditions.
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Singular systems, reducible transition estimates, failed residual checks.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline Point make_point(std::initializer_list<double> coords) {
  Point p(static_cast<Eigen::Index>(coords.size()));
  Eigen::Index i = 0;
  for (double c : coords) p(i++) = c;
  return p;
}

inline bool is_finite(const Point& x) { return x.allFinite(); }

}  // namespace mhcv
