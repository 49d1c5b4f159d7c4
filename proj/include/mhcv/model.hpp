#pragma once

#include "mhcv/types.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace mhcv {

/// One Gaussian component of a mixture target.
struct MixtureComponent {
  double weight = 1.0;
  Point mean;
  SquareMatrix covariance;
};

/// Gaussian-mixture target density.
///
/// Components are validated at construction (positive weights summing to one,
/// symmetric positive-definite covariances) and stored with their Cholesky
/// factors and log-normalizers, so that density evaluation is a log-sum-exp
/// over components. All evaluations are available in log space; the
/// Metropolis-Hastings acceptance uses only log-space ratios.
class TargetModel {
public:
  explicit TargetModel(std::vector<MixtureComponent> components);

  /// Convenience constructor for one-dimensional mixtures.
  static TargetModel mixture_1d(std::vector<double> weights, std::vector<double> means,
                                std::vector<double> std_devs);

  int dimension() const { return dim_; }
  const std::vector<MixtureComponent>& components() const { return components_; }

  double log_density(const Point& x) const;
  double density(const Point& x) const;
  /// Gradient of log pi at x.
  Point grad_log_density(const Point& x) const;

  /// Exact draw: component by weight, then a Gaussian draw.
  Point sample(Rng& rng) const;

  /// E[x_axis^power] under the mixture, from closed-form Gaussian moments.
  double coordinate_moment(int axis, int power) const;
  Point mean() const;

  /// Local maxima of pi found by gradient ascent from every component mean.
  std::vector<Point> modes() const;
  /// sup pi over the located modes, in log space.
  double log_sup_density() const { return log_sup_; }

private:
  struct Factor {
    Eigen::LLT<SquareMatrix> chol;
    SquareMatrix lower;
    SquareMatrix lower_inverse;
    double log_coeff = 0.0;  // log w - (d/2) log(2 pi) - (1/2) log|Sigma|
  };

  double component_log_density(std::size_t i, const Point& x) const;

  int dim_ = 0;
  std::vector<MixtureComponent> components_;
  std::vector<Factor> factors_;
  std::vector<Point> modes_;
  double log_sup_ = 0.0;
};

/// Gaussian random-walk proposal q(x, y) = N(y - x; 0, Sigma).
class RandomWalkProposal {
public:
  explicit RandomWalkProposal(SquareMatrix covariance);
  static RandomWalkProposal isotropic(int dim, double variance);

  int dimension() const { return static_cast<int>(cov_.rows()); }
  const SquareMatrix& covariance() const { return cov_; }

  double log_density(const Point& x, const Point& y) const;
  double density(const Point& x, const Point& y) const;
  Point draw(const Point& x, Rng& rng) const;

  /// The random-walk proposal is symmetric: q(x, y) = q(y, x).
  static constexpr bool symmetric = true;

private:
  SquareMatrix cov_;
  SquareMatrix lower_;
  SquareMatrix lower_inverse_;
  Eigen::LLT<SquareMatrix> chol_;
  double log_norm_ = 0.0;
};

/// alpha from log quantities: min(1, exp(log_pi_y + log_q_yx - log_pi_x - log_q_xy)),
/// and 1 when pi(x) q(x, y) = 0.
double acceptance_from_logs(double log_pi_x, double log_q_xy, double log_pi_y, double log_q_yx);

/// Metropolis-Hastings acceptance probability alpha(x, y).
double acceptance(const TargetModel& model, const RandomWalkProposal& prop, const Point& x,
                  const Point& y);

/// Scalar force function with an optional exact stationary mean.
struct ForceFunction {
  std::function<double(const Point&)> evaluate;
  std::optional<double> exact_mean;

  double operator()(const Point& x) const { return evaluate(x); }

  /// F(x) = sum_p coefficients[p] * x_axis^p, with the mean taken under model.
  static ForceFunction polynomial(const TargetModel& model, int axis, std::vector<double> coefficients);
  static ForceFunction cube(const TargetModel& model, int axis = 0);
  static ForceFunction coordinate(const TargetModel& model, int axis = 0);
};

/// Lyapunov drift V_gamma(x) = c_gamma * pi(x)^(-gamma), c_gamma = (sup pi)^gamma,
/// so that V_gamma >= 1 with equality at the global mode.
class DriftFunction {
public:
  DriftFunction(const TargetModel& model, double gamma);

  double gamma() const { return gamma_; }
  double normalizer() const;
  double operator()(const Point& x) const;
  double log_value(const Point& x) const;
  const TargetModel& model() const { return model_; }

private:
  TargetModel model_;
  double gamma_;
};

/// Any positive weight function W used for mesh/radius functionals.
using WeightFunction = std::function<double(const Point&)>;

}  // namespace mhcv
