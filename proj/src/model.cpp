#include "mhcv/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace mhcv {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

// |L^{-1} (x - mu)|^2 with L^{-1} lower triangular.
double whitened_norm2(const SquareMatrix& lower_inverse, const Point& x, const Point& mu) {
  const Eigen::Index d = x.size();
  double diff[kMaxDim];
  for (Eigen::Index j = 0; j < d; ++j) diff[j] = x(j) - mu(j);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    double z = 0.0;
    for (Eigen::Index j = 0; j <= i; ++j) z += lower_inverse(i, j) * diff[j];
    acc += z * z;
  }
  return acc;
}

double log_sum_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

void require_spd(const SquareMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1 || m.rows() > kMaxDim)
    throw InputError(std::string(what) + ": matrix must be square with 1 <= d <= 8");
  if (!m.allFinite()) throw InputError(std::string(what) + ": non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InputError(std::string(what) + ": matrix is not symmetric");
  Eigen::LLT<SquareMatrix> llt(m);
  if (llt.info() != Eigen::Success || !(llt.matrixL().toDenseMatrix().diagonal().array() > 0).all())
    throw InputError(std::string(what) + ": matrix is not positive definite");
}

// Gaussian moment E[X^p] for X ~ N(mu, var): m_p = mu m_{p-1} + (p-1) var m_{p-2}.
double gaussian_moment(double mu, double var, int power) {
  double prev = 1.0;  // m_0
  if (power == 0) return prev;
  double cur = mu;  // m_1
  for (int p = 2; p <= power; ++p) {
    const double next = mu * cur + (p - 1) * var * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace

TargetModel::TargetModel(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw InputError("target: at least one component is required");
  dim_ = static_cast<int>(components_.front().mean.size());
  double total = 0.0;
  for (const auto& c : components_) {
    if (c.mean.size() != dim_ || c.covariance.rows() != dim_)
      throw InputError("target: inconsistent component dimensions");
    if (!(c.weight > 0.0) || !std::isfinite(c.weight))
      throw InputError("target: weights must be strictly positive");
    if (!c.mean.allFinite()) throw InputError("target: non-finite component mean");
    require_spd(c.covariance, "target covariance");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "target: weights sum to " << total << ", expected 1";
    throw InputError(msg.str());
  }

  factors_.reserve(components_.size());
  for (const auto& c : components_) {
    Factor f;
    f.chol.compute(c.covariance);
    f.lower = f.chol.matrixL();
    f.lower_inverse = f.lower.triangularView<Eigen::Lower>().solve(SquareMatrix::Identity(dim_, dim_));
    f.log_coeff = std::log(c.weight) - 0.5 * dim_ * kLog2Pi - f.lower.diagonal().array().log().sum();
    factors_.push_back(std::move(f));
  }

  // Gradient ascent on log pi from every component mean, with backtracking.
  log_sup_ = -std::numeric_limits<double>::infinity();
  for (const auto& c : components_) {
    Point x = c.mean;
    double lx = log_density(x);
    for (int it = 0; it < 500; ++it) {
      const Point g = grad_log_density(x);
      if (g.norm() < 1e-13) break;
      double step = 1.0;
      bool moved = false;
      while (step > 1e-16) {
        const Point y = x + step * g;
        const double ly = log_density(y);
        if (ly > lx) {
          x = y;
          lx = ly;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    modes_.push_back(x);
    log_sup_ = std::max(log_sup_, lx);
  }
}

TargetModel TargetModel::mixture_1d(std::vector<double> weights, std::vector<double> means,
                                    std::vector<double> std_devs) {
  if (weights.size() != means.size() || means.size() != std_devs.size())
    throw InputError("target: weights, means and standard deviations differ in length");
  std::vector<MixtureComponent> comps;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    MixtureComponent c;
    c.weight = weights[i];
    c.mean = make_point({means[i]});
    c.covariance = SquareMatrix::Constant(1, 1, std_devs[i] * std_devs[i]);
    comps.push_back(std::move(c));
  }
  return TargetModel(std::move(comps));
}

double TargetModel::component_log_density(std::size_t i, const Point& x) const {
  const Factor& f = factors_[i];
  return f.log_coeff - 0.5 * whitened_norm2(f.lower_inverse, x, components_[i].mean);
}

double TargetModel::log_density(const Point& x) const {
  double acc = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < components_.size(); ++i) acc = log_sum_exp(acc, component_log_density(i, x));
  return acc;
}

double TargetModel::density(const Point& x) const {
  if (!is_finite(x)) throw InputError("density: non-finite point");
  return std::exp(log_density(x));
}

Point TargetModel::grad_log_density(const Point& x) const {
  // sum_i r_i(x) * (-Sigma_i^{-1} (x - mu_i)), r_i the posterior responsibilities
  const double total = log_density(x);
  Point g = Point::Zero(dim_);
  for (std::size_t i = 0; i < components_.size(); ++i) {
    const double r = std::exp(component_log_density(i, x) - total);
    if (r == 0.0) continue;
    const Point diff = x - components_[i].mean;
    g -= r * Point(factors_[i].chol.solve(diff));
  }
  return g;
}

Point TargetModel::sample(Rng& rng) const {
  std::size_t idx = 0;
  if (components_.size() > 1) {
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    idx = components_.size() - 1;
    for (std::size_t i = 0; i + 1 < components_.size(); ++i) {
      if (u < components_[i].weight) {
        idx = i;
        break;
      }
      u -= components_[i].weight;
    }
  }
  std::normal_distribution<double> normal;
  Point z(dim_);
  for (int k = 0; k < dim_; ++k) z(k) = normal(rng);
  return components_[idx].mean + factors_[idx].lower * z;
}

double TargetModel::coordinate_moment(int axis, int power) const {
  if (axis < 0 || axis >= dim_) throw InputError("coordinate_moment: axis out of range");
  if (power < 0) throw InputError("coordinate_moment: negative power");
  double m = 0.0;
  for (const auto& c : components_)
    m += c.weight * gaussian_moment(c.mean(axis), c.covariance(axis, axis), power);
  return m;
}

Point TargetModel::mean() const {
  Point m = Point::Zero(dim_);
  for (const auto& c : components_) m += c.weight * c.mean;
  return m;
}

std::vector<Point> TargetModel::modes() const { return modes_; }

RandomWalkProposal::RandomWalkProposal(SquareMatrix covariance) : cov_(std::move(covariance)) {
  require_spd(cov_, "proposal covariance");
  chol_.compute(cov_);
  lower_ = chol_.matrixL();
  lower_inverse_ = lower_.triangularView<Eigen::Lower>().solve(SquareMatrix::Identity(cov_.rows(), cov_.cols()));
  log_norm_ = -0.5 * static_cast<double>(cov_.rows()) * kLog2Pi - lower_.diagonal().array().log().sum();
}

RandomWalkProposal RandomWalkProposal::isotropic(int dim, double variance) {
  if (dim < 1 || dim > kMaxDim) throw InputError("proposal: dimension out of range");
  return RandomWalkProposal(SquareMatrix::Identity(dim, dim) * variance);
}

double RandomWalkProposal::log_density(const Point& x, const Point& y) const {
  return log_norm_ - 0.5 * whitened_norm2(lower_inverse_, y, x);
}

double RandomWalkProposal::density(const Point& x, const Point& y) const {
  return std::exp(log_density(x, y));
}

Point RandomWalkProposal::draw(const Point& x, Rng& rng) const {
  std::normal_distribution<double> normal;
  const auto d = cov_.rows();
  double z[kMaxDim];
  for (Eigen::Index k = 0; k < d; ++k) z[k] = normal(rng);
  Point y = x;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) y(i) += lower_(i, j) * z[j];
  return y;
}

double acceptance_from_logs(double log_pi_x, double log_q_xy, double log_pi_y, double log_q_yx) {
  const double denom = log_pi_x + log_q_xy;
  if (denom == -std::numeric_limits<double>::infinity()) return 1.0;
  const double log_ratio = log_pi_y + log_q_yx - denom;
  if (log_ratio >= 0.0) return 1.0;
  return std::exp(log_ratio);
}

double acceptance(const TargetModel& model, const RandomWalkProposal& prop, const Point& x,
                  const Point& y) {
  const double lq_xy = prop.log_density(x, y);
  const double lq_yx = RandomWalkProposal::symmetric ? lq_xy : prop.log_density(y, x);
  return acceptance_from_logs(model.log_density(x), lq_xy, model.log_density(y), lq_yx);
}

ForceFunction ForceFunction::polynomial(const TargetModel& model, int axis,
                                        std::vector<double> coefficients) {
  if (axis < 0 || axis >= model.dimension()) throw InputError("force: axis out of range");
  if (coefficients.empty()) throw InputError("force: empty polynomial");
  double mean = 0.0;
  for (std::size_t p = 0; p < coefficients.size(); ++p)
    mean += coefficients[p] * model.coordinate_moment(axis, static_cast<int>(p));
  ForceFunction f;
  f.evaluate = [axis, c = std::move(coefficients)](const Point& x) {
    // Horner
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x(axis) + *it;
    return acc;
  };
  f.exact_mean = mean;
  return f;
}

ForceFunction ForceFunction::cube(const TargetModel& model, int axis) {
  ForceFunction f = polynomial(model, axis, {0.0, 0.0, 0.0, 1.0});
  f.evaluate = [axis](const Point& x) { return x(axis) * x(axis) * x(axis); };
  return f;
}

ForceFunction ForceFunction::coordinate(const TargetModel& model, int axis) {
  ForceFunction f = polynomial(model, axis, {0.0, 1.0});
  f.evaluate = [axis](const Point& x) { return x(axis); };
  return f;
}

DriftFunction::DriftFunction(const TargetModel& model, double gamma) : model_(model), gamma_(gamma) {
  if (!(gamma > 0.0 && gamma < 0.5)) throw InputError("drift: gamma must lie in (0, 1/2)");
}

double DriftFunction::normalizer() const { return std::exp(gamma_ * model_.log_sup_density()); }

double DriftFunction::log_value(const Point& x) const {
  // The mode search locates sup pi to rounding; V >= 1 holds by definition.
  return std::max(0.0, gamma_ * (model_.log_sup_density() - model_.log_density(x)));
}

double DriftFunction::operator()(const Point& x) const { return std::exp(log_value(x)); }

}  // namespace mhcv
