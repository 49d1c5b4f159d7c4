#pragma once

#include "mhcv/allotment.hpp"
#include "mhcv/model.hpp"

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>

namespace mhcv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace detail {

/// alpha(x, y) q(x, y) from log quantities.
inline double accepted_density(double log_pi_x, double log_q_xy, double log_pi_y, double log_q_yx) {
  if (log_pi_x + log_q_xy == -std::numeric_limits<double>::infinity()) return std::exp(log_q_xy);
  return std::exp(std::min(log_q_xy, log_pi_y + log_q_yx - log_pi_x));
}

/// Monte Carlo estimates of the off-diagonal kernel entries P(x, J_j),
/// j != cell_of_x, reported through sink(j, value) in increasing j except
/// that the J_0 entry (when off-diagonal) comes last:
///   j >= 1: mean over n1 uniform Y in J_j of vol(J_j) alpha(x, Y) q(x, Y)
///   j == 0: mean over n2 proposals Z ~ q(x, .) of 1{Z in J_0} alpha(x, Z)
template <typename Sink>
void sample_offdiagonal(const TargetModel& model, const RandomWalkProposal& prop, const Allotment& a,
                        const Point& x, double log_pi_x, std::size_t cell_of_x, std::size_t n1,
                        std::size_t n2, Rng& rng, Sink&& sink) {
  const Eigen::Index d = x.size();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Point y(d);
  for (std::size_t j = 1; j <= a.size(); ++j) {
    if (j == cell_of_x) continue;
    const Box& b = a.cell(j);
    double acc = 0.0;
    for (std::size_t l = 0; l < n1; ++l) {
      for (Eigen::Index i = 0; i < d; ++i) y(i) = b.upper(i) - (b.upper(i) - b.lower(i)) * unif(rng);
      const double lq_xy = prop.log_density(x, y);
      const double lq_yx = RandomWalkProposal::symmetric ? lq_xy : prop.log_density(y, x);
      acc += accepted_density(log_pi_x, lq_xy, model.log_density(y), lq_yx);
    }
    sink(j, a.volume(j) * acc / static_cast<double>(n1));
  }
  if (cell_of_x != 0) {
    double acc = 0.0;
    for (std::size_t l = 0; l < n2; ++l) {
      const Point z = prop.draw(x, rng);
      if (a.locate(z) != 0) continue;
      const double lq_xz = prop.log_density(x, z);
      const double lq_zx = RandomWalkProposal::symmetric ? lq_xz : prop.log_density(z, x);
      acc += acceptance_from_logs(log_pi_x, lq_xz, model.log_density(z), lq_zx);
    }
    sink(0, acc / static_cast<double>(n2));
  }
}

}  // namespace detail

/// Monte Carlo estimate of the kernel row (P(x, J_0), ..., P(x, J_m)).
///
/// The diagonal entry (the cell containing x) is one minus the others. If
/// sampling noise drives it negative it is clamped to zero, the row is
/// renormalized, and a warning naming x is emitted. `clamped`, when given,
/// reports whether that happened.
Vector estimate_kernel_row(const TargetModel& model, const RandomWalkProposal& prop, const Point& x,
                           const Allotment& a, std::size_t n1, std::size_t n2, Rng& rng,
                           bool* clamped = nullptr);

/// Row-stochastic estimate of p_X together with its stationary distribution.
struct CoarseChain {
  Matrix transition;
  Vector stationary;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::uint64_t seed = 0;
  std::size_t clamped_rows = 0;
};

/// Estimates row i at a_i with its own stream derived from (seed, i).
CoarseChain estimate_transition_matrix(const TargetModel& model, const RandomWalkProposal& prop,
                                       const Allotment& a, std::size_t n1, std::size_t n2,
                                       std::uint64_t seed);

/// Throws NumericalError naming an unreachable state if the positive-entry
/// graph of p is not strongly connected.
void require_irreducible(const Matrix& p);

/// Invariant law of an irreducible stochastic matrix, from the balance
/// equations with one of them replaced by the normalization row.
Vector stationary_distribution(const Matrix& p);

struct PoissonSolution {
  Vector values;  // f-hat, with values[pin] == 0
  double coarse_mean = 0.0;
  std::size_t pin = 0;
};

/// Solves (I - p) g = f - pi(f) 1 with g[pin] = 0.
PoissonSolution solve_poisson(const Matrix& p, const Vector& f, std::size_t pin = 0);
PoissonSolution solve_poisson(const CoarseChain& chain, const Vector& f, std::size_t pin = 0);

/// sup-norm of (I - p) g - (f - mean 1).
double poisson_residual(const Matrix& p, const Vector& f, const Vector& g, double mean);

/// f_X(a_j) = F(a_j) for j = 0..m.
Vector representative_values(const Allotment& a, const ForceFunction& force);

/// Piecewise-constant approximate Poisson solution F~(x) = f-hat[locate(x)].
class ControlVariate {
public:
  ControlVariate(Allotment allotment, Vector values, std::size_t n1_eval = 1, std::size_t n2_eval = 10);

  const Allotment& allotment() const { return allotment_; }
  const Vector& values() const { return values_; }
  std::size_t n1_eval() const { return n1_eval_; }
  std::size_t n2_eval() const { return n2_eval_; }

  double operator()(const Point& x) const { return values_(static_cast<Eigen::Index>(allotment_.locate(x))); }

private:
  Allotment allotment_;
  Vector values_;
  std::size_t n1_eval_;
  std::size_t n2_eval_;
};

/// `include_outer = false` sets the J_0 value to zero (the sum over j >= 1 only).
ControlVariate build_control_variate(const Allotment& a, const PoissonSolution& sol, std::size_t n1_eval = 1,
                                     std::size_t n2_eval = 10, bool include_outer = true);

/// Deterministic one-dimensional kernel row by adaptive Gauss-Kronrod
/// quadrature of alpha(x, y) q(x, y) over every cell (test oracle).
Vector exact_kernel_row_1d(const TargetModel& model, const RandomWalkProposal& prop, const Point& x,
                           const Allotment& a);
Matrix exact_transition_matrix_1d(const TargetModel& model, const RandomWalkProposal& prop, const Allotment& a);

void write_matrix(std::ostream& os, const Matrix& m);
void write_vector(std::ostream& os, const Vector& v);

}  // namespace mhcv
