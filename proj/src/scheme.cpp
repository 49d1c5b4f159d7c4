#include "mhcv/scheme.hpp"

#include "mhcv/log.hpp"
#include "mhcv/random.hpp"
#include "mhcv/text.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

namespace mhcv {

namespace {

std::string describe(const Point& x) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i) s += ", ";
    s += text::format_double(x(i));
  }
  return s + ")";
}

}  // namespace

Vector estimate_kernel_row(const TargetModel& model, const RandomWalkProposal& prop, const Point& x,
                           const Allotment& a, std::size_t n1, std::size_t n2, Rng& rng, bool* clamped) {
  if (n1 < 1 || n2 < 1) throw InputError("estimate_kernel_row: n1 and n2 must be positive");
  if (!is_finite(x)) throw InputError("estimate_kernel_row: non-finite point");
  const std::size_t self = a.locate(x);
  Vector row = Vector::Zero(static_cast<Eigen::Index>(a.state_count()));
  detail::sample_offdiagonal(model, prop, a, x, model.log_density(x), self, n1, n2, rng,
                             [&row](std::size_t j, double v) { row(static_cast<Eigen::Index>(j)) = v; });
  const auto s = static_cast<Eigen::Index>(self);
  const double off = row.sum();
  row(s) = 1.0 - off;
  const bool fired = row(s) < 0.0;
  if (fired) {
    row(s) = 0.0;
    row /= off;
    warn("kernel row at x = " + describe(x) + " clamped: off-diagonal mass " + text::format_double(off) +
         " exceeds 1 (increase n1/n2)");
  }
  if (clamped) *clamped = fired;
  return row;
}

CoarseChain estimate_transition_matrix(const TargetModel& model, const RandomWalkProposal& prop,
                                       const Allotment& a, std::size_t n1, std::size_t n2,
                                       std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(a.state_count());
  CoarseChain chain;
  chain.transition.resize(n, n);
  chain.n1 = n1;
  chain.n2 = n2;
  chain.seed = seed;
  for (Eigen::Index i = 0; i < n; ++i) {
    Rng rng = make_stream(seed, Stream::Matrix, static_cast<std::uint64_t>(i));
    bool clamped = false;
    chain.transition.row(i) =
        estimate_kernel_row(model, prop, a.representative(static_cast<std::size_t>(i)), a, n1, n2, rng, &clamped)
            .transpose();
    if (clamped) ++chain.clamped_rows;
  }
  chain.stationary = stationary_distribution(chain.transition);
  return chain;
}

void require_irreducible(const Matrix& p) {
  const Eigen::Index n = p.rows();
  if (p.cols() != n || n == 0) throw InputError("transition matrix must be square and nonempty");
  // Reachability from state 0 forwards and backwards.
  for (bool forward : {true, false}) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<Eigen::Index> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const auto i = stack.back();
      stack.pop_back();
      for (Eigen::Index j = 0; j < n; ++j) {
        const double w = forward ? p(i, j) : p(j, i);
        if (w > 0.0 && !seen[static_cast<std::size_t>(j)]) {
          seen[static_cast<std::size_t>(j)] = 1;
          stack.push_back(j);
        }
      }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!seen[static_cast<std::size_t>(j)]) {
        throw NumericalError("transition estimate is reducible: state " + std::to_string(j) +
                             (forward ? " is unreachable from state 0" : " cannot reach state 0"));
      }
    }
  }
}

Vector stationary_distribution(const Matrix& p) {
  require_irreducible(p);
  const Eigen::Index n = p.rows();
  Matrix a = Matrix::Identity(n, n) - p.transpose();
  a.row(n - 1).setOnes();
  Vector b = Vector::Zero(n);
  b(n - 1) = 1.0;
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) throw NumericalError("stationary_distribution: singular balance system (reducible chain)");
  Vector pi = lu.solve(b);
  pi += lu.solve(b - a * pi);  // one refinement step
  const double residual = (p.transpose() * pi - pi).cwiseAbs().maxCoeff();
  if (!(residual <= 1e-12) || std::abs(pi.sum() - 1.0) > 1e-12)
    throw NumericalError("stationary_distribution: residual " + text::format_double(residual) + " too large");
  return pi;
}

double poisson_residual(const Matrix& p, const Vector& f, const Vector& g, double mean) {
  return (g - p * g - (f.array() - mean).matrix()).cwiseAbs().maxCoeff();
}

namespace {

PoissonSolution solve_pinned(const Matrix& p, const Vector& pi, const Vector& f, std::size_t pin) {
  const Eigen::Index n = p.rows();
  if (f.size() != n) throw InputError("solve_poisson: force vector length differs from the chain size");
  if (!f.allFinite()) throw InputError("solve_poisson: non-finite force vector");
  if (pin >= static_cast<std::size_t>(n)) throw InputError("solve_poisson: pin index out of range");
  const auto k = static_cast<Eigen::Index>(pin);

  PoissonSolution sol;
  sol.pin = pin;
  sol.coarse_mean = pi.dot(f);
  sol.values = Vector::Zero(n);
  if (n == 1) return sol;

  // Bordered system [(I - p) 1; e_pin^T 0] [g; c] = [f; 0]. Its solution has
  // g[pin] = 0 and c = pi(f); unlike dropping one balance row it stays well
  // conditioned when pi[pin] is tiny.
  Matrix a = Matrix::Zero(n + 1, n + 1);
  a.topLeftCorner(n, n) = Matrix::Identity(n, n) - p;
  a.col(n).head(n).setOnes();
  a(n, k) = 1.0;
  Vector b = Vector::Zero(n + 1);
  b.head(n) = f;
  Eigen::FullPivLU<Matrix> lu(a);
  if (lu.rank() < n + 1) {
    throw NumericalError("solve_poisson: pinned system is singular (numerical rank " + std::to_string(lu.rank()) +
                         " of " + std::to_string(n + 1) + ")");
  }
  Vector x = lu.solve(b);
  x += lu.solve(b - a * x);
  sol.values = x.head(n);
  sol.values(k) = 0.0;
  sol.coarse_mean = x(n);

  const double residual = poisson_residual(p, f, sol.values, sol.coarse_mean);
  const double scale = std::max(1.0, f.cwiseAbs().maxCoeff() + sol.values.cwiseAbs().maxCoeff());
  if (!(residual <= 1e-10 * scale))
    throw NumericalError("solve_poisson: residual " + text::format_double(residual) + " exceeds tolerance");
  return sol;
}

}  // namespace

PoissonSolution solve_poisson(const Matrix& p, const Vector& f, std::size_t pin) {
  return solve_pinned(p, stationary_distribution(p), f, pin);
}

PoissonSolution solve_poisson(const CoarseChain& chain, const Vector& f, std::size_t pin) {
  return solve_pinned(chain.transition, chain.stationary, f, pin);
}

Vector representative_values(const Allotment& a, const ForceFunction& force) {
  Vector f(static_cast<Eigen::Index>(a.state_count()));
  for (std::size_t j = 0; j < a.state_count(); ++j) f(static_cast<Eigen::Index>(j)) = force(a.representative(j));
  return f;
}

ControlVariate::ControlVariate(Allotment allotment, Vector values, std::size_t n1_eval, std::size_t n2_eval)
    : allotment_(std::move(allotment)), values_(std::move(values)), n1_eval_(n1_eval), n2_eval_(n2_eval) {
  if (values_.size() != static_cast<Eigen::Index>(allotment_.state_count()))
    throw InputError("control variate: solution length differs from m + 1");
  if (n1_eval_ < 1 || n2_eval_ < 1) throw InputError("control variate: evaluation sample sizes must be positive");
}

ControlVariate build_control_variate(const Allotment& a, const PoissonSolution& sol, std::size_t n1_eval,
                                     std::size_t n2_eval, bool include_outer) {
  Vector v = sol.values;
  if (!include_outer && v.size() > 0) v(0) = 0.0;
  return ControlVariate(a, std::move(v), n1_eval, n2_eval);
}

namespace {

// Complement of the union of bounded cells in 1D, as closed/open-agnostic intervals.
std::vector<std::pair<double, double>> outer_intervals_1d(const Allotment& a) {
  std::vector<std::pair<double, double>> cells;
  for (std::size_t j = 1; j <= a.size(); ++j) cells.emplace_back(a.cell(j).lower(0), a.cell(j).upper(0));
  std::sort(cells.begin(), cells.end());
  std::vector<std::pair<double, double>> out;
  double cursor = -std::numeric_limits<double>::infinity();
  for (const auto& [lo, hi] : cells) {
    if (lo > cursor) out.emplace_back(cursor, lo);
    cursor = std::max(cursor, hi);
  }
  out.emplace_back(cursor, std::numeric_limits<double>::infinity());
  return out;
}

}  // namespace

Vector exact_kernel_row_1d(const TargetModel& model, const RandomWalkProposal& prop, const Point& x,
                           const Allotment& a) {
  if (a.dimension() != 1) throw InputError("exact_kernel_row_1d: one-dimensional allotments only");
  using boost::math::quadrature::gauss_kronrod;
  const double log_pi_x = model.log_density(x);
  auto integrand = [&](double t) {
    const Point y = make_point({t});
    const double lq = prop.log_density(x, y);
    return detail::accepted_density(log_pi_x, lq, model.log_density(y), lq);
  };
  auto integrate = [&](double lo, double hi) {
    // Split at x, where the integrand peaks, to help the adaptive rule.
    double total = 0.0;
    const double mid = x(0);
    if (lo < mid && mid < hi) {
      total += gauss_kronrod<double, 61>::integrate(integrand, lo, mid, 20, 1e-13);
      total += gauss_kronrod<double, 61>::integrate(integrand, mid, hi, 20, 1e-13);
    } else {
      total += gauss_kronrod<double, 61>::integrate(integrand, lo, hi, 20, 1e-13);
    }
    return total;
  };

  const std::size_t self = a.locate(x);
  Vector row = Vector::Zero(static_cast<Eigen::Index>(a.state_count()));
  for (std::size_t j = 1; j <= a.size(); ++j) {
    if (j == self) continue;
    row(static_cast<Eigen::Index>(j)) = integrate(a.cell(j).lower(0), a.cell(j).upper(0));
  }
  if (self != 0)
    for (const auto& [lo, hi] : outer_intervals_1d(a)) row(0) += integrate(lo, hi);
  const auto s = static_cast<Eigen::Index>(self);
  row(s) = 1.0 - (row.sum() - row(s));
  return row;
}

Matrix exact_transition_matrix_1d(const TargetModel& model, const RandomWalkProposal& prop, const Allotment& a) {
  const auto n = static_cast<Eigen::Index>(a.state_count());
  Matrix p(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    p.row(i) = exact_kernel_row_1d(model, prop, a.representative(static_cast<std::size_t>(i)), a).transpose();
  return p;
}

void write_matrix(std::ostream& os, const Matrix& m) {
  os << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << text::format_double(m(i, j));
    os << '\n';
  }
}

void write_vector(std::ostream& os, const Vector& v) {
  os << v.size() << '\n';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? " " : "") << text::format_double(v(i));
  os << '\n';
}

}  // namespace mhcv
