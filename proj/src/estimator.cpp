#include "mhcv/estimator.hpp"

#include "mhcv/log.hpp"
#include "mhcv/random.hpp"
#include "mhcv/text.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

namespace mhcv {

double ergodic_average(std::span<const Point> path, const ForceFunction& g) {
  if (path.empty()) throw InputError("ergodic_average: empty path");
  double acc = 0.0;
  for (const auto& x : path) acc += g(x);
  return acc / static_cast<double>(path.size());
}

double ergodic_average(const ChainPath& path, const ForceFunction& g) { return ergodic_average(path.states, g); }

namespace {

double cv_correction(const TargetModel& model, const RandomWalkProposal& prop, const ControlVariate& cv,
                     const Point& x, double log_pi_x, Rng& rng) {
  const Allotment& a = cv.allotment();
  const Vector& values = cv.values();
  const std::size_t self = a.locate(x);
  const double base = values(static_cast<Eigen::Index>(self));
  // sum_j f_j P(x, a_j) - f_self with P(x, a_self) = 1 - sum_{j != self} P(x, a_j)
  double acc = 0.0;
  detail::sample_offdiagonal(model, prop, a, x, log_pi_x, self, cv.n1_eval(), cv.n2_eval(), rng,
                             [&](std::size_t j, double p) { acc += (values(static_cast<Eigen::Index>(j)) - base) * p; });
  return acc;
}

}  // namespace

double cv_estimate_step(const TargetModel& model, const RandomWalkProposal& prop, const Point& x,
                        const ControlVariate& cv, Rng& rng) {
  if (!is_finite(x)) throw InputError("cv_estimate_step: non-finite point");
  return cv_correction(model, prop, cv, x, model.log_density(x), rng);
}

PathEstimate run_cv_estimator(const TargetModel& model, const RandomWalkProposal& prop, const ForceFunction& force,
                              const ControlVariate& cv, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw InputError("run_cv_estimator: path length must be positive");
  Rng path_rng = make_stream(seed, Stream::Path);
  Rng aux_rng = make_stream(seed, Stream::Auxiliary);
  Point x = model.sample(path_rng);
  double log_pi_x = model.log_density(x);
  double plain = 0.0;
  double controlled = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    x = mh_step(model, prop, x, log_pi_x, path_rng);
    const double fx = force(x);
    plain += fx;
    controlled += fx + cv_correction(model, prop, cv, x, log_pi_x, aux_rng);
  }
  return PathEstimate{plain / static_cast<double>(k), controlled / static_cast<double>(k)};
}

std::uint64_t path_seed(std::uint64_t master_seed, std::size_t path_index) {
  return derive_seed(master_seed, {static_cast<std::uint64_t>(path_index)});
}

EstimatorRun run_paths(const TargetModel& model, const RandomWalkProposal& prop, const ForceFunction& force,
                       const ControlVariate& cv, std::size_t k, std::size_t n, std::uint64_t master_seed,
                       unsigned workers) {
  if (n == 0) throw InputError("run_paths: at least one path is required");
  EstimatorRun run;
  run.k = k;
  run.plain.resize(n);
  run.controlled.resize(n);
  run.seeds.resize(n);
  for (std::size_t i = 0; i < n; ++i) run.seeds[i] = path_seed(master_seed, i);

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    try {
      for (std::size_t i = next++; i < n; i = next++) {
        const auto est = run_cv_estimator(model, prop, force, cv, k, run.seeds[i]);
        run.plain[i] = est.plain;
        run.controlled[i] = est.controlled;
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = n;
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return run;
}

double improvement_ratio(const EstimatorRun& run, double true_mean) {
  if (run.paths() < 2) throw InputError("improvement_ratio: at least two paths are required");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < run.paths(); ++i) {
    num += (run.plain[i] - true_mean) * (run.plain[i] - true_mean);
    den += (run.controlled[i] - true_mean) * (run.controlled[i] - true_mean);
  }
  if (den == 0.0) {
    warn("improvement_ratio: controlled mean-square error is zero; reporting +inf");
    return std::numeric_limits<double>::infinity();
  }
  return num / den;
}

MseSummary summarize(const EstimatorRun& run, double true_mean) {
  const std::size_t n = run.paths();
  if (n < 2) throw InputError("summarize: at least two paths are required");
  const double nn = static_cast<double>(n);
  std::vector<double> sp(n), sc(n);
  double mp = 0.0, mc = 0.0, mean_c = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sp[i] = (run.plain[i] - true_mean) * (run.plain[i] - true_mean);
    sc[i] = (run.controlled[i] - true_mean) * (run.controlled[i] - true_mean);
    mp += sp[i];
    mc += sc[i];
    mean_c += run.controlled[i];
  }
  mp /= nn;
  mc /= nn;
  mean_c /= nn;
  double vp = 0.0, vc = 0.0, cov = 0.0, var_c = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    vp += (sp[i] - mp) * (sp[i] - mp);
    vc += (sc[i] - mc) * (sc[i] - mc);
    cov += (sp[i] - mp) * (sc[i] - mc);
    var_c += (run.controlled[i] - mean_c) * (run.controlled[i] - mean_c);
  }
  vp /= nn - 1.0;
  vc /= nn - 1.0;
  cov /= nn - 1.0;
  var_c /= nn - 1.0;

  MseSummary s;
  s.plain_mse = mp;
  s.controlled_mse = mc;
  s.plain_se = std::sqrt(vp / nn);
  s.controlled_se = std::sqrt(vc / nn);
  s.controlled_mean = mean_c;
  s.controlled_mean_se = std::sqrt(var_c / nn);
  s.ratio = improvement_ratio(run, true_mean);
  if (mc > 0.0 && mp > 0.0) {
    const double rel = vp / (mp * mp) + vc / (mc * mc) - 2.0 * cov / (mp * mc);
    s.ratio_se = s.ratio * std::sqrt(std::max(0.0, rel) / nn);
  } else {
    s.ratio_se = std::numeric_limits<double>::infinity();
  }
  return s;
}

RateDiagnostic rate_diagnostic(const TargetModel& model, const DriftFunction& v, const Allotment& a,
                               std::size_t samples, std::uint64_t seed, int resolution) {
  if (samples < 1000) throw InputError("rate_diagnostic: at least 1000 Monte Carlo samples are required");
  Rng rng = make_stream(seed, Stream::Diagnostic);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Point x = model.sample(rng);
    double term = 0.0;
    if (a.locate(x) == 0) {
      const double vx = v(x);
      term = vx * vx;
    }
    sum += term;
    sum_sq += term * term;
  }
  const double ns = static_cast<double>(samples);
  RateDiagnostic diag;
  diag.mass = sum / ns;
  diag.mass_se = std::sqrt(std::max(0.0, sum_sq / ns - diag.mass * diag.mass) / (ns - 1.0));
  const double mesh = mesh_and_radius(a, v, resolution).mesh();
  diag.mesh_squared = mesh * mesh;
  return diag;
}

void write_runs_csv(std::ostream& os, const EstimatorRun& run) {
  os << "path,seed,plain,controlled\n";
  for (std::size_t i = 0; i < run.paths(); ++i)
    os << i << ',' << run.seeds[i] << ',' << text::format_double(run.plain[i]) << ','
       << text::format_double(run.controlled[i]) << '\n';
}

}  // namespace mhcv
