#pragma once

#include "mhcv/mh.hpp"
#include "mhcv/scheme.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace mhcv {

/// S_k(G) = (1/k) sum_i G(Phi_i).
double ergodic_average(std::span<const Point> path, const ForceFunction& g);
double ergodic_average(const ChainPath& path, const ForceFunction& g);

/// P-hat F~(x) - F~(x), using the evaluation sample sizes stored in `cv`.
///
/// The off-diagonal kernel entries are estimated exactly as in
/// estimate_kernel_row, and the diagonal is one minus their sum without
/// clamping, so the correction has stationary mean zero for any n1', n2'.
double cv_estimate_step(const TargetModel& model, const RandomWalkProposal& prop, const Point& x,
                        const ControlVariate& cv, Rng& rng);

struct PathEstimate {
  double plain = 0.0;       // S_k(F)
  double controlled = 0.0;  // S_k(F + P-hat F~ - F~)
};

/// One stationary-start path of length k. The chain consumes the Path stream
/// of `seed` and the kernel estimates the Auxiliary stream, so the trajectory
/// does not depend on the evaluation sample sizes.
PathEstimate run_cv_estimator(const TargetModel& model, const RandomWalkProposal& prop, const ForceFunction& force,
                              const ControlVariate& cv, std::size_t k, std::uint64_t seed);

/// n independent paths; path i uses seed derive_seed(master_seed, {i}).
struct EstimatorRun {
  std::vector<double> plain;
  std::vector<double> controlled;
  std::vector<std::uint64_t> seeds;
  std::size_t k = 0;

  std::size_t paths() const { return plain.size(); }
};

std::uint64_t path_seed(std::uint64_t master_seed, std::size_t path_index);

/// `workers == 0` uses the available hardware parallelism.
EstimatorRun run_paths(const TargetModel& model, const RandomWalkProposal& prop, const ForceFunction& force,
                       const ControlVariate& cv, std::size_t k, std::size_t n, std::uint64_t master_seed,
                       unsigned workers = 0);

/// r_{k,n}: ratio of the plain and controlled mean-square errors about
/// true_mean. A zero denominator yields +infinity (with a warning).
double improvement_ratio(const EstimatorRun& run, double true_mean);

struct MseSummary {
  double plain_mse = 0.0;
  double controlled_mse = 0.0;
  double plain_se = 0.0;       // standard error of plain_mse
  double controlled_se = 0.0;  // standard error of controlled_mse
  double ratio = 0.0;
  double ratio_se = 0.0;       // delta method on the paired squared errors
  double controlled_mean = 0.0;
  double controlled_mean_se = 0.0;
};

MseSummary summarize(const EstimatorRun& run, double true_mean);

/// Drivers of the variance bound: pi(V^2 1_{J_0}) by Monte Carlo over exact
/// target draws, and the squared W-mesh.
struct RateDiagnostic {
  double mass = 0.0;
  double mass_se = 0.0;
  double mesh_squared = 0.0;

  double driver() const { return mass > mesh_squared ? mass : mesh_squared; }
};

RateDiagnostic rate_diagnostic(const TargetModel& model, const DriftFunction& v, const Allotment& a,
                               std::size_t samples, std::uint64_t seed, int resolution);

/// CSV rows: path,seed,plain,controlled (header included).
void write_runs_csv(std::ostream& os, const EstimatorRun& run);

}  // namespace mhcv
