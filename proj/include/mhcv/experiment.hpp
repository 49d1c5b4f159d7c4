#pragma once

#include "mhcv/config.hpp"
#include "mhcv/estimator.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mhcv {

/// One (m, k) table cell.
struct CellResult {
  std::size_t m = 0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  double true_mean = 0.0;
  double coarse_mean = 0.0;  // pi_X(f_X)
  std::size_t clamped_rows = 0;
  MseSummary summary;
  EstimatorRun run;
};

/// Seed of the cell (m, k) under a master seed.
std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t m, std::size_t k);

/// Builds the coarse chain and control variate on `a`, then runs `paths`
/// paths of length k. Matrix and path streams are both derived from `seed`.
CellResult run_cell(const TargetModel& model, const RandomWalkProposal& prop, const ForceFunction& force,
                    const Allotment& a, const ExperimentConfig& config, std::size_t k, std::uint64_t seed);

/// Every (allotment, k) cell in grid order. `progress` may be null.
std::vector<CellResult> run_experiment(const ExperimentConfig& config, std::ostream* progress = nullptr);

struct DiagnosticRow {
  std::size_t m = 0;
  RateDiagnostic rate;
  double controlled_mse = 0.0;
  std::size_t k = 0;

  double normalized_mse() const { return controlled_mse * static_cast<double>(k); }
};

/// One row per allotment: rate drivers and observed controlled MSE * k at
/// k = diagnose_k (largest k of the grid when zero).
std::vector<DiagnosticRow> run_diagnostics(const ExperimentConfig& config, std::ostream* progress = nullptr);

/// Header: m,k,seed,r,r_se,plain_mse,plain_se,controlled_mse,controlled_se,coarse_mean,true_mean,clamped_rows
void write_results_csv(std::ostream& os, const std::vector<CellResult>& cells);
void write_results_table(std::ostream& os, const std::vector<CellResult>& cells);
/// Header: m,mass,mass_se,mesh2,driver,controlled_mse_k
void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticRow>& rows);

}  // namespace mhcv
