#pragma once

#include "mhcv/allotment.hpp"
#include "mhcv/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mhcv {

/// Experiment description, read from a sectioned key = value text file:
///
///   [target]      weights, means, covariances   (points ';'-separated,
///                 coordinates ','-separated; covariances row-major)
///   [proposal]    covariance
///   [force]       kind = cube | coordinate | polynomial, axis, coefficients
///   [allotment]   kind = 1d | boxes | appendix, plus lo/hi, lower/upper/counts,
///                 levels, a0 = default | minimizer | explicit point,
///                 include_outer
///   [sampling]    n1, n2, n1_eval, n2_eval
///   [experiment]  m, k (grid = m x k), paths, seed, probe_resolution,
///                 workers, gamma, diagnose_k, diagnostic_samples, output
///
/// '#' starts a comment. Unknown sections or keys are errors.
struct ExperimentConfig {
  enum class ForceKind { Cube, Coordinate, Polynomial };
  enum class AllotmentKind { OneD, Boxes, Appendix };

  std::vector<double> weights;
  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> covariances;  // row-major d*d per component
  std::vector<double> proposal_covariance;       // row-major d*d

  ForceKind force = ForceKind::Cube;
  int force_axis = 0;
  std::vector<double> force_coefficients;

  AllotmentKind allotment = AllotmentKind::OneD;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> box_lower;
  std::vector<double> box_upper;
  std::vector<int> counts;
  std::vector<double> levels;
  std::string a0_mode = "default";  // default | minimizer
  std::vector<double> a0_point;     // explicit a_0 when nonempty
  bool include_outer = true;

  std::size_t n1 = 1000;
  std::size_t n2 = 1000;
  std::size_t n1_eval = 1;
  std::size_t n2_eval = 10;

  std::vector<int> m_grid;
  std::vector<std::size_t> k_grid;
  std::size_t paths = 1000;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int probe_resolution = 0;  // 0: 64 in 1D, 16 otherwise
  unsigned workers = 0;
  double gamma = 0.25;
  std::size_t diagnose_k = 0;  // 0: largest k in the grid
  std::size_t diagnostic_samples = 1'000'000;
  std::string output = "out";

  bool operator==(const ExperimentConfig&) const = default;

  int dimension() const;
  int effective_resolution() const;
  /// Throws InputError if any invariant fails.
  void validate() const;

  TargetModel make_target() const;
  RandomWalkProposal make_proposal() const;
  ForceFunction make_force(const TargetModel& model) const;
  /// Allotments for the m-grid (1d), the single box grid (boxes), or one per
  /// level (appendix).
  std::vector<Allotment> make_allotments(const TargetModel& model) const;
};

/// Parse errors carry the 1-based line number in the message.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::string& path);
void write_config(std::ostream& os, const ExperimentConfig& config);

}  // namespace mhcv
