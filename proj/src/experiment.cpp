#include "mhcv/experiment.hpp"

#include "mhcv/random.hpp"
#include "mhcv/text.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace mhcv {

std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t m, std::size_t k) {
  return derive_seed(master_seed, {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(k)});
}

CellResult run_cell(const TargetModel& model, const RandomWalkProposal& prop, const ForceFunction& force,
                    const Allotment& a, const ExperimentConfig& config, std::size_t k, std::uint64_t seed) {
  if (!force.exact_mean) throw InputError("experiment: the force function has no exact stationary mean");
  CellResult cell;
  cell.m = a.size();
  cell.k = k;
  cell.seed = seed;
  cell.true_mean = *force.exact_mean;
  const auto chain = estimate_transition_matrix(model, prop, a, config.n1, config.n2, derive_seed(seed, {1}));
  cell.clamped_rows = chain.clamped_rows;
  const auto sol = solve_poisson(chain, representative_values(a, force));
  cell.coarse_mean = sol.coarse_mean;
  const auto cv = build_control_variate(a, sol, config.n1_eval, config.n2_eval, config.include_outer);
  cell.run = run_paths(model, prop, force, cv, k, config.paths, derive_seed(seed, {2}), config.workers);
  cell.summary = summarize(cell.run, cell.true_mean);
  return cell;
}

std::vector<CellResult> run_experiment(const ExperimentConfig& config, std::ostream* progress) {
  config.validate();
  const auto model = config.make_target();
  const auto prop = config.make_proposal();
  const auto force = config.make_force(model);
  const auto allotments = config.make_allotments(model);
  std::vector<CellResult> cells;
  for (const auto& a : allotments) {
    for (std::size_t k : config.k_grid) {
      if (progress) *progress << "cell m=" << a.size() << " k=" << k << " ..." << std::flush;
      cells.push_back(run_cell(model, prop, force, a, config, k, cell_seed(config.seed, a.size(), k)));
      if (progress) *progress << " r=" << text::format_double(cells.back().summary.ratio) << '\n';
    }
  }
  return cells;
}

std::vector<DiagnosticRow> run_diagnostics(const ExperimentConfig& config, std::ostream* progress) {
  config.validate();
  const auto model = config.make_target();
  const auto prop = config.make_proposal();
  const auto force = config.make_force(model);
  const auto allotments = config.make_allotments(model);
  const DriftFunction v(model, config.gamma);
  const std::size_t k = config.diagnose_k ? config.diagnose_k
                                          : *std::max_element(config.k_grid.begin(), config.k_grid.end());
  std::vector<DiagnosticRow> rows;
  for (const auto& a : allotments) {
    if (progress) *progress << "diagnose m=" << a.size() << " k=" << k << " ..." << std::flush;
    const std::uint64_t seed = cell_seed(config.seed, a.size(), k);
    DiagnosticRow row;
    row.m = a.size();
    row.k = k;
    row.rate = rate_diagnostic(model, v, a, config.diagnostic_samples, derive_seed(seed, {3}),
                               config.effective_resolution());
    row.controlled_mse = run_cell(model, prop, force, a, config, k, seed).summary.controlled_mse;
    if (progress) *progress << " driver=" << text::format_double(row.rate.driver()) << '\n';
    rows.push_back(row);
  }
  return rows;
}

void write_results_csv(std::ostream& os, const std::vector<CellResult>& cells) {
  using text::format_double;
  os << "m,k,seed,r,r_se,plain_mse,plain_se,controlled_mse,controlled_se,coarse_mean,true_mean,clamped_rows\n";
  for (const auto& c : cells) {
    const auto& s = c.summary;
    os << c.m << ',' << c.k << ',' << c.seed << ',' << format_double(s.ratio) << ',' << format_double(s.ratio_se)
       << ',' << format_double(s.plain_mse) << ',' << format_double(s.plain_se) << ','
       << format_double(s.controlled_mse) << ',' << format_double(s.controlled_se) << ','
       << format_double(c.coarse_mean) << ',' << format_double(c.true_mean) << ',' << c.clamped_rows << '\n';
  }
}

void write_results_table(std::ostream& os, const std::vector<CellResult>& cells) {
  auto fixed = [](double v, int prec) {
    std::ostringstream s;
    s << std::setprecision(prec) << v;
    return s.str();
  };
  os << std::right << std::setw(6) << "m" << std::setw(10) << "k" << std::setw(12) << "r" << std::setw(12)
     << "r_se" << std::setw(14) << "plain_mse" << std::setw(14) << "ctrl_mse" << '\n';
  for (const auto& c : cells) {
    const auto& s = c.summary;
    os << std::setw(6) << c.m << std::setw(10) << c.k << std::setw(12) << fixed(s.ratio, 5) << std::setw(12)
       << fixed(s.ratio_se, 3) << std::setw(14) << fixed(s.plain_mse, 5) << std::setw(14)
       << fixed(s.controlled_mse, 5) << '\n';
  }
}

void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticRow>& rows) {
  using text::format_double;
  os << "m,mass,mass_se,mesh2,driver,controlled_mse_k\n";
  for (const auto& r : rows)
    os << r.m << ',' << format_double(r.rate.mass) << ',' << format_double(r.rate.mass_se) << ','
       << format_double(r.rate.mesh_squared) << ',' << format_double(r.rate.driver()) << ','
       << format_double(r.normalized_mse()) << '\n';
}

}  // namespace mhcv
