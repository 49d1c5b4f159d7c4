#include "mhcv/config.hpp"

#include "mhcv/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>

namespace mhcv {

namespace {

struct KeyError {
  std::string key;  // "section.key"
  std::string message;
};

std::string with_line(int line, const std::string& msg) { return "line " + std::to_string(line) + ": " + msg; }

std::vector<double> parse_doubles(std::string_view v, int line, const std::string& key) {
  std::vector<double> out;
  for (auto tok : text::split(v, ',')) {
    auto d = text::parse_double(tok);
    if (!d || !std::isfinite(*d)) throw InputError(with_line(line, key + ": '" + std::string(tok) + "' is not a finite number"));
    out.push_back(*d);
  }
  return out;
}

std::vector<std::vector<double>> parse_point_list(std::string_view v, int line, const std::string& key) {
  std::vector<std::vector<double>> out;
  for (auto item : text::split(v, ';')) out.push_back(parse_doubles(item, line, key));
  return out;
}

std::uint64_t parse_count(std::string_view v, int line, const std::string& key, bool allow_zero = false) {
  auto u = text::parse_u64(v);
  if (!u || (!allow_zero && *u == 0))
    throw InputError(with_line(line, key + ": expected a " + (allow_zero ? "nonnegative" : "positive") + " integer"));
  return *u;
}

template <typename T>
std::vector<T> parse_counts(std::string_view v, int line, const std::string& key) {
  std::vector<T> out;
  for (auto tok : text::split(v, ',')) out.push_back(static_cast<T>(parse_count(tok, line, key)));
  return out;
}

bool parse_bool(std::string_view v, int line, const std::string& key) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw InputError(with_line(line, key + ": expected true or false"));
}

void check_key(const ExperimentConfig& c, std::vector<KeyError>& errors) {
  auto fail = [&](std::string key, std::string msg) { errors.push_back({std::move(key), std::move(msg)}); };
  if (c.weights.empty()) fail("target.weights", "target needs at least one component");
  if (c.means.size() != c.weights.size()) fail("target.means", "one mean per weight is required");
  if (c.covariances.size() != c.weights.size()) fail("target.covariances", "one covariance per weight is required");
  if (!errors.empty()) return;
  const auto d = c.means.front().size();
  if (d < 1 || d > static_cast<std::size_t>(kMaxDim)) fail("target.means", "dimension must be between 1 and 8");
  for (const auto& m : c.means)
    if (m.size() != d) fail("target.means", "means differ in dimension");
  for (const auto& s : c.covariances)
    if (s.size() != d * d) fail("target.covariances", "each covariance needs d*d entries");
  if (c.proposal_covariance.size() != d * d) fail("proposal.covariance", "proposal covariance needs d*d entries");
  if (c.force_axis < 0 || static_cast<std::size_t>(c.force_axis) >= d) fail("force.axis", "axis out of range");
  if (c.force == ExperimentConfig::ForceKind::Polynomial && c.force_coefficients.empty())
    fail("force.coefficients", "polynomial force needs coefficients");

  switch (c.allotment) {
    case ExperimentConfig::AllotmentKind::OneD:
      if (d != 1) fail("allotment.kind", "1d allotment requires a one-dimensional target");
      if (!(c.lo < c.hi)) fail("allotment.hi", "interval (lo, hi] must satisfy lo < hi");
      if (c.m_grid.empty()) fail("experiment.m", "1d allotment needs an m grid");
      break;
    case ExperimentConfig::AllotmentKind::Boxes:
      if (c.box_lower.size() != d || c.box_upper.size() != d || c.counts.size() != d)
        fail("allotment.counts", "lower, upper and counts need one entry per dimension");
      else
        for (std::size_t i = 0; i < d; ++i)
          if (!(c.box_lower[i] < c.box_upper[i])) fail("allotment.upper", "degenerate box");
      if (!c.m_grid.empty()) fail("experiment.m", "the m grid applies to 1d allotments only");
      break;
    case ExperimentConfig::AllotmentKind::Appendix:
      if (c.levels.empty()) fail("allotment.levels", "appendix allotment needs levels");
      for (std::size_t i = 1; i < c.levels.size(); ++i)
        if (!(c.levels[i] > c.levels[i - 1])) fail("allotment.levels", "levels must increase strictly");
      if (!c.m_grid.empty()) fail("experiment.m", "the m grid applies to 1d allotments only");
      break;
  }
  if (c.a0_mode != "default" && c.a0_mode != "minimizer") fail("allotment.a0", "a0 must be default, minimizer or a point");
  if (!c.a0_point.empty() && c.a0_point.size() != d) fail("allotment.a0", "a0 point has the wrong dimension");
  if (c.k_grid.empty()) fail("experiment.k", "k grid is empty");
  if (c.paths < 2) fail("experiment.paths", "at least two paths are required");
  if (!c.seed_set) fail("experiment.seed", "seed is required");
  if (c.probe_resolution != 0 && c.probe_resolution < 2) fail("experiment.probe_resolution", "must be at least 2");
  if (!(c.gamma > 0.0 && c.gamma < 0.5)) fail("experiment.gamma", "gamma must lie in (0, 1/2)");
  if (c.diagnostic_samples < 1000) fail("experiment.diagnostic_samples", "at least 1000 samples are required");
  if (c.output.empty()) fail("experiment.output", "output path is empty");
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"target", {"weights", "means", "covariances"}},
      {"proposal", {"covariance"}},
      {"force", {"kind", "axis", "coefficients"}},
      {"allotment", {"kind", "lo", "hi", "lower", "upper", "counts", "levels", "a0", "include_outer"}},
      {"sampling", {"n1", "n2", "n1_eval", "n2_eval"}},
      {"experiment",
       {"m", "k", "paths", "seed", "probe_resolution", "workers", "gamma", "diagnose_k", "diagnostic_samples",
        "output"}},
  };
  return s;
}

}  // namespace

int ExperimentConfig::dimension() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }

int ExperimentConfig::effective_resolution() const {
  if (probe_resolution > 0) return probe_resolution;
  return dimension() == 1 ? 64 : 16;
}

void ExperimentConfig::validate() const {
  std::vector<KeyError> errors;
  check_key(*this, errors);
  if (!errors.empty()) throw InputError(errors.front().key + ": " + errors.front().message);
}

TargetModel ExperimentConfig::make_target() const {
  const int d = dimension();
  std::vector<MixtureComponent> comps;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    MixtureComponent c;
    c.weight = weights[i];
    c.mean = Point(d);
    c.covariance = SquareMatrix(d, d);
    for (int a = 0; a < d; ++a) {
      c.mean(a) = means[i][static_cast<std::size_t>(a)];
      for (int b = 0; b < d; ++b) c.covariance(a, b) = covariances[i][static_cast<std::size_t>(a * d + b)];
    }
    comps.push_back(std::move(c));
  }
  return TargetModel(std::move(comps));
}

RandomWalkProposal ExperimentConfig::make_proposal() const {
  const int d = dimension();
  SquareMatrix cov(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) cov(a, b) = proposal_covariance[static_cast<std::size_t>(a * d + b)];
  return RandomWalkProposal(cov);
}

ForceFunction ExperimentConfig::make_force(const TargetModel& model) const {
  switch (force) {
    case ForceKind::Cube:
      return ForceFunction::cube(model, force_axis);
    case ForceKind::Coordinate:
      return ForceFunction::coordinate(model, force_axis);
    case ForceKind::Polynomial:
      return ForceFunction::polynomial(model, force_axis, force_coefficients);
  }
  throw InputError("unknown force kind");
}

std::vector<Allotment> ExperimentConfig::make_allotments(const TargetModel& model) const {
  std::vector<Allotment> out;
  const int d = dimension();
  switch (allotment) {
    case AllotmentKind::OneD:
      for (int m : m_grid) out.push_back(build_1d(lo, hi, m));
      break;
    case AllotmentKind::Boxes: {
      Point lower(d), upper(d);
      for (int i = 0; i < d; ++i) {
        lower(i) = box_lower[static_cast<std::size_t>(i)];
        upper(i) = box_upper[static_cast<std::size_t>(i)];
      }
      out.push_back(build_boxes(lower, upper, counts));
      break;
    }
    case AllotmentKind::Appendix: {
      const DriftFunction v(model, gamma);
      ExhaustiveOptions opts;
      opts.resolution = effective_resolution();
      out = build_exhaustive_sequence(v, levels, opts);
      break;
    }
  }
  if (!a0_point.empty()) {
    Point p(d);
    for (int i = 0; i < d; ++i) p(i) = a0_point[static_cast<std::size_t>(i)];
    for (auto& a : out) a = a.with_outer_representative(p);
  } else if (a0_mode == "minimizer" && allotment != AllotmentKind::Appendix) {
    const DriftFunction v(model, gamma);
    const WeightFunction w = [&v](const Point& x) { return v(x); };
    for (auto& a : out) a = a.with_outer_representative(boundary_minimizer(a, w, effective_resolution()));
  }
  return out;
}

ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig c;
  std::map<std::string, int> key_lines;
  std::string section;
  std::string raw;
  int line = 0;
  bool m_seen = false;
  while (std::getline(is, raw)) {
    ++line;
    std::string_view sv = raw;
    if (auto hash = sv.find('#'); hash != std::string_view::npos) sv = sv.substr(0, hash);
    sv = text::trim(sv);
    if (sv.empty()) continue;
    if (sv.front() == '[') {
      if (sv.back() != ']') throw InputError(with_line(line, "malformed section header"));
      section = std::string(text::trim(sv.substr(1, sv.size() - 2)));
      if (!schema().contains(section)) throw InputError(with_line(line, "unknown section [" + section + "]"));
      continue;
    }
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos) throw InputError(with_line(line, "expected key = value"));
    if (section.empty()) throw InputError(with_line(line, "key outside of any section"));
    const std::string key(text::trim(sv.substr(0, eq)));
    const std::string_view value = text::trim(sv.substr(eq + 1));
    const std::string full = section + "." + key;
    if (!schema().at(section).contains(key)) throw InputError(with_line(line, "unknown key '" + full + "'"));
    if (key_lines.contains(full)) throw InputError(with_line(line, "duplicate key '" + full + "'"));
    key_lines[full] = line;
    if (value.empty()) throw InputError(with_line(line, full + ": empty value"));

    auto one_double = [&]() {
      auto v = parse_doubles(value, line, full);
      if (v.size() != 1) throw InputError(with_line(line, full + ": expected a single number"));
      return v.front();
    };

    if (full == "target.weights") c.weights = parse_doubles(value, line, full);
    else if (full == "target.means") c.means = parse_point_list(value, line, full);
    else if (full == "target.covariances") c.covariances = parse_point_list(value, line, full);
    else if (full == "proposal.covariance") c.proposal_covariance = parse_doubles(value, line, full);
    else if (full == "force.kind") {
      if (value == "cube") c.force = ExperimentConfig::ForceKind::Cube;
      else if (value == "coordinate") c.force = ExperimentConfig::ForceKind::Coordinate;
      else if (value == "polynomial") c.force = ExperimentConfig::ForceKind::Polynomial;
      else throw InputError(with_line(line, full + ": expected cube, coordinate or polynomial"));
    } else if (full == "force.axis") c.force_axis = static_cast<int>(parse_count(value, line, full, true));
    else if (full == "force.coefficients") c.force_coefficients = parse_doubles(value, line, full);
    else if (full == "allotment.kind") {
      if (value == "1d") c.allotment = ExperimentConfig::AllotmentKind::OneD;
      else if (value == "boxes") c.allotment = ExperimentConfig::AllotmentKind::Boxes;
      else if (value == "appendix") c.allotment = ExperimentConfig::AllotmentKind::Appendix;
      else throw InputError(with_line(line, full + ": expected 1d, boxes or appendix"));
    } else if (full == "allotment.lo") c.lo = one_double();
    else if (full == "allotment.hi") c.hi = one_double();
    else if (full == "allotment.lower") c.box_lower = parse_doubles(value, line, full);
    else if (full == "allotment.upper") c.box_upper = parse_doubles(value, line, full);
    else if (full == "allotment.counts") c.counts = parse_counts<int>(value, line, full);
    else if (full == "allotment.levels") c.levels = parse_doubles(value, line, full);
    else if (full == "allotment.a0") {
      if (value == "default" || value == "minimizer") c.a0_mode = std::string(value);
      else c.a0_point = parse_doubles(value, line, full);
    } else if (full == "allotment.include_outer") c.include_outer = parse_bool(value, line, full);
    else if (full == "sampling.n1") c.n1 = parse_count(value, line, full);
    else if (full == "sampling.n2") c.n2 = parse_count(value, line, full);
    else if (full == "sampling.n1_eval") c.n1_eval = parse_count(value, line, full);
    else if (full == "sampling.n2_eval") c.n2_eval = parse_count(value, line, full);
    else if (full == "experiment.m") {
      c.m_grid = parse_counts<int>(value, line, full);
      m_seen = true;
    } else if (full == "experiment.k") c.k_grid = parse_counts<std::size_t>(value, line, full);
    else if (full == "experiment.paths") c.paths = parse_count(value, line, full);
    else if (full == "experiment.seed") {
      c.seed = parse_count(value, line, full, true);
      c.seed_set = true;
    } else if (full == "experiment.probe_resolution") c.probe_resolution = static_cast<int>(parse_count(value, line, full));
    else if (full == "experiment.workers") c.workers = static_cast<unsigned>(parse_count(value, line, full, true));
    else if (full == "experiment.gamma") c.gamma = one_double();
    else if (full == "experiment.diagnose_k") c.diagnose_k = parse_count(value, line, full);
    else if (full == "experiment.diagnostic_samples") c.diagnostic_samples = parse_count(value, line, full);
    else if (full == "experiment.output") c.output = std::string(value);
  }
  (void)m_seen;

  std::vector<KeyError> errors;
  check_key(c, errors);
  if (!errors.empty()) {
    const auto& e = errors.front();
    auto it = key_lines.find(e.key);
    if (it == key_lines.end()) {
      // Missing key: point at the section header region if known, else end of file.
      throw InputError(with_line(line, e.key + ": " + e.message));
    }
    throw InputError(with_line(it->second, e.key + ": " + e.message));
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  try {
    return parse_config(in);
  } catch (const InputError& e) {
    throw InputError(path + ":" + e.what());
  }
}

void write_config(std::ostream& os, const ExperimentConfig& c) {
  auto doubles = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + text::format_double(v[i]);
    return s;
  };
  auto points = [&](const std::vector<std::vector<double>>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "; " : "") + doubles(v[i]);
    return s;
  };
  auto ints = [](const auto& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
    return s;
  };

  os << "[target]\n";
  os << "weights = " << doubles(c.weights) << '\n';
  os << "means = " << points(c.means) << '\n';
  os << "covariances = " << points(c.covariances) << '\n';
  os << "\n[proposal]\n";
  os << "covariance = " << doubles(c.proposal_covariance) << '\n';
  os << "\n[force]\n";
  switch (c.force) {
    case ExperimentConfig::ForceKind::Cube: os << "kind = cube\n"; break;
    case ExperimentConfig::ForceKind::Coordinate: os << "kind = coordinate\n"; break;
    case ExperimentConfig::ForceKind::Polynomial: os << "kind = polynomial\n"; break;
  }
  os << "axis = " << c.force_axis << '\n';
  if (!c.force_coefficients.empty()) os << "coefficients = " << doubles(c.force_coefficients) << '\n';
  os << "\n[allotment]\n";
  switch (c.allotment) {
    case ExperimentConfig::AllotmentKind::OneD:
      os << "kind = 1d\n";
      os << "lo = " << text::format_double(c.lo) << '\n';
      os << "hi = " << text::format_double(c.hi) << '\n';
      break;
    case ExperimentConfig::AllotmentKind::Boxes:
      os << "kind = boxes\n";
      os << "lower = " << doubles(c.box_lower) << '\n';
      os << "upper = " << doubles(c.box_upper) << '\n';
      os << "counts = " << ints(c.counts) << '\n';
      break;
    case ExperimentConfig::AllotmentKind::Appendix:
      os << "kind = appendix\n";
      os << "levels = " << doubles(c.levels) << '\n';
      break;
  }
  os << "a0 = " << (c.a0_point.empty() ? c.a0_mode : doubles(c.a0_point)) << '\n';
  os << "include_outer = " << (c.include_outer ? "true" : "false") << '\n';
  os << "\n[sampling]\n";
  os << "n1 = " << c.n1 << "\nn2 = " << c.n2 << "\nn1_eval = " << c.n1_eval << "\nn2_eval = " << c.n2_eval << '\n';
  os << "\n[experiment]\n";
  if (!c.m_grid.empty()) os << "m = " << ints(c.m_grid) << '\n';
  os << "k = " << ints(c.k_grid) << '\n';
  os << "paths = " << c.paths << '\n';
  if (c.seed_set) os << "seed = " << c.seed << '\n';
  if (c.probe_resolution != 0) os << "probe_resolution = " << c.probe_resolution << '\n';
  os << "workers = " << c.workers << '\n';
  os << "gamma = " << text::format_double(c.gamma) << '\n';
  if (c.diagnose_k != 0) os << "diagnose_k = " << c.diagnose_k << '\n';
  os << "diagnostic_samples = " << c.diagnostic_samples << '\n';
  os << "output = " << c.output << '\n';
}

}  // namespace mhcv
