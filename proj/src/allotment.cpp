#include "mhcv/allotment.hpp"

#include "mhcv/text.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace mhcv {

double Box::volume() const { return (upper - lower).prod(); }

Point Box::center() const { return 0.5 * (lower + upper); }

bool Box::contains(const Point& x) const {
  return ((x.array() > lower.array()) && (x.array() <= upper.array())).all();
}

double AxisGrid::edge(int i) const {
  if (i >= count) return upper;
  return lower + (upper - lower) * static_cast<double>(i) / static_cast<double>(count);
}

int AxisGrid::locate(double v) const {
  if (!(v > lower && v <= upper)) return -1;
  int c = static_cast<int>(std::ceil((v - lower) / (upper - lower) * count)) - 1;
  c = std::clamp(c, 0, count - 1);
  while (c > 0 && v <= edge(c)) --c;
  while (c < count - 1 && v > edge(c + 1)) ++c;
  return c;
}

Allotment::Allotment(std::vector<AxisGrid> axes, std::vector<std::size_t> sites, Point a0,
                     std::vector<Point> representatives)
    : axes_(std::move(axes)), sites_(std::move(sites)) {
  const int d = static_cast<int>(axes_.size());
  if (d < 1 || d > kMaxDim) throw InputError("allotment: dimension out of range");
  std::size_t total = 1;
  for (const auto& ax : axes_) {
    if (!(ax.lower < ax.upper) || !std::isfinite(ax.lower) || !std::isfinite(ax.upper))
      throw InputError("allotment: degenerate lattice axis");
    if (ax.count < 1) throw InputError("allotment: lattice axis needs at least one interval");
    total *= static_cast<std::size_t>(ax.count);
  }
  if (a0.size() != d || !is_finite(a0)) throw InputError("allotment: a_0 has the wrong dimension");

  site_to_cell_.assign(total, 0);
  boxes_.reserve(sites_.size());
  volumes_.reserve(sites_.size());
  for (std::size_t j = 0; j < sites_.size(); ++j) {
    const std::size_t s = sites_[j];
    if (s >= total) throw InputError("allotment: site index outside the lattice");
    if (site_to_cell_[s] != 0) throw InputError("allotment: duplicate cell site");
    site_to_cell_[s] = j + 1;
    const auto c = site_coordinates(s);
    Box b{Point(d), Point(d)};
    for (int i = 0; i < d; ++i) {
      b.lower(i) = axes_[i].edge(c[i]);
      b.upper(i) = axes_[i].edge(c[i] + 1);
    }
    volumes_.push_back(b.volume());
    if (!(volumes_.back() > 0.0)) throw InputError("allotment: cell with zero volume");
    boxes_.push_back(std::move(b));
  }

  reps_.reserve(sites_.size() + 1);
  reps_.push_back(std::move(a0));
  if (representatives.empty()) {
    for (const auto& b : boxes_) reps_.push_back(b.center());
  } else {
    if (representatives.size() != sites_.size())
      throw InputError("allotment: one representative per bounded cell is required");
    for (std::size_t j = 0; j < representatives.size(); ++j) {
      if (!boxes_[j].contains(representatives[j]))
        throw InputError("allotment: representative outside its cell");
      reps_.push_back(std::move(representatives[j]));
    }
  }
  if (locate(reps_[0]) != 0) throw InputError("allotment: a_0 does not lie in J_0");
}

std::vector<int> Allotment::site_coordinates(std::size_t site) const {
  std::vector<int> c(axes_.size());
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const auto n = static_cast<std::size_t>(axes_[i].count);
    c[i] = static_cast<int>(site % n);
    site /= n;
  }
  return c;
}

std::size_t Allotment::site_index(std::span<const int> coords) const {
  std::size_t idx = 0;
  std::size_t stride = 1;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (coords[i] < 0 || coords[i] >= axes_[i].count) return std::numeric_limits<std::size_t>::max();
    idx += static_cast<std::size_t>(coords[i]) * stride;
    stride *= static_cast<std::size_t>(axes_[i].count);
  }
  return idx;
}

std::size_t Allotment::locate(const Point& x) const {
  std::size_t idx = 0;
  std::size_t stride = 1;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const int c = axes_[i].locate(x(static_cast<Eigen::Index>(i)));
    if (c < 0) return 0;
    idx += static_cast<std::size_t>(c) * stride;
    stride *= static_cast<std::size_t>(axes_[i].count);
  }
  return site_to_cell_[idx];
}

Allotment Allotment::with_outer_representative(Point a0) const {
  std::vector<Point> reps(reps_.begin() + 1, reps_.end());
  return Allotment(axes_, sites_, std::move(a0), std::move(reps));
}

std::vector<Allotment::Face> Allotment::boundary_faces() const {
  std::vector<Face> faces;
  for (std::size_t j = 0; j < sites_.size(); ++j) {
    auto c = site_coordinates(sites_[j]);
    for (int axis = 0; axis < dimension(); ++axis) {
      for (int dir : {-1, 1}) {
        c[axis] += dir;
        const auto s = site_index(c);
        c[axis] -= dir;
        if (s == std::numeric_limits<std::size_t>::max() || site_to_cell_[s] == 0)
          faces.push_back(Face{j + 1, axis, dir > 0});
      }
    }
  }
  return faces;
}

Allotment build_1d(double lo, double hi, int m) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw InputError("build_1d: interval (lo, hi] must satisfy lo < hi");
  if (m < 1) throw InputError("build_1d: m must be positive");
  std::vector<std::size_t> sites(static_cast<std::size_t>(m));
  for (std::size_t j = 0; j < sites.size(); ++j) sites[j] = j;
  return Allotment({AxisGrid{lo, hi, m}}, std::move(sites), make_point({lo}));
}

Allotment build_boxes(const Point& lower, const Point& upper, std::span<const int> counts,
                      std::optional<Point> a0) {
  const auto d = lower.size();
  if (upper.size() != d || static_cast<Eigen::Index>(counts.size()) != d || d < 1)
    throw InputError("build_boxes: box bounds and counts differ in dimension");
  std::vector<AxisGrid> axes;
  std::size_t total = 1;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(lower(i) < upper(i))) throw InputError("build_boxes: degenerate box");
    if (counts[i] < 1) throw InputError("build_boxes: counts must be positive");
    axes.push_back(AxisGrid{lower(i), upper(i), counts[i]});
    total *= static_cast<std::size_t>(counts[i]);
  }
  std::vector<std::size_t> sites(total);
  for (std::size_t j = 0; j < total; ++j) sites[j] = j;
  if (!a0) {
    Point p = 0.5 * (lower + upper);
    p(0) = lower(0);
    a0 = p;
  }
  return Allotment(std::move(axes), std::move(sites), std::move(*a0));
}

std::size_t locate(const Allotment& a, const Point& x) { return a.locate(x); }

const Point& representative(const Allotment& a, const Point& x) { return a.representative_of(x); }

namespace {

// Calls fn(point) for every node of a resolution^k grid spanning the closed
// box [lower, upper], skipping `fixed_axis` (held at its current value).
template <typename Fn>
void for_each_probe(const Point& lower, const Point& upper, int resolution, int fixed_axis, Fn&& fn) {
  const int d = static_cast<int>(lower.size());
  std::vector<int> idx(d, 0);
  Point p = lower;
  auto coord = [&](int axis, int t) {
    if (resolution < 2) return 0.5 * (lower(axis) + upper(axis));
    if (t == resolution - 1) return upper(axis);
    return lower(axis) + (upper(axis) - lower(axis)) * t / (resolution - 1);
  };
  while (true) {
    for (int i = 0; i < d; ++i)
      if (i != fixed_axis) p(i) = coord(i, idx[i]);
    fn(p);
    int i = 0;
    for (; i < d; ++i) {
      if (i == fixed_axis) continue;
      if (++idx[i] < resolution) break;
      idx[i] = 0;
    }
    if (i == d) break;
  }
}

template <typename Fn>
void for_each_face_probe(const Allotment& a, int resolution, Fn&& fn) {
  for (const auto& f : a.boundary_faces()) {
    const Box& b = a.cell(f.cell);
    Point lo = b.lower;
    Point hi = b.upper;
    const double fixed = f.upper ? b.upper(f.axis) : b.lower(f.axis);
    lo(f.axis) = fixed;
    hi(f.axis) = fixed;
    for_each_probe(lo, hi, resolution, f.axis, [&](const Point& p) { fn(p, f.axis, f.upper ? 1 : -1); });
  }
}

Point nudge_into_outer(const Allotment& a, Point p, int axis, int direction) {
  const double target = direction > 0 ? std::numeric_limits<double>::infinity()
                                      : -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 64 && a.locate(p) != 0; ++i) p(axis) = std::nextafter(p(axis), target);
  if (a.locate(p) != 0) throw NumericalError("allotment: cannot place a boundary point in J_0");
  return p;
}

}  // namespace

Point boundary_minimizer(const Allotment& a, const WeightFunction& w, int resolution) {
  if (resolution < 2) throw InputError("boundary_minimizer: resolution must be at least 2");
  double best = std::numeric_limits<double>::infinity();
  Point best_point;
  int best_axis = 0;
  int best_dir = -1;
  for_each_face_probe(a, resolution, [&](const Point& p, int axis, int dir) {
    const double v = w(p);
    if (v < best) {
      best = v;
      best_point = p;
      best_axis = axis;
      best_dir = dir;
    }
  });
  if (!std::isfinite(best)) throw NumericalError("boundary_minimizer: no finite boundary probe");
  return nudge_into_outer(a, best_point, best_axis, best_dir);
}

MeshReport mesh_and_radius(const Allotment& a, const WeightFunction& w, int resolution,
                           std::span<const Point> interior_hints) {
  if (resolution < 2) throw InputError("mesh_and_radius: resolution must be at least 2");
  MeshReport report;

  // Geometric term: farthest box corner from the representative (exact, by convexity).
  const int d = a.dimension();
  for (std::size_t j = 1; j <= a.size(); ++j) {
    const Box& b = a.cell(j);
    const Point& r = a.representative(j);
    double sq = 0.0;
    for (int i = 0; i < d; ++i) {
      const double far = std::max(std::abs(b.lower(i) - r(i)), std::abs(b.upper(i) - r(i)));
      sq += far * far;
    }
    report.geometric = std::max(report.geometric, std::sqrt(sq));
  }

  // Ratio term over bounded cells.
  double ratio = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j <= a.size(); ++j) {
    const Box& b = a.cell(j);
    const double wa = w(a.representative(j));
    for_each_probe(b.lower, b.upper, resolution, -1,
                   [&](const Point& y) { ratio = std::max(ratio, wa / w(y) - 1.0); });
  }

  // Radius: boundary probes, then outward rays (pi decays along them, so W
  // grows; stop once W has grown tenfold), then interior hints.
  double radius = w(a.representative(0));
  for_each_face_probe(a, resolution, [&](const Point& p, int axis, int dir) {
    const double start = w(p);
    radius = std::min(radius, start);
    const Box& any = a.cell(1);
    const double step0 = 0.5 * (any.upper(axis) - any.lower(axis));
    Point q = p;
    for (int t = 0; t < 64; ++t) {
      q(axis) = p(axis) + dir * step0 * std::ldexp(1.0, t);
      if (a.locate(q) != 0) break;
      const double v = w(q);
      radius = std::min(radius, v);
      if (v > 10.0 * start || !std::isfinite(v)) break;
    }
  });
  for (const auto& h : interior_hints)
    if (a.locate(h) == 0) radius = std::min(radius, w(h));
  report.radius = radius;

  ratio = std::max(ratio, w(a.representative(0)) / radius - 1.0);
  report.ratio = ratio;
  return report;
}

MeshReport mesh_and_radius(const Allotment& a, const DriftFunction& v, int resolution) {
  const auto modes = v.model().modes();
  return mesh_and_radius(a, [&v](const Point& x) { return v(x); }, resolution, modes);
}

namespace {

// Box [lo, hi] whose boundary probes all satisfy W >= level.
std::pair<Point, Point> bounding_box(const WeightFunction& w, std::span<const Point> seeds, double level) {
  const int d = static_cast<int>(seeds.front().size());
  Point lo = seeds.front();
  Point hi = seeds.front();
  for (const auto& s : seeds) {
    lo = lo.cwiseMin(s);
    hi = hi.cwiseMax(s);
  }
  lo.array() -= 1.0;
  hi.array() += 1.0;
  for (int attempt = 0; attempt < 40; ++attempt) {
    double min_face = std::numeric_limits<double>::infinity();
    for (int axis = 0; axis < d; ++axis) {
      for (double fixed : {lo(axis), hi(axis)}) {
        Point flo = lo;
        Point fhi = hi;
        flo(axis) = fixed;
        fhi(axis) = fixed;
        for_each_probe(flo, fhi, 64, axis, [&](const Point& p) {
          Point q = p;
          q(axis) = fixed;
          min_face = std::min(min_face, w(q));
        });
      }
    }
    if (min_face >= level) return {lo, hi};
    const Point width = hi - lo;
    lo -= width;
    hi += width;
  }
  throw InputError("exhaustive sequence: sublevel set {W < r} appears unbounded");
}

}  // namespace

std::vector<Allotment> build_exhaustive_sequence(const WeightFunction& w, std::span<const Point> seeds,
                                                 std::span<const double> levels,
                                                 const ExhaustiveOptions& options) {
  if (seeds.empty()) throw InputError("exhaustive sequence: at least one seed point is required");
  if (levels.empty()) throw InputError("exhaustive sequence: no levels given");
  if (options.resolution < 2) throw InputError("exhaustive sequence: resolution must be at least 2");
  const int d = static_cast<int>(seeds.front().size());

  double inf_w = std::numeric_limits<double>::infinity();
  for (const auto& s : seeds) inf_w = std::min(inf_w, w(s));
  if (!(levels.front() > inf_w))
    throw InputError("exhaustive sequence: r_1 must exceed inf W (" + text::format_double(inf_w) + ")");
  for (std::size_t n = 1; n < levels.size(); ++n)
    if (!(levels[n] > levels[n - 1])) throw InputError("exhaustive sequence: levels must increase strictly");

  std::vector<Allotment> out;
  double eps = 1.0;
  for (std::size_t n = 1; n <= levels.size(); ++n) {
    const double level = levels[n - 1];
    const auto [box_lo, box_hi] = bounding_box(w, seeds, level);
    const double tol = 1.0 / static_cast<double>(n);

    std::vector<AxisGrid> axes;
    std::vector<std::size_t> members;
    while (true) {
      eps *= 0.5;
      axes.clear();
      std::size_t total = 1;
      for (int i = 0; i < d; ++i) {
        const double first = std::floor(box_lo(i) / eps) - 1.0;
        const double last = std::ceil(box_hi(i) / eps) + 1.0;
        const double count = last - first;
        if (count * static_cast<double>(total) > static_cast<double>(options.max_sites))
          throw NumericalError("exhaustive sequence: lattice exceeds max_sites at level " + std::to_string(n));
        axes.push_back(AxisGrid{first * eps, last * eps, static_cast<int>(count)});
        total *= static_cast<std::size_t>(count);
      }

      // A site is a member when some probe has W < level; its oscillation
      // counts toward the continuity check.
      members.clear();
      double max_osc = 0.0;
      std::vector<int> c(d, 0);
      Point lo(d), hi(d);
      for (std::size_t s = 0; s < total; ++s) {
        std::size_t rem = s;
        for (int i = 0; i < d; ++i) {
          c[i] = static_cast<int>(rem % static_cast<std::size_t>(axes[i].count));
          rem /= static_cast<std::size_t>(axes[i].count);
          lo(i) = axes[i].edge(c[i]);
          hi(i) = axes[i].edge(c[i] + 1);
        }
        double wmin = std::numeric_limits<double>::infinity();
        double wmax = -std::numeric_limits<double>::infinity();
        for_each_probe(lo, hi, options.resolution, -1, [&](const Point& p) {
          const double v = w(p);
          wmin = std::min(wmin, v);
          wmax = std::max(wmax, v);
        });
        if (wmin < level) {
          members.push_back(s);
          max_osc = std::max(max_osc, wmax - wmin);
        }
      }
      if (members.empty()) throw NumericalError("exhaustive sequence: no cube meets the sublevel set");
      if (max_osc < tol) break;
    }

    // Close the cover under boundary probing: any exterior face probe with
    // W < level pulls its outside neighbour into the cover.
    std::sort(members.begin(), members.end());
    auto provisional_a0 = [&]() {
      Point p(d);
      for (int i = 0; i < d; ++i) p(i) = axes[i].lower;
      return p;
    };
    for (int sweep = 0; sweep < 1000; ++sweep) {
      Allotment a(axes, members, provisional_a0());
      std::vector<std::size_t> extra;
      for (const auto& f : a.boundary_faces()) {
        const Box& b = a.cell(f.cell);
        Point flo = b.lower;
        Point fhi = b.upper;
        const double fixed = f.upper ? b.upper(f.axis) : b.lower(f.axis);
        flo(f.axis) = fixed;
        fhi(f.axis) = fixed;
        bool low = false;
        for_each_probe(flo, fhi, options.resolution, f.axis, [&](const Point& p) {
          if (w(p) < level) low = true;
        });
        if (!low) continue;
        auto cc = a.site_coordinates(a.sites()[f.cell - 1]);
        cc[f.axis] += f.upper ? 1 : -1;
        const auto s = a.site_index(cc);
        if (s == std::numeric_limits<std::size_t>::max())
          throw NumericalError("exhaustive sequence: cover reached the lattice edge");
        extra.push_back(s);
      }
      if (extra.empty()) break;
      members.insert(members.end(), extra.begin(), extra.end());
      std::sort(members.begin(), members.end());
      members.erase(std::unique(members.begin(), members.end()), members.end());
    }

    Allotment provisional(axes, members, provisional_a0());
    Point a0 = boundary_minimizer(provisional, w, options.resolution);
    out.push_back(provisional.with_outer_representative(std::move(a0)));
  }
  return out;
}

std::vector<Allotment> build_exhaustive_sequence(const DriftFunction& v, std::span<const double> levels,
                                                 const ExhaustiveOptions& options) {
  const auto modes = v.model().modes();
  return build_exhaustive_sequence([&v](const Point& x) { return v(x); }, modes, levels, options);
}

void write_allotment(std::ostream& os, const Allotment& a) {
  auto point = [&os](const Point& p) {
    for (Eigen::Index i = 0; i < p.size(); ++i) os << ' ' << text::format_double(p(i));
  };
  os << "allotment\n";
  os << "dimension " << a.dimension() << '\n';
  for (const auto& ax : a.axes())
    os << "axis " << text::format_double(ax.lower) << ' ' << text::format_double(ax.upper) << ' ' << ax.count
       << '\n';
  os << "a0";
  point(a.representative(0));
  os << '\n';
  os << "cells " << a.size() << '\n';
  for (std::size_t j = 1; j <= a.size(); ++j) {
    os << a.sites()[j - 1];
    point(a.representative(j));
    os << '\n';
  }
  os << "end\n";
}

Allotment read_allotment(std::istream& is) {
  auto fail = [](const std::string& what) -> InputError { return InputError("read_allotment: " + what); };
  std::string word;
  if (!(is >> word) || word != "allotment") throw fail("missing header");
  int d = 0;
  if (!(is >> word >> d) || word != "dimension" || d < 1 || d > kMaxDim) throw fail("bad dimension line");
  auto read_double = [&]() {
    std::string tok;
    if (!(is >> tok)) throw fail("unexpected end of input");
    auto v = text::parse_double(tok);
    if (!v) throw fail("bad number '" + tok + "'");
    return *v;
  };
  std::vector<AxisGrid> axes;
  for (int i = 0; i < d; ++i) {
    AxisGrid ax;
    if (!(is >> word) || word != "axis") throw fail("expected axis line");
    ax.lower = read_double();
    ax.upper = read_double();
    if (!(is >> ax.count)) throw fail("bad axis count");
    axes.push_back(ax);
  }
  if (!(is >> word) || word != "a0") throw fail("expected a0 line");
  Point a0(d);
  for (int i = 0; i < d; ++i) a0(i) = read_double();
  std::size_t m = 0;
  if (!(is >> word >> m) || word != "cells") throw fail("expected cells line");
  std::vector<std::size_t> sites(m);
  std::vector<Point> reps(m, Point(d));
  for (std::size_t j = 0; j < m; ++j) {
    if (!(is >> sites[j])) throw fail("bad cell line");
    for (int i = 0; i < d; ++i) reps[j](i) = read_double();
  }
  if (!(is >> word) || word != "end") throw fail("missing end marker");
  return Allotment(std::move(axes), std::move(sites), std::move(a0), std::move(reps));
}

}  // namespace mhcv
