#pragma once

#include "mhcv/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace mhcv {

/// Half-open axis-aligned box (lower, upper] (componentwise).
struct Box {
  Point lower;
  Point upper;

  double volume() const;
  Point center() const;
  bool contains(const Point& x) const;
};

/// One axis of a regular lattice: `count` half-open intervals tiling
/// (lower, upper]. Every edge is produced by edge(), so adjacent cells share
/// their boundary bit-exactly.
struct AxisGrid {
  double lower = 0.0;
  double upper = 1.0;
  int count = 1;

  double edge(int i) const;
  /// Interval index c with edge(c) < v <= edge(c + 1), or -1 outside (lower, upper].
  int locate(double v) const;
};

/// Partition of R^d into an unbounded cell J_0 and bounded boxes J_1..J_m,
/// each with a representative a_j in J_j (a_0 on the boundary of J_0).
///
/// Bounded cells are occupied sites of a regular lattice of half-open boxes;
/// the unoccupied sites and everything outside the lattice form J_0. Grid
/// allotments occupy every site; appendix-sequence allotments occupy the
/// sites that cover a sublevel set.
class Allotment {
public:
  /// `sites` are linear lattice indices (axis 0 fastest), one per bounded
  /// cell in cell order 1..m. Representatives default to box centers.
  Allotment(std::vector<AxisGrid> axes, std::vector<std::size_t> sites, Point a0,
            std::vector<Point> representatives = {});

  int dimension() const { return static_cast<int>(axes_.size()); }
  /// Number m of bounded cells.
  std::size_t size() const { return sites_.size(); }
  /// m + 1, the number of states of the coarse chain.
  std::size_t state_count() const { return sites_.size() + 1; }

  const std::vector<AxisGrid>& axes() const { return axes_; }
  const std::vector<std::size_t>& sites() const { return sites_; }
  const std::vector<Point>& representatives() const { return reps_; }
  const Point& representative(std::size_t j) const { return reps_[j]; }

  /// Box of bounded cell j (1 <= j <= m).
  const Box& cell(std::size_t j) const { return boxes_[j - 1]; }
  double volume(std::size_t j) const { return volumes_[j - 1]; }

  /// Index of the unique cell containing x.
  std::size_t locate(const Point& x) const;
  const Point& representative_of(const Point& x) const { return reps_[locate(x)]; }

  /// Cell index at a lattice site, 0 when the site is unoccupied.
  std::size_t cell_at_site(std::size_t site) const { return site_to_cell_[site]; }
  std::vector<int> site_coordinates(std::size_t site) const;
  /// Linear index of lattice coordinates, or SIZE_MAX outside the lattice.
  std::size_t site_index(std::span<const int> coords) const;

  /// Copy with a different a_0 (must lie in J_0 up to boundary nudging).
  Allotment with_outer_representative(Point a0) const;

  /// Exterior faces of the union of bounded cells, as (cell, axis, upper?) triples.
  struct Face {
    std::size_t cell;
    int axis;
    bool upper;
  };
  std::vector<Face> boundary_faces() const;

private:
  std::vector<AxisGrid> axes_;
  std::vector<std::size_t> sites_;
  std::vector<std::size_t> site_to_cell_;
  std::vector<Point> reps_;  // reps_[0] = a_0
  std::vector<Box> boxes_;
  std::vector<double> volumes_;
};

/// m equal half-open intervals tiling (lo, hi]; a_j at the centers, a_0 = lo.
Allotment build_1d(double lo, double hi, int m);

/// Regular grid of counts[0] x ... x counts[d-1] equal boxes tiling (lower, upper].
/// a_0 defaults to the midpoint of the face x_0 = lower_0.
Allotment build_boxes(const Point& lower, const Point& upper, std::span<const int> counts,
                      std::optional<Point> a0 = std::nullopt);

std::size_t locate(const Allotment& a, const Point& x);
const Point& representative(const Allotment& a, const Point& x);

/// W-mesh and W-radius of an allotment.
///
/// The geometric term is exact for boxes. The ratio term and the radius are
/// estimated by deterministic grid probing, so `ratio` is a lower estimate
/// of the true supremum and `radius` an upper estimate of the true infimum.
struct MeshReport {
  double geometric = 0.0;
  double ratio = 0.0;
  double radius = 0.0;
  bool ratio_is_lower_estimate = true;
  bool radius_is_upper_estimate = true;

  double mesh() const { return geometric > ratio ? geometric : ratio; }
};

/// `resolution` is the number of probe points per axis per cell (>= 2).
/// `interior_hints` are extra points tried when bracketing inf W over J_0
/// (e.g. modes of the target that fall outside the bounded cells).
MeshReport mesh_and_radius(const Allotment& a, const WeightFunction& w, int resolution,
                           std::span<const Point> interior_hints = {});
MeshReport mesh_and_radius(const Allotment& a, const DriftFunction& v, int resolution);

/// Probed minimizer of W over the boundary of J_0, guaranteed to locate in J_0.
Point boundary_minimizer(const Allotment& a, const WeightFunction& w, int resolution);

struct ExhaustiveOptions {
  /// Probe points per axis per cube for membership and oscillation checks.
  int resolution = 16;
  /// Refuse lattices with more sites than this.
  std::size_t max_sites = 4'000'000;
};

/// Exhaustive sequence of allotments with respect to W: level n covers
/// {W < levels[n]} by half-open cubes of side eps_n, where eps_n is halved
/// (at least once per level, starting from 1) until the probed oscillation
/// of W over every covering cube is below 1/n.
std::vector<Allotment> build_exhaustive_sequence(const WeightFunction& w, std::span<const Point> seeds,
                                                 std::span<const double> levels,
                                                 const ExhaustiveOptions& options = {});
std::vector<Allotment> build_exhaustive_sequence(const DriftFunction& v, std::span<const double> levels,
                                                 const ExhaustiveOptions& options = {});

/// Plain-text description: lattice axes, a_0, then one line per bounded cell.
void write_allotment(std::ostream& os, const Allotment& a);
Allotment read_allotment(std::istream& is);

}  // namespace mhcv
