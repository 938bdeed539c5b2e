#pragma once

// Boundary subregions of the unit square, traces, zero extension, the
// interior strip omega_r and the cutoff extension T.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fracbc/errors.hpp"
#include "fracbc/quadrature.hpp"
#include "fracbc/spectral.hpp"

namespace fracbc {

/// left: x = 0, right: x = 1 (parameter y); bottom: y = 0, top: y = 1 (parameter x).
enum class Side { Left, Right, Bottom, Top };

inline const char* to_string(Side s) {
  switch (s) {
    case Side::Left: return "left";
    case Side::Right: return "right";
    case Side::Bottom: return "bottom";
    case Side::Top: return "top";
  }
  return "?";
}

inline Side parse_side(const std::string& name) {
  if (name == "left") return Side::Left;
  if (name == "right") return Side::Right;
  if (name == "bottom") return Side::Bottom;
  if (name == "top") return Side::Top;
  throw ConfigError("unknown boundary side '" + name + "' (expected left, right, bottom or top)");
}

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point side_point(Side side, double s) {
  switch (side) {
    case Side::Left: return {0.0, s};
    case Side::Right: return {1.0, s};
    case Side::Bottom: return {s, 0.0};
    case Side::Top: return {s, 1.0};
  }
  return {};
}

/// Parameter interval [s0, s1] on one side.
struct Arc {
  Side side = Side::Left;
  double s0 = 0.0;
  double s1 = 1.0;

  double length() const { return s1 - s0; }
};

/// A union of arcs with a composite 8-point Gauss rule on each.
class BoundaryRegion {
 public:
  BoundaryRegion(std::vector<Arc> arcs, int nodes_per_arc)
      : BoundaryRegion(arcs, std::vector<int>(arcs.size(), nodes_per_arc)) {}

  /// Node counts are rounded up to whole 8-point panels.
  BoundaryRegion(std::vector<Arc> arcs, const std::vector<int>& nodes_per_arc)
      : id_(detail::next_object_id()), arcs_(std::move(arcs)) {
    if (arcs_.empty()) throw ConfigError("boundary region needs at least one arc");
    if (nodes_per_arc.size() != arcs_.size()) throw ConfigError("boundary region: one node count per arc");
    for (int n : nodes_per_arc) {
      if (n < 1) throw ConfigError("boundary region needs at least one node per arc");
    }
    for (std::size_t a = 0; a < arcs_.size(); ++a) {
      const Arc& arc = arcs_[a];
      if (!(arc.s0 >= 0.0 && arc.s1 <= 1.0 && arc.s1 > arc.s0)) {
        throw ConfigError("boundary arc on side " + std::string(to_string(arc.side)) +
                          " needs 0 <= s0 < s1 <= 1");
      }
      for (std::size_t b = 0; b < a; ++b) {
        const Arc& o = arcs_[b];
        if (o.side == arc.side && arc.s0 < o.s1 && o.s0 < arc.s1) {
          throw ConfigError("boundary arcs on side " + std::string(to_string(arc.side)) + " overlap");
        }
      }
    }
    double offset = 0.0;
    for (std::size_t a = 0; a < arcs_.size(); ++a) {
      const Arc& arc = arcs_[a];
      rules_.push_back(composite_gauss(arc.s0, arc.s1, panels_for(nodes_per_arc[a])));
      first_.push_back(static_cast<int>(params_.size()));
      const Rule1D& r = rules_.back();
      for (int k = 0; k < r.nodes.size(); ++k) {
        params_.push_back(r.nodes[k]);
        weights_.push_back(r.weights[k]);
        arc_of_.push_back(static_cast<int>(a));
        arclength_.push_back(offset + r.nodes[k] - arc.s0);
      }
      offset += arc.length();
    }
  }

  /// The whole boundary, one arc per side.
  static BoundaryRegion whole_boundary(int nodes_per_side) {
    return BoundaryRegion({{Side::Left, 0, 1}, {Side::Right, 0, 1}, {Side::Bottom, 0, 1}, {Side::Top, 0, 1}},
                          nodes_per_side);
  }

  std::uint64_t id() const { return id_; }
  int size() const { return static_cast<int>(params_.size()); }
  const std::vector<Arc>& arcs() const { return arcs_; }
  int arc_of(int k) const { return arc_of_.at(k); }
  double param(int k) const { return params_.at(k); }
  double weight(int k) const { return weights_.at(k); }
  double arclength(int k) const { return arclength_.at(k); }
  Point node(int k) const { return side_point(arcs_[arc_of_.at(k)].side, params_.at(k)); }

  int arc_nodes(int a) const { return static_cast<int>(rules_.at(a).nodes.size()); }

  Eigen::VectorXd weights() const { return Eigen::Map<const Eigen::VectorXd>(weights_.data(), size()); }

  double total_length() const {
    double l = 0.0;
    for (const Arc& a : arcs_) l += a.length();
    return l;
  }

  /// Interpolated value of node data at parameter s on arc a.
  double interpolate(const Eigen::VectorXd& values, int a, double s) const {
    const Arc& arc = arcs_.at(a);
    const Eigen::VectorXd local = values.segment(first_[a], rules_[a].nodes.size());
    return interpolate_panels(rules_[a], arc.s0, arc.s1, local, std::clamp(s, arc.s0, arc.s1));
  }

  /// Distance from (x, y) to the arc set, with the nearest arc and parameter.
  double distance(double x, double y, int* nearest_arc = nullptr, double* nearest_s = nullptr) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < arcs_.size(); ++a) {
      const Arc& arc = arcs_[a];
      const bool vertical = arc.side == Side::Left || arc.side == Side::Right;
      const double along = vertical ? y : x;
      const double across = vertical ? std::fabs(x - side_point(arc.side, 0).x) : std::fabs(y - side_point(arc.side, 0).y);
      const double s = std::clamp(along, arc.s0, arc.s1);
      const double d = std::hypot(across, along - s);
      if (d < best) {
        best = d;
        if (nearest_arc) *nearest_arc = static_cast<int>(a);
        if (nearest_s) *nearest_s = s;
      }
    }
    return best;
  }

 private:
  std::uint64_t id_;
  std::vector<Arc> arcs_;
  std::vector<Rule1D> rules_;
  std::vector<int> first_;
  std::vector<double> params_, weights_, arclength_;
  std::vector<int> arc_of_;
};

/// Node values of a function on a boundary region.
struct BoundaryTrace {
  Eigen::VectorXd values;
  std::uint64_t region_id = 0;

  static BoundaryTrace zeros(const BoundaryRegion& region) {
    return {Eigen::VectorXd::Zero(region.size()), region.id()};
  }
};

inline void check_region(const BoundaryRegion& region, const BoundaryTrace& t, const char* what) {
  if (t.region_id != region.id() || t.values.size() != region.size()) {
    throw ConfigError(std::string(what) + ": trace belongs to a different boundary region");
  }
}

/// Weighted L2(Gamma) norm.
inline double l2_norm(const BoundaryRegion& region, const Eigen::VectorXd& values) {
  return std::sqrt((values.array().square() * region.weights().array()).sum());
}

/// Rows: boundary nodes; columns: mode values there.
inline Eigen::MatrixXd trace_matrix(const SpectralBasis& basis, const BoundaryRegion& region) {
  Eigen::MatrixXd P(region.size(), basis.size());
  for (int k = 0; k < region.size(); ++k) {
    const Point p = region.node(k);
    P.row(k) = basis.eval_all(p.x, p.y).transpose();
  }
  return P;
}

/// Rows: arbitrary points; columns: mode values there.
inline Eigen::MatrixXd evaluation_matrix(const SpectralBasis& basis, const std::vector<Point>& points) {
  Eigen::MatrixXd P(static_cast<Eigen::Index>(points.size()), basis.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    P.row(static_cast<Eigen::Index>(k)) = basis.eval_all(points[k].x, points[k].y).transpose();
  }
  return P;
}

/// p_Gamma gamma z: the state's values at the boundary nodes of Gamma.
inline BoundaryTrace trace_on_gamma(const SpectralBasis& basis, const BoundaryRegion& region, const StateCoeffs& z) {
  check_basis(basis, z, "trace_on_gamma");
  return {trace_matrix(basis, region) * z.c, region.id()};
}

/// A trace on the full boundary obtained by zero padding. The first
/// region.size() nodes of `boundary` are the Gamma nodes, in order.
struct FullBoundaryTrace {
  BoundaryRegion boundary;
  BoundaryTrace trace;
};

/// Complement of the region on the four sides, as arcs.
inline std::vector<Arc> complement_arcs(const BoundaryRegion& region) {
  std::vector<Arc> out;
  for (Side side : {Side::Left, Side::Right, Side::Bottom, Side::Top}) {
    std::vector<Arc> on;
    for (const Arc& a : region.arcs()) {
      if (a.side == side) on.push_back(a);
    }
    std::sort(on.begin(), on.end(), [](const Arc& l, const Arc& r) { return l.s0 < r.s0; });
    double cursor = 0.0;
    for (const Arc& a : on) {
      if (a.s0 > cursor + 1e-14) out.push_back({side, cursor, a.s0});
      cursor = std::max(cursor, a.s1);
    }
    if (cursor < 1.0 - 1e-14) out.push_back({side, cursor, 1.0});
  }
  return out;
}

/// p_Gamma^*: extend a trace on Gamma by zero to the rest of the boundary.
///
/// Gamma keeps its nodes and weights, so L2 pairings of restricted traces are
/// preserved exactly.
inline FullBoundaryTrace extend_zero(const BoundaryRegion& region, const BoundaryTrace& trace,
                                     int complement_nodes_per_arc = 16) {
  check_region(region, trace, "extend_zero");
  std::vector<Arc> arcs = region.arcs();
  std::vector<int> counts;
  for (int a = 0; a < static_cast<int>(arcs.size()); ++a) counts.push_back(region.arc_nodes(a));
  for (const Arc& a : complement_arcs(region)) {
    arcs.push_back(a);
    counts.push_back(complement_nodes_per_arc);
  }
  FullBoundaryTrace out{BoundaryRegion(arcs, counts), {}};
  out.trace = BoundaryTrace::zeros(out.boundary);
  out.trace.values.head(region.size()) = trace.values;
  return out;
}

/// Interior strip omega_r: mesh cells whose centres lie within r of Gamma.
struct InternalRegion {
  double r = 0.0;
  int mesh_res = 0;
  std::uint64_t region_id = 0;
  std::vector<Point> nodes;
  std::vector<std::pair<int, int>> cells;  // (ix, iy) of each node's cell
  std::vector<double> distance;            // distance of each node to Gamma
  Eigen::VectorXd weights;

  int size() const { return static_cast<int>(nodes.size()); }
  double area() const { return weights.sum(); }
};

inline InternalRegion build_omega_r(const BoundaryRegion& region, double r, int mesh_res = 200) {
  if (!(r > 0.0 && r < 0.5)) throw ConfigError("omega_r radius must lie in (0, 1/2), got " + std::to_string(r));
  if (mesh_res < 2) throw ConfigError("omega_r mesh resolution must be at least 2");
  InternalRegion w;
  w.r = r;
  w.mesh_res = mesh_res;
  w.region_id = region.id();
  const double h = 1.0 / mesh_res;
  for (int ix = 0; ix < mesh_res; ++ix) {
    for (int iy = 0; iy < mesh_res; ++iy) {
      const double x = (ix + 0.5) * h, y = (iy + 0.5) * h;
      const double d = region.distance(x, y);
      if (d <= r) {
        w.nodes.push_back({x, y});
        w.cells.push_back({ix, iy});
        w.distance.push_back(d);
      }
    }
  }
  if (w.nodes.empty()) {
    throw ConfigError("omega_r is empty: radius " + std::to_string(r) + " is below the mesh resolution");
  }
  w.weights = Eigen::VectorXd::Constant(w.size(), h * h);
  return w;
}

/// C^1 cutoff: 1 at d = 0, 0 for d >= r, monotone in between.
inline double cutoff(double d, double r) {
  if (d <= 0.0) return 1.0;
  if (d >= r) return 0.0;
  const double s = d / r;
  return 1.0 - 3.0 * s * s + 2.0 * s * s * s;
}

/// Basis coefficients of the interior extension of a trace, with diagnostics.
struct Extension {
  StateCoeffs coeffs;
  Eigen::VectorXd strip_values;  // T p_Gamma^* z_b at the omega_r nodes
  double trace_error = 0.0;      // relative L2(Gamma) round-trip error
  int rank = 0;
};

/// Extension T: F = z_b(nearest point of Gamma) * cutoff(distance), fitted to
/// the basis by weighted least squares over omega_r.
inline Extension extension_T_detailed(const SpectralBasis& basis, const BoundaryRegion& region,
                                      const InternalRegion& omega, const BoundaryTrace& trace,
                                      double max_trace_error = 0.05, double svd_tol = 1e-10) {
  check_region(region, trace, "extension_T");
  if (omega.region_id != region.id()) throw ConfigError("extension_T: omega_r was built for another region");
  Extension ext;
  ext.strip_values.resize(omega.size());
  for (int q = 0; q < omega.size(); ++q) {
    int arc = 0;
    double s = 0.0;
    const double d = region.distance(omega.nodes[q].x, omega.nodes[q].y, &arc, &s);
    ext.strip_values[q] = region.interpolate(trace.values, arc, s) * cutoff(d, omega.r);
  }
  ext.coeffs = StateCoeffs::zeros(basis);
  const double target_norm = l2_norm(region, trace.values);
  if (target_norm == 0.0) return ext;

  const Eigen::MatrixXd P = evaluation_matrix(basis, omega.nodes);
  const Eigen::VectorXd sw = omega.weights.cwiseSqrt();
  const Eigen::MatrixXd A = sw.asDiagonal() * P;
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const Eigen::VectorXd rhs = svd.matrixU().transpose() * (sw.asDiagonal() * ext.strip_values);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(sv.size());
  for (int k = 0; k < sv.size(); ++k) {
    if (sv[k] > svd_tol * sv[0]) {
      y[k] = rhs[k] / sv[k];
      ++ext.rank;
    }
  }
  ext.coeffs.c = svd.matrixV() * y;
  if (!ext.coeffs.c.allFinite()) throw NumericalError("extension_T: non-finite projection");
  const Eigen::VectorXd back = trace_matrix(basis, region) * ext.coeffs.c;
  ext.trace_error = l2_norm(region, back - trace.values) / target_norm;
  if (ext.trace_error > max_trace_error) {
    throw AccuracyError("extension_T: trace round-trip error " + std::to_string(ext.trace_error) +
                        " exceeds tolerance; increase N");
  }
  return ext;
}

inline StateCoeffs extension_T(const SpectralBasis& basis, const BoundaryRegion& region, const InternalRegion& omega,
                               const BoundaryTrace& trace) {
  return extension_T_detailed(basis, region, omega, trace).coeffs;
}

inline StateCoeffs extension_T(const SpectralBasis& basis, const BoundaryRegion& region, const BoundaryTrace& trace,
                               double r, int mesh_res = 200) {
  return extension_T(basis, region, build_omega_r(region, r, mesh_res), trace);
}

}  // namespace fracbc
