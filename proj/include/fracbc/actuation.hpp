#pragma once

// Zone and pointwise actuators, their basis coefficients g^i_k, the group
// matrices G_g and the strategic (rank) test.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fracbc/boundary.hpp"
#include "fracbc/errors.hpp"
#include "fracbc/quadrature.hpp"
#include "fracbc/spectral.hpp"

namespace fracbc {

enum class ActuatorKind { Point, Segment, Rect };

/// Spatial distribution of a zone actuator, evaluated at points of its support.
using Distribution = std::function<double(double x, double y)>;

/// A pointwise actuator at sigma, or a zone (segment on a side, or rectangle)
/// with distribution f. An empty distribution means f = 1.
struct Actuator {
  ActuatorKind kind = ActuatorKind::Point;
  Point sigma;
  Arc segment;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  Distribution f;
  std::string distribution_name = "uniform";
  int nodes = 0;  // quadrature nodes per direction; 0 picks the minimum safe count

  static Actuator point(double x, double y) {
    detail::check_unit_square(x, y);
    Actuator a;
    a.kind = ActuatorKind::Point;
    a.sigma = {x, y};
    return a;
  }

  static Actuator on_segment(Side side, double s0, double s1, Distribution f = {}, int nodes = 0) {
    if (!(s0 >= 0.0 && s1 <= 1.0 && s1 > s0)) throw ConfigError("segment actuator needs 0 <= s0 < s1 <= 1");
    Actuator a;
    a.kind = ActuatorKind::Segment;
    a.segment = {side, s0, s1};
    a.f = std::move(f);
    if (a.f) a.distribution_name = "custom";
    a.nodes = nodes;
    return a;
  }

  static Actuator rect(double x0, double x1, double y0, double y1, Distribution f = {}, int nodes = 0) {
    if (!(x0 >= 0.0 && x1 <= 1.0 && x1 > x0 && y0 >= 0.0 && y1 <= 1.0 && y1 > y0)) {
      throw ConfigError("rectangle actuator needs 0 <= x0 < x1 <= 1 and 0 <= y0 < y1 <= 1");
    }
    Actuator a;
    a.kind = ActuatorKind::Rect;
    a.x0 = x0;
    a.x1 = x1;
    a.y0 = y0;
    a.y1 = y1;
    a.f = std::move(f);
    if (a.f) a.distribution_name = "custom";
    a.nodes = nodes;
    return a;
  }

  /// Smooth bump sin^2 x sin^2 vanishing on the rectangle's edges.
  static Actuator rect_bump(double x0, double x1, double y0, double y1, int nodes = 0) {
    Actuator a = rect(x0, x1, y0, y1,
                      [=](double x, double y) {
                        const double sx = std::sin(std::numbers::pi * (x - x0) / (x1 - x0));
                        const double sy = std::sin(std::numbers::pi * (y - y0) / (y1 - y0));
                        return sx * sx * sy * sy;
                      },
                      nodes);
    a.distribution_name = "bump";
    return a;
  }

  double value(double x, double y) const { return f ? f(x, y) : 1.0; }

  std::string describe() const {
    std::ostringstream os;
    switch (kind) {
      case ActuatorKind::Point: os << "point (" << sigma.x << ", " << sigma.y << ")"; break;
      case ActuatorKind::Segment:
        os << "segment " << to_string(segment.side) << " [" << segment.s0 << ", " << segment.s1 << "] "
           << distribution_name;
        break;
      case ActuatorKind::Rect:
        os << "rect [" << x0 << ", " << x1 << "] x [" << y0 << ", " << y1 << "] " << distribution_name;
        break;
    }
    return os.str();
  }
};

namespace detail {

/// Nodes per direction: at least 8 per wavelength of the highest mode.
inline int min_zone_nodes(int N, double length) {
  return static_cast<int>(std::ceil(4.0 * length * N));
}

inline int zone_nodes(const Actuator& act, int N, double length) {
  const int needed = min_zone_nodes(N, length);
  if (act.nodes > 0) {
    if (act.nodes < needed) {
      throw AccuracyError("actuator " + act.describe() + ": " + std::to_string(act.nodes) +
                          " quadrature nodes per direction, at least " + std::to_string(needed) +
                          " needed for N = " + std::to_string(N));
    }
    return act.nodes;
  }
  return std::max(2 * needed, 2 * kPanelOrder);
}

}  // namespace detail

/// Closed form of int_{d1}^{d2} (xi + d xi/ds) ds along a side for f = 1.
inline double segment_coefficient_closed_form(const Mode& m, Side side, double d1, double d2) {
  const bool vertical = side == Side::Left || side == Side::Right;
  const int n = vertical ? m.j : m.i;  // wavenumber along the side
  const int across = vertical ? m.i : m.j;
  const double sign = (side == Side::Right || side == Side::Top) && (across % 2 == 1) ? -1.0 : 1.0;
  const double npi = n * std::numbers::pi;
  return sign * (2.0 * m.a / npi) *
         (std::sin(npi * d2) - std::sin(npi * d1) + npi * (std::cos(npi * d2) - std::cos(npi * d1)));
}

/// g^i_k: pairing of the actuator's spatial column with each mode.
///   point:   xi_k(sigma)
///   rect:    int_D f xi_k dx dy
///   segment: int_D f (xi_k + d xi_k/ds) ds
inline StateCoeffs actuator_coeffs(const SpectralBasis& basis, const Actuator& act) {
  StateCoeffs g = StateCoeffs::zeros(basis);
  switch (act.kind) {
    case ActuatorKind::Point:
      g.c = basis.eval_all(act.sigma.x, act.sigma.y);
      return g;
    case ActuatorKind::Segment: {
      const Arc& arc = act.segment;
      const int n = detail::zone_nodes(act, basis.N(), arc.length());
      if (!act.f) {
        for (int k = 0; k < basis.size(); ++k) {
          g.c[k] = segment_coefficient_closed_form(basis.mode(k), arc.side, arc.s0, arc.s1);
        }
        return g;
      }
      const Rule1D rule = composite_gauss(arc.s0, arc.s1, panels_for(n));
      const bool vertical = arc.side == Side::Left || arc.side == Side::Right;
      Eigen::VectorXd dx, dy;
      for (int q = 0; q < rule.nodes.size(); ++q) {
        const Point p = side_point(arc.side, rule.nodes[q]);
        basis.eval_gradient_all(p.x, p.y, dx, dy);
        const double w = rule.weights[q] * act.value(p.x, p.y);
        g.c += w * (basis.eval_all(p.x, p.y) + (vertical ? dy : dx));
      }
      return g;
    }
    case ActuatorKind::Rect: {
      const int nx = detail::zone_nodes(act, basis.N(), act.x1 - act.x0);
      const int ny = detail::zone_nodes(act, basis.N(), act.y1 - act.y0);
      const Rule1D rx = composite_gauss(act.x0, act.x1, panels_for(nx));
      const Rule1D ry = composite_gauss(act.y0, act.y1, panels_for(ny));
      // Separable: int f cos(i pi x) cos(j pi y) accumulated as a matrix in (i, j).
      const int N = basis.N();
      Eigen::MatrixXd cx(rx.nodes.size(), N + 1), cy(ry.nodes.size(), N + 1);
      for (int q = 0; q < rx.nodes.size(); ++q)
        for (int i = 0; i <= N; ++i) cx(q, i) = std::cos(i * std::numbers::pi * rx.nodes[q]);
      for (int q = 0; q < ry.nodes.size(); ++q)
        for (int j = 0; j <= N; ++j) cy(q, j) = std::cos(j * std::numbers::pi * ry.nodes[q]);
      Eigen::MatrixXd F(rx.nodes.size(), ry.nodes.size());
      for (int qx = 0; qx < rx.nodes.size(); ++qx)
        for (int qy = 0; qy < ry.nodes.size(); ++qy)
          F(qx, qy) = rx.weights[qx] * ry.weights[qy] * act.value(rx.nodes[qx], ry.nodes[qy]);
      const Eigen::MatrixXd I = cx.transpose() * F * cy;  // (N+1) x (N+1)
      for (int k = 0; k < basis.size(); ++k) {
        const Mode& m = basis.mode(k);
        g.c[k] = 2.0 * m.a * I(m.i, m.j);
      }
      return g;
    }
  }
  return g;
}

inline std::vector<StateCoeffs> actuator_columns(const SpectralBasis& basis, const std::vector<Actuator>& acts) {
  std::vector<StateCoeffs> cols;
  cols.reserve(acts.size());
  for (const Actuator& a : acts) cols.push_back(actuator_coeffs(basis, a));
  return cols;
}

/// G_g: entry (i, k) is g^i of the k-th mode of the group.
inline Eigen::MatrixXd build_G(const SpectralBasis& basis, const std::vector<StateCoeffs>& cols, int group) {
  if (cols.empty()) throw ConfigError("build_G: at least one actuator is required");
  if (group < 0 || group >= basis.group_count()) throw DomainError("build_G: no such group");
  const ModeGroup& grp = basis.groups()[group];
  if (grp.size == 0) throw DomainError("build_G: empty group");
  Eigen::MatrixXd G(static_cast<Eigen::Index>(cols.size()), grp.size);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    check_basis(basis, cols[i], "build_G");
    G.row(static_cast<Eigen::Index>(i)) = cols[i].c.segment(grp.first, grp.size).transpose();
  }
  return G;
}

inline Eigen::MatrixXd build_G(const SpectralBasis& basis, const std::vector<Actuator>& acts, int group) {
  return build_G(basis, actuator_columns(basis, acts), group);
}

struct GroupRank {
  int group = 0;
  int key = 0;  // i^2 + j^2
  int r = 0;
  int rank = 0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  bool pass = false;
};

struct StrategicReport {
  int p = 0;
  int r_max = 0;
  std::vector<GroupRank> per_group;
  std::vector<int> failing_groups;
  std::vector<int> vanishing_trace_groups;  // advisory: all traces on Gamma below tolerance
  bool verdict = false;
};

/// Rank test of every G_g in the truncation.
///
/// Each actuator's row is scaled by its largest coefficient before the SVD,
/// so the verdict does not depend on actuator amplitudes. A singular value
/// counts when it exceeds rank_tol times both the group's largest singular
/// value and that unit row scale.
inline StrategicReport strategic_check(const SpectralBasis& basis, const std::vector<StateCoeffs>& cols,
                                       double rank_tol = 1e-10, const BoundaryRegion* region = nullptr) {
  if (!(rank_tol > 0.0)) throw ConfigError("strategic_check: rank_tol must be positive");
  StrategicReport rep;
  rep.p = static_cast<int>(cols.size());
  rep.r_max = basis.max_multiplicity();
  Eigen::VectorXd row_scale = Eigen::VectorXd::Ones(rep.p);
  for (int i = 0; i < rep.p; ++i) {
    check_basis(basis, cols[i], "strategic_check");
    const double s = cols[i].c.cwiseAbs().maxCoeff();
    if (s > 0.0) row_scale[i] = 1.0 / s;
  }
  bool all_full = true;
  for (int g = 0; g < basis.group_count(); ++g) {
    const ModeGroup& grp = basis.groups()[g];
    GroupRank gr;
    gr.group = g;
    gr.key = grp.key;
    gr.r = grp.size;
    if (rep.p > 0) {
      const Eigen::MatrixXd G = build_G(basis, cols, g);
      const Eigen::JacobiSVD<Eigen::MatrixXd> raw(G);
      gr.sigma_max = raw.singularValues()[0];
      gr.sigma_min = raw.singularValues()[raw.singularValues().size() - 1];
      const Eigen::JacobiSVD<Eigen::MatrixXd> scaled(row_scale.asDiagonal() * G);
      const Eigen::VectorXd& sv = scaled.singularValues();
      const double cut = rank_tol * std::max(sv[0], 1.0);
      for (int k = 0; k < sv.size(); ++k) {
        if (sv[k] > cut && sv[k] > rank_tol * sv[0]) ++gr.rank;
      }
    }
    gr.pass = gr.rank == gr.r;
    if (!gr.pass) {
      rep.failing_groups.push_back(g);
      all_full = false;
    }
    rep.per_group.push_back(gr);
  }
  if (region) {
    const Eigen::MatrixXd P = trace_matrix(basis, *region);
    const double scale = P.cwiseAbs().maxCoeff();
    for (int g = 0; g < basis.group_count(); ++g) {
      const ModeGroup& grp = basis.groups()[g];
      if (P.middleCols(grp.first, grp.size).cwiseAbs().maxCoeff() <= rank_tol * scale) {
        rep.vanishing_trace_groups.push_back(g);
      }
    }
  }
  rep.verdict = rep.p >= rep.r_max && all_full;
  return rep;
}

inline StrategicReport strategic_check(const SpectralBasis& basis, const std::vector<Actuator>& acts,
                                       double rank_tol = 1e-10, const BoundaryRegion* region = nullptr) {
  return strategic_check(basis, actuator_columns(basis, acts), rank_tol, region);
}

}  // namespace fracbc
