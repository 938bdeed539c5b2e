#pragma once

// Composite Gauss-Legendre rules and panel-wise interpolation.

#include <boost/math/quadrature/gauss.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "fracbc/errors.hpp"

namespace fracbc {

/// Nodes per Gauss-Legendre panel.
inline constexpr int kPanelOrder = 8;

/// The 8-point rule on [-1, 1] in increasing node order.
inline const std::array<std::pair<double, double>, kPanelOrder>& gauss_panel() {
  static const auto rule = [] {
    using G = boost::math::quadrature::gauss<double, kPanelOrder>;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    std::array<std::pair<double, double>, kPanelOrder> r{};
    const int half = kPanelOrder / 2;
    for (int k = 0; k < half; ++k) {
      r[half - 1 - k] = {-x[k], w[k]};
      r[half + k] = {x[k], w[k]};
    }
    return r;
  }();
  return rule;
}

struct Rule1D {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  int panels = 0;
};

/// Composite rule with `panels` equal panels of 8 Gauss nodes on [a, b].
inline Rule1D composite_gauss(double a, double b, int panels) {
  if (panels < 1) throw ConfigError("composite_gauss: need at least one panel");
  if (!(b > a)) throw ConfigError("composite_gauss: empty interval");
  Rule1D r;
  r.panels = panels;
  r.nodes.resize(panels * kPanelOrder);
  r.weights.resize(panels * kPanelOrder);
  const double width = (b - a) / panels;
  const auto& g = gauss_panel();
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * width;
    for (int k = 0; k < kPanelOrder; ++k) {
      r.nodes[p * kPanelOrder + k] = mid + 0.5 * width * g[k].first;
      r.weights[p * kPanelOrder + k] = 0.5 * width * g[k].second;
    }
  }
  return r;
}

/// Panels needed for at least `nodes` nodes.
inline int panels_for(int nodes) { return std::max(1, (nodes + kPanelOrder - 1) / kPanelOrder); }

/// Lagrange interpolation of panel values at s in [a, b] for a composite rule.
inline double interpolate_panels(const Rule1D& rule, double a, double b, const Eigen::VectorXd& values, double s) {
  const double width = (b - a) / rule.panels;
  int p = static_cast<int>(std::floor((s - a) / width));
  p = std::clamp(p, 0, rule.panels - 1);
  const int off = p * kPanelOrder;
  double acc = 0.0;
  for (int k = 0; k < kPanelOrder; ++k) {
    double l = 1.0;
    const double xk = rule.nodes[off + k];
    for (int m = 0; m < kPanelOrder; ++m) {
      if (m != k) l *= (s - rule.nodes[off + m]) / (xk - rule.nodes[off + m]);
    }
    acc += l * values[off + k];
  }
  return acc;
}

}  // namespace fracbc
