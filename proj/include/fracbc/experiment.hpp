#pragma once

// Experiment configuration (flat "key = value" files) and the boundary-target
// reproduction driver that writes CSV artifacts and a plot script.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fracbc/actuation.hpp"
#include "fracbc/boundary.hpp"
#include "fracbc/errors.hpp"
#include "fracbc/fdm_oracle.hpp"
#include "fracbc/hum.hpp"
#include "fracbc/spectral.hpp"

namespace fracbc {

/// 0.017 + 4 (y - 1/4)^2 (y - 3/4)^2 on [1/4, 3/4], zero elsewhere.
inline double paper_fig1_target(double y) {
  if (y < 0.25 || y > 0.75) return 0.0;
  const double a = y - 0.25, b = y - 0.75;
  return 0.017 + 4.0 * a * a * b * b;
}

/// Shortest round-trip decimal form (17 significant digits).
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::vector<std::string> words(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> w;
  std::string t;
  while (is >> t) w.push_back(t);
  return w;
}

inline double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(what + ": '" + s + "' is not a finite number");
  }
}

inline int to_int(const std::string& s, const std::string& what) {
  const double v = to_double(s, what);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(what + ": '" + s + "' is not an integer");
  return static_cast<int>(v);
}

}  // namespace detail

/// "left 0.25 0.75; top 0 0.5"
inline std::vector<Arc> parse_region(const std::string& spec) {
  std::vector<Arc> arcs;
  for (const std::string& part : detail::split(spec, ';')) {
    const auto w = detail::words(part);
    if (w.size() != 3) throw ConfigError("region arc '" + part + "' must read: <side> <s0> <s1>");
    arcs.push_back({parse_side(w[0]), detail::to_double(w[1], "region"), detail::to_double(w[2], "region")});
  }
  if (arcs.empty()) throw ConfigError("region is empty");
  return arcs;
}

/// "point X Y", "rect X0 X1 Y0 Y1 [uniform|bump]", "segment SIDE S0 S1".
inline Actuator parse_actuator(const std::string& spec) {
  const auto w = detail::words(spec);
  if (w.empty()) throw ConfigError("empty actuator specification");
  auto num = [&](std::size_t k) { return detail::to_double(w[k], "actuator '" + spec + "'"); };
  if (w[0] == "point" && w.size() == 3) {
    try {
      return Actuator::point(num(1), num(2));
    } catch (const DomainError& e) {
      throw ConfigError(std::string("actuator '") + spec + "': " + e.what());
    }
  }
  if (w[0] == "rect" && (w.size() == 5 || w.size() == 6)) {
    const std::string dist = w.size() == 6 ? w[5] : "uniform";
    if (dist == "uniform") return Actuator::rect(num(1), num(2), num(3), num(4));
    if (dist == "bump") return Actuator::rect_bump(num(1), num(2), num(3), num(4));
    throw ConfigError("actuator '" + spec + "': distribution must be uniform or bump");
  }
  if (w[0] == "segment" && w.size() == 4) return Actuator::on_segment(parse_side(w[1]), num(2), num(3));
  throw ConfigError("actuator '" + spec + "' must read 'point X Y', 'rect X0 X1 Y0 Y1 [uniform|bump]' or 'segment SIDE S0 S1'");
}

/// Time profile applied to every actuator: "const C", "sine OFFSET AMP FREQ"
/// (OFFSET + AMP sin(FREQ t)) or "file PATH" (CSV rows t, u_1..u_p on the grid).
struct ControlSpec {
  std::string kind = "const";
  std::vector<double> params{1.0};
  std::string path;

  static ControlSpec parse(const std::string& spec) {
    const auto w = detail::words(spec);
    ControlSpec c;
    if (w.empty()) throw ConfigError("empty control specification");
    c.kind = w[0];
    c.params.clear();
    if (c.kind == "file" && w.size() == 2) {
      c.path = w[1];
      return c;
    }
    const std::size_t want = c.kind == "const" ? 1 : c.kind == "sine" ? 3 : 0;
    if (want == 0 || w.size() != want + 1) {
      throw ConfigError("control '" + spec + "' must read 'const C', 'sine OFFSET AMP FREQ' or 'file PATH'");
    }
    for (std::size_t k = 1; k < w.size(); ++k) c.params.push_back(detail::to_double(w[k], "control"));
    return c;
  }

  ControlSignal build(const TimeGrid& grid, int p) const {
    ControlSignal u(grid, p);
    if (kind == "file") {
      std::ifstream in(path);
      if (!in) throw ConfigError("control file '" + path + "' cannot be read");
      std::string line;
      int m = 0;
      while (std::getline(in, line)) {
        line = detail::trim(line);
        if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
        const auto cells = detail::split(line, ',');
        if (static_cast<int>(cells.size()) != p + 1) throw ConfigError("control file row needs t and " + std::to_string(p) + " values");
        if (m > grid.M) throw ConfigError("control file has more rows than grid nodes");
        for (int i = 0; i < p; ++i) u.u(i, m) = detail::to_double(cells[i + 1], "control file");
        ++m;
      }
      if (m != grid.size()) throw ConfigError("control file has " + std::to_string(m) + " rows, grid has " + std::to_string(grid.size()));
      return u;
    }
    for (int m = 0; m < grid.size(); ++m) {
      const double t = grid.t(m);
      const double v = kind == "const" ? params[0] : params[0] + params[1] * std::sin(params[2] * t);
      u.u.col(m).setConstant(v);
    }
    return u;
  }
};

/// "paper_fig1" or "file PATH" with CSV rows (s, value) interpolated linearly.
struct TargetSpec {
  std::string kind = "paper_fig1";
  std::vector<std::pair<double, double>> samples;

  static TargetSpec parse(const std::string& spec) {
    const auto w = detail::words(spec);
    TargetSpec t;
    if (w.size() == 1 && w[0] == "paper_fig1") return t;
    if (w.size() != 2 || w[0] != "file") throw ConfigError("target must be 'paper_fig1' or 'file PATH'");
    t.kind = "file";
    std::ifstream in(w[1]);
    if (!in) throw ConfigError("target file '" + w[1] + "' cannot be read");
    std::string line;
    while (std::getline(in, line)) {
      line = detail::trim(line);
      if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
      const auto cells = detail::split(line, ',');
      if (cells.size() != 2) throw ConfigError("target file rows must read s, value");
      t.samples.push_back({detail::to_double(cells[0], "target file"), detail::to_double(cells[1], "target file")});
    }
    if (t.samples.size() < 2) throw ConfigError("target file needs at least two samples");
    std::sort(t.samples.begin(), t.samples.end());
    return t;
  }

  double value(double s) const {
    if (kind == "paper_fig1") return paper_fig1_target(s);
    if (s <= samples.front().first) return samples.front().second;
    if (s >= samples.back().first) return samples.back().second;
    const auto hi = std::lower_bound(samples.begin(), samples.end(), std::make_pair(s, -HUGE_VAL));
    const auto lo = hi - 1;
    const double f = (s - lo->first) / (hi->first - lo->first);
    return lo->second + f * (hi->second - lo->second);
  }

  BoundaryTrace sample(const BoundaryRegion& region) const {
    BoundaryTrace t = BoundaryTrace::zeros(region);
    for (int k = 0; k < region.size(); ++k) t.values[k] = value(region.param(k));
    return t;
  }
};

struct ExperimentConfig {
  std::vector<double> alphas{0.4, 0.6, 0.8, 1.0};
  double b = 5.0;
  int N = 20;
  int M = 500;
  std::vector<Arc> region{{Side::Left, 0.25, 0.75}};
  int region_nodes = 64;
  double r = 0.1;
  int omega_mesh = 200;
  std::vector<std::string> actuators{"point 0 0.5"};
  TargetSpec target;
  ControlSpec control;
  double eps = 1e-8;  // relative to eig_max of the Gram
  double rank_tol = 1e-10;
  int eval_grid = 21;
  std::vector<int> fdm_nx{16, 32};
  int fdm_M = 1000;
  std::string output = "fig1_out";

  static const std::vector<std::string>& keys() {
    static const std::vector<std::string> k = {"alpha", "b", "N", "M", "region", "region_nodes", "r", "omega_mesh",
                                               "actuator", "target", "control", "eps", "rank_tol", "eval_grid",
                                               "fdm_nx", "fdm_M", "output"};
    return k;
  }

  std::vector<Actuator> build_actuators() const {
    std::vector<Actuator> out;
    for (const std::string& s : actuators) out.push_back(parse_actuator(s));
    return out;
  }

  BoundaryRegion build_region() const { return BoundaryRegion(region, region_nodes); }
  TimeGrid grid() const { return TimeGrid(b, M); }

  void validate() const {
    if (alphas.empty()) throw ConfigError("alpha list is empty");
    for (double a : alphas) {
      if (!(a > 0.0 && a <= 1.0)) throw ConfigError("alpha " + fmt17(a) + " outside (0, 1]");
    }
    if (!(b > 0.0)) throw ConfigError("b must be positive");
    if (N < 1 || N > SpectralBasis::kMaxN) throw ConfigError("N must lie in [1, 200]");
    if (M < 1) throw ConfigError("M must be at least 1");
    if (region_nodes < 1) throw ConfigError("region_nodes must be positive");
    if (!(r > 0.0 && r < 0.5)) throw ConfigError("r must lie in (0, 1/2)");
    if (omega_mesh < 2) throw ConfigError("omega_mesh must be at least 2");
    if (actuators.empty()) throw ConfigError("at least one actuator is required");
    if (!(eps >= 0.0)) throw ConfigError("eps must be non-negative");
    if (!(rank_tol > 0.0)) throw ConfigError("rank_tol must be positive");
    if (eval_grid < 2) throw ConfigError("eval_grid must be at least 2");
    if (fdm_nx.empty()) throw ConfigError("fdm_nx list is empty");
    if (output.empty()) throw ConfigError("output directory is empty");
    build_actuators();
    build_region();
  }

  void set(const std::string& key, const std::string& value) {
    const std::string what = "key '" + key + "'";
    if (key == "alpha") {
      alphas.clear();
      for (const auto& v : detail::split(value, ',')) alphas.push_back(detail::to_double(v, what));
    } else if (key == "b") b = detail::to_double(value, what);
    else if (key == "N") N = detail::to_int(value, what);
    else if (key == "M") M = detail::to_int(value, what);
    else if (key == "region") region = parse_region(value);
    else if (key == "region_nodes") region_nodes = detail::to_int(value, what);
    else if (key == "r") r = detail::to_double(value, what);
    else if (key == "omega_mesh") omega_mesh = detail::to_int(value, what);
    else if (key == "actuator") actuators = detail::split(value, ';');
    else if (key == "target") target = TargetSpec::parse(value);
    else if (key == "control") control = ControlSpec::parse(value);
    else if (key == "eps") eps = detail::to_double(value, what);
    else if (key == "rank_tol") rank_tol = detail::to_double(value, what);
    else if (key == "eval_grid") eval_grid = detail::to_int(value, what);
    else if (key == "fdm_nx") {
      fdm_nx.clear();
      for (const auto& v : detail::split(value, ',')) fdm_nx.push_back(detail::to_int(v, what));
    } else if (key == "fdm_M") fdm_M = detail::to_int(value, what);
    else if (key == "output") output = value;
    else throw ConfigError("unknown key '" + key + "'");
  }
};

/// Parses "key = value" lines over the defaults; '#' starts a comment.
inline ExperimentConfig parse_config(std::istream& in, const std::string& origin = "<config>",
                                     ExperimentConfig cfg = {}) {
  std::string line;
  int lineno = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq)), value = detail::trim(line.substr(eq + 1));
    if (seen.count(key)) throw ConfigError(where + "key '" + key + "' repeated (first on line " + std::to_string(seen[key]) + ")");
    seen[key] = lineno;
    try {
      cfg.set(key, value);
    } catch (const std::exception& e) {
      throw ConfigError(where + e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  return parse_config(in, path);
}

struct ReproductionRow {
  double alpha = 0.0;
  double residual = 0.0;
  double energy = 0.0;
  double eig_min = 0.0;
  double eig_max = 0.0;
  double strip_residual = 0.0;
  double extension_error = 0.0;
  double hum_residual = 0.0;  // direct R_Gamma route, diagnostic
  int cg_iterations = 0;
};

/// Label used in file names: 0.4 -> "0.4", 1 -> "1".
inline std::string alpha_label(double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", alpha);
  return buf;
}

namespace detail {

inline void write_trace_csv(const std::string& path, const char* coord, const BoundaryRegion& region,
                            const Eigen::VectorXd& coords, const BoundaryTrace& target, const BoundaryTrace& achieved) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << coord << ",target,achieved,weight\n";
  for (int k = 0; k < region.size(); ++k) {
    out << fmt17(coords[k]) << ',' << fmt17(target.values[k]) << ',' << fmt17(achieved.values[k]) << ','
        << fmt17(region.weight(k)) << '\n';
  }
}

inline void write_control_csv(const std::string& path, const ControlSignal& u) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << 't';
  for (int i = 0; i < u.p(); ++i) out << ",u" << i + 1;
  out << '\n';
  for (int m = 0; m < u.grid.size(); ++m) {
    out << fmt17(u.grid.t(m));
    for (int i = 0; i < u.p(); ++i) out << ',' << fmt17(u.u(i, m));
    out << '\n';
  }
}

inline const char* kPlotScript = R"PY(#!/usr/bin/env python3
"""Plots the boundary-target reproduction from the CSVs in this directory."""
import csv
import glob
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))


def read(path):
    with open(path) as f:
        rows = list(csv.reader(f))
    return rows[0], [[float(v) for v in r] for r in rows[1:]]


fig, ax = plt.subplots(figsize=(6, 4))
target_drawn = False
for path in sorted(glob.glob(os.path.join(here, "trace_alpha*.csv"))):
    alpha = os.path.basename(path)[len("trace_alpha"):-len(".csv")]
    _, rows = read(path)
    y = [r[0] for r in rows]
    if not target_drawn:
        ax.plot(y, [r[1] for r in rows], "k-", lw=2, label="target")
        target_drawn = True
    ax.plot(y, [r[2] for r in rows], "--", label="reached, alpha=" + alpha)
ax.set_xlabel("y on Gamma")
ax.set_ylabel("z(0, y, b)")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(here, "fig1_trace.png"), dpi=150)

fig, ax = plt.subplots(figsize=(6, 4))
for path in sorted(glob.glob(os.path.join(here, "control_alpha*.csv"))):
    alpha = os.path.basename(path)[len("control_alpha"):-len(".csv")]
    _, rows = read(path)
    ax.plot([r[0] for r in rows], [r[1] for r in rows], label="alpha=" + alpha)
ax.set_xlabel("t")
ax.set_ylabel("u*(t)")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(here, "fig2_control.png"), dpi=150)
)PY";

}  // namespace detail

/// Boundary-target reproduction: for each alpha, the internal-transfer
/// control through omega_r, plus the direct R_Gamma control as a diagnostic.
/// Writes trace_alpha{A}.csv, control_alpha{A}.csv, summary.csv and
/// plot_fig1.py into cfg.output when `write` is set.
inline std::vector<ReproductionRow> run_reproduction(const ExperimentConfig& cfg, bool write = true,
                                                     const std::function<void(const ReproductionRow&)>& progress = {}) {
  cfg.validate();
  const SpectralBasis basis(cfg.N);
  const BoundaryRegion region = cfg.build_region();
  const InternalRegion omega = build_omega_r(region, cfg.r, cfg.omega_mesh);
  const BoundaryTrace zb = cfg.target.sample(region);
  const std::vector<Actuator> acts = cfg.build_actuators();
  const StateCoeffs z0 = StateCoeffs::zeros(basis);
  if (write) std::filesystem::create_directories(cfg.output);

  std::vector<ReproductionRow> rows;
  for (double alpha : cfg.alphas) {
    const Plant plant(basis, alpha, acts, cfg.grid());
    GramOperator lambda = assemble_lambda(plant, omega);
    lambda.set_regularization(cfg.eps);
    const ControlSynthesis s = transfer_control(lambda, plant, omega, region, z0, zb);
    GramOperator rg = assemble_R_gamma(plant, region);
    rg.set_regularization(cfg.eps);
    const ControlSynthesis h = min_energy_control(rg, plant, region, z0, zb);

    ReproductionRow row{alpha, s.residual, s.energy, lambda.eig_min, lambda.eig_max, s.strip_residual,
                        s.extension_error, h.residual, s.iterations};
    rows.push_back(row);
    if (write) {
      Eigen::VectorXd coords(region.size());
      for (int k = 0; k < region.size(); ++k) coords[k] = region.param(k);
      const std::string label = alpha_label(alpha);
      detail::write_trace_csv(cfg.output + "/trace_alpha" + label + ".csv", "y", region, coords, zb, s.achieved);
      detail::write_control_csv(cfg.output + "/control_alpha" + label + ".csv", s.u_star);
    }
    if (progress) progress(row);
  }
  if (write) {
    std::ofstream sum(cfg.output + "/summary.csv");
    if (!sum) throw ConfigError("cannot write '" + cfg.output + "/summary.csv'");
    sum << "alpha,residual,energy,eig_min,eig_max,strip_residual,extension_error,hum_residual\n";
    for (const auto& r : rows) {
      sum << fmt17(r.alpha) << ',' << fmt17(r.residual) << ',' << fmt17(r.energy) << ',' << fmt17(r.eig_min) << ','
          << fmt17(r.eig_max) << ',' << fmt17(r.strip_residual) << ',' << fmt17(r.extension_error) << ','
          << fmt17(r.hum_residual) << '\n';
    }
    std::ofstream py(cfg.output + "/plot_fig1.py");
    py << detail::kPlotScript;
  }
  return rows;
}

}  // namespace fracbc
