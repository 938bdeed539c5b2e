#pragma once

// Finite-difference cross-check of the spectral mild solution: L1 time
// stepping of the Riemann-Liouville derivative (zero initial data) with an
// implicit 5-point Neumann Laplacian on the vertex grid x_i = i / nx.
//
// The spectral state lives in the H^1-normalized cosine basis with
// i, j >= 1, so an actuator acts through the function
// F = (I - Delta)^{-1} P f, where P removes the cosines with i = 0 or j = 0.
// The grid solver applies the same map with the discrete operators. The
// discrete cosines are exact eigenvectors of the grid Laplacian, so P and
// Delta_h commute.

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cmath>
#include <string>
#include <vector>

#include "fracbc/actuation.hpp"
#include "fracbc/errors.hpp"
#include "fracbc/spectral.hpp"

namespace fracbc {

struct FDMConfig {
  int nx = 32;
  int ny = 32;
  int M = 1000;
  double alpha = 0.5;
  double b = 1.0;
  std::string scheme = "L1";

  void validate() const {
    if (nx < 8 || ny < 8) throw ConfigError("FDM grid needs nx, ny >= 8");
    if (M < 50) throw ConfigError("FDM needs M >= 50 time steps");
    detail::check_alpha(alpha);
    if (!(b > 0.0)) throw ConfigError("FDM horizon b must be positive");
    if (scheme != "L1") throw ConfigError("unknown FDM scheme '" + scheme + "' (only L1)");
  }

  /// The implicit L1 step is unconditionally stable; this ratio is advisory.
  double cfl_ratio() const {
    const double h = 1.0 / std::max(nx, ny);
    return std::pow(b / M, alpha) / (h * h);
  }
};

/// Grid field, entry (i, j) at (i / nx, j / ny).
struct GridField {
  Eigen::MatrixXd values;
  int nx = 0, ny = 0;

  /// Trapezoid weights of the vertex grid, the discrete L2 inner product.
  static Eigen::MatrixXd weights(int nx, int ny) {
    Eigen::VectorXd wx = Eigen::VectorXd::Constant(nx + 1, 1.0 / nx), wy = Eigen::VectorXd::Constant(ny + 1, 1.0 / ny);
    wx[0] *= 0.5;
    wx[nx] *= 0.5;
    wy[0] *= 0.5;
    wy[ny] *= 0.5;
    return wx * wy.transpose();
  }

  double l2_norm() const { return std::sqrt((values.array().square() * weights(nx, ny).array()).sum()); }
};

namespace detail {

inline int grid_index(int i, int j, int nx) { return j * (nx + 1) + i; }

/// Neumann 5-point Laplacian with mirrored ghost nodes.
inline Eigen::SparseMatrix<double> neumann_laplacian(int nx, int ny) {
  const double hx2 = double(nx) * nx, hy2 = double(ny) * ny;
  const int n = (nx + 1) * (ny + 1);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(5 * n);
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const int r = grid_index(i, j, nx);
      t.emplace_back(r, r, -2.0 * hx2 - 2.0 * hy2);
      // Ghost u_{-1} = u_1 doubles the inward neighbour at the edges.
      if (i == 0) t.emplace_back(r, grid_index(1, j, nx), 2.0 * hx2);
      else if (i == nx) t.emplace_back(r, grid_index(nx - 1, j, nx), 2.0 * hx2);
      else {
        t.emplace_back(r, grid_index(i - 1, j, nx), hx2);
        t.emplace_back(r, grid_index(i + 1, j, nx), hx2);
      }
      if (j == 0) t.emplace_back(r, grid_index(i, 1, nx), 2.0 * hy2);
      else if (j == ny) t.emplace_back(r, grid_index(i, ny - 1, nx), 2.0 * hy2);
      else {
        t.emplace_back(r, grid_index(i, j - 1, nx), hy2);
        t.emplace_back(r, grid_index(i, j + 1, nx), hy2);
      }
    }
  }
  Eigen::SparseMatrix<double> L(n, n);
  L.setFromTriplets(t.begin(), t.end());
  return L;
}

/// Removes the i = 0 and j = 0 discrete cosines (trapezoid means along each axis).
inline Eigen::MatrixXd remove_zero_index(const Eigen::MatrixXd& f) {
  const int nx = static_cast<int>(f.rows()) - 1, ny = static_cast<int>(f.cols()) - 1;
  Eigen::VectorXd wx = Eigen::VectorXd::Constant(nx + 1, 1.0 / nx), wy = Eigen::VectorXd::Constant(ny + 1, 1.0 / ny);
  wx[0] *= 0.5;
  wx[nx] *= 0.5;
  wy[0] *= 0.5;
  wy[ny] *= 0.5;
  const Eigen::RowVectorXd mean_x = wx.transpose() * f;  // function of y
  const Eigen::VectorXd mean_y = f * wy;                 // function of x
  const double mean = wx.dot(mean_y);
  Eigen::MatrixXd out = f;
  out.rowwise() -= mean_x;
  out.colwise() -= mean_y;
  out.array() += mean;
  return out;
}

inline Eigen::VectorXd flatten(const Eigen::MatrixXd& f) {
  const int nx = static_cast<int>(f.rows()) - 1, ny = static_cast<int>(f.cols()) - 1;
  Eigen::VectorXd v((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) v[grid_index(i, j, nx)] = f(i, j);
  return v;
}

inline Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, int nx, int ny) {
  Eigen::MatrixXd f(nx + 1, ny + 1);
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) f(i, j) = v[grid_index(i, j, nx)];
  return f;
}

/// Grid density of an actuator. A point becomes a bilinear hat of one cell
/// divided by the trapezoid node weight, so that sum_w f phi equals the
/// bilinear interpolant of phi at sigma.
inline Eigen::MatrixXd actuator_density(const Actuator& act, int nx, int ny) {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(nx + 1, ny + 1);
  switch (act.kind) {
    case ActuatorKind::Point: {
      const Eigen::MatrixXd w = GridField::weights(nx, ny);
      const double sx = act.sigma.x * nx, sy = act.sigma.y * ny;
      const int i0 = std::min(static_cast<int>(std::floor(sx)), nx - 1), j0 = std::min(static_cast<int>(std::floor(sy)), ny - 1);
      const double fx = sx - i0, fy = sy - j0;
      const double c[2][2] = {{(1 - fx) * (1 - fy), (1 - fx) * fy}, {fx * (1 - fy), fx * fy}};
      for (int a = 0; a < 2; ++a)
        for (int bb = 0; bb < 2; ++bb) f(i0 + a, j0 + bb) += c[a][bb] / w(i0 + a, j0 + bb);
      return f;
    }
    case ActuatorKind::Rect:
      for (int i = 0; i <= nx; ++i) {
        for (int j = 0; j <= ny; ++j) {
          const double x = double(i) / nx, y = double(j) / ny;
          if (x >= act.x0 && x <= act.x1 && y >= act.y0 && y <= act.y1) f(i, j) = act.value(x, y);
        }
      }
      return f;
    case ActuatorKind::Segment:
      break;
  }
  throw ConfigError("FDM oracle supports point and rectangle actuators, not " + act.describe());
}

}  // namespace detail

/// L1 time stepping to t = b from zero initial data. u must live on TimeGrid(b, M).
inline GridField fdm_solve(const FDMConfig& cfg, const std::vector<Actuator>& actuators, const ControlSignal& u) {
  cfg.validate();
  u.validate();
  if (!(u.grid == TimeGrid(cfg.b, cfg.M))) throw ConfigError("FDM control must be sampled on TimeGrid(b, M)");
  if (u.p() != static_cast<int>(actuators.size())) throw ConfigError("FDM: control rows do not match actuators");
  const int nx = cfg.nx, ny = cfg.ny, n = (nx + 1) * (ny + 1);
  const Eigen::SparseMatrix<double> L = detail::neumann_laplacian(nx, ny);
  Eigen::SparseMatrix<double> I(n, n);
  I.setIdentity();

  // Actuator functions F_i = (I - Delta_h)^{-1} P f_i.
  Eigen::MatrixXd F(n, static_cast<Eigen::Index>(actuators.size()));
  {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> riesz;
    riesz.compute(I - L);
    if (riesz.info() != Eigen::Success) throw NumericalError("FDM: Riesz operator factorization failed");
    for (std::size_t a = 0; a < actuators.size(); ++a) {
      const Eigen::VectorXd rhs = detail::flatten(detail::remove_zero_index(detail::actuator_density(actuators[a], nx, ny)));
      F.col(static_cast<Eigen::Index>(a)) = riesz.solve(rhs);
    }
  }

  const double dt = cfg.b / cfg.M;
  const double mu = std::pow(dt, -cfg.alpha) / std::tgamma(2.0 - cfg.alpha);
  std::vector<double> bk(cfg.M);
  for (int k = 0; k < cfg.M; ++k) bk[k] = std::pow(k + 1.0, 1.0 - cfg.alpha) - std::pow(double(k), 1.0 - cfg.alpha);

  Eigen::SparseLU<Eigen::SparseMatrix<double>> step;
  step.compute(mu * I - L);
  if (step.info() != Eigen::Success) throw NumericalError("FDM: time-step matrix is singular");

  // dz[k] = z^{k+1} - z^k
  std::vector<Eigen::VectorXd> dz;
  dz.reserve(cfg.M);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  for (int m = 1; m <= cfg.M; ++m) {
    // mu sum_{k=0}^{m-1} b_k (z^{m-k} - z^{m-k-1}) = Delta z^m + F u^m
    Eigen::VectorXd rhs = F * u.u.col(m) + mu * z;
    for (int k = 1; k < m; ++k) rhs -= mu * bk[k] * dz[m - k - 1];
    const Eigen::VectorXd next = step.solve(rhs);
    if (!next.allFinite()) throw NumericalError("FDM: non-finite state at step " + std::to_string(m));
    dz.push_back(next - z);
    z = next;
  }
  return {detail::unflatten(z, nx, ny), nx, ny};
}

/// Spectral state sampled on the FDM vertex grid.
inline GridField sample_on_grid(const SpectralBasis& basis, const StateCoeffs& z, int nx, int ny) {
  check_basis(basis, z, "sample_on_grid");
  GridField g{Eigen::MatrixXd(nx + 1, ny + 1), nx, ny};
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= ny; ++j) g.values(i, j) = basis.eval_all(double(i) / nx, double(j) / ny).dot(z.c);
  return g;
}

struct OracleComparison {
  double discrepancy = 0.0;  // relative discrete L2
  double spectral_norm = 0.0;
  GridField fdm;
  GridField spectral;
};

/// Spectral mild solution at b (N modes per direction) against the FDM field.
inline OracleComparison compare_with_spectral(const FDMConfig& cfg, int N, const std::vector<Actuator>& actuators,
                                              const ControlSignal& u) {
  const SpectralBasis basis(N);
  OracleComparison out;
  out.fdm = fdm_solve(cfg, actuators, u);
  const StateCoeffs zb = mild_solution(basis, cfg.alpha, StateCoeffs::zeros(basis), actuator_columns(basis, actuators),
                                       u, cfg.b);
  out.spectral = sample_on_grid(basis, zb, cfg.nx, cfg.ny);
  out.spectral_norm = out.spectral.l2_norm();
  GridField diff{out.fdm.values - out.spectral.values, cfg.nx, cfg.ny};
  out.discrepancy = out.spectral_norm > 0.0 ? diff.l2_norm() / out.spectral_norm : diff.l2_norm();
  return out;
}

}  // namespace fracbc
