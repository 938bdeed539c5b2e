#include "fracbc/fdm_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace fracbc {
namespace {

ControlSignal smooth_control(double b, int M) {
  ControlSignal u(TimeGrid(b, M), 1);
  for (int m = 0; m <= M; ++m) u.u(0, m) = 1.0 + std::sin(3.0 * u.grid.t(m));
  return u;
}

FDMConfig config(double alpha, int nx, int M) {
  FDMConfig cfg;
  cfg.alpha = alpha;
  cfg.nx = cfg.ny = nx;
  cfg.M = M;
  cfg.b = 1.0;
  return cfg;
}

const Actuator kBump = Actuator::rect_bump(0.1, 0.5, 0.3, 0.8);

TEST(FDMGrid, CosinesAreLaplacianEigenvectors) {
  const int nx = 12, ny = 10;
  const Eigen::SparseMatrix<double> L = detail::neumann_laplacian(nx, ny);
  for (auto [i, j] : {std::pair{1, 1}, std::pair{3, 0}, std::pair{5, 7}}) {
    Eigen::MatrixXd f(nx + 1, ny + 1);
    for (int a = 0; a <= nx; ++a)
      for (int c = 0; c <= ny; ++c)
        f(a, c) = std::cos(i * std::numbers::pi * a / nx) * std::cos(j * std::numbers::pi * c / ny);
    const double sx = std::sin(i * std::numbers::pi / (2.0 * nx)), sy = std::sin(j * std::numbers::pi / (2.0 * ny));
    const double ev = -4.0 * nx * nx * sx * sx - 4.0 * ny * ny * sy * sy;
    const Eigen::VectorXd v = detail::flatten(f);
    EXPECT_LE((L * v - ev * v).cwiseAbs().maxCoeff(), 1e-10 * std::abs(ev)) << i << "," << j;
  }
}

TEST(FDMGrid, ZeroIndexProjection) {
  const int nx = 16, ny = 16;
  Eigen::MatrixXd keep(nx + 1, ny + 1), drop(nx + 1, ny + 1);
  for (int a = 0; a <= nx; ++a) {
    for (int c = 0; c <= ny; ++c) {
      const double x = double(a) / nx, y = double(c) / ny;
      keep(a, c) = std::cos(2 * std::numbers::pi * x) * std::cos(std::numbers::pi * y);
      drop(a, c) = 3.0 + std::cos(std::numbers::pi * x) - 2.0 * std::cos(4 * std::numbers::pi * y);
    }
  }
  EXPECT_LE((detail::remove_zero_index(keep) - keep).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE(detail::remove_zero_index(drop).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(FDMGrid, PointDensityReproducesBilinearValue) {
  const int nx = 10, ny = 10;
  const Eigen::MatrixXd f = detail::actuator_density(Actuator::point(0.37, 0.61), nx, ny);
  const Eigen::MatrixXd w = GridField::weights(nx, ny);
  EXPECT_NEAR((f.array() * w.array()).sum(), 1.0, 1e-14);
  Eigen::MatrixXd lin(nx + 1, ny + 1);
  for (int a = 0; a <= nx; ++a)
    for (int c = 0; c <= ny; ++c) lin(a, c) = 2.0 * a / nx - 3.0 * c / ny + 1.0;
  EXPECT_NEAR((f.array() * w.array() * lin.array()).sum(), 2.0 * 0.37 - 3.0 * 0.61 + 1.0, 1e-14);
}

TEST(FDMSolve, ZeroControlGivesZeroField) {
  const FDMConfig cfg = config(0.5, 8, 50);
  const GridField z = fdm_solve(cfg, {kBump}, ControlSignal(TimeGrid(1.0, 50), 1));
  EXPECT_EQ(z.values.norm(), 0.0);
}

TEST(FDMSolve, Linearity) {
  const FDMConfig cfg = config(0.7, 12, 60);
  const ControlSignal u1 = smooth_control(1.0, 60);
  ControlSignal u2(TimeGrid(1.0, 60), 1);
  for (int m = 0; m <= 60; ++m) u2.u(0, m) = std::cos(7.0 * u2.grid.t(m));
  const ControlSignal sum(u1.grid, 2.0 * u1.u - 0.5 * u2.u);
  const Eigen::MatrixXd a = fdm_solve(cfg, {kBump}, u1).values, b = fdm_solve(cfg, {kBump}, u2).values;
  const Eigen::MatrixXd c = fdm_solve(cfg, {kBump}, sum).values;
  EXPECT_LE((c - (2.0 * a - 0.5 * b)).norm(), 1e-12 * c.norm());
}

TEST(FDMSolve, Errors) {
  EXPECT_THROW(config(0.5, 4, 100).validate(), ConfigError);
  EXPECT_THROW(config(0.5, 16, 20).validate(), ConfigError);
  FDMConfig gl = config(0.5, 16, 100);
  gl.scheme = "GL";
  EXPECT_THROW(gl.validate(), ConfigError);
  const FDMConfig cfg = config(0.5, 8, 50);
  EXPECT_THROW(fdm_solve(cfg, {Actuator::on_segment(Side::Left, 0.0, 0.5)}, smooth_control(1.0, 50)), ConfigError);
  EXPECT_THROW(fdm_solve(cfg, {kBump}, smooth_control(1.0, 60)), ConfigError);
  EXPECT_GT(cfg.cfl_ratio(), 0.0);
}

class CrossSolver : public ::testing::TestWithParam<double> {};

TEST_P(CrossSolver, AgreesWithSpectralAndConvergesInSpace) {
  const double alpha = GetParam();
  const ControlSignal u = smooth_control(1.0, 1000);
  const OracleComparison coarse = compare_with_spectral(config(alpha, 16, 1000), 32, {kBump}, u);
  const OracleComparison fine = compare_with_spectral(config(alpha, 32, 1000), 32, {kBump}, u);
  EXPECT_LE(fine.discrepancy, 1e-2);
  EXPECT_GT(fine.spectral_norm, 0.0);
  // Observed spatial order of the discrepancy (second order expected, >= 0.8 required).
  EXPECT_GE(std::log2(coarse.discrepancy / fine.discrepancy), 0.8);
}

INSTANTIATE_TEST_SUITE_P(Orders, CrossSolver, ::testing::Values(0.5, 1.0));

TEST(CrossSolverPoint, MollifiedDeltaMatches) {
  const ControlSignal u = smooth_control(1.0, 200);
  const OracleComparison c = compare_with_spectral(config(0.6, 32, 200), 32, {Actuator::point(0.37, 0.61)}, u);
  EXPECT_LE(c.discrepancy, 1e-2);
}

}  // namespace
}  // namespace fracbc
