#include "fracbc/actuation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace fracbc {
namespace {

int group_of(const SpectralBasis& basis, int i, int j) { return basis.mode(basis.index_of(i, j)).group; }

TEST(ActuatorCoeffs, HalfSideSegmentVanishesOnEveryFourthWavenumber) {
  const SpectralBasis basis(20);
  const StateCoeffs g = actuator_coeffs(basis, Actuator::on_segment(Side::Left, 0.0, 0.5));
  for (int k = 0; k < basis.size(); ++k) {
    const Mode& m = basis.mode(k);
    const double pi = std::numbers::pi;
    const double expected =
        (2.0 * m.a / (m.j * pi)) * (std::sin(m.j * pi / 2) + m.j * pi * (std::cos(m.j * pi / 2) - 1.0));
    EXPECT_NEAR(g.c[k], expected, 1e-14) << m.i << "," << m.j;
    if (m.j % 4 == 0) {
      EXPECT_LE(std::abs(g.c[k]), 1e-12) << m.i << "," << m.j;
    } else if (m.j <= 3) {
      EXPECT_GT(std::abs(g.c[k]), 1e-6) << m.i << "," << m.j;
    }
  }
}

TEST(ActuatorCoeffs, SegmentClosedFormMatchesQuadrature) {
  const SpectralBasis basis(12);
  for (Side side : {Side::Left, Side::Right, Side::Bottom, Side::Top}) {
    const StateCoeffs closed = actuator_coeffs(basis, Actuator::on_segment(side, 0.15, 0.7));
    const StateCoeffs quad =
        actuator_coeffs(basis, Actuator::on_segment(side, 0.15, 0.7, [](double, double) { return 1.0; }));
    EXPECT_LE((closed.c - quad.c).cwiseAbs().maxCoeff(), 1e-9) << to_string(side);
  }
}

TEST(ActuatorCoeffs, PointIsModeValue) {
  const SpectralBasis basis(5);
  const StateCoeffs g = actuator_coeffs(basis, Actuator::point(0.3, 0.8));
  for (int k = 0; k < basis.size(); ++k) EXPECT_EQ(g.c[k], basis.eval(k, 0.3, 0.8));
}

TEST(ActuatorCoeffs, RectMatchesSeparableClosedForm) {
  const SpectralBasis basis(8);
  const StateCoeffs g = actuator_coeffs(basis, Actuator::rect(0.1, 0.35, 0.5, 0.9));
  const double pi = std::numbers::pi;
  auto integral = [&](int n, double lo, double hi) {
    return n == 0 ? hi - lo : (std::sin(n * pi * hi) - std::sin(n * pi * lo)) / (n * pi);
  };
  for (int k = 0; k < basis.size(); ++k) {
    const Mode& m = basis.mode(k);
    EXPECT_NEAR(g.c[k], 2.0 * m.a * integral(m.i, 0.1, 0.35) * integral(m.j, 0.5, 0.9), 1e-14);
  }
}

TEST(ActuatorCoeffs, LinearInDistribution) {
  const SpectralBasis basis(6);
  auto f1 = [](double x, double y) { return x * y; };
  auto f2 = [](double x, double y) { return std::exp(x - y); };
  const StateCoeffs a = actuator_coeffs(basis, Actuator::rect(0.2, 0.6, 0.1, 0.4, f1));
  const StateCoeffs b = actuator_coeffs(basis, Actuator::rect(0.2, 0.6, 0.1, 0.4, f2));
  const StateCoeffs c =
      actuator_coeffs(basis, Actuator::rect(0.2, 0.6, 0.1, 0.4, [&](double x, double y) { return 2.0 * f1(x, y) - 3.0 * f2(x, y); }));
  EXPECT_LE((c.c - (2.0 * a.c - 3.0 * b.c)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ActuatorCoeffs, TooFewQuadratureNodes) {
  const SpectralBasis basis(20);
  EXPECT_THROW(actuator_coeffs(basis, Actuator::rect(0.0, 1.0, 0.0, 1.0, {}, 16)), AccuracyError);
  EXPECT_NO_THROW(actuator_coeffs(basis, Actuator::rect(0.0, 1.0, 0.0, 1.0, {}, 80)));
  EXPECT_THROW(Actuator::point(1.2, 0.5), DomainError);
  EXPECT_THROW(Actuator::rect(0.5, 0.4, 0.0, 1.0), ConfigError);
}

TEST(BuildG, SingleModeGroup) {
  const SpectralBasis basis(3);
  const Actuator act = Actuator::point(0.2, 0.7);
  const int g = group_of(basis, 1, 1);
  const Eigen::MatrixXd G = build_G(basis, {act}, g);
  ASSERT_EQ(G.rows(), 1);
  ASSERT_EQ(G.cols(), 1);
  EXPECT_EQ(G(0, 0), basis.eval(basis.index_of(1, 1), 0.2, 0.7));
  EXPECT_THROW(build_G(basis, std::vector<Actuator>{}, g), ConfigError);
}

TEST(BuildG, SymmetricZoneGivesEqualColumns) {
  const SpectralBasis basis(4);
  const Eigen::MatrixXd G = build_G(basis, {Actuator::rect(0.2, 0.45, 0.2, 0.45)}, group_of(basis, 1, 2));
  ASSERT_EQ(G.cols(), 2);
  EXPECT_NEAR(G(0, 0), G(0, 1), 1e-15);
  EXPECT_EQ(Eigen::FullPivLU<Eigen::MatrixXd>(G).rank(), 1);
}

TEST(BuildG, TwoGenericPointsHaveFullRank) {
  const SpectralBasis basis(4);
  const Eigen::MatrixXd G =
      build_G(basis, {Actuator::point(0.13, 0.47), Actuator::point(0.61, 0.29)}, group_of(basis, 1, 2));
  // Entries are 2a cos(i pi x) cos(j pi y) with a = (1 + 5 pi^2)^(-1/2).
  const double a = 1.0 / std::sqrt(1.0 + 5.0 * std::numbers::pi * std::numbers::pi);
  auto xi = [&](int i, int j, double x, double y) {
    return 2.0 * a * std::cos(i * std::numbers::pi * x) * std::cos(j * std::numbers::pi * y);
  };
  const double det = xi(1, 2, 0.13, 0.47) * xi(2, 1, 0.61, 0.29) - xi(2, 1, 0.13, 0.47) * xi(1, 2, 0.61, 0.29);
  EXPECT_NEAR(G.determinant(), det, 1e-15);
  EXPECT_GT(std::abs(det), 1e-3);
  const StrategicReport rep = strategic_check(basis, {Actuator::point(0.13, 0.47), Actuator::point(0.61, 0.29)});
  EXPECT_EQ(rep.per_group[group_of(basis, 1, 2)].rank, 2);
}

TEST(StrategicCheck, DiagonalPointFails) {
  const SpectralBasis basis(2);
  const StrategicReport rep = strategic_check(basis, {Actuator::point(0.3, 0.3)});
  EXPECT_FALSE(rep.verdict);
  EXPECT_EQ(rep.r_max, 2);
  const GroupRank& gr = rep.per_group[group_of(basis, 1, 2)];
  EXPECT_EQ(gr.r, 2);
  EXPECT_EQ(gr.rank, 1);
  EXPECT_FALSE(gr.pass);
}

TEST(StrategicCheck, MultiplicityThreeAtN7) {
  const SpectralBasis basis(7);
  EXPECT_EQ(basis.max_multiplicity(), 3);
  const int g = group_of(basis, 5, 5);
  EXPECT_EQ(group_of(basis, 1, 7), g);
  EXPECT_EQ(group_of(basis, 7, 1), g);
  EXPECT_EQ(basis.groups()[g].size, 3);

  const std::vector<Actuator> three = {Actuator::point(0.13, 0.47), Actuator::point(0.61, 0.29),
                                       Actuator::point(0.83, 0.71)};
  const StrategicReport rep = strategic_check(basis, three);
  // Brute force: every group's G has full column rank by an independent SVD.
  bool all = true;
  for (int k = 0; k < basis.group_count(); ++k) {
    const Eigen::MatrixXd G = build_G(basis, three, k);
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(G).singularValues();
    const int rank = static_cast<int>((sv.array() > 1e-10 * sv[0]).count());
    EXPECT_EQ(rep.per_group[k].rank, rank) << k;
    all = all && rank == G.cols();
  }
  EXPECT_EQ(rep.verdict, all);

  const StrategicReport two = strategic_check(basis, {three[0], three[1]});
  EXPECT_FALSE(two.verdict);
  EXPECT_EQ(two.p, 2);
}

TEST(StrategicCheck, HalfSideSegmentMissesEveryFourthWavenumber) {
  const SpectralBasis basis(8);
  const StrategicReport rep = strategic_check(basis, {Actuator::on_segment(Side::Left, 0.0, 0.5)});
  EXPECT_FALSE(rep.verdict);
  // Group {(4, 4)} has multiplicity 1 and g = 0 there.
  const GroupRank& gr = rep.per_group[group_of(basis, 4, 4)];
  EXPECT_EQ(gr.r, 1);
  EXPECT_EQ(gr.rank, 0);
}

TEST(StrategicCheck, InvariantUnderRescaling) {
  const SpectralBasis basis(7);
  std::vector<Actuator> acts = {Actuator::point(0.13, 0.47), Actuator::rect(0.6, 0.8, 0.1, 0.3),
                                Actuator::on_segment(Side::Top, 0.2, 0.35)};
  const StrategicReport base = strategic_check(basis, acts);
  for (double scale : {1e-9, 1e9}) {
    std::vector<Actuator> scaled = acts;
    scaled[1].f = [scale](double, double) { return scale; };
    scaled[2].f = [scale](double, double) { return scale; };
    const StrategicReport rep = strategic_check(basis, scaled);
    EXPECT_EQ(rep.verdict, base.verdict);
    for (int k = 0; k < basis.group_count(); ++k) EXPECT_EQ(rep.per_group[k].rank, base.per_group[k].rank) << k;
  }
}

TEST(StrategicCheck, TraceAdvisory) {
  const SpectralBasis basis(4);
  const BoundaryRegion region({{Side::Left, 0.25, 0.75}}, 16);
  const StrategicReport rep = strategic_check(basis, {Actuator::point(0.13, 0.47)}, 1e-10, &region);
  EXPECT_TRUE(rep.vanishing_trace_groups.empty());
  EXPECT_THROW(strategic_check(basis, {Actuator::point(0.13, 0.47)}, 0.0), ConfigError);
}

}  // namespace
}  // namespace fracbc
