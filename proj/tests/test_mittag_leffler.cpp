#include "fracbc/mittag_leffler.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace fracbc {
namespace {

struct Reference {
  double alpha, beta;
  int mu;
  double z, value;
};

// Frozen output of tests/oracles/ml_reference.py (mpmath, adaptive precision).
// clang-format off
const std::vector<Reference> kReference = {
    {0.5, 0.5, 1, -1, 0.13660600739194928254},
    {0.5, 0.5, 1, -7.7, 0.0046423067833801552107},
    {0.5, 0.5, 1, -8, 0.0043082539407088651661},
    {0.4, 0.4, 1, -5, 0.0091497262320044558918},
    {0.4, 0.4, 1, -5.1, 0.0088261012122814086597},
    {0.4, 0.4, 1, -8, 0.0038190633005111418313},
    {0.4, 1.4, 1, -3, 0.26791369055648717139},
    {0.6, 0.6, 1, -11, 0.0023635707812934745808},
    {0.6, 1.6, 1, -12, 0.08011307676338553576},
    {0.6, 1.6, 2, -2, 0.10799090615285927789},
    {0.8, 0.8, 2, -3, -0.049835384650571445033},
    {0.8, 0.8, 2, -26, -0.00031342609062587274905},
    {0.8, 0.8, 2, -27, -0.0002885026940970391781},
    {0.8, 0.8, 2, -100, -0.000018319227745785990944},
    {0.8, 1.8, 1, -40, 0.024859481673403415793},
    {0.8, 2.8, 2, -30, 0.0011757153951235948543},
    {1, 0.6, 1, -20, -0.014508174767158516159},
    {1, 0.6, 1, -59, -0.00466527170250876899},
    {1, 0.6, 1, -61, -0.0045085862035135842732},
    {1, 0.6, 1, -300, -0.0008995520269298877529},
    {1, 3, 1, -80, 0.01234375},
    {1, 2, 2, -5, 0.0067379469990854670966},
    {1, 1.5, 2, -70, -0.000060179438818829139626},
    {1, 3.5, 2, -65, 0.00026291424928727412209},
    {0.3, 1.7, 2, -3.4, 0.057889828482833982875},
    {0.3, 1.7, 2, -3.5, 0.055289576318045692218},
    {0.3, 0.3, 1, -2, 0.032062399218847496015},
    {0.9, 0.9, 1, 2.5, 19.598053891254125463},
    {0.7, 1.2, 2, 4, 14916.20908855045925},
    {0.5, 1, 1, 9, 3.0121946291700610967e+35},
    {0.95, 0.95, 1, -55, 0.000017296296826693141249},
    {0.2, 1, 1, 0.3, 1.4704164897369768376},
    {0.1, 1.7, 2, -1.7, 0.15429435570865192774},
    {0.1, 1.1, 2, -2, 0.10921416524860290869},
    {0.1, 0.5, 1, -1.7, 0.18289861909241719846},
    {0.15, 2, 2, -2.5, 0.08827789298468484283},
    {0.5, 0.5, 1, -30, 0.00031291770525374203432},
    {0.5, 0.5, 1, -100, 0.000028205248812996592434},
    {0.5, 0.5, 1, -1000, 2.8209436863274833442e-7},
    {0.5, 1, 1, -30, 0.018795888861416751497},
    {0.5, 1, 1, -250, 0.0022567402805576318888},
    {0.5, 1.5, 1, -12, 0.079428814915425519782},
    {0.5, 1.5, 1, -400, 0.0024964738261220510223},
};
// clang-format on

TEST(Pochhammer, Products) {
  EXPECT_EQ(pochhammer(3.7, 0), 1.0);
  EXPECT_EQ(pochhammer(1.0, 5), 120.0);
  EXPECT_EQ(pochhammer(2.0, 3), 24.0);
  EXPECT_DOUBLE_EQ(pochhammer(0.5, 2), 0.75);
}

TEST(MittagLeffler, ExponentialCase) {
  EXPECT_NEAR(ml2(1, 1, 1), std::numbers::e, 1e-15);
  for (double z = -50.0; z <= 5.0; z += 0.37) {
    EXPECT_NEAR(ml2(1, 1, z) / std::exp(z), 1.0, 1e-12) << z;
  }
}

TEST(MittagLeffler, ZeroArgument) {
  for (double a : {0.3, 0.75, 1.0}) {
    for (double b : {0.4, 1.0, 2.5}) {
      const double expected = 1.0 / std::tgamma(b);
      EXPECT_NEAR(ml2(a, b, 0.0), expected, 1e-15 * std::fabs(expected));
      EXPECT_NEAR(ml3(a, b, 0.0), expected, 1e-15 * std::fabs(expected));
    }
  }
}

TEST(MittagLeffler, HalfOrderErfc) {
  // E_{1/2,1/2}(-1) = 1/sqrt(pi) - e erfc(1)
  const double expected = 1.0 / std::sqrt(std::numbers::pi) - std::numbers::e * std::erfc(1.0);
  EXPECT_NEAR(ml2(0.5, 0.5, -1.0), expected, 1e-14);
}

TEST(MittagLeffler, ThreeParameterAlphaOne) {
  // sum (n+1) x^n / n! = (1 + x) e^x
  EXPECT_NEAR(ml3(1, 1, 0.5), 1.5 * std::exp(0.5), 1e-14);
  EXPECT_NEAR(ml3(1, 1, -20.0), -19.0 * std::exp(-20.0), 1e-20);
}

TEST(MittagLeffler, ReferenceTable) {
  for (const auto& r : kReference) {
    const MLValue v = r.mu == 1 ? ml2_checked(r.alpha, r.beta, r.z) : ml3_checked(r.alpha, r.beta, r.z);
    EXPECT_TRUE(v.accurate) << r.alpha << " " << r.beta << " " << r.z;
    EXPECT_NEAR(v.value / r.value, 1.0, 1e-12)
        << "alpha=" << r.alpha << " beta=" << r.beta << " mu=" << r.mu << " z=" << r.z
        << " method=" << to_string(v.method);
  }
}

TEST(MittagLeffler, ThreeParameterIdentity) {
  // alpha E^2_{a,b} = E_{a,b-1} + (1 + a - b) E_{a,b}, from
  // (a n + b - 1) - (b - 1 - a) = a (n + 1) coefficient-wise.
  for (double a : {0.25, 0.5, 0.7, 0.9, 1.0}) {
    for (double b : {1.1, 1.5, 2.0, 2.7}) {
      for (double z = -200.0; z <= 3.0; z += 7.3) {
        const double lhs = a * ml3(a, b, z);
        const double rhs = ml2(a, b - 1, z) + (1 + a - b) * ml2(a, b, z);
        EXPECT_NEAR(lhs, rhs, 1e-10) << a << " " << b << " " << z;
      }
    }
  }
}

TEST(MittagLeffler, Recursion) {
  // E_{a,b}(z) = z E_{a,b+a}(z) + 1/Gamma(b)
  for (double a : {0.35, 0.6, 1.0}) {
    for (double b : {0.35, 1.0, 1.8}) {
      for (double z = -90.0; z <= 2.0; z += 3.1) {
        EXPECT_NEAR(ml2(a, b, z), z * ml2(a, b + a, z) + 1.0 / std::tgamma(b), 1e-10);
      }
    }
  }
}

TEST(MittagLeffler, BranchesAgreeNearSwitch) {
  for (double a : {0.3, 0.5, 0.8, 0.95}) {
    for (int mu : {1, 2}) {
      const MittagLeffler e(a, a, mu);
      for (double f : {0.9, 1.0, 1.1}) {
        const double z = -std::pow(MittagLeffler::kBranchSwitch * f, a);
        const MLValue s = e.series(z);
        const MLValue as = e.asymptotic(z);
        ASSERT_TRUE(s.accurate);
        ASSERT_TRUE(as.accurate);
        EXPECT_NEAR(s.value, as.value, 1e-9 * std::fabs(s.value)) << a << " " << mu << " " << z;
      }
    }
  }
}

TEST(MittagLeffler, PositiveKernelValues) {
  for (double a : {0.1, 0.4, 0.7, 1.0}) {
    for (double lambda : {-2 * std::numbers::pi * std::numbers::pi, -800 * std::numbers::pi * std::numbers::pi}) {
      for (double t : {0.0, 0.01, 0.5, 5.0}) {
        if (a == 1.0 && lambda * t < -700.0) continue;  // exp underflows to 0
        EXPECT_GT(ml2(a, a, lambda * std::pow(t, a)), 0.0) << a << " " << lambda << " " << t;
      }
    }
  }
}

TEST(MittagLeffler, DomainErrors) {
  EXPECT_THROW(ml2(0.0, 1.0, 1.0), DomainError);
  EXPECT_THROW(ml2(1.5, 1.0, 1.0), DomainError);
  EXPECT_THROW(ml2(0.5, -1.0, 1.0), DomainError);
  EXPECT_THROW(ml2(0.5, 1.0, std::numeric_limits<double>::quiet_NaN()), DomainError);
  EXPECT_THROW(ml3(0.5, 1.0, std::numeric_limits<double>::infinity()), DomainError);
  EXPECT_THROW(MittagLeffler(0.5, 1.0, 3), DomainError);
}

TEST(MittagLeffler, OverflowIsFlagged) {
  const MLValue v = ml2_checked(0.5, 1.0, 40.0);
  EXPECT_FALSE(v.accurate);
}

}  // namespace
}  // namespace fracbc
