#pragma once

// Two- and three-parameter Mittag-Leffler functions on the real line.
//
//   E_{a,b}(z)   = sum_n z^n / Gamma(a n + b)
//   E^2_{a,b}(z) = sum_n (n + 1) z^n / Gamma(a n + b)
//
// Evaluation strategy, for 0 < a <= 1 and b > 0:
//   * |z|^{1/a} < kBranchSwitch: power series summed in 64-digit MPFR
//     arithmetic, so the cancellation for negative z (at most e^{60}) still
//     leaves more than 18 significant digits.
//   * z < 0 beyond the switch: the algebraic asymptotic expansion, truncated
//     at its smallest term.  For a < 1 and negative real z there are no
//     exponential contributions, and the truncation error is of order
//     exp(-|z|^{1/a}).
//   * a = 1: exp-based closed forms where the value is exponentially small.
//   * z > 0 beyond the switch: log-scaled double series.

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/sin_pi.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include "fracbc/errors.hpp"

namespace fracbc {

/// Parameters of E^mu_{alpha,beta}; only mu in {1, 2} is supported.
struct MLParams {
  double alpha = 1.0;
  double beta = 1.0;
  int mu = 1;

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
      throw DomainError("Mittag-Leffler: alpha must lie in (0, 1], got " + std::to_string(alpha));
    }
    if (!(beta > 0.0) || !std::isfinite(beta)) {
      throw DomainError("Mittag-Leffler: beta must be positive, got " + std::to_string(beta));
    }
    if (mu != 1 && mu != 2) {
      throw DomainError("Mittag-Leffler: only mu = 1 and mu = 2 are implemented");
    }
  }
};

/// mu (mu + 1) ... (mu + n - 1); 1 for n = 0.
inline double pochhammer(double mu, unsigned n) {
  double p = 1.0;
  for (unsigned k = 0; k < n; ++k) p *= mu + static_cast<double>(k);
  return p;
}

enum class MLMethod { ClosedForm, Series, Asymptotic, PositiveSeries, Reduction };

inline const char* to_string(MLMethod m) {
  switch (m) {
    case MLMethod::ClosedForm: return "closed-form";
    case MLMethod::Series: return "series";
    case MLMethod::Asymptotic: return "asymptotic";
    case MLMethod::PositiveSeries: return "positive-series";
    case MLMethod::Reduction: return "reduction";
  }
  return "?";
}

/// A value together with the accuracy flag of the branch that produced it.
struct MLValue {
  double value = 0.0;
  bool accurate = true;
  MLMethod method = MLMethod::Series;
  int terms = 0;
};

namespace ml_detail {

using MpReal = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<64>,
                                             boost::multiprecision::et_off>;

inline constexpr int kMpDigits = 64;
inline constexpr std::size_t kMaxSeriesTerms = 60000;
inline constexpr int kMaxAsymptoticTerms = 4000;

inline bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }
inline bool is_integer(double x) { return x == std::floor(x); }

/// 1/Gamma(x), entire; zero at the poles of Gamma.
inline double rgamma(double x) {
  if (is_nonpositive_integer(x)) return 0.0;
  if (x > 171.0) return 0.0;
  if (x > -150.0) return 1.0 / boost::math::tgamma(x);
  // Reflection in log form: 1/Gamma(x) = Gamma(1 - x) sin(pi x) / pi.
  const double s = boost::math::sin_pi(x);
  const double lg = boost::math::lgamma(1.0 - x);
  return std::copysign(std::exp(lg + std::log(std::fabs(s)) - std::log(std::numbers::pi)), s);
}

}  // namespace ml_detail

/// Evaluator for E^mu_{alpha,beta} at real arguments.
///
/// Caches the multiprecision series coefficients, so a single instance should
/// be reused for many arguments.  Instances are not safe for concurrent use;
/// copy one per thread.
class MittagLeffler {
 public:
  static constexpr double kBranchSwitch = 60.0;

  MittagLeffler(double alpha, double beta, int mu = 1) : params_{alpha, beta, mu} {
    params_.validate();
  }

  double alpha() const { return params_.alpha; }
  double beta() const { return params_.beta; }
  int mu() const { return params_.mu; }

  double operator()(double z) const { return evaluate(z).value; }

  MLValue evaluate(double z) const {
    if (!std::isfinite(z)) throw DomainError("Mittag-Leffler: non-finite argument");
    const double a = params_.alpha;
    const double b = params_.beta;
    if (z == 0.0) return {ml_detail::rgamma(b), true, MLMethod::ClosedForm, 1};

    if (a == 1.0) return evaluate_alpha_one(z);

    if (!beyond_switch(z)) return series(z);
    return z < 0.0 ? asymptotic(z) : positive_series(z);
  }

  /// Power series in multiprecision; usable for any z, accurate while the
  /// cancellation stays below ~46 digits.
  MLValue series(double z) const {
    using ml_detail::MpReal;
    const MpReal zz(z);
    MpReal pw(1);
    MpReal sum(0);
    double max_abs = 0.0;
    double prev_abs = std::numeric_limits<double>::infinity();
    std::size_t n = 0;
    bool converged = false;
    for (; n < ml_detail::kMaxSeriesTerms; ++n) {
      const MpReal term = coefficient(n) * pw;
      sum += term;
      const double ta = std::fabs(term.convert_to<double>());
      max_abs = std::max(max_abs, ta);
      const double sa = std::fabs(sum.convert_to<double>());
      if (n > 0 && ta <= prev_abs && ta <= 1e-24 * sa) {
        converged = true;
        break;
      }
      prev_abs = ta;
      pw *= zz;
    }
    const double value = sum.convert_to<double>();
    const bool cancellation_ok = value != 0.0 && max_abs <= 1e46 * std::fabs(value);
    return {value, converged && cancellation_ok, MLMethod::Series, static_cast<int>(n + 1)};
  }

  /// Algebraic asymptotic expansion for z < 0, truncated at the smallest term.
  ///
  /// The coefficients 1/Gamma(b - a k) oscillate, so truncation is decided on
  /// the monotone envelope Gamma(1 - x)/pi of |1/Gamma(x)| for x < 0.
  MLValue asymptotic(double z) const {
    if (!(z < 0.0)) throw DomainError("Mittag-Leffler: asymptotic branch needs z < 0");
    const double a = params_.alpha;
    const double b = params_.beta;
    const double inv = 1.0 / z;
    // mu = 1: E(z)   ~ -sum_{k>=1} z^{-k} / Gamma(b - a k)
    // mu = 2: E^2(z) ~  sum_{k>=2} (k - 1) z^{-k} / Gamma(b - a k)
    const bool two = params_.mu == 2;
    const int k0 = two ? 2 : 1;
    double pw = two ? inv : 1.0;
    double sum = 0.0;
    // The (k - 1) weight can make the envelope rise for a few terms before it
    // falls, so truncation happens at its global minimum: summation continues
    // until the envelope is far above the smallest term seen.
    double min_env = std::numeric_limits<double>::infinity();
    double sum_at_min = 0.0;
    int k_at_min = k0;
    bool converged = false;
    int k = k0;
    for (; k < k0 + ml_detail::kMaxAsymptoticTerms; ++k) {
      pw *= inv;
      const double x = b - a * k;
      const double weight = two ? static_cast<double>(k - 1) : -1.0;
      double env = x >= 0.0 ? 1.2 : std::exp(boost::math::lgamma(1.0 - x) - std::log(std::numbers::pi));
      env *= std::fabs(weight * pw);
      if (env > 1e8 * min_env) break;  // well past the smallest term
      sum += weight * pw * ml_detail::rgamma(x);
      if (env <= min_env) {
        min_env = env;
        sum_at_min = sum;
        k_at_min = k;
      }
      if (sum != 0.0 && env <= 1e-17 * std::fabs(sum)) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      sum = sum_at_min;
      k = k_at_min;
      converged = sum != 0.0 && min_env <= 1e-15 * std::fabs(sum);
    }
    return {sum, converged, MLMethod::Asymptotic, k - k0 + 1};
  }

 private:
  bool beyond_switch(double z) const {
    return std::pow(std::fabs(z), 1.0 / params_.alpha) >= kBranchSwitch;
  }

  const ml_detail::MpReal& coefficient(std::size_t n) const {
    using ml_detail::MpReal;
    while (coeffs_.size() <= n) {
      const std::size_t m = coeffs_.size();
      const MpReal arg = MpReal(params_.alpha) * static_cast<double>(m) + MpReal(params_.beta);
      MpReal c = 1 / boost::math::tgamma(arg);
      if (params_.mu == 2) c *= static_cast<double>(m + 1);
      coeffs_.push_back(std::move(c));
    }
    return coeffs_[n];
  }

  MLValue positive_series(double z) const {
    const double a = params_.alpha;
    const double b = params_.beta;
    if (std::pow(z, 1.0 / a) > 700.0) {
      return {std::numeric_limits<double>::infinity(), false, MLMethod::PositiveSeries, 0};
    }
    // Log-scaled terms; sum relative to the largest one.
    const double lz = std::log(z);
    std::vector<double> logs;
    double lmax = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < 10 * ml_detail::kMaxSeriesTerms; ++n) {
      double lt = static_cast<double>(n) * lz - boost::math::lgamma(a * static_cast<double>(n) + b);
      if (params_.mu == 2) lt += std::log(static_cast<double>(n + 1));
      logs.push_back(lt);
      lmax = std::max(lmax, lt);
      if (n > 2 && lt < logs[n - 1] && lt < lmax - 45.0) break;
    }
    double s = 0.0;
    for (double lt : logs) s += std::exp(lt - lmax);
    const double value = std::exp(lmax) * s;
    return {value, std::isfinite(value), MLMethod::PositiveSeries, static_cast<int>(logs.size())};
  }

  MLValue evaluate_alpha_one(double z) const {
    const double b = params_.beta;
    if (params_.mu == 2) {
      if (b <= 2.0) {
        // (n + 1)/Gamma(n + b) = 1/Gamma(n + b - 1) - (b - 2)/Gamma(n + b)
        const double lower = b == 1.0 ? z * std::exp(z) : sub(b - 1.0).evaluate(z).value;
        const MLValue same = sub(b).evaluate(z);
        return {lower - (b - 2.0) * same.value, same.accurate, MLMethod::Reduction, 2};
      }
      if (std::fabs(z) < kBranchSwitch) return series(z);
      return z < 0.0 ? asymptotic(z) : positive_series(z);
    }
    if (b == 1.0) return {std::exp(z), true, MLMethod::ClosedForm, 1};
    if (b == 2.0) return {std::expm1(z) / z, true, MLMethod::ClosedForm, 1};
    if (std::fabs(z) < kBranchSwitch) return series(z);
    if (z > 0.0) return positive_series(z);
    if (ml_detail::is_integer(b)) {
      // E_{1,m}(z) = -sum_{k=1}^{m-1} z^{-k}/(m-k-1)! + z^{1-m} e^z
      const int m = static_cast<int>(b);
      double sum = 0.0;
      double pw = 1.0;
      for (int k = 1; k <= m - 1; ++k) {
        pw /= z;
        sum -= pw * ml_detail::rgamma(b - k);
      }
      sum += std::pow(z, 1.0 - b) * std::exp(z);
      return {sum, true, MLMethod::ClosedForm, m};
    }
    return asymptotic(z);
  }

  const MittagLeffler& sub(double beta) const {
    auto it = subs_.find(beta);
    if (it == subs_.end()) {
      it = subs_.emplace(beta, std::make_shared<MittagLeffler>(params_.alpha, beta, 1)).first;
    }
    return *it->second;
  }

  MLParams params_;
  mutable std::vector<ml_detail::MpReal> coeffs_;
  mutable std::map<double, std::shared_ptr<MittagLeffler>> subs_;
};

namespace ml_detail {

inline const MittagLeffler& cached(double alpha, double beta, int mu) {
  thread_local std::map<std::tuple<double, double, int>, MittagLeffler> cache;
  const auto key = std::make_tuple(alpha, beta, mu);
  auto it = cache.find(key);
  if (it == cache.end()) {
    if (cache.size() > 4096) cache.clear();
    it = cache.emplace(key, MittagLeffler(alpha, beta, mu)).first;
  }
  return it->second;
}

}  // namespace ml_detail

/// E_{alpha,beta}(z) with its accuracy flag.
inline MLValue ml2_checked(double alpha, double beta, double z) {
  MLParams{alpha, beta, 1}.validate();
  return ml_detail::cached(alpha, beta, 1).evaluate(z);
}

/// E^2_{alpha,beta}(z) with its accuracy flag.
inline MLValue ml3_checked(double alpha, double beta, double z) {
  MLParams{alpha, beta, 2}.validate();
  return ml_detail::cached(alpha, beta, 2).evaluate(z);
}

/// Two-parameter Mittag-Leffler function E_{alpha,beta}(z).
inline double ml2(double alpha, double beta, double z) { return ml2_checked(alpha, beta, z).value; }

/// Three-parameter Mittag-Leffler function with mu = 2.
inline double ml3(double alpha, double beta, double z) { return ml3_checked(alpha, beta, z).value; }

}  // namespace fracbc
