#pragma once

// Truncated cosine eigenbasis of the Laplacian on the unit square, the
// fractional propagator E_{a,a}(lambda t^a), and mild solutions computed by
// product integration against the weakly singular kernel.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "fracbc/errors.hpp"
#include "fracbc/mittag_leffler.hpp"

namespace fracbc {

namespace detail {

inline std::uint64_t next_object_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw DomainError("alpha must lie in (0, 1], got " + std::to_string(alpha));
  }
}

inline void check_unit_square(double x, double y) {
  constexpr double slack = 1e-12;
  if (!(x >= -slack && x <= 1.0 + slack && y >= -slack && y <= 1.0 + slack)) {
    throw DomainError("point (" + std::to_string(x) + ", " + std::to_string(y) + ") is outside the unit square");
  }
}

}  // namespace detail

/// One eigenpair: xi = 2 a cos(i pi x) cos(j pi y), lambda = -(i^2 + j^2) pi^2.
struct Mode {
  int i = 1;
  int j = 1;
  int key = 2;  // i^2 + j^2
  double lambda = 0.0;
  double a = 0.0;
  int group = 0;
};

/// Modes sharing one eigenvalue. Mode indices are contiguous.
struct ModeGroup {
  int key = 0;
  double lambda = 0.0;
  int first = 0;
  int size = 0;
};

/// All modes with 1 <= i, j <= N, ordered by eigenvalue key, then by i.
class SpectralBasis {
 public:
  static constexpr int kMaxN = 200;

  explicit SpectralBasis(int N) : N_(N), id_(detail::next_object_id()) {
    if (N < 1 || N > kMaxN) {
      throw ConfigError("truncation order N must lie in [1, " + std::to_string(kMaxN) + "], got " +
                        std::to_string(N));
    }
    modes_.reserve(static_cast<std::size_t>(N) * N);
    for (int i = 1; i <= N; ++i) {
      for (int j = 1; j <= N; ++j) {
        Mode m;
        m.i = i;
        m.j = j;
        m.key = i * i + j * j;
        m.lambda = -static_cast<double>(m.key) * (std::numbers::pi * std::numbers::pi);
        m.a = 1.0 / std::sqrt(1.0 - m.lambda);
        modes_.push_back(m);
      }
    }
    std::stable_sort(modes_.begin(), modes_.end(), [](const Mode& l, const Mode& r) {
      return l.key != r.key ? l.key < r.key : l.i < r.i;
    });
    for (int k = 0; k < static_cast<int>(modes_.size()); ++k) {
      if (groups_.empty() || groups_.back().key != modes_[k].key) {
        groups_.push_back({modes_[k].key, modes_[k].lambda, k, 0});
      }
      groups_.back().size += 1;
      modes_[k].group = static_cast<int>(groups_.size()) - 1;
    }
  }

  int N() const { return N_; }
  std::uint64_t id() const { return id_; }
  int size() const { return static_cast<int>(modes_.size()); }
  const std::vector<Mode>& modes() const { return modes_; }
  const Mode& mode(int k) const { return modes_.at(k); }
  const std::vector<ModeGroup>& groups() const { return groups_; }
  int group_count() const { return static_cast<int>(groups_.size()); }

  int max_multiplicity() const {
    int r = 0;
    for (const auto& g : groups_) r = std::max(r, g.size);
    return r;
  }

  /// Index of mode (i, j), or -1 when outside the truncation.
  int index_of(int i, int j) const {
    for (int k = 0; k < size(); ++k) {
      if (modes_[k].i == i && modes_[k].j == j) return k;
    }
    return -1;
  }

  /// Index of the group with eigenvalue key i^2 + j^2, or -1.
  int group_of_key(int key) const {
    for (int g = 0; g < group_count(); ++g) {
      if (groups_[g].key == key) return g;
    }
    return -1;
  }

  double eval(int k, double x, double y) const {
    detail::check_unit_square(x, y);
    const Mode& m = modes_.at(k);
    return 2.0 * m.a * std::cos(m.i * std::numbers::pi * x) * std::cos(m.j * std::numbers::pi * y);
  }

  /// Values of every mode at (x, y).
  Eigen::VectorXd eval_all(double x, double y) const {
    detail::check_unit_square(x, y);
    const Eigen::VectorXd cx = cosines(x);
    const Eigen::VectorXd cy = cosines(y);
    Eigen::VectorXd v(size());
    for (int k = 0; k < size(); ++k) {
      const Mode& m = modes_[k];
      v[k] = 2.0 * m.a * cx[m.i] * cy[m.j];
    }
    return v;
  }

  /// Partial derivatives of every mode at (x, y).
  void eval_gradient_all(double x, double y, Eigen::VectorXd& dx, Eigen::VectorXd& dy) const {
    detail::check_unit_square(x, y);
    const Eigen::VectorXd cx = cosines(x), cy = cosines(y);
    const Eigen::VectorXd sx = sines(x), sy = sines(y);
    dx.resize(size());
    dy.resize(size());
    for (int k = 0; k < size(); ++k) {
      const Mode& m = modes_[k];
      dx[k] = -2.0 * m.a * m.i * std::numbers::pi * sx[m.i] * cy[m.j];
      dy[k] = -2.0 * m.a * m.j * std::numbers::pi * cx[m.i] * sy[m.j];
    }
  }

  /// Per-mode eigenvalues.
  Eigen::VectorXd lambdas() const {
    Eigen::VectorXd l(size());
    for (int k = 0; k < size(); ++k) l[k] = modes_[k].lambda;
    return l;
  }

 private:
  Eigen::VectorXd cosines(double x) const {
    Eigen::VectorXd c(N_ + 1);
    for (int n = 0; n <= N_; ++n) c[n] = std::cos(n * std::numbers::pi * x);
    return c;
  }
  Eigen::VectorXd sines(double x) const {
    Eigen::VectorXd s(N_ + 1);
    for (int n = 0; n <= N_; ++n) s[n] = std::sin(n * std::numbers::pi * x);
    return s;
  }

  int N_;
  std::uint64_t id_;
  std::vector<Mode> modes_;
  std::vector<ModeGroup> groups_;
};

inline SpectralBasis build_basis(int N) { return SpectralBasis(N); }

/// Coefficients of a state in a specific basis.
struct StateCoeffs {
  Eigen::VectorXd c;
  std::uint64_t basis_id = 0;

  static StateCoeffs zeros(const SpectralBasis& basis) {
    return {Eigen::VectorXd::Zero(basis.size()), basis.id()};
  }
  static StateCoeffs unit(const SpectralBasis& basis, int k) {
    StateCoeffs s = zeros(basis);
    s.c[k] = 1.0;
    return s;
  }
};

inline void check_basis(const SpectralBasis& basis, const StateCoeffs& z, const char* what) {
  if (z.basis_id != basis.id() || z.c.size() != basis.size()) {
    throw ConfigError(std::string(what) + ": coefficients belong to a different basis");
  }
}

/// Value of the state at (x, y).
inline double evaluate_state(const SpectralBasis& basis, const StateCoeffs& z, double x, double y) {
  check_basis(basis, z, "evaluate_state");
  return basis.eval_all(x, y).dot(z.c);
}

/// Uniform time grid t_m = m b / M, m = 0..M.
struct TimeGrid {
  double b = 1.0;
  int M = 1;

  TimeGrid() = default;
  TimeGrid(double horizon, int steps) : b(horizon), M(steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("time horizon b must be positive");
    if (steps < 1) throw ConfigError("number of time steps M must be at least 1");
  }

  double h() const { return b / M; }
  double t(int m) const { return m == M ? b : m * h(); }
  int size() const { return M + 1; }

  /// Composite trapezoid weights on the nodes.
  Eigen::VectorXd trapezoid() const {
    Eigen::VectorXd w = Eigen::VectorXd::Constant(M + 1, h());
    w[0] *= 0.5;
    w[M] *= 0.5;
    return w;
  }

  bool operator==(const TimeGrid& o) const { return b == o.b && M == o.M; }
};

/// Piecewise-linear control samples, one row per actuator.
struct ControlSignal {
  TimeGrid grid;
  Eigen::MatrixXd u;  // p x (M + 1)

  ControlSignal() = default;
  ControlSignal(const TimeGrid& g, int p) : grid(g), u(Eigen::MatrixXd::Zero(p, g.size())) {}
  ControlSignal(const TimeGrid& g, Eigen::MatrixXd samples) : grid(g), u(std::move(samples)) { validate(); }

  int p() const { return static_cast<int>(u.rows()); }

  void validate() const {
    if (u.cols() != grid.size()) throw ConfigError("control samples do not match the time grid");
    if (!u.allFinite()) throw NumericalError("control signal has non-finite samples");
  }

  /// Trapezoid energy sum_i int u_i^2 dt.
  double energy() const {
    const Eigen::VectorXd w = grid.trapezoid();
    return (u.array().square().matrix() * w).sum();
  }
};

/// tau^{a-1} E_{a,a}(lambda tau^a), the scalar kernel of the convolution.
inline double kernel(double alpha, double lambda, double tau) {
  if (!(tau > 0.0)) throw DomainError("kernel: tau must be positive");
  return std::pow(tau, alpha - 1.0) * ml2(alpha, alpha, lambda * std::pow(tau, alpha));
}

/// Antiderivatives of the kernel: K1 = int_0^tau k, K2 = int_0^tau K1.
inline double kernel_k1(const MittagLeffler& e1, double lambda, double tau) {
  if (tau <= 0.0) return 0.0;
  const double ta = std::pow(tau, e1.alpha());
  return ta * e1(lambda * ta);
}
inline double kernel_k2(const MittagLeffler& e2, double lambda, double tau) {
  if (tau <= 0.0) return 0.0;
  const double ta = std::pow(tau, e2.alpha());
  return ta * tau * e2(lambda * ta);
}

/// Product-integration weights: int_0^t k(t - s) u(s) ds = sum_m W_m u(s_m)
/// for u piecewise linear on the grid, exact up to Mittag-Leffler rounding.
inline Eigen::VectorXd convolution_weights(double alpha, double lambda, const TimeGrid& grid, double t) {
  detail::check_alpha(alpha);
  const MittagLeffler e1(alpha, alpha + 1.0), e2(alpha, alpha + 2.0);
  const double h = grid.h();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(grid.size());
  for (int m = 0; m < grid.M; ++m) {
    const double s0 = grid.t(m);
    if (s0 >= t) break;
    const double hi = t - s0;                     // tau at s_m
    const double c = t - grid.t(m + 1);           // tau at s_{m+1}, may be negative
    const double lo = std::max(c, 0.0);
    const double k1_hi = kernel_k1(e1, lambda, hi), k1_lo = kernel_k1(e1, lambda, lo);
    const double dk2 = kernel_k2(e2, lambda, hi) - kernel_k2(e2, lambda, lo);
    // u = u_m (tau - c)/h + u_{m+1} (hi - tau)/h on [lo, hi]
    w[m] += (k1_hi * (hi - c) - k1_lo * (lo - c) - dk2) / h;
    w[m + 1] += (-k1_lo * (hi - lo) + dk2) / h;
  }
  return w;
}

/// Per-group tables of K1, K2 at tau = d h and the final-time weights.
///
/// Built once per (basis, alpha, grid) and reused by every operator that
/// integrates against the kernel.
class KernelTable {
 public:
  KernelTable(const SpectralBasis& basis, double alpha, const TimeGrid& grid)
      : basis_id_(basis.id()), alpha_(alpha), grid_(grid) {
    detail::check_alpha(alpha);
    const int G = basis.group_count();
    const MittagLeffler e1(alpha, alpha + 1.0), e2(alpha, alpha + 2.0);
    k1_.resize(G, grid.size());
    k2_.resize(G, grid.size());
    for (int g = 0; g < G; ++g) {
      const double lambda = basis.groups()[g].lambda;
      for (int d = 0; d <= grid.M; ++d) {
        const double tau = grid.t(d);
        k1_(g, d) = kernel_k1(e1, lambda, tau);
        k2_(g, d) = kernel_k2(e2, lambda, tau);
      }
    }
    if (!k1_.allFinite() || !k2_.allFinite()) throw NumericalError("kernel table has non-finite entries");
    final_ = node_weights(grid.M);
  }

  std::uint64_t basis_id() const { return basis_id_; }
  double alpha() const { return alpha_; }
  const TimeGrid& grid() const { return grid_; }
  int group_count() const { return static_cast<int>(k1_.rows()); }

  /// G x (M+1) weights for t = b.
  const Eigen::MatrixXd& final_weights() const { return final_; }

  /// G x (M+1) weights for t = t_n (columns beyond n are zero).
  Eigen::MatrixXd node_weights(int n) const {
    const double h = grid_.h();
    const int G = group_count();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(G, grid_.size());
    for (int m = 0; m < n; ++m) {
      const int d = n - m;  // interval [s_m, s_{m+1}] maps to tau in [(d-1)h, dh]
      for (int g = 0; g < G; ++g) {
        const double dk2 = k2_(g, d) - k2_(g, d - 1);
        w(g, m) += k1_(g, d) - dk2 / h;
        w(g, m + 1) += dk2 / h - k1_(g, d - 1);
      }
    }
    return w;
  }

  void check(const SpectralBasis& basis, double alpha, const TimeGrid& grid) const {
    if (basis.id() != basis_id_ || alpha != alpha_ || !(grid == grid_)) {
      throw ConfigError("kernel table was built for a different basis, alpha or time grid");
    }
  }

 private:
  std::uint64_t basis_id_;
  double alpha_;
  TimeGrid grid_;
  Eigen::MatrixXd k1_, k2_;
  Eigen::MatrixXd final_;
};

/// Coefficients c'_k = E_{a,a}(lambda_k t^a) c_k.
inline StateCoeffs apply_k_alpha(const SpectralBasis& basis, double alpha, double t, const StateCoeffs& z) {
  detail::check_alpha(alpha);
  check_basis(basis, z, "apply_k_alpha");
  if (!(t >= 0.0)) throw DomainError("apply_k_alpha: t must be non-negative");
  StateCoeffs out = z;
  const double ta = std::pow(t, alpha);
  const MittagLeffler e(alpha, alpha);
  for (const auto& g : basis.groups()) {
    const double f = e(g.lambda * ta);
    out.c.segment(g.first, g.size) *= f;
  }
  return out;
}

/// Mode x p matrix of actuator coefficients.
inline Eigen::MatrixXd stack_columns(const SpectralBasis& basis, const std::vector<StateCoeffs>& cols) {
  Eigen::MatrixXd B(basis.size(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    check_basis(basis, cols[i], "actuator column");
    B.col(static_cast<Eigen::Index>(i)) = cols[i].c;
  }
  return B;
}

/// Mode-wise convolution sum_i g^i_k sum_m W_m(lambda_k) u_{i,m}, given G x (M+1) weights.
inline Eigen::VectorXd convolve_groups(const SpectralBasis& basis, const Eigen::MatrixXd& weights,
                                       const Eigen::MatrixXd& B, const Eigen::MatrixXd& u) {
  const Eigen::MatrixXd wu = weights * u.transpose();  // G x p
  Eigen::VectorXd c(basis.size());
  for (int k = 0; k < basis.size(); ++k) c[k] = B.row(k).dot(wu.row(basis.mode(k).group));
  return c;
}

/// Mild solution at time t in (0, b] using a prebuilt kernel table.
inline StateCoeffs mild_solution(const SpectralBasis& basis, const KernelTable& table, const StateCoeffs& z0,
                                 const std::vector<StateCoeffs>& B_cols, const ControlSignal& u, double t) {
  const double alpha = table.alpha();
  table.check(basis, alpha, u.grid);
  check_basis(basis, z0, "mild_solution initial state");
  u.validate();
  if (static_cast<int>(B_cols.size()) != u.p()) {
    throw ConfigError("mild_solution: " + std::to_string(B_cols.size()) + " actuator columns but " +
                      std::to_string(u.p()) + " control rows");
  }
  const double b = u.grid.b;
  if (!(t > 0.0)) throw DomainError("mild_solution: t must be positive");
  if (t > b * (1.0 + 1e-12)) throw DomainError("mild_solution: t exceeds the horizon b");

  StateCoeffs out = apply_k_alpha(basis, alpha, t, z0);
  if (u.p() == 0) return out;
  const Eigen::MatrixXd B = stack_columns(basis, B_cols);

  const double steps = t / u.grid.h();
  const int n = static_cast<int>(std::lround(steps));
  Eigen::MatrixXd weights;
  if (std::fabs(steps - n) <= 1e-9 * std::max(1.0, steps)) {
    weights = n == u.grid.M ? table.final_weights() : table.node_weights(n);
  } else {
    weights.resize(basis.group_count(), u.grid.size());
    for (int g = 0; g < basis.group_count(); ++g) {
      weights.row(g) = convolution_weights(alpha, basis.groups()[g].lambda, u.grid, t).transpose();
    }
  }
  out.c += convolve_groups(basis, weights, B, u.u);
  return out;
}

/// Mild solution at time t; builds the kernel table on the fly.
inline StateCoeffs mild_solution(const SpectralBasis& basis, double alpha, const StateCoeffs& z0,
                                 const std::vector<StateCoeffs>& B_cols, const ControlSignal& u, double t) {
  const KernelTable table(basis, alpha, u.grid);
  return mild_solution(basis, table, z0, B_cols, u, t);
}

/// Coefficients at every grid node t_1..t_M (column m holds t_m; column 0 is
/// K_a(0) z0, the weak initial value).
inline Eigen::MatrixXd mild_trajectory(const SpectralBasis& basis, const KernelTable& table, const StateCoeffs& z0,
                                       const std::vector<StateCoeffs>& B_cols, const ControlSignal& u) {
  const TimeGrid& grid = u.grid;
  Eigen::MatrixXd traj(basis.size(), grid.size());
  traj.col(0) = apply_k_alpha(basis, table.alpha(), 0.0, z0).c;
  for (int n = 1; n <= grid.M; ++n) {
    traj.col(n) = mild_solution(basis, table, z0, B_cols, u, grid.t(n)).c;
  }
  return traj;
}

}  // namespace fracbc
