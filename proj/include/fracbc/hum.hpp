#pragma once

// Controllability operators H and H*, the boundary Gram R_Gamma, the strip
// Gram Lambda, minimum-energy control and the internal-transfer control.
//
// Time is discretized by the product-integration weights of the kernel
// table: (H u)_k = sum_i g^i_k sum_m W_{g(k),m} u_{i,m}. Controls carry the
// trapezoid inner product <u, v> = sum_m tau_m u_m . v_m, and H* is the exact
// adjoint of H for that inner product, so every duality identity below holds
// to rounding.

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SVD>

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fracbc/actuation.hpp"
#include "fracbc/boundary.hpp"
#include "fracbc/errors.hpp"
#include "fracbc/spectral.hpp"

namespace fracbc {

/// Basis, order, horizon, actuators and the kernel table they share.
class Plant {
 public:
  Plant(const SpectralBasis& basis, double alpha, const std::vector<StateCoeffs>& cols, const TimeGrid& grid)
      : basis_(basis),
        alpha_(alpha),
        grid_(grid),
        table_(std::make_shared<KernelTable>(basis, alpha, grid)),
        cols_(cols),
        B_(stack_columns(basis, cols)),
        tau_(grid.trapezoid()) {
    if (cols.empty()) throw ConfigError("at least one actuator is required");
  }

  Plant(const SpectralBasis& basis, double alpha, const std::vector<Actuator>& acts, const TimeGrid& grid)
      : Plant(basis, alpha, actuator_columns(basis, acts), grid) {}

  const SpectralBasis& basis() const { return basis_; }
  double alpha() const { return alpha_; }
  const TimeGrid& grid() const { return grid_; }
  const KernelTable& table() const { return *table_; }
  const std::vector<StateCoeffs>& columns() const { return cols_; }
  /// Modes x p actuator coefficients.
  const Eigen::MatrixXd& B() const { return B_; }
  int p() const { return static_cast<int>(B_.cols()); }
  /// Trapezoid weights of the control inner product.
  const Eigen::VectorXd& tau() const { return tau_; }

  /// Inner product of two control signals.
  double inner(const ControlSignal& u, const ControlSignal& v) const {
    return ((u.u.array() * v.u.array()).matrix() * tau_).sum();
  }

  /// H u: the state at t = b driven by u from rest.
  StateCoeffs apply_H(const ControlSignal& u) const {
    check_signal(u);
    StateCoeffs out = StateCoeffs::zeros(basis_);
    out.c = convolve_groups(basis_, table_->final_weights(), B_, u.u);
    return out;
  }

  /// H* v, sampled on the grid. Node m holds (1/tau_m) sum_k g_k W_{g(k),m} v_k,
  /// which approximates B* (b-s)^{a-1} K_a(b-s) v away from s = b. At s = b
  /// the value is the product-integration weight of the integrable singularity.
  ControlSignal apply_H_star(const StateCoeffs& v) const {
    check_basis(basis_, v, "apply_H_star");
    const int G = basis_.group_count();
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(G, p());  // group-wise sums of g^i_k v_k
    for (int k = 0; k < basis_.size(); ++k) s.row(basis_.mode(k).group) += v.c[k] * B_.row(k);
    ControlSignal u(grid_, p());
    u.u = s.transpose() * table_->final_weights();
    u.u.array().rowwise() /= tau_.transpose().array();
    return u;
  }

  /// H H* in mode coordinates: (B B^T)_{kl} C_{g(k) g(l)} with C = W diag(1/tau) W^T.
  const Eigen::MatrixXd& mode_gram() const {
    if (mode_gram_.size() == 0) {
      const Eigen::MatrixXd& W = table_->final_weights();
      const Eigen::MatrixXd C = W * tau_.cwiseInverse().asDiagonal() * W.transpose();
      const Eigen::MatrixXd BB = B_ * B_.transpose();
      const int n = basis_.size();
      mode_gram_.resize(n, n);
      for (int l = 0; l < n; ++l) {
        const int gl = basis_.mode(l).group;
        for (int k = 0; k < n; ++k) mode_gram_(k, l) = BB(k, l) * C(basis_.mode(k).group, gl);
      }
      for (int k = 0; k < n; ++k) {
        if (!mode_gram_.col(k).allFinite()) {
          const Mode& m = basis_.mode(k);
          throw NumericalError("Gram has non-finite entries at mode (" + std::to_string(m.i) + ", " +
                               std::to_string(m.j) + ")");
        }
      }
    }
    return mode_gram_;
  }

  /// Free evolution K_a(b) z0.
  StateCoeffs free_evolution(const StateCoeffs& z0) const { return apply_k_alpha(basis_, alpha_, grid_.b, z0); }

  /// z(b, u) from z0.
  StateCoeffs final_state(const StateCoeffs& z0, const ControlSignal& u) const {
    StateCoeffs z = free_evolution(z0);
    z.c += apply_H(u).c;
    return z;
  }

 private:
  void check_signal(const ControlSignal& u) const {
    u.validate();
    if (!(u.grid == grid_)) throw ConfigError("control signal is on a different time grid");
    if (u.p() != p()) {
      throw ConfigError("control has " + std::to_string(u.p()) + " rows, plant has " + std::to_string(p()) +
                        " actuators");
    }
  }

  SpectralBasis basis_;
  double alpha_;
  TimeGrid grid_;
  std::shared_ptr<KernelTable> table_;
  std::vector<StateCoeffs> cols_;
  Eigen::MatrixXd B_;
  Eigen::VectorXd tau_;
  mutable Eigen::MatrixXd mode_gram_;
};

inline StateCoeffs apply_H(const Plant& plant, const ControlSignal& u) { return plant.apply_H(u); }
inline ControlSignal apply_H_star(const Plant& plant, const StateCoeffs& v) { return plant.apply_H_star(v); }

/// Adjoint state (b-t)^{a-1} E_{a,a}(lambda (b-t)^a) g, for t in [0, b).
inline StateCoeffs adjoint_state_phi(const SpectralBasis& basis, double alpha, double b, const StateCoeffs& g,
                                     double t) {
  detail::check_alpha(alpha);
  check_basis(basis, g, "adjoint_state_phi");
  if (!(t >= 0.0)) throw DomainError("adjoint_state_phi: t must be non-negative");
  if (!(t < b)) throw DomainError("adjoint_state_phi: singular at t = b; use the product-integration weights");
  const double tau = b - t;
  StateCoeffs out = apply_k_alpha(basis, alpha, tau, g);
  out.c *= std::pow(tau, alpha - 1.0);
  return out;
}

/// L2(0, b) norm of H* gamma* p_Gamma* z; zero flags an unreachable direction.
inline double reachability_indicator(const Plant& plant, const BoundaryRegion& region, const BoundaryTrace& z) {
  check_region(region, z, "reachability_indicator");
  StateCoeffs v = StateCoeffs::zeros(plant.basis());
  v.c = trace_matrix(plant.basis(), region).transpose() * (region.weights().asDiagonal() * z.values);
  const ControlSignal u = plant.apply_H_star(v);
  return std::sqrt(std::max(0.0, plant.inner(u, u)));
}

enum class GramKind { BoundaryRGamma, LambdaOmega };

inline const char* to_string(GramKind k) { return k == GramKind::BoundaryRGamma ? "boundary_R_gamma" : "lambda_omega"; }

/// Gram of an observation P (n points with quadrature weights w) composed
/// with H H*.
///
/// The operator w -> P H H* P^T diag(w) w is self-adjoint in the weighted
/// inner product. `matrix` holds it in the symmetric coordinates
/// w~ = diag(w)^{1/2} w, i.e. A (H H*) A^T with A = diag(w)^{1/2} P. Solves
/// run on the range of A: with A = U S V^T, the reduced matrix is
/// S V^T (H H*) V S. Directions outside range(A) never reach the control,
/// so the reduction leaves u* unchanged.
struct GramOperator {
  GramKind kind = GramKind::BoundaryRGamma;
  Eigen::MatrixXd matrix;   // n x n, symmetric
  Eigen::MatrixXd reduced;  // rank x rank, symmetric
  Eigen::MatrixXd U;        // n x rank
  Eigen::MatrixXd VS;       // modes x rank, equals A^T U
  Eigen::VectorXd sqrt_w;   // n
  Eigen::VectorXd eigenvalues;   // of `reduced`, ascending
  Eigen::MatrixXd eigenvectors;  // of `reduced`
  double reg_eps = 0.0;
  double eig_min = 0.0;        // of the n x n operator (0 when n > rank)
  double eig_min_range = 0.0;  // on range(A)
  double eig_max = 0.0;
  double asymmetry = 0.0;  // ||M - M^T||_F / ||M||_F before symmetrization
  int rank = 0;
  std::uint64_t basis_id = 0;

  int size() const { return static_cast<int>(matrix.rows()); }

  /// Regularization eps, defaulting to rel * eig_max.
  void set_regularization(double rel = 1e-8) {
    if (!(rel >= 0.0)) throw ConfigError("regularization must be non-negative");
    reg_eps = rel * eig_max;
  }
};

namespace detail {

inline GramOperator assemble_gram(const Plant& plant, const Eigen::MatrixXd& P, const Eigen::VectorXd& w,
                                  GramKind kind, double rank_tol) {
  GramOperator g;
  g.kind = kind;
  g.basis_id = plant.basis().id();
  g.sqrt_w = w.cwiseSqrt();
  const Eigen::MatrixXd A = g.sqrt_w.asDiagonal() * P;
  const Eigen::MatrixXd& Mm = plant.mode_gram();

  g.matrix = A * (Mm * A.transpose());
  const double fro = g.matrix.norm();
  g.asymmetry = fro > 0.0 ? (g.matrix - g.matrix.transpose()).norm() / fro : 0.0;
  g.matrix = 0.5 * (g.matrix + g.matrix.transpose()).eval();
  if (!g.matrix.allFinite()) throw NumericalError(std::string(to_string(kind)) + ": non-finite Gram entries");

  const Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  while (g.rank < sv.size() && sv[g.rank] > rank_tol * sv[0]) ++g.rank;
  g.U = svd.matrixU().leftCols(g.rank);
  g.VS = svd.matrixV().leftCols(g.rank) * sv.head(g.rank).asDiagonal();
  g.reduced = g.VS.transpose() * Mm * g.VS;
  g.reduced = 0.5 * (g.reduced + g.reduced.transpose()).eval();

  if (g.rank > 0) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.reduced);
    g.eigenvalues = es.eigenvalues();
    g.eigenvectors = es.eigenvectors();
    g.eig_min_range = g.eigenvalues[0];
    g.eig_max = g.eigenvalues[g.rank - 1];
  }
  g.eig_min = g.rank < g.size() ? std::min(0.0, g.eig_min_range) : g.eig_min_range;
  g.set_regularization();
  return g;
}

inline void check_gram(const GramOperator& gram, const Plant& plant, GramKind kind, int n) {
  if (gram.kind != kind) throw ConfigError("Gram operator is of the wrong kind");
  if (gram.basis_id != plant.basis().id() || gram.size() != n) {
    throw ConfigError("Gram operator was assembled on a different discretization");
  }
  if (!(gram.eig_max > 0.0) || !std::isfinite(gram.eig_max)) {
    throw NotControllableError(std::string(to_string(kind)) +
                               ": Gram vanishes in the truncation (eig_max = " + std::to_string(gram.eig_max) +
                               "); no actuator reaches the observed modes");
  }
}

/// (reduced + eps I)^{-1} r through the eigendecomposition; eigenvalues with
/// lambda + eps below 1e-14 eig_max are dropped.
inline Eigen::VectorXd spectral_solve(const GramOperator& gram, const Eigen::VectorXd& r) {
  const Eigen::VectorXd c = gram.eigenvectors.transpose() * r;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(c.size());
  for (int k = 0; k < c.size(); ++k) {
    const double d = gram.eigenvalues[k] + gram.reg_eps;
    if (d > 1e-14 * gram.eig_max) y[k] = c[k] / d;
  }
  return gram.eigenvectors * y;
}

}  // namespace detail

/// R_Gamma = p_Gamma gamma H H* gamma* p_Gamma* over the boundary quadrature nodes.
inline GramOperator assemble_R_gamma(const Plant& plant, const BoundaryRegion& region, double rank_tol = 1e-12) {
  return detail::assemble_gram(plant, trace_matrix(plant.basis(), region), region.weights(),
                               GramKind::BoundaryRGamma, rank_tol);
}

/// Lambda g = p_{omega_r} psi_1(b), with psi_1 driven by u = B* phi over the strip nodes.
inline GramOperator assemble_lambda(const Plant& plant, const InternalRegion& omega, double rank_tol = 1e-12) {
  return detail::assemble_gram(plant, evaluation_matrix(plant.basis(), omega.nodes), omega.weights,
                               GramKind::LambdaOmega, rank_tol);
}

struct ControlSynthesis {
  ControlSignal u_star;
  StateCoeffs final_state;
  BoundaryTrace target;
  BoundaryTrace achieved;
  double residual = 0.0;  // relative L2(Gamma) miss
  double energy = 0.0;    // trapezoid int |u*|^2 dt
  // Conditioning diagnostics of the Gram solve.
  double reg_eps = 0.0;
  double eig_min = 0.0;
  double eig_max = 0.0;
  int rank = 0;
  int iterations = 0;
  double solver_error = 0.0;
  // Internal transfer only.
  double strip_residual = 0.0;
  double extension_error = 0.0;
};

namespace detail {

inline void finish(const Plant& plant, const BoundaryRegion& region, const StateCoeffs& z0, ControlSynthesis& out) {
  out.final_state = plant.final_state(z0, out.u_star);
  out.achieved = trace_on_gamma(plant.basis(), region, out.final_state);
  const double norm = l2_norm(region, out.target.values);
  const double miss = l2_norm(region, out.achieved.values - out.target.values);
  out.residual = norm > 0.0 ? miss / norm : miss;
  out.energy = plant.inner(out.u_star, out.u_star);
}

}  // namespace detail

/// Minimum-energy control steering z0 to the boundary target zb:
/// (R_Gamma + eps I) w = zb - p_Gamma gamma K_a(b) z0, u* = H* gamma* p_Gamma* w.
inline ControlSynthesis min_energy_control(const GramOperator& gram, const Plant& plant, const BoundaryRegion& region,
                                           const StateCoeffs& z0, const BoundaryTrace& zb) {
  check_region(region, zb, "min_energy_control");
  check_basis(plant.basis(), z0, "min_energy_control");
  detail::check_gram(gram, plant, GramKind::BoundaryRGamma, region.size());
  const Eigen::VectorXd free = trace_matrix(plant.basis(), region) * plant.free_evolution(z0).c;
  const Eigen::VectorXd rhs = gram.U.transpose() * (gram.sqrt_w.asDiagonal() * (zb.values - free));
  const Eigen::VectorXd x = detail::spectral_solve(gram, rhs);

  ControlSynthesis out;
  StateCoeffs v = StateCoeffs::zeros(plant.basis());
  v.c = gram.VS * x;
  out.u_star = plant.apply_H_star(v);
  out.target = zb;
  out.reg_eps = gram.reg_eps;
  out.eig_min = gram.eig_min;
  out.eig_max = gram.eig_max;
  out.rank = gram.rank;
  detail::finish(plant, region, z0, out);
  return out;
}

/// Internal-transfer control: the boundary target is extended into omega_r,
/// (Lambda + eps I) g = p_{omega_r}(T p_Gamma* zb - K_a(b) z0) is solved by
/// conjugate gradients, and u* = B* phi with phi the adjoint state of g.
inline ControlSynthesis transfer_control(const GramOperator& gram, const Plant& plant, const InternalRegion& omega,
                                         const BoundaryRegion& region, const StateCoeffs& z0, const BoundaryTrace& zb,
                                         double cg_tol = 1e-12) {
  check_region(region, zb, "transfer_control");
  check_basis(plant.basis(), z0, "transfer_control");
  if (omega.region_id != region.id()) throw ConfigError("transfer_control: omega_r was built for another region");
  detail::check_gram(gram, plant, GramKind::LambdaOmega, omega.size());

  ControlSynthesis out;
  out.target = zb;
  out.reg_eps = gram.reg_eps;
  out.eig_min = gram.eig_min;
  out.eig_max = gram.eig_max;
  out.rank = gram.rank;

  const Eigen::MatrixXd E = evaluation_matrix(plant.basis(), omega.nodes);
  Eigen::VectorXd yb = Eigen::VectorXd::Zero(omega.size());
  if (l2_norm(region, zb.values) > 0.0) {
    const Extension ext = extension_T_detailed(plant.basis(), region, omega, zb);
    out.extension_error = ext.trace_error;
    yb = E * ext.coeffs.c;
  }
  const Eigen::VectorXd rhs_full = yb - E * plant.free_evolution(z0).c;
  const Eigen::VectorXd rhs = gram.U.transpose() * (gram.sqrt_w.asDiagonal() * rhs_full);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(gram.rank);
  if (rhs.norm() > 0.0) {
    const Eigen::MatrixXd K = gram.reduced + gram.reg_eps * Eigen::MatrixXd::Identity(gram.rank, gram.rank);
    Eigen::ConjugateGradient<Eigen::MatrixXd, Eigen::Lower | Eigen::Upper, Eigen::IdentityPreconditioner> cg;
    cg.setMaxIterations(10 * gram.rank);
    cg.setTolerance(cg_tol);
    cg.compute(K);
    x = cg.solve(rhs);
    out.iterations = static_cast<int>(cg.iterations());
    out.solver_error = cg.error();
    if (cg.info() != Eigen::Success || !x.allFinite()) {
      throw NumericalError("transfer_control: conjugate gradients stopped after " + std::to_string(cg.iterations()) +
                           " iterations at relative residual " + std::to_string(cg.error()) +
                           " (eig_min " + std::to_string(gram.eig_min_range) + ", eig_max " +
                           std::to_string(gram.eig_max) + ", eps " + std::to_string(gram.reg_eps) + ")");
    }
  }
  StateCoeffs v = StateCoeffs::zeros(plant.basis());
  v.c = gram.VS * x;
  out.u_star = plant.apply_H_star(v);
  detail::finish(plant, region, z0, out);
  const Eigen::VectorXd strip = E * out.final_state.c;
  const double ynorm = std::sqrt(yb.cwiseAbs2().dot(omega.weights));
  const double smiss = std::sqrt((strip - yb).cwiseAbs2().dot(omega.weights));
  out.strip_residual = ynorm > 0.0 ? smiss / ynorm : smiss;
  return out;
}

/// Removes from u its component along range(H* P^T), i.e. projects u onto
/// the controls that leave the observation P H u unchanged. Orthogonality is
/// in the trapezoid inner product.
inline ControlSignal project_to_constraint_kernel(const Plant& plant, const GramOperator& gram, const ControlSignal& u) {
  if (gram.basis_id != plant.basis().id()) throw ConfigError("Gram operator belongs to another basis");
  const int T = plant.grid().size(), p = plant.p();
  const Eigen::VectorXd st = plant.tau().cwiseSqrt();
  // Columns: tau^{1/2} H* (VS e_r), flattened actuator-major.
  Eigen::MatrixXd Y(static_cast<Eigen::Index>(p) * T, gram.rank);
  for (int r = 0; r < gram.rank; ++r) {
    StateCoeffs v = StateCoeffs::zeros(plant.basis());
    v.c = gram.VS.col(r);
    const ControlSignal h = plant.apply_H_star(v);
    for (int i = 0; i < p; ++i) Y.col(r).segment(static_cast<Eigen::Index>(i) * T, T) = h.u.row(i).transpose().cwiseProduct(st);
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Y);
  const int rank = static_cast<int>(qr.rank());
  const Eigen::MatrixXd Q = Eigen::MatrixXd(qr.householderQ()).leftCols(rank);
  Eigen::VectorXd y(static_cast<Eigen::Index>(p) * T);
  for (int i = 0; i < p; ++i) y.segment(static_cast<Eigen::Index>(i) * T, T) = u.u.row(i).transpose().cwiseProduct(st);
  y -= Q * (Q.transpose() * y);
  ControlSignal out(plant.grid(), p);
  for (int i = 0; i < p; ++i) out.u.row(i) = y.segment(static_cast<Eigen::Index>(i) * T, T).cwiseQuotient(st).transpose();
  return out;
}

}  // namespace fracbc
