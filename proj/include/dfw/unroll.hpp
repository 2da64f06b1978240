#pragma once

// Reverse-mode differentiation of the Frank-Wolfe solution map through a recorded tape.
//
// Per iteration, with d = x - s and x' = x - gamma d, the adjoint of x' is pulled back
// through the update, the short-path step (interior branch only), the vertex oracle and
// finally the gradient evaluation g = grad f(x; theta), which splits into a Hessian-vector
// product (x path) and param_vjp (theta path). sign() is treated as locally constant and
// L as a constant. All adjoints are carried as matrices so that one sweep handles many seeds.
//
// Differentiating through the step size is exact for the unrolled map but that map amplifies
// adjoints by a roughly constant factor per iteration once the iterates zigzag along an
// active constraint. With the constraint active the solution moves with theta through the
// vertex selection alone, so StepGradient::automatic stops the step-size path there and
// keeps it when the solution is strictly interior (where the steps carry all dependence).

#include <dfw/solver.hpp>

#include <functional>
#include <stdexcept>

namespace dfw {

enum class StepGradient {
  automatic,  // stop when the returned solution is on the boundary, propagate otherwise
  propagate,  // exact derivative of the unrolled iteration
  stop,       // step sizes treated as constants
};

struct BackwardOptions {
  StepGradient step = StepGradient::automatic;
  /// Relative slack 1 - ||w o x*|| / t at or below which the constraint counts as active.
  double active_slack = 1e-6;
};

/// Whether the solution recorded in the tape lies on the constraint boundary.
template <typename Scalar>
bool constraint_active(const Trajectory<Scalar>& traj, double active_slack = 1e-6) {
  const Scalar t = traj.constraint.radius();
  if (t == Scalar(0)) return true;
  return Scalar(1) - traj.constraint.norm(traj.solution) / t <= Scalar(active_slack);
}

template <typename Scalar>
bool propagates_step(const Trajectory<Scalar>& traj, const BackwardOptions& opts) {
  switch (opts.step) {
    case StepGradient::propagate: return true;
    case StepGradient::stop: return false;
    case StepGradient::automatic: break;
  }
  return !constraint_active(traj, opts.active_slack);
}

namespace detail {

/// Adjoint of the vertex with respect to the gradient: J_s(g)^T S_bar for each column.
template <typename Scalar>
Matrix<Scalar> vertex_vjp(const Trajectory<Scalar>& traj, const IterationRecord<Scalar>& rec,
                          const Matrix<Scalar>& S_bar) {
  const NormConstraint<Scalar>& c = traj.constraint;
  const Eigen::Index n = rec.g.size();
  Matrix<Scalar> G_bar = Matrix<Scalar>::Zero(n, S_bar.cols());
  const auto order = c.order();
  if (order.is_infinity() || (order.is_one() && !traj.uses_softmax())) return G_bar;

  const Vector<Scalar> t_over_w = (c.radius() / c.weights().array()).matrix();
  const Vector<Scalar> g_tw = t_over_w.cwiseProduct(rec.g);
  const Vector<Scalar> sigma = signs(g_tw);
  const Vector<Scalar> coeff = -t_over_w.cwiseProduct(sigma);  // s = coeff o u

  if (order.is_one()) {
    // u = softmax(r / tau): u_bar -> r_bar = pi o (u_bar - <pi, u_bar>) / tau.
    const Vector<Scalar>& pi = rec.probabilities;
    if (pi.size() != n) throw std::invalid_argument("backward: tape lacks softmax probabilities");
    const Matrix<Scalar> U_bar = coeff.asDiagonal() * S_bar;
    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> inner = pi.transpose() * U_bar;
    const Matrix<Scalar> R_bar = pi.asDiagonal() * (U_bar.rowwise() - inner) / rec.tau;
    G_bar = t_over_w.cwiseProduct(sigma).asDiagonal() * R_bar;
    return G_bar;
  }

  // u = v / ||v||_p with v = rho^e, rho = r / max(r), e = 1 / (p - 1). u is homogeneous of
  // degree zero in r, so d/dr = (d/drho) / max(r).
  const Vector<Scalar> r = g_tw.cwiseAbs();
  const Scalar r_max = n ? r.maxCoeff() : Scalar(0);
  if (r_max == Scalar(0)) return G_bar;
  const Scalar p = order.p;
  const Scalar e = Scalar(1) / (p - Scalar(1));
  const Vector<Scalar> rho = r / r_max;
  const Vector<Scalar> v = rho.array().pow(e).matrix();
  const Scalar N = std::pow(v.array().pow(p).sum(), Scalar(1) / p);
  const Vector<Scalar> dN_dv = (v.array().pow(p - Scalar(1)) / std::pow(N, p - Scalar(1))).matrix();
  Vector<Scalar> dv_drho(n);
  for (Eigen::Index i = 0; i < n; ++i)
    dv_drho[i] = rho[i] > Scalar(0) ? e * std::pow(rho[i], e - Scalar(1)) : Scalar(0);

  const Matrix<Scalar> U_bar = coeff.asDiagonal() * S_bar;
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> uv = v.transpose() * U_bar;
  const Matrix<Scalar> V_bar = U_bar / N - dN_dv * (uv / (N * N));
  const Matrix<Scalar> R_bar = dv_drho.asDiagonal() * V_bar / r_max;
  G_bar = t_over_w.cwiseProduct(sigma).asDiagonal() * R_bar;
  return G_bar;
}

}  // namespace detail

/// Batched vector-Jacobian products: column j of the result is U.col(j)^T dx*/dtheta.
template <typename Scalar>
Matrix<Scalar> backward_batch(const Trajectory<Scalar>& traj, const Objective<Scalar>& obj, const Matrix<Scalar>& U,
                              const BackwardOptions& opts = {}) {
  const Eigen::Index n = traj.constraint.dim();
  if (obj.dim() != n) throw std::invalid_argument("backward: objective and tape dimensions differ");
  if (U.rows() != n) throw std::invalid_argument("backward: seed has wrong length");
  const Scalar L = traj.lipschitz;
  const bool through_step = propagates_step(traj, opts);

  Matrix<Scalar> X_bar = U;
  Matrix<Scalar> theta_bar = Matrix<Scalar>::Zero(obj.param_dim(), U.cols());

  for (auto it = traj.records.rbegin(); it != traj.records.rend(); ++it) {
    const IterationRecord<Scalar>& rec = *it;
    const Vector<Scalar> d = rec.x - rec.s;
    // x' = x - gamma d: x_bar passes through unchanged, d_bar = -gamma x'_bar.
    Matrix<Scalar> D_bar = -rec.gamma * X_bar;
    Matrix<Scalar> G_bar = Matrix<Scalar>::Zero(n, U.cols());
    if (through_step && rec.branch == StepBranch::interior) {
      const Scalar num = rec.g.dot(d);
      const Scalar den = L * d.squaredNorm();
      const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> gamma_bar = -(d.transpose() * X_bar);
      const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> num_bar = gamma_bar / den;
      const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> den_bar = -gamma_bar * (num / (den * den));
      G_bar.noalias() += d * num_bar;
      D_bar.noalias() += rec.g * num_bar + (Scalar(2) * L * d) * den_bar;
    }
    X_bar += D_bar;
    G_bar += detail::vertex_vjp(traj, rec, Matrix<Scalar>(-D_bar));
    if (!G_bar.isZero(0)) {
      X_bar += obj.hvp_batch(rec.x, G_bar);
      theta_bar += obj.param_vjp_batch(rec.x, G_bar);
    }
  }
  return theta_bar;
}

/// u^T dx*/dtheta for a single seed u.
template <typename Scalar>
Vector<Scalar> backward(const Trajectory<Scalar>& traj, const Objective<Scalar>& obj, const Vector<Scalar>& u,
                        const BackwardOptions& opts = {}) {
  return backward_batch(traj, obj, Matrix<Scalar>(u), opts).col(0);
}

template <typename Scalar>
Vector<Scalar> backward(const SolveReport<Scalar>& report, const Objective<Scalar>& obj, const Vector<Scalar>& u,
                        const BackwardOptions& opts = {}) {
  if (!report.trajectory) throw std::invalid_argument("backward: solve was run without record_tape");
  return backward(*report.trajectory, obj, u, opts);
}

/// dx*/dtheta as an n x param_dim matrix (one reverse sweep with identity seeds).
template <typename Scalar>
Matrix<Scalar> jacobian(const Trajectory<Scalar>& traj, const Objective<Scalar>& obj,
                        const BackwardOptions& opts = {}) {
  const Eigen::Index n = traj.constraint.dim();
  return backward_batch(traj, obj, Matrix<Scalar>(Matrix<Scalar>::Identity(n, n)), opts).transpose();
}

template <typename Scalar>
using SolutionMap = std::function<Vector<Scalar>(const Vector<Scalar>&)>;

template <typename Scalar>
Scalar default_fd_step(const Vector<Scalar>& theta) {
  return Scalar(1e-5) * (Scalar(1) + (theta.size() ? theta.cwiseAbs().maxCoeff() : Scalar(0)));
}

/// Central-difference Jacobian of solve_fn restricted to the given parameter columns.
/// Columns not listed are left at zero.
template <typename Scalar>
Matrix<Scalar> finite_diff_jacobian(const SolutionMap<Scalar>& solve_fn, const Vector<Scalar>& theta,
                                    const std::vector<Eigen::Index>& columns, Scalar h) {
  if (!(h > Scalar(0))) throw std::invalid_argument("finite_diff_jacobian: step must be positive");
  Matrix<Scalar> J;
  Vector<Scalar> probe = theta;
  for (Eigen::Index j : columns) {
    probe[j] = theta[j] + h;
    const Vector<Scalar> plus = solve_fn(probe);
    probe[j] = theta[j] - h;
    const Vector<Scalar> minus = solve_fn(probe);
    probe[j] = theta[j];
    if (J.size() == 0) J = Matrix<Scalar>::Zero(plus.size(), theta.size());
    J.col(j) = (plus - minus) / (Scalar(2) * h);
  }
  return J;
}

template <typename Scalar>
Matrix<Scalar> finite_diff_jacobian(const SolutionMap<Scalar>& solve_fn, const Vector<Scalar>& theta, Scalar h) {
  std::vector<Eigen::Index> all(static_cast<std::size_t>(theta.size()));
  for (Eigen::Index j = 0; j < theta.size(); ++j) all[static_cast<std::size_t>(j)] = j;
  return finite_diff_jacobian(solve_fn, theta, all, h);
}

template <typename Scalar>
Matrix<Scalar> finite_diff_jacobian(const SolutionMap<Scalar>& solve_fn, const Vector<Scalar>& theta) {
  return finite_diff_jacobian(solve_fn, theta, default_fd_step(theta));
}

}  // namespace dfw
