#pragma once

#include <dfw/norm_constraint.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dfw {

/// Smooth convex objective f(x; theta) as seen by the solver and the backward pass.
///
/// Batched variants operate column-wise on matrices of adjoints; the defaults loop over
/// columns, specializations may override them with matrix products.
template <typename Scalar>
class Objective {
 public:
  virtual ~Objective() = default;

  virtual Eigen::Index dim() const = 0;
  virtual Eigen::Index param_dim() const = 0;
  /// Gradient Lipschitz constant L.
  virtual Scalar lipschitz() const = 0;

  virtual Scalar value(const Vector<Scalar>& x) const = 0;
  virtual Vector<Scalar> grad(const Vector<Scalar>& x) const = 0;

  /// Value and gradient together; specializations share work between the two.
  virtual Scalar value_grad(const Vector<Scalar>& x, Vector<Scalar>& g) const {
    g = grad(x);
    return value(x);
  }

  /// u^T d(grad_x f(x; theta)) / d theta, a vector over theta.
  virtual Vector<Scalar> param_vjp(const Vector<Scalar>& x, const Vector<Scalar>& u) const = 0;

  /// Hessian-vector product. Central difference of grad with h = sqrt(eps) (1 + ||x||).
  virtual Vector<Scalar> hvp(const Vector<Scalar>& x, const Vector<Scalar>& v) const {
    const Scalar v_norm = v.norm();
    if (v_norm == Scalar(0)) return Vector<Scalar>::Zero(x.size());
    const Scalar h = std::sqrt(std::numeric_limits<Scalar>::epsilon()) * (Scalar(1) + x.norm());
    const Vector<Scalar> dir = v / v_norm;
    return (grad(x + h * dir) - grad(x - h * dir)) * (v_norm / (Scalar(2) * h));
  }

  virtual Matrix<Scalar> hvp_batch(const Vector<Scalar>& x, const Matrix<Scalar>& V) const {
    Matrix<Scalar> out(dim(), V.cols());
    for (Eigen::Index j = 0; j < V.cols(); ++j) out.col(j) = hvp(x, V.col(j));
    return out;
  }

  virtual Matrix<Scalar> param_vjp_batch(const Vector<Scalar>& x, const Matrix<Scalar>& U) const {
    Matrix<Scalar> out(param_dim(), U.cols());
    for (Eigen::Index j = 0; j < U.cols(); ++j) out.col(j) = param_vjp(x, U.col(j));
    return out;
  }
};

/// Largest eigenvalue of a symmetric PSD matrix by power iteration, inflated by 1%.
///
/// Starts from the normalized all-ones vector. Returns 1e-12 for a zero matrix.
template <typename Derived>
typename Derived::Scalar estimate_lipschitz(const Eigen::MatrixBase<Derived>& P, int iters = 1000,
                                            typename Derived::Scalar tol = 1e-10) {
  using Scalar = typename Derived::Scalar;
  constexpr Scalar kFloor = Scalar(1e-12);
  constexpr Scalar kSafety = Scalar(0.01);
  if (P.rows() != P.cols()) throw std::invalid_argument("estimate_lipschitz: matrix must be square");
  const Scalar scale = P.cwiseAbs().maxCoeff();
  if (P.size() == 0 || scale == Scalar(0)) return kFloor;
  if ((P - P.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-10) * scale)
    throw std::invalid_argument("estimate_lipschitz: matrix must be symmetric");

  Vector<Scalar> v = Vector<Scalar>::Ones(P.rows()).normalized();
  Scalar lambda = Scalar(0);
  for (int k = 0; k < iters; ++k) {
    Vector<Scalar> pv = P * v;
    const Scalar next = v.dot(pv);
    const Scalar pv_norm = pv.norm();
    if (pv_norm == Scalar(0)) break;
    v = pv / pv_norm;
    if (std::abs(next - lambda) <= tol * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::max(kFloor, lambda * (Scalar(1) + kSafety));
}

/// f(x; q) = 1/2 x^T P x + q^T x with theta = q.
template <typename Scalar>
class QuadraticObjective final : public Objective<Scalar> {
 public:
  /// L defaults to the power-iteration estimate of lambda_max(P).
  QuadraticObjective(Matrix<Scalar> P, Vector<Scalar> q, Scalar lipschitz = Scalar(0))
      : P_(std::move(P)), q_(std::move(q)) {
    if (P_.rows() != P_.cols() || P_.rows() != q_.size())
      throw std::invalid_argument("QuadraticObjective: P must be n x n and q length n");
    require_finite(P_, "QuadraticObjective P");
    require_finite(q_, "QuadraticObjective q");
    const Scalar scale = P_.size() ? P_.cwiseAbs().maxCoeff() : Scalar(0);
    if (P_.size() && (P_ - P_.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-10) * scale)
      throw std::invalid_argument("QuadraticObjective: P must be symmetric");
    L_ = lipschitz > Scalar(0) ? lipschitz : estimate_lipschitz(P_);
  }

  Eigen::Index dim() const override { return q_.size(); }
  Eigen::Index param_dim() const override { return q_.size(); }
  Scalar lipschitz() const override { return L_; }

  const Matrix<Scalar>& P() const { return P_; }
  const Vector<Scalar>& q() const { return q_; }

  /// Same P and L, different linear term.
  QuadraticObjective with_q(Vector<Scalar> q) const { return QuadraticObjective(P_, std::move(q), L_); }

  Scalar value(const Vector<Scalar>& x) const override {
    check(x.size());
    return Scalar(0.5) * x.dot(sym() * x) + q_.dot(x);
  }

  Vector<Scalar> grad(const Vector<Scalar>& x) const override {
    check(x.size());
    return sym() * x + q_;
  }

  // One pass over P: f = 1/2 x^T (g + q) with g = P x + q.
  Scalar value_grad(const Vector<Scalar>& x, Vector<Scalar>& g) const override {
    check(x.size());
    g.noalias() = sym() * x;
    g += q_;
    return Scalar(0.5) * x.dot(g + q_);
  }

  Vector<Scalar> param_vjp(const Vector<Scalar>&, const Vector<Scalar>& u) const override {
    check(u.size());
    return u;
  }

  Vector<Scalar> hvp(const Vector<Scalar>&, const Vector<Scalar>& v) const override {
    check(v.size());
    return sym() * v;
  }

  Matrix<Scalar> hvp_batch(const Vector<Scalar>&, const Matrix<Scalar>& V) const override {
    check(V.rows());
    return sym() * V;
  }

  Matrix<Scalar> param_vjp_batch(const Vector<Scalar>&, const Matrix<Scalar>& U) const override {
    check(U.rows());
    return U;
  }

 private:
  auto sym() const { return P_.template selfadjointView<Eigen::Lower>(); }

  void check(Eigen::Index n) const {
    if (n != q_.size()) throw std::invalid_argument("QuadraticObjective: dimension mismatch");
  }

  Matrix<Scalar> P_;
  Vector<Scalar> q_;
  Scalar L_;
};

}  // namespace dfw
