#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dfw {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Order of an l_p norm. Infinity is represented by std::numeric_limits::infinity().
template <typename Scalar>
struct NormOrder {
  Scalar p;

  static NormOrder one() { return {Scalar(1)}; }
  static NormOrder infinity() { return {std::numeric_limits<Scalar>::infinity()}; }

  bool is_one() const { return p == Scalar(1); }
  bool is_infinity() const { return std::isinf(p); }

  /// Hoelder conjugate q with 1/p + 1/q = 1.
  Scalar dual() const {
    if (is_one()) return std::numeric_limits<Scalar>::infinity();
    if (is_infinity()) return Scalar(1);
    return p / (p - Scalar(1));
  }
};

/// Weighted l_p norm of x, i.e. ||w o x||_p.
template <typename Scalar, typename DerivedX, typename DerivedW>
Scalar weighted_norm(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedW>& w,
                     NormOrder<Scalar> order) {
  const auto wx = (w.array() * x.array()).abs();
  if (order.is_one()) return wx.sum();
  if (order.is_infinity()) return wx.size() == 0 ? Scalar(0) : wx.maxCoeff();
  if (order.p == Scalar(2)) return std::sqrt(wx.square().sum());
  // Scale by the largest entry so that large p does not overflow.
  const Scalar m = wx.size() == 0 ? Scalar(0) : wx.maxCoeff();
  if (m == Scalar(0)) return Scalar(0);
  return m * std::pow((wx / m).pow(order.p).sum(), Scalar(1) / order.p);
}

/// The feasible region { x : ||w o x||_p <= t }.
template <typename Scalar>
class NormConstraint {
 public:
  NormConstraint(Vector<Scalar> weights, Scalar radius, NormOrder<Scalar> order)
      : w_(std::move(weights)), t_(radius), order_(order) {
    if (!(t_ >= Scalar(0)) || !std::isfinite(t_))
      throw std::invalid_argument("NormConstraint: radius must be finite and non-negative");
    if (!(order_.p >= Scalar(1)))
      throw std::invalid_argument("NormConstraint: norm order must be >= 1");
    for (Eigen::Index i = 0; i < w_.size(); ++i) {
      if (!(w_[i] > Scalar(0)) || !std::isfinite(w_[i]))
        throw std::invalid_argument("NormConstraint: weights must be finite and strictly positive");
    }
  }

  /// Unit weights.
  static NormConstraint uniform(Eigen::Index n, Scalar radius, NormOrder<Scalar> order) {
    return NormConstraint(Vector<Scalar>::Ones(n), radius, order);
  }

  Eigen::Index dim() const { return w_.size(); }
  const Vector<Scalar>& weights() const { return w_; }
  Scalar radius() const { return t_; }
  NormOrder<Scalar> order() const { return order_; }

  template <typename Derived>
  Scalar norm(const Eigen::MatrixBase<Derived>& x) const {
    return weighted_norm(x, w_, order_);
  }

  /// Absolute violation max(0, ||w o x||_p - t).
  template <typename Derived>
  Scalar violation(const Eigen::MatrixBase<Derived>& x) const {
    check_dim(x.size());
    return std::max(Scalar(0), norm(x) - t_);
  }

  template <typename Derived>
  bool contains(const Eigen::MatrixBase<Derived>& x, Scalar rel_slack = Scalar(1e-12)) const {
    return norm(x) <= t_ * (Scalar(1) + rel_slack);
  }

  void check_dim(Eigen::Index n) const {
    if (n != w_.size())
      throw std::invalid_argument("dimension mismatch: got " + std::to_string(n) + ", constraint has " +
                                  std::to_string(w_.size()));
  }

 private:
  Vector<Scalar> w_;
  Scalar t_;
  NormOrder<Scalar> order_;
};

template <typename Scalar>
Scalar sign(Scalar v) {
  return v > Scalar(0) ? Scalar(1) : (v < Scalar(0) ? Scalar(-1) : Scalar(0));
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& v, const char* what) {
  if (!v.allFinite()) throw std::domain_error(std::string(what) + ": non-finite entries");
}

}  // namespace dfw
