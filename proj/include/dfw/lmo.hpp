#pragma once

// Linear minimization oracles argmin_{||w o s||_p <= t} <g, s> over weighted l_p balls.
//
// All oracles follow the same conventions: sign(0) = 0, so a coordinate with zero
// gradient receives zero mass, and a zero gradient yields the zero vector.

#include <dfw/norm_constraint.hpp>

#include <cmath>
#include <stdexcept>

namespace dfw {

/// Gradient rescaled into the unit-ball frame: g_tw = (t / w) o g and r = |g_tw|.
template <typename Scalar>
struct TildeGradient {
  Vector<Scalar> g_tw;
  Vector<Scalar> r;
};

template <typename Scalar, typename Derived>
TildeGradient<Scalar> tilde_gradient(const Eigen::MatrixBase<Derived>& g, const NormConstraint<Scalar>& c) {
  c.check_dim(g.size());
  require_finite(g, "gradient");
  TildeGradient<Scalar> out;
  out.g_tw = (c.radius() / c.weights().array() * g.array()).matrix();
  out.r = out.g_tw.cwiseAbs();
  return out;
}

namespace detail {

template <typename Scalar>
Vector<Scalar> signs(const Vector<Scalar>& v) {
  return v.unaryExpr([](Scalar a) { return sign(a); });
}

}  // namespace detail

/// Closed-form vertex for 1 < p < infinity.
///
/// s_i = -(t / w_i) sign(g_tw,i) |g_tw,i|^{q/p} / || |g_tw|^{q/p} ||_p, which lies on the
/// boundary ||w o s||_p = t and attains <g, s> = -t ||g / w||_q.
template <typename Scalar, typename Derived>
Vector<Scalar> lmo_lp_exact(const Eigen::MatrixBase<Derived>& g, const NormConstraint<Scalar>& c) {
  const auto order = c.order();
  if (order.is_one() || order.is_infinity())
    throw std::invalid_argument("lmo_lp_exact: requires 1 < p < infinity");
  const TildeGradient<Scalar> tg = tilde_gradient(g, c);
  const Eigen::Index n = g.size();
  if (n == 0 || tg.r.maxCoeff() == Scalar(0)) return Vector<Scalar>::Zero(n);

  const Scalar exponent = Scalar(1) / (order.p - Scalar(1));
  const Scalar r_max = tg.r.maxCoeff();
  const Vector<Scalar> v = (tg.r.array() / r_max).pow(exponent).matrix();
  const Scalar v_norm = weighted_norm(v, Vector<Scalar>::Ones(n), order);
  return (-(c.radius() / c.weights().array()) * detail::signs(tg.g_tw).array() * v.array() / v_norm).matrix();
}

/// Exact l_1 vertex: all mass on argmax_i r_i, ties resolved to the lowest index.
template <typename Scalar, typename Derived>
Vector<Scalar> lmo_l1_exact(const Eigen::MatrixBase<Derived>& g, const NormConstraint<Scalar>& c) {
  if (!c.order().is_one()) throw std::invalid_argument("lmo_l1_exact: requires p = 1");
  const TildeGradient<Scalar> tg = tilde_gradient(g, c);
  Vector<Scalar> s = Vector<Scalar>::Zero(g.size());
  if (g.size() == 0) return s;
  Eigen::Index best = 0;
  const Scalar r_max = tg.r.maxCoeff(&best);  // maxCoeff returns the first maximal index
  if (r_max == Scalar(0)) return s;
  s[best] = -c.radius() / c.weights()[best] * sign(tg.g_tw[best]);
  return s;
}

/// Exact l_inf vertex: the corner -(t / w) o sign(g).
template <typename Scalar, typename Derived>
Vector<Scalar> lmo_linf_exact(const Eigen::MatrixBase<Derived>& g, const NormConstraint<Scalar>& c) {
  if (!c.order().is_infinity()) throw std::invalid_argument("lmo_linf_exact: requires p = infinity");
  const TildeGradient<Scalar> tg = tilde_gradient(g, c);
  return (-(c.radius() / c.weights().array()) * detail::signs(tg.g_tw).array()).matrix();
}

/// Stable softmax of z / tau.
template <typename Scalar>
Vector<Scalar> softmax(const Vector<Scalar>& z, Scalar tau) {
  if (!(tau > Scalar(0))) throw std::invalid_argument("softmax: temperature must be positive");
  if (z.size() == 0) return z;
  const Scalar shift = z.maxCoeff();
  Vector<Scalar> e = ((z.array() - shift) / tau).exp().matrix();
  return e / e.sum();
}

/// Softmax-relaxed l_1 vertex -(t / w) o sign(g_tw) o softmax(r / tau).
///
/// When `probabilities` is non-null it receives softmax(r / tau).
template <typename Scalar, typename Derived>
Vector<Scalar> lmo_l1_softmax(const Eigen::MatrixBase<Derived>& g, const NormConstraint<Scalar>& c, Scalar tau,
                              Vector<Scalar>* probabilities = nullptr) {
  if (!c.order().is_one()) throw std::invalid_argument("lmo_l1_softmax: requires p = 1");
  if (!(tau > Scalar(0)) || !std::isfinite(tau))
    throw std::invalid_argument("lmo_l1_softmax: temperature must be positive");
  const TildeGradient<Scalar> tg = tilde_gradient(g, c);
  Vector<Scalar> pi = softmax(tg.r, tau);
  Vector<Scalar> s = (-(c.radius() / c.weights().array()) * detail::signs(tg.g_tw).array() * pi.array()).matrix();
  if (probabilities) *probabilities = std::move(pi);
  return s;
}

/// Exact oracle for any supported norm order.
template <typename Scalar, typename Derived>
Vector<Scalar> lmo_exact(const Eigen::MatrixBase<Derived>& g, const NormConstraint<Scalar>& c) {
  if (c.order().is_one()) return lmo_l1_exact(g, c);
  if (c.order().is_infinity()) return lmo_linf_exact(g, c);
  return lmo_lp_exact(g, c);
}

}  // namespace dfw
