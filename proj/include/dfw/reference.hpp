#pragma once

// Projected-gradient ground truth with exact Euclidean projections onto weighted balls.

#include <dfw/objective.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dfw {

namespace detail {

template <typename Scalar>
void check_projection_args(Eigen::Index n, const Vector<Scalar>& w, Scalar t) {
  if (w.size() != n) throw std::invalid_argument("projection: dimension mismatch");
  if (!(t >= Scalar(0)) || !std::isfinite(t)) throw std::invalid_argument("projection: radius must be >= 0");
  if (!((w.array() > Scalar(0)).all() && w.allFinite()))
    throw std::invalid_argument("projection: weights must be strictly positive");
}

}  // namespace detail

/// argmin ||y - x||_2 s.t. sum_i w_i |y_i| <= t.
///
/// Soft-thresholding y_i = sign(x_i) max(|x_i| - lambda w_i, 0) with lambda found by 64
/// bisection steps on [0, max_i |x_i| / w_i]. The upper end of the final bracket is
/// returned, so the result is always feasible.
template <typename Scalar>
Vector<Scalar> project_weighted_l1(const Vector<Scalar>& x, const Vector<Scalar>& w, Scalar t) {
  detail::check_projection_args(x.size(), w, t);
  if ((w.array() * x.array().abs()).sum() <= t) return x;
  auto shrink = [&](Scalar lambda) {
    return (x.array().sign() * (x.array().abs() - lambda * w.array()).max(Scalar(0))).matrix().eval();
  };
  Scalar lo = 0;
  Scalar hi = (x.array().abs() / w.array()).maxCoeff();
  for (int it = 0; it < 64; ++it) {
    const Scalar mid = Scalar(0.5) * (lo + hi);
    const Scalar residual = (w.array() * shrink(mid).array().abs()).sum() - t;
    (residual > Scalar(0) ? lo : hi) = mid;
  }
  return shrink(hi);
}

/// argmin ||y - x||_2 s.t. ||w o y||_2 <= t, via y_i = x_i / (1 + mu w_i^2).
template <typename Scalar>
Vector<Scalar> project_weighted_l2(const Vector<Scalar>& x, const Vector<Scalar>& w, Scalar t) {
  detail::check_projection_args(x.size(), w, t);
  if ((w.array() * x.array()).matrix().norm() <= t) return x;
  if (t == Scalar(0)) return Vector<Scalar>::Zero(x.size());
  auto scaled = [&](Scalar mu) { return (x.array() / (Scalar(1) + mu * w.array().square())).matrix().eval(); };
  auto norm_of = [&](Scalar mu) { return (w.array() * scaled(mu).array()).matrix().norm(); };
  Scalar lo = 0;
  Scalar hi = 1;
  while (norm_of(hi) > t) hi *= 2;
  for (int it = 0; it < 200 && hi - lo > std::numeric_limits<Scalar>::epsilon() * hi; ++it) {
    const Scalar mid = Scalar(0.5) * (lo + hi);
    (norm_of(mid) > t ? lo : hi) = mid;
  }
  return scaled(hi);
}

/// Coordinatewise clamp to [-t / w_i, t / w_i].
template <typename Scalar>
Vector<Scalar> project_weighted_linf(const Vector<Scalar>& x, const Vector<Scalar>& w, Scalar t) {
  detail::check_projection_args(x.size(), w, t);
  const auto bound = (t / w.array());
  return x.array().max(-bound).min(bound).matrix();
}

template <typename Scalar>
Vector<Scalar> project(const Vector<Scalar>& x, const NormConstraint<Scalar>& c) {
  const auto order = c.order();
  if (order.is_one()) return project_weighted_l1(x, c.weights(), c.radius());
  if (order.is_infinity()) return project_weighted_linf(x, c.weights(), c.radius());
  if (order.p == Scalar(2)) return project_weighted_l2(x, c.weights(), c.radius());
  throw std::invalid_argument(
      "projection supports p in {1, 2, inf}; for other orders use the Frank-Wolfe solver with the exact "
      "oracle and tol 1e-10 as the reference");
}

struct ReferenceOptions {
  double tol = 1e-10;
  long max_iters = 1000000;
  /// When positive, also require ||y_{k+1} - y_k||_inf <= step_tol (1 + ||y||_inf). The
  /// objective test alone can stop ill-conditioned problems ~1e-5 away from the optimum.
  double step_tol = 0.0;
};

template <typename Scalar>
struct ReferenceResult {
  Vector<Scalar> solution;
  long iterations = 0;
};

/// y <- project(y - grad(y) / L) from y = 0 until the relative objective change is <= tol
/// (and the step is below step_tol when that is set).
template <typename Scalar>
ReferenceResult<Scalar> projected_gradient_solve(const Objective<Scalar>& obj, const NormConstraint<Scalar>& c,
                                                 const ReferenceOptions& opts = {}) {
  c.check_dim(obj.dim());
  const Scalar L = obj.lipschitz();
  ReferenceResult<Scalar> out;
  Vector<Scalar> y = Vector<Scalar>::Zero(obj.dim());
  Scalar f = obj.value(y);
  for (long k = 0; k < opts.max_iters; ++k) {
    Vector<Scalar> next = project(Vector<Scalar>(y - obj.grad(y) / L), c);
    const Scalar f_next = obj.value(next);
    ++out.iterations;
    const Scalar denom = std::abs(f) >= Scalar(1e-12) ? std::abs(f) : Scalar(1);
    bool done = std::abs(f_next - f) <= Scalar(opts.tol) * denom;
    if (done && opts.step_tol > 0.0)
      done = (next - y).cwiseAbs().maxCoeff() <= Scalar(opts.step_tol) * (Scalar(1) + next.cwiseAbs().maxCoeff());
    y = std::move(next);
    f = f_next;
    if (done) break;
  }
  out.solution = std::move(y);
  return out;
}

}  // namespace dfw
