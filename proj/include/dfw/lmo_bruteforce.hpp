#pragma once

// Search-based ground truth for the LMOs. Shares no code path with lmo.hpp beyond the
// constraint type; used by the tests to arbitrate the closed forms.

#include <dfw/norm_constraint.hpp>
#include <dfw/rng.hpp>

#include <cstdint>

namespace dfw {

struct BruteforceOptions {
  std::int64_t samples = 100000;
  std::int64_t refine_steps = 40000;
  std::uint64_t seed = 0x5eed;
};

namespace detail {

/// Radially rescale y onto the boundary ||w o y||_p = t.
template <typename Scalar>
Vector<Scalar> to_boundary(const Vector<Scalar>& y, const NormConstraint<Scalar>& c) {
  const Scalar nrm = c.norm(y);
  if (nrm == Scalar(0)) return y;
  return y * (c.radius() / nrm);
}

}  // namespace detail

/// Feasible point minimizing <g, s> over a search set.
///
/// p = 1: all 2n signed axis vertices +-(t / w_i) e_i (first minimum wins).
/// p = inf: the corner -(t / w) o sign(g).
/// otherwise: random boundary samples, then random local search with radial renormalization.
template <typename Scalar, typename Derived>
Vector<Scalar> lmo_bruteforce(const Eigen::MatrixBase<Derived>& g_in, const NormConstraint<Scalar>& c,
                              const BruteforceOptions& opts = {}) {
  c.check_dim(g_in.size());
  require_finite(g_in, "gradient");
  const Vector<Scalar> g = g_in;
  const Eigen::Index n = g.size();
  const Scalar t = c.radius();
  const Vector<Scalar>& w = c.weights();
  Vector<Scalar> best = Vector<Scalar>::Zero(n);
  Scalar best_val = Scalar(0);

  if (c.order().is_one()) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Scalar sgn : {Scalar(-1), Scalar(1)}) {
        const Scalar val = sgn * t / w[i] * g[i];
        if (val < best_val) {
          best_val = val;
          best.setZero();
          best[i] = sgn * t / w[i];
        }
      }
    }
    return best;
  }

  if (c.order().is_infinity()) {
    for (Eigen::Index i = 0; i < n; ++i) best[i] = -t / w[i] * sign(g[i]);
    return best;
  }

  if (g.isZero(0) || t == Scalar(0)) return best;

  CounterRng rng(opts.seed);
  Vector<Scalar> y(n);
  for (std::int64_t k = 0; k < opts.samples; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) y[i] = Scalar(rng.normal());
    const Vector<Scalar> s = detail::to_boundary(y, c);
    const Scalar val = g.dot(s);
    if (val < best_val) {
      best_val = val;
      best = s;
    }
  }

  Scalar radius = t / w.maxCoeff() * Scalar(0.1);
  int failures = 0;
  for (std::int64_t k = 0; k < opts.refine_steps && radius > Scalar(1e-13) * t; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) y[i] = best[i] + radius * Scalar(rng.normal());
    const Vector<Scalar> s = detail::to_boundary(y, c);
    const Scalar val = g.dot(s);
    if (val < best_val) {
      best_val = val;
      best = s;
      failures = 0;
    } else if (++failures >= 20 + 4 * static_cast<int>(n)) {
      radius *= Scalar(0.5);
      failures = 0;
    }
  }
  return best;
}

}  // namespace dfw
