#include "helpers.hpp"

#include <dfw/lmo.hpp>
#include <dfw/probgen.hpp>
#include <dfw/reference.hpp>
#include <dfw/solver.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

using namespace dfw;
using dfw::test::check_close;
using dfw::test::vec;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

// Projection onto the weighted l_1 ball by enumerating every sign pattern: on a fixed
// pattern with the constraint active the KKT system is linear in the multiplier.
Vector<double> project_l1_enumerate(const Vector<double>& x, const Vector<double>& w, double t) {
  const Eigen::Index n = x.size();
  if ((w.array() * x.array().abs()).sum() <= t) return x;
  Vector<double> best = Vector<double>::Zero(n);
  double best_dist = (x - best).norm();
  long patterns = 1;
  for (Eigen::Index i = 0; i < n; ++i) patterns *= 3;
  for (long code = 0; code < patterns; ++code) {
    Vector<double> sigma(n);
    long rest = code;
    for (Eigen::Index i = 0; i < n; ++i, rest /= 3) sigma[i] = static_cast<double>(rest % 3) - 1.0;
    const double ww = (w.array().square() * sigma.array().abs()).sum();
    if (ww == 0.0) continue;
    const double lambda = ((w.array() * sigma.array() * x.array()).sum() - t) / ww;
    if (lambda < 0.0) continue;
    const Vector<double> y = (sigma.array().abs() * (x.array() - lambda * w.array() * sigma.array())).matrix();
    if (((y.array() * sigma.array()) < 0.0).any()) continue;
    if ((w.array() * y.array().abs()).sum() > t * (1 + 1e-12)) continue;
    const double dist = (x - y).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = y;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("projection examples") {
  check_close(project_weighted_l1(vec({2, 0}), vec({1, 1}), 1.0), vec({1, 0}), 1e-15);
  check_close(project_weighted_l1(vec({1, 1}), vec({1, 1}), 1.0), vec({0.5, 0.5}), 1e-15);
  check_close(project_weighted_l1(vec({0.2, -0.3}), vec({1, 1}), 1.0), vec({0.2, -0.3}), 0);
  check_close(project_weighted_l2(vec({3, 4}), vec({1, 1}), 1.0), vec({0.6, 0.8}), 1e-14);
  check_close(project_weighted_l2(vec({3, 4}), vec({1, 1}), 0.0), vec({0, 0}), 0);
  check_close(project_weighted_l1(vec({3, 0}), vec({1, 1}), 1.0), vec({1, 0}), 1e-15);
  check_close(project_weighted_l2(vec({2, 0}), vec({1, 3}), 1.0), vec({1, 0}), 1e-14);
  check_close(project_weighted_linf(vec({3, -4, 0.1}), vec({1, 2, 1}), 1.0), vec({1, -0.5, 0.1}), 0);
  check_close(project_weighted_linf(vec({5, -5}), vec({1, 1}), 1.0), vec({1, -1}), 0);
  CHECK_THROWS_AS(project(vec({1, 1}), NormConstraint<double>(vec({1, 1}), 1.0, NormOrder<double>{3.0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(project_weighted_l1(vec({1, 1}), vec({1, 0}), 1.0), std::invalid_argument);
}

TEST_CASE("l_1 projection matches sign-pattern enumeration") {
  CounterRng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector<double> x = dfw::test::normals(rng, 5) * 2.0;
    const Vector<double> w = dfw::test::uniforms(rng, 5, 0.5, 1.5);
    const double t = rng.uniform(0.1, 2.0);
    check_close(project_weighted_l1(x, w, t), project_l1_enumerate(x, w, t), 1e-12);
  }
}

TEST_CASE("weighted l_2 projection satisfies KKT") {
  // y = x / (1 + mu w^2) with mu >= 0 and ||w o y||_2 = t when x is outside.
  CounterRng rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector<double> x = dfw::test::normals(rng, 6) * 3.0;
    const Vector<double> w = dfw::test::uniforms(rng, 6, 0.5, 1.5);
    const double t = rng.uniform(0.1, 2.0);
    const Vector<double> y = project_weighted_l2(x, w, t);
    const double mu = (x[0] / y[0] - 1.0) / (w[0] * w[0]);
    CHECK(mu >= -1e-12);
    const Vector<double> stationarity = (y - x).array() + mu * w.array().square() * y.array();
    CHECK(stationarity.cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(std::abs((w.array() * y.array()).matrix().norm() - t) <= 1e-8);
  }
}

TEST_CASE("projections are feasible, idempotent and satisfy the obtuse-angle condition") {
  CounterRng rng(42);
  for (double p : {1.0, 2.0, kInf}) {
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::Index n = 1 + trial % 12;
      const NormConstraint<double> c(dfw::test::uniforms(rng, n, 0.5, 1.5), rng.uniform(0.1, 2.0),
                                     NormOrder<double>{p});
      const Vector<double> x = dfw::test::normals(rng, n) * 3.0;
      const Vector<double> px = project(x, c);
      INFO("p=" << p << " trial=" << trial);
      CHECK(c.contains(px));
      check_close(project(px, c), px, 1e-12);
      for (int k = 0; k < 5; ++k) {
        const Vector<double> y = project(Vector<double>(dfw::test::normals(rng, n) * 3.0), c);
        CHECK((x - px).dot(y - px) <= 1e-10);
      }
    }
  }
}

TEST_CASE("projected gradient examples") {
  const NormConstraint<double> unit(vec({1}), 1.0, NormOrder<double>::one());
  const QuadraticObjective<double> inner(Matrix<double>::Constant(1, 1, 1.0), vec({-0.5}));
  CHECK(std::abs(projected_gradient_solve(inner, unit).solution[0] - 0.5) <= 1e-8);
  const QuadraticObjective<double> outer(Matrix<double>::Constant(1, 1, 1.0), vec({-2.0}));
  CHECK(std::abs(projected_gradient_solve(outer, unit).solution[0] - 1.0) <= 1e-8);
}

TEST_CASE("projected gradient solutions have a vanishing Frank-Wolfe gap") {
  ReferenceOptions opts;
  opts.step_tol = 1e-13;
  for (double p : {1.0, 2.0, kInf}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const ProblemInstance inst = gen_qp(5 + seed, seed, NormOrder<double>{p});
      const Vector<double> x = projected_gradient_solve(inst.objective, inst.constraint, opts).solution;
      const Vector<double> g = inst.objective.grad(x);
      INFO("p=" << p << " seed=" << seed);
      CHECK(inst.constraint.contains(x));
      CHECK(fw_gap(g, x, lmo_exact(g, inst.constraint)) <= 1e-8 * (1 + std::abs(inst.objective.value(x))));
    }
  }
}

TEST_CASE("objective-only stopping leaves the reference close to the optimum") {
  ReferenceOptions strict;
  strict.step_tol = 1e-13;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ProblemInstance inst = gen_qp(30, seed);
    const Vector<double> loose = projected_gradient_solve(inst.objective, inst.constraint).solution;
    const Vector<double> tight = projected_gradient_solve(inst.objective, inst.constraint, strict).solution;
    CHECK((loose - tight).norm() <= 1e-3);
  }
}

TEST_CASE("reference objective is no worse than the layer's") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ProblemInstance inst = gen_qp(40, seed);
    const double f_ref = inst.objective.value(projected_gradient_solve(inst.objective, inst.constraint).solution);
    const double f_fw = inst.objective.value(solve(inst.objective, inst.constraint, SolverConfig{}).solution);
    CHECK(f_ref <= f_fw + 1e-9 * std::abs(f_ref));
  }
}
