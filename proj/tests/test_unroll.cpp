#include "helpers.hpp"

#include <dfw/commands.hpp>
#include <dfw/metrics.hpp>
#include <dfw/probgen.hpp>
#include <dfw/unroll.hpp>

#include <cmath>
#include <stdexcept>

using namespace dfw;
using dfw::test::check_close;
using dfw::test::vec;

namespace {

SolverConfig fixed_steps(long k, L1Oracle oracle, TemperatureSchedule sched = TemperatureSchedule::constant(1.0)) {
  SolverConfig cfg;
  cfg.tol = 1e-300;
  cfg.max_iters = k;
  cfg.l1_oracle = oracle;
  cfg.schedule = sched;
  cfg.record_tape = true;
  return cfg;
}

Trajectory<double> tape_of(const QuadraticObjective<double>& f, const NormConstraint<double>& c,
                           const SolverConfig& cfg) {
  return *solve(f, c, cfg).trajectory;
}

SolutionMap<double> solution_map(const QuadraticObjective<double>& f, const NormConstraint<double>& c,
                                 SolverConfig cfg) {
  cfg.record_tape = false;
  return [&f, &c, cfg](const Vector<double>& q) { return solve(f.with_q(q), c, cfg).solution; };
}

BackwardOptions mode(StepGradient step) {
  BackwardOptions opts;
  opts.step = step;
  return opts;
}

}  // namespace

TEST_CASE("one-dimensional derivatives") {
  const NormConstraint<double> unit(vec({1}), 1.0, NormOrder<double>::one());
  SolverConfig cfg = fixed_steps(5000, L1Oracle::exact);
  cfg.tol = 1e-14;
  // Interior: x* = -q / a.
  const QuadraticObjective<double> inner(Matrix<double>::Constant(1, 1, 2.0), vec({-0.5}));
  CHECK(jacobian(tape_of(inner, unit, cfg), inner)(0, 0) == doctest::Approx(-0.5).epsilon(1e-6));
  const QuadraticObjective<double> unit_p(Matrix<double>::Constant(1, 1, 1.0), vec({-0.5}));
  CHECK(backward(tape_of(unit_p, unit, cfg), unit_p, vec({1}))[0] == doctest::Approx(-1.0).epsilon(5e-2));
  // Boundary: x* = 1 regardless of small changes in q.
  const QuadraticObjective<double> outer(Matrix<double>::Constant(1, 1, 1.0), vec({-2.0}));
  CHECK(jacobian(tape_of(outer, unit, cfg), outer)(0, 0) == 0.0);
}

TEST_CASE("identity Hessian with a slack constraint gives -I") {
  CounterRng rng(31);
  const Eigen::Index n = 8;
  const QuadraticObjective<double> f(Matrix<double>::Identity(n, n), dfw::test::normals(rng, n) * 0.1);
  const NormConstraint<double> c(Vector<double>::Ones(n), 10.0, NormOrder<double>::one());
  SolverConfig cfg = experiment_config();
  cfg.tol = 1e-12;
  cfg.record_tape = true;
  const auto report = solve(f, c, cfg);
  check_close(report.solution, -f.q(), 1e-6);
  // The derivative of the iteration converges more slowly than the iterate itself, so the
  // solve stops with J still about 1e-3 away from -I.
  const Matrix<double> J = jacobian(*report.trajectory, f);
  CHECK((J + Matrix<double>::Identity(n, n)).cwiseAbs().maxCoeff() <= 5e-3);
}

TEST_CASE("unrolled Jacobian on a small instance") {
  // Seed 0 at n = 10; other seeds are reported by the acceptance run.
  const ProblemInstance inst = gen_qp(10, 0);
  const GradientOracle oracle = gradient_oracle(inst, false);
  SolverConfig cfg = experiment_config();
  cfg.record_tape = true;
  const auto report = solve(inst.objective, inst.constraint, cfg);
  const Matrix<double> J = jacobian(*report.trajectory, inst.objective);
  REQUIRE(oracle.jacobian.norm() > 0);
  CHECK((J - oracle.jacobian).norm() / oracle.jacobian.norm() <= 0.1);
}

TEST_CASE("VJPs agree with the Jacobian and are linear in the seed") {
  const ProblemInstance inst = gen_qp(25, 4);
  SolverConfig cfg = experiment_config();
  cfg.record_tape = true;
  const auto report = solve(inst.objective, inst.constraint, cfg);
  const auto& tape = *report.trajectory;
  const Matrix<double> J = jacobian(tape, inst.objective);
  CounterRng rng(32);
  const Vector<double> u = dfw::test::normals(rng, 25);
  const Vector<double> v = dfw::test::normals(rng, 25);
  const Vector<double> bu = backward(report, inst.objective, u);
  check_close(bu, J.transpose() * u, 1e-9 * (1 + bu.norm()));
  check_close(backward(tape, inst.objective, Vector<double>(2 * u - 3 * v)),
              2 * bu - 3 * backward(tape, inst.objective, v), 1e-9 * (1 + bu.norm()));
}

TEST_CASE("an optimal starting point yields a zero adjoint") {
  // q = 0 makes x_0 = 0 optimal: zero gradient, zero vertex, gamma_0 = 0.
  const QuadraticObjective<double> f(Matrix<double>::Identity(3, 3), Vector<double>::Zero(3));
  const NormConstraint<double> c(Vector<double>::Ones(3), 1.0, NormOrder<double>::one());
  const auto tape = tape_of(f, c, fixed_steps(100, L1Oracle::softmax, TemperatureSchedule::annealing(30)));
  REQUIRE(tape.iterations() >= 1);
  CHECK(tape.records.front().gamma == 0.0);
  CHECK(backward(tape, f, vec({1, -2, 3})).isZero(0));
}

TEST_CASE("backward edge cases") {
  const ProblemInstance inst = gen_qp(5, 1);
  Trajectory<double> empty{inst.constraint, L1Oracle::softmax, inst.objective.lipschitz(), {}, Vector<double>::Zero(5)};
  CHECK(backward(empty, inst.objective, Vector<double>(Vector<double>::Ones(5))).isZero(0));
  SolverConfig cfg = experiment_config();
  const auto no_tape = solve(inst.objective, inst.constraint, cfg);
  CHECK_THROWS_AS(backward(no_tape, inst.objective, Vector<double>(Vector<double>::Ones(5))), std::invalid_argument);
  cfg.record_tape = true;
  const auto report = solve(inst.objective, inst.constraint, cfg);
  CHECK_THROWS_AS(backward(report, inst.objective, Vector<double>(Vector<double>::Ones(4))), std::invalid_argument);
}

TEST_CASE("finite differences of a linear map") {
  Matrix<double> A(2, 3);
  A << 1, 2, 3, -1, 0, 4;
  const SolutionMap<double> map = [&A](const Vector<double>& x) { return Vector<double>(A * x); };
  CHECK((finite_diff_jacobian(map, vec({0.3, -1, 2})) - A).cwiseAbs().maxCoeff() <= 1e-9);
  const Matrix<double> partial = finite_diff_jacobian(map, vec({0.3, -1, 2}), {1}, 1e-4);
  CHECK(partial.col(0).isZero(0));
  CHECK((partial.col(1) - A.col(1)).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK_THROWS_AS(finite_diff_jacobian(map, vec({0, 0, 0}), 0.0), std::invalid_argument);
}

TEST_CASE("propagate mode differentiates the fixed-length iteration exactly") {
  struct Case {
    double p;
    L1Oracle oracle;
    long k;
  };
  // Small h: some runs take a clipped step close to the gamma = 1 kink.
  for (const Case& cs : {Case{1.0, L1Oracle::softmax, 40}, Case{2.0, L1Oracle::exact, 10},
                         Case{3.0, L1Oracle::exact, 10}}) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const ProblemInstance inst = gen_qp(6, seed, NormOrder<double>{cs.p});
      const SolverConfig cfg = fixed_steps(cs.k, cs.oracle);
      const auto tape = tape_of(inst.objective, inst.constraint, cfg);
      const Matrix<double> J = jacobian(tape, inst.objective, mode(StepGradient::propagate));
      const Matrix<double> fd =
          finite_diff_jacobian(solution_map(inst.objective, inst.constraint, cfg), inst.objective.q(), 1e-7);
      INFO("p=" << cs.p << " seed=" << seed);
      CHECK((J - fd).norm() <= 1e-5 * (1 + fd.norm()));
    }
  }
}

TEST_CASE("stopping the step path drops only step-size terms") {
  // With every step clipped or degenerate the two modes coincide.
  const QuadraticObjective<double> f(Matrix<double>::Identity(2, 2) * 0.01, vec({-1, 2}));
  const NormConstraint<double> c(vec({1, 1}), 1.0, NormOrder<double>::one());
  const auto tape = tape_of(f, c, fixed_steps(3, L1Oracle::softmax));
  for (const auto& rec : tape.records) CHECK(rec.branch != StepBranch::interior);
  CHECK((jacobian(tape, f, mode(StepGradient::stop)) - jacobian(tape, f, mode(StepGradient::propagate)))
            .isZero(0));
}

TEST_CASE("vertex adjoints match finite differences of the oracle") {
  CounterRng rng(33);
  for (double p : {1.0, 1.5, 3.0}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::Index n = 5;
      const NormConstraint<double> c(dfw::test::uniforms(rng, n, 0.5, 1.5), 1.3, NormOrder<double>{p});
      const Vector<double> g = dfw::test::normals(rng, n);
      const double tau = 0.7;
      auto oracle = [&](const Vector<double>& h) { return frank_wolfe_vertex<double>(h, c, tau, L1Oracle::softmax, nullptr); };
      IterationRecord<double> rec{Vector<double>::Zero(n), g, {}, {}, 0.0, StepBranch::lower, tau};
      rec.s = frank_wolfe_vertex(g, c, tau, L1Oracle::softmax, &rec.probabilities);
      const Trajectory<double> traj{c, L1Oracle::softmax, 1.0, {}, Vector<double>::Zero(n)};
      const Matrix<double> Js = detail::vertex_vjp(traj, rec, Matrix<double>(Matrix<double>::Identity(n, n)))
                                    .transpose();
      const Matrix<double> fd = finite_diff_jacobian(SolutionMap<double>(oracle), g, 1e-6);
      INFO("p=" << p);
      CHECK((Js - fd).cwiseAbs().maxCoeff() <= 1e-6);
    }
  }
}

TEST_CASE("exact polytope vertices carry no gradient") {
  const ProblemInstance inst = gen_qp(6, 2, NormOrder<double>::infinity());
  const auto tape = tape_of(inst.objective, inst.constraint, fixed_steps(20, L1Oracle::exact));
  const Matrix<double> J = jacobian(tape, inst.objective, mode(StepGradient::stop));
  CHECK(J.isZero(0));
}
