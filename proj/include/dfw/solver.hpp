#pragma once

// Frank-Wolfe forward pass with the short-path step, softmax-relaxed l_1 vertices and an
// optional tape for reverse-mode replay (see unroll.hpp).

#include <dfw/lmo.hpp>
#include <dfw/objective.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dfw {

/// Raised when the forward pass produces non-finite values.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TemperatureSchedule {
  enum class Kind { constant, annealing };

  Kind kind = Kind::annealing;
  double tau0 = 1.0;
  int period = 30;

  static TemperatureSchedule constant(double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("constant temperature must be positive");
    return {Kind::constant, tau, 1};
  }
  static TemperatureSchedule annealing(int period) {
    if (period < 1) throw std::invalid_argument("annealing period must be >= 1");
    return {Kind::annealing, 1.0, period};
  }
};

inline constexpr long kMaxHalvings = 30;

/// tau_k = 2^{-floor(k / T)} floored at 2^{-30}, or the constant tau0.
inline double temperature(long k, const TemperatureSchedule& sched) {
  if (sched.kind == TemperatureSchedule::Kind::constant) return sched.tau0;
  const long halvings = k / sched.period;
  return std::ldexp(1.0, -static_cast<int>(std::min(halvings, kMaxHalvings)));
}

/// Vertex oracle used for p = 1. Orders p > 1 always use the exact closed form.
enum class L1Oracle { softmax, exact };

struct SolverConfig {
  double tol = 1e-4;
  long max_iters = 5000;
  TemperatureSchedule schedule = TemperatureSchedule::annealing(30);
  L1Oracle l1_oracle = L1Oracle::softmax;
  bool record_tape = false;

  void validate() const {
    if (!(tol > 0.0)) throw std::invalid_argument("SolverConfig: tol must be positive");
    if (max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
  }
};

enum class StepBranch {
  interior,    // 0 < gamma < 1, differentiable through the ratio
  clipped,     // ratio >= 1, gamma = 1
  lower,       // ratio <= 0, gamma = 0
  degenerate,  // ||x - s||^2 below 1e-24, gamma = 0
};

template <typename Scalar>
struct StepSize {
  Scalar gamma;
  StepBranch branch;
};

/// gamma = min{<g, x - s> / (L ||x - s||^2), 1}, clamped below at 0.
template <typename Scalar>
StepSize<Scalar> step_size(const Vector<Scalar>& g, const Vector<Scalar>& x, const Vector<Scalar>& s, Scalar L) {
  if (!(L > Scalar(0))) throw std::invalid_argument("step_size: L must be positive");
  if (!g.allFinite() || !x.allFinite() || !s.allFinite() || !std::isfinite(L))
    throw std::domain_error("step_size: non-finite input");
  const Vector<Scalar> d = x - s;
  const Scalar d2 = d.squaredNorm();
  if (d2 < Scalar(1e-24)) return {Scalar(0), StepBranch::degenerate};
  const Scalar ratio = g.dot(d) / (L * d2);
  if (ratio >= Scalar(1)) return {Scalar(1), StepBranch::clipped};
  if (ratio <= Scalar(0)) return {Scalar(0), StepBranch::lower};
  return {ratio, StepBranch::interior};
}

/// Frank-Wolfe gap <g, x - s>.
template <typename Scalar>
Scalar fw_gap(const Vector<Scalar>& g, const Vector<Scalar>& x, const Vector<Scalar>& s) {
  return g.dot(x - s);
}

template <typename Scalar>
struct IterationRecord {
  Vector<Scalar> x;              // iterate x_k
  Vector<Scalar> g;              // grad f(x_k)
  Vector<Scalar> s;              // (relaxed) vertex s_k
  Vector<Scalar> probabilities;  // softmax(r_k / tau_k); empty unless the softmax oracle ran
  Scalar gamma;
  StepBranch branch;
  Scalar tau;
};

/// Recorded forward pass. g_tw and r are recomputed from g and the constraint on replay.
template <typename Scalar>
struct Trajectory {
  NormConstraint<Scalar> constraint;
  L1Oracle l1_oracle;
  Scalar lipschitz;
  std::vector<IterationRecord<Scalar>> records;
  Vector<Scalar> solution;

  long iterations() const { return static_cast<long>(records.size()); }
  bool uses_softmax() const { return constraint.order().is_one() && l1_oracle == L1Oracle::softmax; }
};

template <typename Scalar>
struct SolveReport {
  Vector<Scalar> solution;
  std::vector<Scalar> objective_trace;  // f(x_0), ..., f(x_K)
  std::vector<Scalar> gap_trace;        // <g_k, x_k - s_k> for k < K
  long iterations = 0;
  double seconds = 0.0;
  bool converged = false;
  std::vector<Vector<Scalar>> iterates;  // x_0..x_K, only when record_iterates is set
  std::optional<Trajectory<Scalar>> trajectory;
};

/// Vertex for iteration k under the configured oracle.
template <typename Scalar>
Vector<Scalar> frank_wolfe_vertex(const Vector<Scalar>& g, const NormConstraint<Scalar>& c, Scalar tau,
                                  L1Oracle oracle, Vector<Scalar>* probabilities) {
  if (c.order().is_one() && oracle == L1Oracle::softmax) return lmo_l1_softmax(g, c, tau, probabilities);
  return lmo_exact(g, c);
}

struct SolveOptions {
  bool record_iterates = false;
};

/// Frank-Wolfe from x_0 = 0.
///
/// Stops when the relative objective change |f_new - f_old| / |f_old| drops to tol (absolute
/// when |f_old| < 1e-12), when gamma = 0, or once the schedule index reaches max_iters.
/// The change is measured per iteration, except for the annealed softmax oracle where it is
/// measured between the ends of consecutive temperature stages. There a gamma = 0 step ends
/// the current stage early (nothing changes until the temperature drops) instead of stopping
/// the solve, until the temperature floor is reached. A stage cut short this way is not a
/// checkpoint; the next comparison spans it.
template <typename Scalar>
SolveReport<Scalar> solve(const Objective<Scalar>& obj, const NormConstraint<Scalar>& c, const SolverConfig& cfg,
                          const SolveOptions& opts = {}) {
  cfg.validate();
  c.check_dim(obj.dim());
  const auto start = std::chrono::steady_clock::now();
  const Scalar L = obj.lipschitz();

  SolveReport<Scalar> report;
  std::optional<Trajectory<Scalar>> tape;
  if (cfg.record_tape) tape = Trajectory<Scalar>{c, cfg.l1_oracle, L, {}, {}};

  Vector<Scalar> x = Vector<Scalar>::Zero(obj.dim());
  Vector<Scalar> g;
  Scalar f_checkpoint = obj.value_grad(x, g);
  report.objective_trace.push_back(f_checkpoint);
  // Iterations per tolerance check: one temperature stage when annealing the softmax oracle.
  const bool annealed = cfg.schedule.kind == TemperatureSchedule::Kind::annealing && c.order().is_one() &&
                        cfg.l1_oracle == L1Oracle::softmax;
  const long stage = annealed ? cfg.schedule.period : 1;
  if (opts.record_iterates) report.iterates.push_back(x);

  for (long k = 0; k < cfg.max_iters;) {
    if (!g.allFinite()) throw SolverError("solve: non-finite gradient at iteration " + std::to_string(k));
    const Scalar tau = Scalar(temperature(k, cfg.schedule));
    Vector<Scalar> probs;
    const Vector<Scalar> s = frank_wolfe_vertex(g, c, tau, cfg.l1_oracle, tape ? &probs : nullptr);
    const StepSize<Scalar> step = step_size(g, x, s, L);
    report.gap_trace.push_back(fw_gap(g, x, s));

    Vector<Scalar> x_next = (Scalar(1) - step.gamma) * x + step.gamma * s;
    Vector<Scalar> g_next;
    const Scalar f_next = obj.value_grad(x_next, g_next);
    if (!std::isfinite(f_next)) throw SolverError("solve: non-finite objective at iteration " + std::to_string(k));

    if (tape) tape->records.push_back({x, g, s, std::move(probs), step.gamma, step.branch, tau});
    g = std::move(g_next);
    ++report.iterations;
    report.objective_trace.push_back(f_next);
    if (opts.record_iterates) report.iterates.push_back(x_next);

    long next_k = k + 1;
    bool checkpoint = next_k % stage == 0;
    if (step.gamma == Scalar(0)) {
      if (stage == 1 || k / stage >= kMaxHalvings) {
        report.converged = true;
        break;
      }
      // gamma = 0 is a temperature limit, not convergence: no checkpoint, just move on.
      next_k = (k / stage + 1) * stage;
      checkpoint = false;
    }
    bool small_change = false;
    if (checkpoint) {
      const Scalar denom = std::abs(f_checkpoint) >= Scalar(1e-12) ? std::abs(f_checkpoint) : Scalar(1);
      small_change = std::abs(f_next - f_checkpoint) <= Scalar(cfg.tol) * denom;
      f_checkpoint = f_next;
    }
    x = std::move(x_next);
    k = next_k;
    if (small_change) {
      report.converged = true;
      break;
    }
  }

  report.solution = x;
  if (tape) {
    tape->solution = x;
    report.trajectory = std::move(tape);
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace dfw
