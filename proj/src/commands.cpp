#include <dfw/commands.hpp>
#include <dfw/metrics.hpp>
#include <dfw/problem_io.hpp>
#include <dfw/reference.hpp>
#include <dfw/rng.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace dfw {

namespace {

// Offset for streams that must not coincide with gen_qp's stream of the same seed.
constexpr std::uint64_t kAdjointStream = 0xd1b54a32d192ed03ULL;
constexpr std::uint64_t kFitStream = 0x8cb92ba72f3d8dd7ULL;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string pm(const MeanStd& m, int digits) { return fixed(m.mean, digits) + " ± " + fixed(m.std, digits); }

}  // namespace

SolverConfig experiment_config() {
  SolverConfig cfg;
  cfg.tol = 1e-4;
  cfg.schedule = TemperatureSchedule::annealing(30);
  return cfg;
}

Vector<double> adjoint_seed(Eigen::Index n, std::uint64_t seed) {
  CounterRng rng(seed + kAdjointStream);
  Vector<double> u(n);
  for (Eigen::Index i = 0; i < n; ++i) u[i] = rng.normal();
  return u;
}

Vector<double> reference_solution(const QuadraticObjective<double>& obj, const NormConstraint<double>& c) {
  const auto order = c.order();
  if (order.is_one() || order.is_infinity() || order.p == 2.0) return projected_gradient_solve(obj, c).solution;
  SolverConfig cfg;
  cfg.tol = 1e-10;
  cfg.max_iters = 1000000;
  cfg.l1_oracle = L1Oracle::exact;
  return solve(obj, c, cfg).solution;
}

GradientOracle gradient_oracle(const ProblemInstance& inst, bool support_only) {
  GradientOracle out;
  const Eigen::Index n = inst.dim();
  const auto start = std::chrono::steady_clock::now();
  out.solution = reference_solution(inst.objective, inst.constraint);
  out.seconds = seconds_since(start);

  const double cut = 1e-9 * std::max(1.0, out.solution.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < n; ++j)
    if (!support_only || !inst.constraint.order().is_one() || std::abs(out.solution[j]) > cut) out.columns.push_back(j);

  SolutionMap<double> map = [&](const Vector<double>& q) {
    return reference_solution(inst.objective.with_q(q), inst.constraint);
  };
  out.jacobian = Matrix<double>::Zero(n, n);
  if (!out.columns.empty())
    out.jacobian = finite_diff_jacobian(map, inst.objective.q(), out.columns, default_fd_step(inst.objective.q()));
  return out;
}

AccuracyRow accuracy_trial(Eigen::Index n, int trial, std::uint64_t seed, const SolverConfig& cfg) {
  AccuracyRow row;
  row.n = n;
  row.trial = trial;
  row.seed = seed + static_cast<std::uint64_t>(trial);
  const ProblemInstance inst = gen_qp(n, row.seed);
  const GradientOracle oracle = gradient_oracle(inst);

  SolverConfig taped = cfg;
  taped.record_tape = true;
  const SolveReport<double> rep = solve(inst.objective, inst.constraint, taped);
  const Vector<double> u = adjoint_seed(n, row.seed);
  const Vector<double> vjp = backward(rep, inst.objective, u);
  const Vector<double> expected = oracle.jacobian.transpose() * u;

  row.cos_sim = cosine_similarity(vjp, expected).value;
  row.sol_dist = solution_distance(rep.solution, oracle.solution);
  row.mean_viol = row.max_viol = violation(rep.solution, inst.constraint);
  row.ref_viol = violation(oracle.solution, inst.constraint);
  row.iterations = rep.iterations;
  return row;
}

std::optional<double> dense_jacobian_similarity(const ProblemInstance& inst, const SolverConfig& cfg) {
  const GradientOracle oracle = gradient_oracle(inst, false);
  SolverConfig taped = cfg;
  taped.record_tape = true;
  const SolveReport<double> rep = solve(inst.objective, inst.constraint, taped);
  const Matrix<double> J = jacobian(*rep.trajectory, inst.objective);

  double total = 0.0;
  int rows = 0;
  for (Eigen::Index i = 0; i < J.rows(); ++i) {
    if (oracle.jacobian.row(i).norm() == 0.0) continue;
    total += cosine_similarity(J.row(i).transpose(), oracle.jacobian.row(i).transpose()).value;
    ++rows;
  }
  if (rows == 0) return std::nullopt;
  return total / rows;
}

TimeRow time_trial(Eigen::Index n, int trial, std::uint64_t seed, const SolverConfig& cfg) {
  TimeRow row;
  row.n = n;
  row.trial = trial;
  row.seed = seed + static_cast<std::uint64_t>(trial);
  const ProblemInstance inst = gen_qp(n, row.seed);

  SolverConfig forward = cfg;
  forward.record_tape = false;
  const SolveReport<double> rep = solve(inst.objective, inst.constraint, forward);
  row.seconds = rep.seconds;
  row.iterations = rep.iterations;
  row.violation = violation(rep.solution, inst.constraint);

  const auto start = std::chrono::steady_clock::now();
  (void)reference_solution(inst.objective, inst.constraint);
  row.ref_seconds = seconds_since(start);
  return row;
}

double time_scaling_exponent(const std::vector<TimeRow>& rows) {
  std::map<Eigen::Index, std::vector<double>> by_scale;
  for (const auto& r : rows) by_scale[r.n].push_back(r.seconds);
  if (by_scale.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> lx, ly;
  for (const auto& [n, times] : by_scale) {
    lx.push_back(std::log(static_cast<double>(n)));
    ly.push_back(std::log(std::max(mean_std(times).mean, 1e-12)));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

std::vector<SweepSetting> sweep_settings(const std::vector<double>& taus, int anneal_period) {
  std::vector<SweepSetting> out;
  for (double tau : taus) out.push_back({"tau=" + format_double(tau), TemperatureSchedule::constant(tau)});
  out.push_back({"anneal", TemperatureSchedule::annealing(anneal_period)});
  return out;
}

std::vector<SweepSeries> temp_sweep(Eigen::Index n, int trials, std::uint64_t seed,
                                    const std::vector<SweepSetting>& settings, const SolverConfig& base) {
  if (trials < 1) throw std::invalid_argument("temp_sweep: trials must be >= 1");
  std::vector<SweepSeries> out(settings.size());
  std::vector<std::vector<std::vector<double>>> curves(settings.size());
  for (std::size_t s = 0; s < settings.size(); ++s) out[s].label = settings[s].label;

  for (int trial = 0; trial < trials; ++trial) {
    const ProblemInstance inst = gen_qp(n, seed + static_cast<std::uint64_t>(trial));
    const GradientOracle oracle = gradient_oracle(inst);
    const Vector<double> u = adjoint_seed(n, inst.seed);
    const Vector<double> expected = oracle.jacobian.transpose() * u;

    for (std::size_t s = 0; s < settings.size(); ++s) {
      SolverConfig cfg = base;
      cfg.schedule = settings[s].schedule;
      cfg.record_tape = true;
      const SolveReport<double> rep = solve(inst.objective, inst.constraint, cfg, {.record_iterates = true});
      std::vector<double> curve;
      curve.reserve(rep.iterates.size());
      for (const auto& x : rep.iterates) curve.push_back(solution_distance(x, oracle.solution));
      curves[s].push_back(std::move(curve));

      const Vector<double> vjp = backward(rep, inst.objective, u);
      out[s].final_cos_sim += cosine_similarity(vjp, expected).value / trials;
      out[s].final_distance += solution_distance(rep.solution, oracle.solution) / trials;
      out[s].mean_iterations += static_cast<double>(rep.iterations) / trials;
    }
  }

  for (std::size_t s = 0; s < settings.size(); ++s) {
    std::size_t len = 0;
    for (const auto& c : curves[s]) len = std::max(len, c.size());
    out[s].distance.assign(len, 0.0);
    for (const auto& c : curves[s])
      for (std::size_t k = 0; k < len; ++k) out[s].distance[k] += c[std::min(k, c.size() - 1)] / trials;
  }
  return out;
}

SolverConfig fit_layer_config(const FitOptions& opts) {
  SolverConfig cfg;
  cfg.schedule = TemperatureSchedule::constant(opts.tau);
  cfg.tol = 1e-300;  // run exactly `unroll` iterations unless gamma hits 0
  cfg.max_iters = opts.unroll;
  cfg.record_tape = true;
  return cfg;
}

// Gradient descent with Barzilai-Borwein step lengths. The step is capped at norm 10 and
// accepted when the loss does not exceed the largest of the last 10 accepted losses;
// otherwise it is retried at a quarter of the length. lr is the first step length and the
// fallback when the curvature estimate is not positive.
FitResult fit_demo(const ProblemInstance& inst, const FitOptions& opts) {
  if (opts.steps < 0) throw std::invalid_argument("fit_demo: steps must be >= 0");
  if (!(opts.lr >= 0.0)) throw std::invalid_argument("fit_demo: lr must be >= 0");
  constexpr double kMaxStep = 10.0;
  constexpr std::size_t kWindow = 10;

  const Eigen::Index n = inst.dim();
  const SolverConfig cfg = fit_layer_config(opts);
  const Vector<double> target = solve(inst.objective, inst.constraint, cfg).solution;

  auto evaluate = [&](const Vector<double>& q, Vector<double>& grad) {
    const QuadraticObjective<double> obj = inst.objective.with_q(q);
    const SolveReport<double> rep = solve(obj, inst.constraint, cfg);
    const Vector<double> residual = rep.solution - target;
    grad = backward(rep, obj, residual);
    return 0.5 * residual.squaredNorm();
  };

  CounterRng rng(opts.seed + kFitStream);
  Vector<double> q(n);
  for (Eigen::Index i = 0; i < n; ++i) q[i] = rng.normal();

  FitResult result;
  result.q_start = q;
  Vector<double> grad;
  double loss = evaluate(q, grad);
  result.loss.push_back(loss);
  const double goal = kFitTarget * loss;
  result.reached = loss <= goal;
  std::deque<double> recent{loss};
  double length = opts.lr;
  int increases = 0;

  for (long step = 0; step < opts.steps && !result.reached; ++step) {
    double h = length;
    const double gnorm = grad.norm();
    if (h * gnorm > kMaxStep) h = kMaxStep / gnorm;
    const Vector<double> q_next = q - h * grad;
    Vector<double> grad_next;
    const double loss_next = evaluate(q_next, grad_next);

    if (loss_next > *std::max_element(recent.begin(), recent.end())) {
      length = 0.25 * h;
      result.loss.push_back(loss);
      if (++increases >= kFitPatience) {
        result.diverged = true;
        break;
      }
      continue;
    }
    increases = 0;
    const Vector<double> ds = q_next - q;
    const double sy = ds.dot(grad_next - grad);
    length = sy > 0.0 ? ds.squaredNorm() / sy : 2.0 * h;
    q = q_next;
    grad = std::move(grad_next);
    loss = loss_next;
    result.loss.push_back(loss);
    recent.push_back(loss);
    if (recent.size() > kWindow) recent.pop_front();
    result.reached = loss <= goal;
  }
  return result;
}

FitResult fit_demo(const FitOptions& opts) { return fit_demo(gen_qp(opts.n, opts.seed, opts.order), opts); }

void write_accuracy_csv(std::ostream& os, const std::vector<AccuracyRow>& rows) {
  os << "scale,trial,cos_sim,sol_dist,mean_viol,max_viol\n";
  for (const auto& r : rows)
    os << scale_label(r.n) << ',' << r.trial << ',' << format_double(r.cos_sim) << ',' << format_double(r.sol_dist)
       << ',' << format_double(r.mean_viol) << ',' << format_double(r.max_viol) << '\n';
}

std::string accuracy_table(const std::vector<AccuracyRow>& rows) {
  std::map<Eigen::Index, std::vector<AccuracyRow>> by_scale;
  for (const auto& r : rows) by_scale[r.n].push_back(r);
  std::ostringstream os;
  for (const auto& [n, group] : by_scale) {
    std::vector<double> cos, dist, viol, ref_viol;
    for (const auto& r : group) {
      cos.push_back(r.cos_sim);
      dist.push_back(r.sol_dist);
      viol.push_back(r.max_viol);
      ref_viol.push_back(r.ref_viol);
    }
    const ViolationSummary v = summarize_violations(viol);
    const ViolationSummary rv = summarize_violations(ref_viol);
    os << "Scale " << scale_label(n) << " (n=" << n << ", " << group.size() << " trials)\n\n"
       << "| Method | Gradients Sim. | Solutions Dist. | Mean Violation | Mean Violation (all) | Max Violation |\n"
       << "|---|---|---|---|---|---|\n"
       << "| DFWLayer | " << pm(mean_std(cos), 3) << " | " << pm(mean_std(dist), 3) << " | "
       << fixed(v.mean_violated, 3) << " | " << fixed(v.mean_all, 3) << " | " << fixed(v.max, 3) << " |\n"
       << "| Reference (projected gradient) | 1.000 ± 0.000 | 0.000 ± 0.000 | " << fixed(rv.mean_violated, 3)
       << " | " << fixed(rv.mean_all, 3) << " | " << fixed(rv.max, 3) << " |\n\n";
  }
  return os.str();
}

void write_time_csv(std::ostream& os, const std::vector<TimeRow>& rows) {
  os << "scale,trial,seconds\n";
  for (const auto& r : rows) os << scale_label(r.n) << ',' << r.trial << ',' << format_double(r.seconds) << '\n';
}

std::string time_table(const std::vector<TimeRow>& rows) {
  std::map<Eigen::Index, std::pair<std::vector<double>, std::vector<double>>> by_scale;
  for (const auto& r : rows) {
    by_scale[r.n].first.push_back(r.seconds);
    by_scale[r.n].second.push_back(r.ref_seconds);
  }
  std::ostringstream head, rule, dfw, ref;
  head << "| Method |";
  rule << "|---|";
  dfw << "| DFWLayer |";
  ref << "| Reference (projected gradient) |";
  for (const auto& [n, times] : by_scale) {
    head << " n=" << n << " |";
    rule << "---|";
    dfw << ' ' << pm(mean_std(times.first), 2) << " |";
    ref << ' ' << pm(mean_std(times.second), 2) << " |";
  }
  return head.str() + "\n" + rule.str() + "\n" + dfw.str() + "\n" + ref.str() + "\n";
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepSeries>& series) {
  os << "setting,k,distance,final_cos_sim\n";
  for (const auto& s : series)
    for (std::size_t k = 0; k < s.distance.size(); ++k)
      os << s.label << ',' << k << ',' << format_double(s.distance[k]) << ',' << format_double(s.final_cos_sim) << '\n';
}

std::string sweep_table(const std::vector<SweepSeries>& series) {
  std::ostringstream os;
  os << "| Setting | Iterations | Final Dist. | Gradients Sim. |\n|---|---|---|---|\n";
  for (const auto& s : series)
    os << "| " << s.label << " | " << fixed(s.mean_iterations, 1) << " | " << fixed(s.final_distance, 3) << " | "
       << fixed(s.final_cos_sim, 3) << " |\n";
  return os.str();
}

void write_fit_csv(std::ostream& os, const FitResult& result) {
  os << "step,loss\n";
  for (std::size_t k = 0; k < result.loss.size(); ++k) os << k << ',' << format_double(result.loss[k]) << '\n';
}

}  // namespace dfw
