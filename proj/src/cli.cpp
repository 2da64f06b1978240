#include <dfw/cli.hpp>
#include <dfw/commands.hpp>
#include <dfw/metrics.hpp>
#include <dfw/problem_io.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace dfw {

namespace {

// Raised for bad flag values that CLI11 cannot validate on its own.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Eigen::Index parse_size(const std::string& text) {
  try {
    return static_cast<Eigen::Index>(parse_scale(text));
  } catch (const std::invalid_argument&) {
  }
  std::size_t used = 0;
  long n = 0;
  try {
    n = std::stol(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || n < 1) throw InputError("invalid scale '" + text + "'");
  return n;
}

TemperatureSchedule parse_schedule(const std::string& text) {
  // anneal | anneal:<T> | const:<tau>
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (kind == "anneal") return TemperatureSchedule::annealing(arg.empty() ? 30 : std::stoi(arg));
    if (kind == "const" && !arg.empty()) return TemperatureSchedule::constant(std::stod(arg));
  } catch (const std::exception&) {
  }
  throw InputError("invalid schedule '" + text + "' (expected anneal, anneal:<T> or const:<tau>)");
}

/// Writes to the named file, or to `fallback` when the name is empty or "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw InputError("cannot open '" + path + "' for writing");
      os_ = &file_;
    }
  }
  std::ostream& get() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

std::string branch_name(StepBranch b) {
  switch (b) {
    case StepBranch::interior: return "interior";
    case StepBranch::clipped: return "clipped";
    case StepBranch::lower: return "lower";
    case StepBranch::degenerate: return "degenerate";
  }
  return "?";
}

int check_result(bool ok, const std::string& what, std::ostream& err) {
  if (ok) return kExitOk;
  err << "check failed: " << what << '\n';
  return kExitThreshold;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Differentiable Frank-Wolfe layer: solves, benchmarks and gradient checks", "dfw"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Write a random QP instance in the dfwqp text format");
  long gen_n = 10;
  std::uint64_t gen_seed = 0;
  std::string gen_p = "1", gen_out = "-";
  gen->add_option("--n", gen_n, "Dimension")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--p", gen_p, "Norm order: 1, inf or a number >= 1");
  gen->add_option("--out", gen_out, "Output file ('-' for stdout)");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Solve one problem file; CSV rows name,index,value");
  std::string problem_file, solve_p, solve_schedule = "anneal", solve_oracle = "softmax", solve_out = "-";
  double solve_tol = 1e-4;
  long solve_max_iters = 5000;
  bool solve_tape = false;
  solve_cmd->add_option("problem", problem_file, "Problem file")->required();
  solve_cmd->add_option("--p", solve_p, "Override the norm order of the file");
  solve_cmd->add_option("--tol", solve_tol, "Relative objective-change tolerance")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--max-iters", solve_max_iters, "Iteration cap")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--schedule", solve_schedule, "anneal, anneal:<T> or const:<tau>");
  solve_cmd->add_option("--oracle", solve_oracle, "Vertex oracle for p = 1")
      ->check(CLI::IsMember({"softmax", "exact"}));
  solve_cmd->add_flag("--tape", solve_tape, "Record the tape and emit per-iteration gamma, tau and objective rows");
  solve_cmd->add_option("--out", solve_out, "Output CSV ('-' for stdout)");

  // bench-time
  auto* bench_time = app.add_subcommand("bench-time", "Forward-solve wall time per scale (Markdown + CSV)");
  std::vector<std::string> time_scales{"500", "1000", "2000"};
  int time_trials = 5;
  std::uint64_t time_seed = 0;
  std::string time_csv;
  bool time_check = false;
  bench_time->add_option("--scales", time_scales, "Comma-separated sizes or small/medium/large")->delimiter(',');
  bench_time->add_option("--trials", time_trials, "Trials per scale")->check(CLI::PositiveNumber);
  bench_time->add_option("--seed", time_seed, "Base seed; trial i uses seed + i");
  bench_time->add_option("--csv", time_csv, "Write scale,trial,seconds to this file");
  bench_time->add_flag("--check", time_check, "Exit 4 unless n=2000 solves in <= 5 s with sub-quadratic growth");

  // bench-accuracy
  auto* bench_acc = app.add_subcommand("bench-accuracy", "Solution and gradient accuracy against the oracles");
  std::string acc_scale = "medium", acc_csv;
  int acc_trials = 5;
  std::uint64_t acc_seed = 0;
  bool acc_check = false;
  bench_acc->add_option("--scale", acc_scale, "Size or small/medium/large");
  bench_acc->add_option("--trials", acc_trials, "Trials")->check(CLI::PositiveNumber);
  bench_acc->add_option("--seed", acc_seed, "Base seed; trial i uses seed + i");
  bench_acc->add_option("--csv", acc_csv, "Write scale,trial,cos_sim,sol_dist,mean_viol,max_viol to this file");
  bench_acc->add_flag("--check", acc_check, "Exit 4 unless mean cos >= 0.95, mean dist <= 0.01, violation <= 1e-9");

  // temp-sweep
  auto* sweep = app.add_subcommand("temp-sweep", "Constant temperatures against the annealing schedule");
  std::vector<double> sweep_taus{1.0, 0.5, 0.25, 0.125};
  int sweep_period = 30, sweep_trials = 5;
  std::string sweep_scale = "medium", sweep_out;
  std::uint64_t sweep_seed = 0;
  bool sweep_check = false;
  sweep->add_option("--taus", sweep_taus, "Comma-separated constant temperatures")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  sweep->add_option("--anneal-period", sweep_period, "Iterations per halving")->check(CLI::PositiveNumber);
  sweep->add_option("--scale", sweep_scale, "Size or small/medium/large");
  sweep->add_option("--trials", sweep_trials, "Instances averaged per setting")->check(CLI::PositiveNumber);
  sweep->add_option("--seed", sweep_seed, "Base seed; trial i uses seed + i");
  sweep->add_option("--out", sweep_out, "Write setting,k,distance,final_cos_sim to this file");
  sweep->add_flag("--check", sweep_check,
                  "Exit 4 unless distance strictly decreases over the constant temperatures and annealing keeps "
                  "cos >= 0.95 within 2x of the best constant distance");

  // fit-demo
  auto* fit = app.add_subcommand("fit-demo", "Fit q so the layer output matches a target; CSV step,loss");
  FitOptions fit_opts;
  long fit_n = 10;
  std::string fit_p = "1", fit_out = "-";
  bool fit_check = false;
  fit->add_option("--n", fit_n, "Dimension")->check(CLI::PositiveNumber);
  fit->add_option("--seed", fit_opts.seed, "Instance seed");
  fit->add_option("--steps", fit_opts.steps, "Descent steps")->check(CLI::NonNegativeNumber);
  fit->add_option("--lr", fit_opts.lr, "Initial step length")->check(CLI::NonNegativeNumber);
  fit->add_option("--p", fit_p, "Norm order");
  fit->add_option("--tau", fit_opts.tau, "Layer temperature")->check(CLI::PositiveNumber);
  fit->add_option("--unroll", fit_opts.unroll, "Frank-Wolfe iterations in the layer")->check(CLI::PositiveNumber);
  fit->add_option("--out", fit_out, "Output CSV ('-' for stdout)");
  fit->add_flag("--check", fit_check, "Exit 4 unless the loss falls by 1e6x");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*gen) {
      const ProblemInstance inst = gen_qp(gen_n, gen_seed, parse_order(gen_p));
      Sink sink(gen_out, out);
      write_problem(sink.get(), inst);
      return kExitOk;
    }

    if (*solve_cmd) {
      ProblemInstance inst = load_problem(problem_file);
      if (!solve_p.empty())
        inst.constraint = NormConstraint<double>(inst.constraint.weights(), inst.constraint.radius(),
                                                 parse_order(solve_p));
      SolverConfig cfg;
      cfg.tol = solve_tol;
      cfg.max_iters = solve_max_iters;
      cfg.schedule = parse_schedule(solve_schedule);
      cfg.l1_oracle = solve_oracle == "exact" ? L1Oracle::exact : L1Oracle::softmax;
      cfg.record_tape = solve_tape;
      const SolveReport<double> rep = solve(inst.objective, inst.constraint, cfg);

      Sink sink(solve_out, out);
      std::ostream& os = sink.get();
      os << "name,index,value\n";
      for (Eigen::Index i = 0; i < rep.solution.size(); ++i)
        os << "solution," << i << ',' << format_double(rep.solution[i]) << '\n';
      os << "objective,," << format_double(inst.objective.value(rep.solution)) << '\n'
         << "iterations,," << rep.iterations << '\n'
         << "converged,," << (rep.converged ? 1 : 0) << '\n'
         << "seconds,," << format_double(rep.seconds) << '\n'
         << "violation,," << format_double(violation(rep.solution, inst.constraint)) << '\n';
      if (rep.trajectory) {
        const auto& records = rep.trajectory->records;
        for (std::size_t k = 0; k < records.size(); ++k) {
          os << "gamma," << k << ',' << format_double(records[k].gamma) << '\n'
             << "branch," << k << ',' << branch_name(records[k].branch) << '\n'
             << "tau," << k << ',' << format_double(records[k].tau) << '\n'
             << "objective_trace," << k << ',' << format_double(rep.objective_trace[k + 1]) << '\n';
        }
      }
      return kExitOk;
    }

    if (*bench_time) {
      std::vector<Eigen::Index> sizes;
      for (const auto& s : time_scales) sizes.push_back(parse_size(s));
      std::vector<TimeRow> rows;
      for (Eigen::Index n : sizes)
        for (int trial = 0; trial < time_trials; ++trial) rows.push_back(time_trial(n, trial, time_seed, experiment_config()));
      out << time_table(rows);
      if (!time_csv.empty()) {
        Sink sink(time_csv, out);
        write_time_csv(sink.get(), rows);
      }
      if (!time_check) return kExitOk;
      double worst_viol = 0.0, large_mean = 0.0;
      int large = 0;
      for (const auto& r : rows) {
        worst_viol = std::max(worst_viol, r.violation);
        if (r.n == 2000) large_mean += r.seconds, ++large;
      }
      const double exponent = time_scaling_exponent(rows);
      out << "scaling exponent: " << exponent << '\n';
      if (int c = check_result(worst_viol <= 1e-9, "violation above 1e-9", err)) return c;
      if (large)
        if (int c = check_result(large_mean / large <= 5.0, "n=2000 slower than 5 s", err)) return c;
      return check_result(!(exponent >= 2.0), "time grows at least quadratically", err);
    }

    if (*bench_acc) {
      const Eigen::Index n = parse_size(acc_scale);
      std::vector<AccuracyRow> rows;
      for (int trial = 0; trial < acc_trials; ++trial) rows.push_back(accuracy_trial(n, trial, acc_seed, experiment_config()));
      out << accuracy_table(rows);
      if (!acc_csv.empty()) {
        Sink sink(acc_csv, out);
        write_accuracy_csv(sink.get(), rows);
      }
      if (!acc_check) return kExitOk;
      std::vector<double> cos, dist;
      double worst = 0.0;
      for (const auto& r : rows) {
        cos.push_back(r.cos_sim);
        dist.push_back(r.sol_dist);
        worst = std::max(worst, r.max_viol);
      }
      if (int c = check_result(mean_std(cos).mean >= 0.95, "mean gradient similarity below 0.95", err)) return c;
      if (int c = check_result(mean_std(dist).mean <= 0.01, "mean solution distance above 0.01", err)) return c;
      return check_result(worst <= 1e-9, "violation above 1e-9", err);
    }

    if (*sweep) {
      const auto settings = sweep_settings(sweep_taus, sweep_period);
      const auto series = temp_sweep(parse_size(sweep_scale), sweep_trials, sweep_seed, settings, experiment_config());
      out << sweep_table(series);
      if (!sweep_out.empty()) {
        Sink sink(sweep_out, out);
        write_sweep_csv(sink.get(), series);
      }
      if (!sweep_check) return kExitOk;
      // Constant settings come first, in the order given; the last series is annealing.
      bool decreasing = true;
      double best = series.front().final_distance;
      for (std::size_t s = 1; s + 1 < series.size(); ++s) {
        decreasing = decreasing && series[s].final_distance < series[s - 1].final_distance;
        best = std::min(best, series[s].final_distance);
      }
      const SweepSeries& anneal = series.back();
      if (int c = check_result(decreasing, "distance not strictly decreasing with tau", err)) return c;
      if (int c = check_result(anneal.final_cos_sim >= 0.95, "annealing gradient similarity below 0.95", err))
        return c;
      return check_result(anneal.final_distance <= 2.0 * best, "annealing distance above 2x the best constant", err);
    }

    if (*fit) {
      fit_opts.n = fit_n;
      fit_opts.order = parse_order(fit_p);
      const FitResult result = fit_demo(fit_opts);
      Sink sink(fit_out, out);
      write_fit_csv(sink.get(), result);
      err << "loss ratio " << result.ratio() << " after " << result.loss.size() - 1 << " steps\n";
      if (result.diverged) {
        err << "diverged: the loss increased for " << kFitPatience << " consecutive steps\n";
        return kExitThreshold;
      }
      if (fit_check) return check_result(result.reached, "loss did not fall by 1e6x", err);
      return kExitOk;
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace dfw
