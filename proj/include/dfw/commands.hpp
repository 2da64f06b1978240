#pragma once

// Experiment drivers behind the dfw tool. They return rows instead of printing so the
// acceptance tests can check the same numbers the tool reports.

#include <dfw/probgen.hpp>
#include <dfw/solver.hpp>
#include <dfw/unroll.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dfw {

/// Layer settings used by every experiment unless overridden: tol 1e-4, annealing T = 30.
SolverConfig experiment_config();

/// Standard-normal adjoint used to compare VJPs. Drawn from its own stream so it does not
/// repeat the instance draws of the same seed.
Vector<double> adjoint_seed(Eigen::Index n, std::uint64_t seed);

/// High-accuracy solution: projected gradient for p in {1, 2, inf}, otherwise Frank-Wolfe with
/// the exact oracle and tol 1e-10.
Vector<double> reference_solution(const QuadraticObjective<double>& obj, const NormConstraint<double>& c);

/// Reference solution plus central differences of the reference map q -> x*(q).
struct GradientOracle {
  Vector<double> solution;
  std::vector<Eigen::Index> columns;  // differenced columns
  Matrix<double> jacobian;            // n x n, zero outside `columns`
  double seconds = 0.0;               // one reference solve
};

/// With support_only and p = 1, only columns of the reference support are differenced; the
/// others are zero under strict complementarity.
GradientOracle gradient_oracle(const ProblemInstance& inst, bool support_only = true);

struct AccuracyRow {
  Eigen::Index n = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  double cos_sim = 0.0;    // VJP against the oracle, seeded by adjoint_seed
  double sol_dist = 0.0;   // ||x_dfw - x_ref||
  double mean_viol = 0.0;  // one solution per trial, so mean and max coincide
  double max_viol = 0.0;
  double ref_viol = 0.0;
  long iterations = 0;
};

/// Trial `trial` uses the instance gen_qp(n, seed + trial).
AccuracyRow accuracy_trial(Eigen::Index n, int trial, std::uint64_t seed, const SolverConfig& cfg);

/// Mean cosine between rows of the unrolled Jacobian and of the full finite-difference
/// Jacobian. Rows where the oracle is zero (off-support coordinates) are skipped; empty when
/// every row is zero, i.e. the reference solution is a vertex and the Jacobian vanishes.
std::optional<double> dense_jacobian_similarity(const ProblemInstance& inst, const SolverConfig& cfg);

struct TimeRow {
  Eigen::Index n = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  double seconds = 0.0;      // forward solve only
  double ref_seconds = 0.0;  // projected-gradient reference, for context
  double violation = 0.0;
  long iterations = 0;
};

TimeRow time_trial(Eigen::Index n, int trial, std::uint64_t seed, const SolverConfig& cfg);

/// Least-squares slope of log(mean seconds) against log(n) across the scales in `rows`.
/// Below 2 means sub-quadratic growth. NaN with fewer than two scales.
double time_scaling_exponent(const std::vector<TimeRow>& rows);

struct SweepSetting {
  std::string label;
  TemperatureSchedule schedule;
};

/// "tau=<v>" for each constant temperature followed by "anneal".
std::vector<SweepSetting> sweep_settings(const std::vector<double>& taus, int anneal_period);

struct SweepSeries {
  std::string label;
  std::vector<double> distance;  // mean over trials of ||x_k - x_ref||; short runs hold their last value
  double final_distance = 0.0;   // mean over trials
  double final_cos_sim = 0.0;    // mean over trials
  double mean_iterations = 0.0;
};

std::vector<SweepSeries> temp_sweep(Eigen::Index n, int trials, std::uint64_t seed,
                                    const std::vector<SweepSetting>& settings, const SolverConfig& base);

struct FitOptions {
  Eigen::Index n = 10;
  std::uint64_t seed = 0;
  long steps = 2000;
  double lr = 1.0;
  NormOrder<double> order = NormOrder<double>::one();
  double tau = 1.0;  // constant temperature of the fitted layer
  long unroll = 50;  // fixed number of Frank-Wolfe iterations
};

inline constexpr double kFitTarget = 1e-6;
inline constexpr int kFitPatience = 50;

struct FitResult {
  Vector<double> q_start;    // q_0
  std::vector<double> loss;  // loss[0] at q_0, then the loss held after each step
  bool reached = false;      // loss <= kFitTarget * loss[0]
  bool diverged = false;     // kFitPatience consecutive steps increased the loss
  double ratio() const { return loss.empty() || loss.front() == 0.0 ? 0.0 : loss.back() / loss.front(); }
};

/// Layer used by the fit demo: constant temperature, fixed unroll length.
SolverConfig fit_layer_config(const FitOptions& opts);

/// Recover x_target = x*(q_true) from q_0 ~ N(0, I) by descending 1/2 ||x*(q) - x_target||^2
/// with backward() VJPs. q_true is the instance's q.
FitResult fit_demo(const ProblemInstance& inst, const FitOptions& opts);
FitResult fit_demo(const FitOptions& opts);

// Output helpers. CSV floats use the shortest round-trip form.

void write_accuracy_csv(std::ostream& os, const std::vector<AccuracyRow>& rows);
std::string accuracy_table(const std::vector<AccuracyRow>& rows);
void write_time_csv(std::ostream& os, const std::vector<TimeRow>& rows);
std::string time_table(const std::vector<TimeRow>& rows);
void write_sweep_csv(std::ostream& os, const std::vector<SweepSeries>& series);
std::string sweep_table(const std::vector<SweepSeries>& series);
void write_fit_csv(std::ostream& os, const FitResult& result);

}  // namespace dfw
