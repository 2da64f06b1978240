#pragma once

#include <dfw/norm_constraint.hpp>
#include <dfw/objective.hpp>

#include <cstdint>
#include <string>

namespace dfw {

/// Named problem sizes of the benchmark protocol.
enum class Scale { small = 500, medium = 1000, large = 2000 };

std::string scale_label(Eigen::Index n);
Scale parse_scale(const std::string& label);

/// A generated quadratic program over a weighted norm ball.
struct ProblemInstance {
  QuadraticObjective<double> objective;
  NormConstraint<double> constraint;
  std::uint64_t seed = 0;

  Eigen::Index dim() const { return objective.dim(); }
};

/// Distributions used by gen_qp, reported alongside results.
inline constexpr const char* kGeneratorDescription =
    "rng=splitmix64-counter; A_ij~N(0,1) row-major; P=A^T A/n+1e-3 I; q_i~N(0,1); w_i~U[0.5,1.5]; t~U[0.5,2]";

/// Deterministic instance from (n, seed). Draw order: A (row-major), q, w, t.
ProblemInstance gen_qp(Eigen::Index n, std::uint64_t seed, NormOrder<double> order = NormOrder<double>::one());

}  // namespace dfw
