#pragma once

#include <dfw/norm_constraint.hpp>

#include <span>

namespace dfw {

struct Cosine {
  double value = 0.0;
  bool degenerate = false;  // one of the inputs was the zero vector
};

/// <a, b> / (||a|| ||b||); zero with the degenerate flag when either input is zero.
Cosine cosine_similarity(const Vector<double>& a, const Vector<double>& b);

/// ||a - b||_2.
double solution_distance(const Vector<double>& a, const Vector<double>& b);

/// Absolute violation max(0, ||w o x||_p - t).
double violation(const Vector<double>& x, const NormConstraint<double>& c);

struct ViolationSummary {
  double mean_violated = 0.0;  // mean over samples with positive violation
  double mean_all = 0.0;
  double max = 0.0;
  long violated = 0;
  long samples = 0;
};

ViolationSummary summarize_violations(std::span<const double> violations);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

MeanStd mean_std(std::span<const double> values);

}  // namespace dfw
