#include <dfw/metrics.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dfw {

Cosine cosine_similarity(const Vector<double>& a, const Vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine_similarity: dimension mismatch");
  // stableNorm avoids underflow for tiny adjoints.
  const double na = a.stableNorm();
  const double nb = b.stableNorm();
  if (na == 0.0 || nb == 0.0) return {0.0, true};
  return {std::clamp((a / na).dot(b / nb), -1.0, 1.0), false};
}

double solution_distance(const Vector<double>& a, const Vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("solution_distance: dimension mismatch");
  return (a - b).norm();
}

double violation(const Vector<double>& x, const NormConstraint<double>& c) { return c.violation(x); }

ViolationSummary summarize_violations(std::span<const double> violations) {
  ViolationSummary out;
  out.samples = static_cast<long>(violations.size());
  double sum = 0.0;
  for (double v : violations) {
    sum += v;
    out.max = std::max(out.max, v);
    if (v > 0.0) ++out.violated;
  }
  if (out.samples) out.mean_all = sum / static_cast<double>(out.samples);
  if (out.violated) out.mean_violated = sum / static_cast<double>(out.violated);
  return out;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(values.size()));
  return out;
}

}  // namespace dfw
