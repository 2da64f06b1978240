#include <dfw/probgen.hpp>
#include <dfw/rng.hpp>

#include <stdexcept>

namespace dfw {

std::string scale_label(Eigen::Index n) {
  switch (n) {
    case static_cast<Eigen::Index>(Scale::small): return "small";
    case static_cast<Eigen::Index>(Scale::medium): return "medium";
    case static_cast<Eigen::Index>(Scale::large): return "large";
    default: return "n" + std::to_string(n);
  }
}

Scale parse_scale(const std::string& label) {
  if (label == "small" || label == "500") return Scale::small;
  if (label == "medium" || label == "1000") return Scale::medium;
  if (label == "large" || label == "2000") return Scale::large;
  throw std::invalid_argument("unknown scale '" + label + "' (expected small, medium or large)");
}

ProblemInstance gen_qp(Eigen::Index n, std::uint64_t seed, NormOrder<double> order) {
  if (n < 1) throw std::invalid_argument("gen_qp: n must be >= 1");
  CounterRng rng(seed);

  Matrix<double> A(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = rng.normal();
  Vector<double> q(n);
  for (Eigen::Index i = 0; i < n; ++i) q[i] = rng.normal();
  Vector<double> w(n);
  for (Eigen::Index i = 0; i < n; ++i) w[i] = rng.uniform(0.5, 1.5);
  const double t = rng.uniform(0.5, 2.0);

  Matrix<double> P = Matrix<double>::Zero(n, n);
  P.selfadjointView<Eigen::Lower>().rankUpdate(A.transpose(), 1.0 / static_cast<double>(n));
  P = P.selfadjointView<Eigen::Lower>();
  P.diagonal().array() += 1e-3;

  return ProblemInstance{QuadraticObjective<double>(std::move(P), std::move(q)),
                         NormConstraint<double>(std::move(w), t, order), seed};
}

}  // namespace dfw
