#pragma once

#include <dfw/norm_constraint.hpp>
#include <dfw/rng.hpp>

#include <doctest.h>

#include <initializer_list>

namespace dfw::test {

inline Vector<double> vec(std::initializer_list<double> v) {
  Vector<double> out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline Vector<double> normals(CounterRng& rng, Eigen::Index n) {
  Vector<double> out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = rng.normal();
  return out;
}

inline Vector<double> uniforms(CounterRng& rng, Eigen::Index n, double lo, double hi) {
  Vector<double> out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = rng.uniform(lo, hi);
  return out;
}

/// Elementwise closeness with an absolute tolerance, reporting both vectors on failure.
inline void check_close(const Vector<double>& got, const Vector<double>& want, double tol) {
  REQUIRE(got.size() == want.size());
  INFO("got  " << got.transpose());
  INFO("want " << want.transpose());
  CHECK((got - want).cwiseAbs().maxCoeff() <= tol);
}

}  // namespace dfw::test
