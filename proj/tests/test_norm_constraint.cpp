#include "helpers.hpp"

#include <dfw/norm_constraint.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

using namespace dfw;
using dfw::test::vec;

TEST_CASE("norm order helpers") {
  CHECK(NormOrder<double>::one().is_one());
  CHECK(std::isinf(NormOrder<double>::one().dual()));
  CHECK(NormOrder<double>::infinity().dual() == 1.0);
  CHECK(NormOrder<double>{2.0}.dual() == 2.0);
  CHECK(NormOrder<double>{3.0}.dual() == doctest::Approx(1.5));
}

TEST_CASE("weighted norms") {
  const Vector<double> x = vec({3, -4});
  const Vector<double> w = vec({1, 2});
  CHECK(weighted_norm(x, w, NormOrder<double>::one()) == 11.0);
  CHECK(weighted_norm(x, w, NormOrder<double>{2.0}) == doctest::Approx(std::sqrt(73.0)));
  CHECK(weighted_norm(x, w, NormOrder<double>::infinity()) == 8.0);
  CHECK(weighted_norm(x, w, NormOrder<double>{3.0}) == doctest::Approx(std::cbrt(27.0 + 512.0)));
  // Large entries must not overflow for p > 1.
  CHECK(weighted_norm(vec({1e200, 1e200}), vec({1, 1}), NormOrder<double>{4.0}) ==
        doctest::Approx(1e200 * std::pow(2.0, 0.25)));
}

TEST_CASE("constraint validation") {
  CHECK_THROWS_AS(NormConstraint<double>(vec({1, 0}), 1.0, NormOrder<double>::one()), std::invalid_argument);
  CHECK_THROWS_AS(NormConstraint<double>(vec({1, -1}), 1.0, NormOrder<double>::one()), std::invalid_argument);
  CHECK_THROWS_AS(NormConstraint<double>(vec({1, 1}), -0.1, NormOrder<double>::one()), std::invalid_argument);
  CHECK_THROWS_AS(NormConstraint<double>(vec({1, 1}), 1.0, NormOrder<double>{0.5}), std::invalid_argument);
  CHECK_NOTHROW(NormConstraint<double>(vec({1, 1}), 0.0, NormOrder<double>::infinity()));
}

TEST_CASE("origin is feasible and violation is absolute") {
  const auto c = NormConstraint<double>(vec({1, 2}), 1.5, NormOrder<double>::one());
  CHECK(c.contains(Vector<double>::Zero(2)));
  CHECK(c.violation(Vector<double>::Zero(2)) == 0.0);
  CHECK(c.violation(vec({2, 0})) == doctest::Approx(0.5));
  CHECK_FALSE(c.contains(vec({2, 0})));
  CHECK_THROWS_AS(c.check_dim(3), std::invalid_argument);
}

TEST_CASE("sign convention and finiteness") {
  CHECK(sign(0.0) == 0.0);
  CHECK(sign(-0.0) == 0.0);
  CHECK(sign(-2.0) == -1.0);
  CHECK(sign(1e-300) == 1.0);
  CHECK_THROWS_AS(require_finite(vec({1, std::numeric_limits<double>::quiet_NaN()}), "v"), std::domain_error);
}
