#include "doctest.h"

#include <cmath>
#include <numbers>

#include "bayesio/distributions.hpp"
#include "bayesio/geometry.hpp"

using namespace bayesio;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace
{

UnitVector unit(std::initializer_list<double> xs)
{
  VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs)
    v[i++] = x;
  return normalize(v);
}

}  // namespace

TEST_CASE("normalize scales to unit length")
{
  const UnitVector u = normalize(Vector2d(3.0, 4.0));
  CHECK(u[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(u[1] == doctest::Approx(0.8).epsilon(1e-15));

  VectorXd e1 = VectorXd::Zero(4);
  e1[0] = 1.0;
  CHECK(normalize(e1).coords() == e1);
}

TEST_CASE("normalize rejects the zero vector")
{
  try {
    normalize(Vector2d(0.0, 0.0));
    FAIL("expected ZeroVector");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroVector);
  }
}

TEST_CASE("normalize is idempotent")
{
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    const VectorXd v = 10.0 * sample_standard_normal(7, rng);
    const UnitVector once = normalize(v);
    CHECK((normalize(once.coords()).coords() - once.coords()).norm() <= 4e-16);
  }
}

TEST_CASE("geodesic distance on special pairs")
{
  const UnitVector a = unit({1, 0});
  CHECK(geodesic_distance(a, a) == 0.0);
  CHECK(geodesic_distance(a, unit({0, 1})) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
  CHECK(geodesic_distance(a, unit({-1, 0})) == doctest::Approx(std::numbers::pi).epsilon(1e-15));
}

TEST_CASE("geodesic distance resolves tiny angles")
{
  const double phi = 1e-9;
  const UnitVector a = unit({1, 0});
  const UnitVector b = unit({std::cos(phi), std::sin(phi)});
  CHECK(geodesic_distance(a, b) == doctest::Approx(phi).epsilon(1e-6));
}

TEST_CASE("log map examples")
{
  const UnitVector base = unit({1, 0});
  const TangentPoint p = log_map(base, unit({0, 1}));
  CHECK(p.point[0] == doctest::Approx(1.0));
  CHECK(p.point[1] == doctest::Approx(std::numbers::pi / 2));

  const TangentPoint same = log_map(base, base);
  CHECK(same.point == base.coords());

  try {
    log_map(base, unit({-1, 0}));
    FAIL("expected AntipodalPoint");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AntipodalPoint);
  }
}

TEST_CASE("log map is an isometry along geodesics and lands in the tangent plane")
{
  Rng rng(5);
  for (int t = 0; t < 2000; ++t) {
    const Eigen::Index h = 2 + t % 6;
    const UnitVector a = sample_uniform_sphere(h, rng);
    const UnitVector b = sample_uniform_sphere(h, rng);
    if (a.dot(b) <= -1.0 + 1e-6)
      continue;
    const TangentPoint p = log_map(a, b);
    const double expected = std::acos(std::clamp(a.dot(b), -1.0, 1.0));
    CHECK(std::abs((p.point - a.coords()).norm() - expected) <= 1e-10);
    CHECK(std::abs((p.point - a.coords()).dot(a.coords())) <= 1e-10);
  }
}

TEST_CASE("reflect_to examples")
{
  Rng rng(3);
  VectorXd pole = VectorXd::Zero(4);
  pole[3] = 1.0;
  const UnitVector north = normalize(pole);
  const VectorXd s = sample_uniform_sphere(4, rng).coords();
  CHECK(reflect_to(s, north) == s);

  const UnitVector south = normalize(-pole);
  const VectorXd image = reflect_to(pole, south);
  CHECK((image - south.coords()).norm() <= 1e-15);
}

TEST_CASE("reflect_to is a norm-preserving involution mapping the pole to the mean")
{
  Rng rng(9);
  for (int t = 0; t < 1000; ++t) {
    const Eigen::Index h = 2 + t % 5;
    const UnitVector mean = sample_uniform_sphere(h, rng);
    const VectorXd s = sample_uniform_sphere(h, rng).coords();
    const VectorXd once = reflect_to(s, mean);
    CHECK(std::abs(once.norm() - 1.0) <= 1e-12);
    CHECK((reflect_to(once, mean) - s).norm() <= 1e-12);

    VectorXd pole = VectorXd::Zero(h);
    pole[h - 1] = 1.0;
    CHECK((reflect_to(pole, mean) - mean.coords()).norm() <= 1e-12);
  }
}

TEST_CASE("geometry works in long double")
{
  using LUnit = BasicUnitVector<long double>;
  Vector<long double> a(2), b(2);
  a << 1.0L, 0.0L;
  b << 0.0L, 2.0L;
  const LUnit ua = normalize(a);
  const LUnit ub = normalize(b);
  CHECK(static_cast<double>(geodesic_distance(ua, ub)) == doctest::Approx(std::numbers::pi / 2));
  CHECK(static_cast<double>(log_map(ua, ub).point[1]) == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("from_unit validates the norm")
{
  CHECK_THROWS_AS(UnitVector::from_unit(Vector2d(1.0, 1.0)), Error);
  CHECK(UnitVector::from_unit(Vector2d(0.0, 1.0))[1] == 1.0);
}
