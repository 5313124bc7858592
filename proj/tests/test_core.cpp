#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "nlbit/core.hpp"
#include "nlbit/random.hpp"

using namespace nlbit;

TEST_CASE("sg is the half-space indicator with sg(0) = 1", "[core]") {
  CHECK(sg(0.0) == kOne);
  CHECK(sg(-0.0) == kOne);
  CHECK(sg(-0.3) == kZero);
  CHECK(sg(0.7) == kOne);
  CHECK(sg(std::numeric_limits<double>::denorm_min()) == kOne);
  CHECK(sg(-std::numeric_limits<double>::denorm_min()) == kZero);
}

TEST_CASE("sg rejects non-finite input", "[core]") {
  CHECK_THROWS_AS(sg(std::numeric_limits<double>::quiet_NaN()), std::domain_error);
  CHECK_THROWS_AS(sg(std::numeric_limits<double>::infinity()), std::domain_error);
}

TEST_CASE("sg is invariant under positive scaling", "[core][property]") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> t_dist(-10.0, 10.0);
  std::uniform_real_distribution<double> log_k(-20.0, 20.0);
  for (int i = 0; i < 10'000; ++i) {
    const double t = t_dist(gen);
    const double k = std::exp(log_k(gen));
    REQUIRE(sg(k * t) == sg(t));
  }
  CHECK(sg(5.0 * 0.0) == sg(0.0));
}

TEST_CASE("bits add modulo 2 and multiply as AND", "[core]") {
  CHECK((kOne ^ kOne) == kZero);
  CHECK((kOne + kOne) == kZero);
  CHECK((kOne ^ kZero) == kOne);
  CHECK((kOne & kOne) == kOne);
  CHECK((kOne * kZero) == kZero);
  CHECK(kOne.flipped() == kZero);
  CHECK_THROWS_AS(Bit(2), std::invalid_argument);
}

TEST_CASE("to_signed maps 0 to +1 and 1 to -1", "[core]") {
  CHECK(to_signed(kZero).value() == 1);
  CHECK(to_signed(kOne).value() == -1);
  CHECK((to_signed(kOne) * to_signed(kOne)).value() == 1);
  CHECK_THROWS_AS(SignedBit(0), std::invalid_argument);
}

TEST_CASE("signed product equals signed sum for all bit pairs", "[core]") {
  for (unsigned a = 0; a < 2; ++a)
    for (unsigned b = 0; b < 2; ++b) {
      const Bit ba(a), bb(b);
      CHECK(to_signed(ba) * to_signed(bb) == to_signed(ba ^ bb));
      CHECK(((to_signed(ba) * to_signed(bb)).value() == 1) == ((ba ^ bb) == kZero));
    }
}

TEST_CASE("dot product", "[core]") {
  CHECK(dot(Vec3{0, 0, 1}, Vec3{0, 0, 1}) == 1.0);
  CHECK(dot(Vec3{0, 0, 1}, Vec3{0, 0, -1}) == -1.0);
  CHECK(dot(Vec3{1, 0, 0}, Vec3{0, 1, 0}) == 0.0);
  CHECK(dot(Vec3{1, 2, 3}, Vec3{4, 5, 6}) == dot(Vec3{4, 5, 6}, Vec3{1, 2, 3}));
  CHECK_THROWS_AS(dot(Vec3{std::nan(""), 0, 0}, Vec3{1, 0, 0}), std::domain_error);
}

TEST_CASE("UnitVector3 enforces the unit norm", "[core]") {
  CHECK_NOTHROW(UnitVector3(0.0, 0.0, 1.0));
  CHECK_NOTHROW(UnitVector3(0.0, 0.0, 1.0 + 5e-10));
  CHECK_THROWS_AS(UnitVector3(0.0, 0.0, 1.0 + 1e-8), std::invalid_argument);
  CHECK_THROWS_AS(UnitVector3(1.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(UnitVector3::normalized(Vec3{}), std::invalid_argument);
  const auto v = UnitVector3::normalized(Vec3{3.0, 0.0, 4.0});
  CHECK(v.x() == Catch::Approx(0.6));
  CHECK(v.z() == Catch::Approx(0.8));
  CHECK(std::abs(norm(UnitVector3::from_polar(2.0)) - 1.0) <= kUnitTolerance);
}

TEST_CASE("lambda_plus and lambda_minus are orthogonal", "[core][property]") {
  PhiloxStream rng(3, 0);
  double worst = 0.0;
  for (int i = 0; i < 10'000; ++i) {
    const auto l1 = sample_uniform_sphere(rng);
    const auto l2 = sample_uniform_sphere(rng);
    const auto d = DerivedVectorPair::from(l1, l2);
    CHECK(d.lambda_plus == l1.vec() + l2.vec());
    worst = std::max(worst, std::abs(dot(d.lambda_plus, d.lambda_minus)));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("degenerate lambda1 = lambda2 falls back on sg(0) = 1", "[core]") {
  const UnitVector3 l(0.0, 0.0, 1.0);
  const auto d = DerivedVectorPair::from(l, l);
  CHECK(d.lambda_minus == Vec3{});
  CHECK(sg(dot(Vec3{1, 0, 0}, d.lambda_minus)) == kOne);
}
