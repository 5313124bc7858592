#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "nlbit/analysis.hpp"

using namespace nlbit;

namespace {

const UnitVector3 kZ(0.0, 0.0, 1.0);

MeasurementPair at_angle(double theta) { return {kZ, UnitVector3::from_polar(theta)}; }

// Midpoint quadrature of P(sign(a.l) != sign(b.l)) for l uniform on S^2,
// a = z and b at polar angle theta in the x-z plane. Independent of the
// sampling code and of the closed form it checks.
double separation_probability_quadrature(double theta, int n_polar, int n_azimuth) {
  const Vec3 a{0, 0, 1};
  const Vec3 b{std::sin(theta), 0, std::cos(theta)};
  const double dp = std::numbers::pi / n_polar;
  const double da = 2.0 * std::numbers::pi / n_azimuth;
  double mass = 0.0;
  for (int i = 0; i < n_polar; ++i) {
    const double t = (i + 0.5) * dp;
    const double w = std::sin(t) * dp * da;
    for (int j = 0; j < n_azimuth; ++j) {
      const double p = (j + 0.5) * da;
      const Vec3 l{std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t)};
      if ((dot(a, l) >= 0) != (dot(b, l) >= 0)) mass += w;
    }
  }
  return mass / (4.0 * std::numbers::pi);
}

}  // namespace

TEST_CASE("singlet joint table", "[analysis]") {
  CHECK(quantum_pair_probability({kZ, -kZ}, kZero, kOne) == 0.0);
  const auto orth = at_angle(std::numbers::pi / 2);
  for (unsigned a = 0; a < 2; ++a)
    for (unsigned b = 0; b < 2; ++b) CHECK(quantum_pair_probability(orth, Bit(a), Bit(b)) == Catch::Approx(0.25));
  const MeasurementPair half{kZ, UnitVector3(std::sqrt(0.75), 0.0, 0.5)};
  CHECK(quantum_pair_probability(half, kZero, kOne) == Catch::Approx(0.375));
}

TEST_CASE("singlet joint table rows sum to 1 with uniform marginals", "[analysis]") {
  for (int k = 0; k <= 24; ++k) {
    const auto pair = at_angle(k * std::numbers::pi / 24);
    double total = 0.0;
    for (unsigned a = 0; a < 2; ++a) {
      const double row = quantum_pair_probability(pair, Bit(a), kZero) + quantum_pair_probability(pair, Bit(a), kOne);
      const double col = quantum_pair_probability(pair, kZero, Bit(a)) + quantum_pair_probability(pair, kOne, Bit(a));
      CHECK(row == Catch::Approx(0.5).margin(1e-15));
      CHECK(col == Catch::Approx(0.5).margin(1e-15));
      total += row;
    }
    CHECK(total == Catch::Approx(1.0).margin(1e-15));
  }
}

TEST_CASE("singlet joint table matches a Monte Carlo oracle on the PR protocol", "[analysis][statistical]") {
  const MeasurementPair pair{kZ, UnitVector3(std::sqrt(0.75), 0.0, 0.5)};
  PhiloxStream rng(101, 0);
  const int n = 1'000'000;
  std::array<int, 4> counts{};
  for (int i = 0; i < n; ++i) {
    const auto sr = SharedRandomness::draw(rng, 101);
    const auto rec = run_pr_singlet(pair, sr, uniform_bit(rng));
    ++counts[2 * rec.a.value() + rec.b.value()];
  }
  for (unsigned a = 0; a < 2; ++a)
    for (unsigned b = 0; b < 2; ++b) {
      const double p = quantum_pair_probability(pair, Bit(a), Bit(b));
      CHECK(std::abs(counts[2 * a + b] / double(n) - p) <= 5.0 * binomial_std_error(p, n));
    }
}

TEST_CASE("hyperplane separation law, quadrature oracle", "[analysis]") {
  // Frozen: the separation probability is theta / pi.
  CHECK(separation_probability_quadrature(std::numbers::pi / 4, 1000, 2000) == Catch::Approx(0.25).margin(2e-3));
  CHECK(separation_probability_quadrature(std::numbers::pi / 3, 1000, 2000) == Catch::Approx(1.0 / 3).margin(2e-3));
  CHECK(separation_probability_quadrature(std::numbers::pi / 2, 1000, 2000) == Catch::Approx(0.5).margin(2e-3));
  // The baseline's A = B event is exactly separation.
  CHECK(predicted_p_unequal(ProtocolId::LhvBaseline, at_angle(std::numbers::pi / 4)) == Catch::Approx(0.75));
}

TEST_CASE("correlation estimates", "[analysis][statistical]") {
  SECTION("PR singlet at pi/3") {
    const auto est = estimate_correlation(ProtocolId::PrSinglet, at_angle(std::numbers::pi / 3), 1'000'000, 42);
    CHECK(std::abs(est.p_unequal - 0.75) <= 5 * 0.000433);
    CHECK(est.correlation == 1.0 - 2.0 * est.p_unequal);
    CHECK(est.std_error == std::sqrt(est.p_unequal * (1 - est.p_unequal) / 1e6));
  }
  SECTION("PR singlet at 0 is deterministic") {
    const auto est = estimate_correlation(ProtocolId::PrSinglet, at_angle(0.0), 10'000, 1);
    CHECK(est.p_unequal == 1.0);
    CHECK(est.correlation == -1.0);
  }
  SECTION("LHV baseline at pi/2") {
    const auto est = estimate_correlation(ProtocolId::LhvBaseline, at_angle(std::numbers::pi / 2), 1'000'000, 3);
    CHECK(std::abs(est.p_unequal - 0.5) <= 0.0025);
  }
  SECTION("n = 0") {
    CHECK_THROWS_AS(estimate_correlation(ProtocolId::PrSinglet, at_angle(1.0), 0, 1), UsageError);
  }
}

TEST_CASE("estimates do not depend on the worker count", "[analysis]") {
  const auto pair = at_angle(1.1);
  const auto one = simulate(ProtocolId::PrSinglet, pair, 300'001, 77, 1);
  const auto three = simulate(ProtocolId::PrSinglet, pair, 300'001, 77, 3);
  CHECK(one.runs == 300'001);
  CHECK(one.unequal == three.unequal);
  CHECK(one.a_zero == three.a_zero);
  CHECK(one.b_zero == three.b_zero);
  CHECK(simulate(ProtocolId::PrSinglet, pair, 1000, 78).unequal != one.unequal);
}

TEST_CASE("z score", "[analysis]") {
  CHECK(z_score(CorrelationEstimate::from_counts(0, 100), 0.0) == 0.0);
  CHECK(z_score(CorrelationEstimate::from_counts(50, 100), 0.5) == 0.0);
  CHECK(z_score(CorrelationEstimate::from_counts(60, 100), 0.5) == Catch::Approx(0.1 / std::sqrt(0.24 / 100)));
  CHECK(std::isinf(z_score(CorrelationEstimate::from_counts(1, 1), 0.0)));
}

TEST_CASE("PR box CHSH by enumeration", "[analysis]") {
  const auto res = chsh_pr_box_exhaustive();
  CHECK(res.s == 4.0);
  CHECK(res.terms[1][1] == -1.0);
  CHECK(res.terms[0][0] == 1.0);
  CHECK(res.method == ChshMethod::Exhaustive);
  CHECK(chsh_value(res.terms) == res.s);
}

TEST_CASE("deterministic local strategies reach at most 2", "[analysis]") {
  const auto all = chsh_local_deterministic_all();
  for (double s : all) CHECK(std::abs(s) <= 2.0);
  CHECK(chsh_local_deterministic_max() == 2.0);
  CHECK(all[0] == 2.0);  // constant outputs
}

TEST_CASE("optimal singlet settings reach the Cirelson value", "[analysis]") {
  const auto opt = optimal_singlet_chsh_settings();
  CHECK(opt.s_analytic == Catch::Approx(2.0 * std::numbers::sqrt2).epsilon(1e-12));
  // A finer brute-force grid finds nothing larger.
  double best = 0.0;
  const int steps = 32;
  const double h = 2 * std::numbers::pi / steps;
  for (int i = 0; i < steps; ++i)
    for (int j = 0; j < steps; ++j)
      for (int k = 0; k < steps; ++k) {
        auto e = [](double a, double b) { return -std::cos(a - b); };
        best = std::max(best, e(0, j * h) + e(0, k * h) + e(i * h, j * h) - e(i * h, k * h));
      }
  CHECK(best <= opt.s_analytic + 1e-12);
  const auto& s = opt.settings;
  const double analytic = -dot(s.alice[0], s.bob[0]) - dot(s.alice[0], s.bob[1]) - dot(s.alice[1], s.bob[0]) +
                          dot(s.alice[1], s.bob[1]);
  CHECK(analytic == Catch::Approx(opt.s_analytic));
}

TEST_CASE("sampled CHSH values", "[analysis][statistical]") {
  const auto opt = optimal_singlet_chsh_settings();
  const std::uint64_t n = 200'000;
  const auto pr = chsh_protocol(ProtocolId::PrSinglet, opt.settings, n, 5);
  const auto tb = chsh_protocol(ProtocolId::TonerBacon, opt.settings, n, 6);
  const auto lhv = chsh_protocol(ProtocolId::LhvBaseline, opt.settings, n, 7);
  CHECK(pr.method == ChshMethod::MonteCarlo);
  CHECK(std::abs(pr.s - 2 * std::numbers::sqrt2) <= 5 * pr.std_error);
  CHECK(std::abs(tb.s - 2 * std::numbers::sqrt2) <= 5 * tb.std_error);
  CHECK(lhv.s <= 2.0 + 5 * lhv.std_error);
  CHECK(lhv.s < 2 * std::numbers::sqrt2);
  CHECK(chsh_value(pr.terms) == pr.s);
  CHECK(std::abs(pr.s) <= 4.0);
}

TEST_CASE("LHV baseline stays local at random settings", "[analysis][statistical]") {
  PhiloxStream rng(8, 0);
  for (int i = 0; i < 5; ++i) {
    const CHSHSettings settings{{sample_uniform_sphere(rng), sample_uniform_sphere(rng)},
                                {sample_uniform_sphere(rng), sample_uniform_sphere(rng)}};
    const auto lhv = chsh_protocol(ProtocolId::LhvBaseline, settings, 50'000, 100 + i);
    CHECK(lhv.s <= 2.0 + 5 * lhv.std_error);
  }
}

TEST_CASE("no-signaling test", "[analysis][statistical]") {
  const auto remote = UnitVector3::from_polar(0.9);
  SECTION("PR singlet, remote setting flipped") {
    const auto report = no_signaling_test(ProtocolId::PrSinglet, {{kZ, remote}, {kZ, -remote}}, 1'000'000, 11);
    CHECK(report.max_deviation <= 5 * 0.0007);
    CHECK(report.exact_pass == true);
    CHECK(report.pass());
  }
  SECTION("fixed Bob") {
    const auto report =
        no_signaling_test(ProtocolId::TonerBacon, {{remote, kZ}, {-remote, kZ}}, 200'000, 12, FixedParty::Bob);
    CHECK_FALSE(report.exact_pass.has_value());
    CHECK(report.pass());
  }
  SECTION("usage errors") {
    CHECK_THROWS_AS(no_signaling_test(ProtocolId::PrSinglet, {{kZ, remote}}, 10, 1), UsageError);
    CHECK_THROWS_AS(no_signaling_test(ProtocolId::PrSinglet, {{kZ, remote}, {remote, remote}}, 10, 1), UsageError);
  }
}

TEST_CASE("PR box built from one bit matches the box exactly", "[analysis]") {
  CHECK(pr_from_one_bit_matches_pr_box());
}

TEST_CASE("monogamy attack", "[analysis]") {
  CHECK(monogamy_attack(kOne, 1000, 1) == 1.0);
  CHECK(monogamy_attack(kZero, 1000, 2) == 1.0);
  CHECK(monogamy_attack_exhaustive(kOne) == 1.0);
  CHECK(monogamy_attack_exhaustive(kZero) == 1.0);
  const auto control = monogamy_control(100'000, 3);
  CHECK(std::abs(control.rate - 0.5) <= 5 * control.std_error);
  CHECK_THROWS_AS(monogamy_attack(kOne, 0, 1), UsageError);
}

TEST_CASE("correlation sweep", "[analysis][statistical]") {
  SECTION("PR singlet endpoints and midpoint") {
    const auto rows = sweep_correlation(ProtocolId::PrSinglet, 3, 1'000'000, 21);
    CHECK(rows[1].theta == Catch::Approx(std::numbers::pi / 2));
    CHECK(rows[1].prediction == Catch::Approx(0.5));
    CHECK(std::abs(rows[1].z) <= 5.0);
    CHECK(rows[2].theta == std::numbers::pi);
    CHECK(rows[2].estimate.p_unequal == 0.0);
    CHECK(rows[2].prediction == 0.0);
    CHECK(rows[2].z == 0.0);
    CHECK(rows[0].estimate.p_unequal == 1.0);
  }
  SECTION("LHV baseline at pi/4") {
    const auto rows = sweep_correlation(ProtocolId::LhvBaseline, 5, 1'000'000, 22);
    CHECK(rows[1].prediction == Catch::Approx(0.75));
    CHECK(std::abs(rows[1].z) <= 5.0);
  }
  SECTION("Toner-Bacon follows the singlet curve") {
    const auto rows = sweep_correlation(ProtocolId::TonerBacon, 13, 200'000, 23);
    for (const auto& row : rows) CHECK(std::abs(row.z) <= 5.0);
  }
  SECTION("too few angles") {
    CHECK_THROWS_AS(sweep_correlation(ProtocolId::PrSinglet, 1, 10, 1), UsageError);
  }
}
