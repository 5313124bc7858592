#pragma once

// Quantum predictions, Monte Carlo estimators, CHSH evaluation, no-signaling
// checks and the tripartite signaling attack.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "nlbit/core.hpp"
#include "nlbit/parallel.hpp"
#include "nlbit/protocols.hpp"
#include "nlbit/random.hpp"
#include "nlbit/resources.hpp"

namespace nlbit {

/// Statistical acceptance threshold, in standard errors, for every
/// Monte Carlo comparison.
inline constexpr double kSigmaThreshold = 5.0;

// ---------------------------------------------------------------------------
// Predictions

/// Singlet joint table P(A,B) = (1 - (-1)^(A+B) nu_A.nu_B) / 4.
inline double quantum_pair_probability(const MeasurementPair& pair, Bit a, Bit b) {
  const double sign = (a ^ b) == kZero ? 1.0 : -1.0;
  return (1.0 - sign * dot(pair.nu_a, pair.nu_b)) / 4.0;
}

inline double angle_between(const UnitVector3& u, const UnitVector3& v) {
  return std::acos(std::clamp(dot(u, v), -1.0, 1.0));
}

/// Closed-form P(A != B) for each protocol. The singlet simulators follow
/// (1 + nu_A.nu_B) / 2. The baseline gives A = B exactly when lambda1's
/// hyperplane separates the two settings, which happens with probability
/// theta / pi, so P(A != B) = 1 - theta / pi.
inline double predicted_p_unequal(ProtocolId id, const MeasurementPair& pair) {
  if (id == ProtocolId::LhvBaseline) return 1.0 - angle_between(pair.nu_a, pair.nu_b) / std::numbers::pi;
  return (1.0 + dot(pair.nu_a, pair.nu_b)) / 2.0;
}

inline double binomial_std_error(double p, std::uint64_t n) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// Sampling

/// Event counts over a batch of runs.
struct Tally {
  std::uint64_t runs = 0;
  std::uint64_t unequal = 0;
  std::uint64_t a_zero = 0;
  std::uint64_t b_zero = 0;
  std::uint64_t bits_a_to_b = 0;
  std::uint64_t bits_b_to_a = 0;
  std::uint64_t nl_boxes = 0;
  std::uint64_t off_contract = 0;  // runs whose transcript differs from expected_transcript

  void add(const RunRecord& rec) {
    ++runs;
    unequal += rec.unequal() ? 1 : 0;
    a_zero += rec.a == kZero ? 1 : 0;
    b_zero += rec.b == kZero ? 1 : 0;
    bits_a_to_b += rec.transcript.bits_a_to_b();
    bits_b_to_a += rec.transcript.bits_b_to_a();
    nl_boxes += rec.transcript.nl_boxes_used();
    off_contract += rec.transcript == expected_transcript(rec.protocol) ? 0 : 1;
  }

  Tally& operator+=(const Tally& o) {
    runs += o.runs;
    unequal += o.unequal;
    a_zero += o.a_zero;
    b_zero += o.b_zero;
    bits_a_to_b += o.bits_a_to_b;
    bits_b_to_a += o.bits_b_to_a;
    nl_boxes += o.nl_boxes;
    off_contract += o.off_contract;
    return *this;
  }
};

/// Runs `protocol` n times with fresh shared randomness and PR bit per run.
/// Run i of chunk k draws from PhiloxStream(seed, k); deterministic in
/// (protocol, pair, n, seed) and independent of `workers`.
inline Tally simulate(ProtocolId protocol, const MeasurementPair& pair, std::uint64_t n, std::uint64_t seed,
                      unsigned workers = 1) {
  if (n == 0) throw UsageError("simulate: n must be at least 1");
  const auto parts = map_chunks<Tally>(n, workers, [&](std::uint64_t chunk, std::uint64_t first, std::uint64_t count) {
    PhiloxStream rng(seed, chunk);
    Tally t;
    for (std::uint64_t i = 0; i < count; ++i) {
      const auto sr = SharedRandomness::draw(rng, seed);
      const Bit r = uniform_bit(rng);
      t.add(run_protocol(protocol, pair, sr, r, {seed, first + i}));
    }
    return t;
  });
  Tally total;
  for (const auto& p : parts) total += p;
  return total;
}

struct CorrelationEstimate {
  double p_unequal = 0.0;    // estimate of P(A != B)
  double correlation = 0.0;  // E[A'B'] = 1 - 2 p_unequal
  std::uint64_t n_samples = 0;
  double std_error = 0.0;

  static CorrelationEstimate from_counts(std::uint64_t unequal, std::uint64_t n) {
    if (n == 0) throw UsageError("CorrelationEstimate: no samples");
    const double p = static_cast<double>(unequal) / static_cast<double>(n);
    return {p, 1.0 - 2.0 * p, n, binomial_std_error(p, n)};
  }
};

inline CorrelationEstimate estimate_correlation(ProtocolId protocol, const MeasurementPair& pair, std::uint64_t n,
                                                std::uint64_t seed, unsigned workers = 1) {
  const Tally t = simulate(protocol, pair, n, seed, workers);
  return CorrelationEstimate::from_counts(t.unequal, t.runs);
}

/// (estimate - prediction) / std_error. When the estimate's own standard
/// error vanishes (p_hat in {0,1}) the prediction's is used; if both vanish
/// the result is 0 on exact agreement and +-inf otherwise.
inline double z_score(const CorrelationEstimate& est, double prediction) {
  const double diff = est.p_unequal - prediction;
  double se = est.std_error;
  if (se == 0.0) se = binomial_std_error(prediction, est.n_samples);
  if (se == 0.0) return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  return diff / se;
}

// ---------------------------------------------------------------------------
// CHSH

enum class ChshMethod { Exhaustive, MonteCarlo };

using ChshTerms = std::array<std::array<double, 2>, 2>;  // [x][y] -> E(a'b'|x,y)

/// E00 + E01 + E10 - E11
constexpr double chsh_value(const ChshTerms& e) { return e[0][0] + e[0][1] + e[1][0] - e[1][1]; }

struct CHSHResult {
  double s = 0.0;
  ChshTerms terms{};
  ChshMethod method = ChshMethod::Exhaustive;
  double std_error = 0.0;  // 0 for exhaustive evaluation
};

struct CHSHSettings {
  std::array<UnitVector3, 2> alice;
  std::array<UnitVector3, 2> bob;
};

inline CHSHResult chsh_pr_box_exhaustive() {
  CHSHResult res;
  for (unsigned x = 0; x < 2; ++x)
    for (unsigned y = 0; y < 2; ++y) {
      int sum = 0;
      for (unsigned r = 0; r < 2; ++r) {
        const auto out = pr_box_eval(Bit(x), Bit(y), Bit(r));
        sum += (to_signed(out.a) * to_signed(out.b)).value();
      }
      res.terms[x][y] = sum / 2.0;
    }
  res.s = chsh_value(res.terms);
  res.method = ChshMethod::Exhaustive;
  return res;
}

/// CHSH values of all 16 deterministic local strategies a(x), b(y).
inline std::array<double, 16> chsh_local_deterministic_all() {
  std::array<double, 16> values{};
  // A strategy on one bit is its truth table (f(0), f(1)).
  for (unsigned fa = 0; fa < 4; ++fa)
    for (unsigned fb = 0; fb < 4; ++fb) {
      ChshTerms e{};
      for (unsigned x = 0; x < 2; ++x)
        for (unsigned y = 0; y < 2; ++y) {
          const Bit a((fa >> x) & 1u);
          const Bit b((fb >> y) & 1u);
          e[x][y] = (to_signed(a) * to_signed(b)).value();
        }
      values[fa * 4 + fb] = chsh_value(e);
    }
  return values;
}

inline double chsh_local_deterministic_max() {
  const auto all = chsh_local_deterministic_all();
  return *std::max_element(all.begin(), all.end());
}

/// Singlet-optimal coplanar settings, found by grid search (step pi/8) over
/// the analytic correlation E = -nu_A.nu_B. Alice's first setting is fixed at
/// angle 0 by rotation symmetry.
struct OptimalChsh {
  CHSHSettings settings;
  std::array<double, 4> angles;  // a0, a1, b0, b1 (polar angle in the x-z plane)
  double s_analytic;
};

inline OptimalChsh optimal_singlet_chsh_settings() {
  constexpr int kSteps = 16;
  const double step = 2.0 * std::numbers::pi / kSteps;
  auto corr = [](double alpha, double beta) { return -std::cos(alpha - beta); };

  double best = -std::numeric_limits<double>::infinity();
  std::array<double, 4> best_angles{};
  for (int i1 = 0; i1 < kSteps; ++i1)
    for (int j0 = 0; j0 < kSteps; ++j0)
      for (int j1 = 0; j1 < kSteps; ++j1) {
        const double a0 = 0.0, a1 = i1 * step, b0 = j0 * step, b1 = j1 * step;
        const double s = chsh_value({{{corr(a0, b0), corr(a0, b1)}, {corr(a1, b0), corr(a1, b1)}}});
        if (s > best + 1e-12) {
          best = s;
          best_angles = {a0, a1, b0, b1};
        }
      }
  return {{{UnitVector3::from_polar(best_angles[0]), UnitVector3::from_polar(best_angles[1])},
           {UnitVector3::from_polar(best_angles[2]), UnitVector3::from_polar(best_angles[3])}},
          best_angles,
          best};
}

/// Monte Carlo CHSH: each term is an independent estimate of E(A'B').
inline CHSHResult chsh_protocol(ProtocolId protocol, const CHSHSettings& settings, std::uint64_t n_per_term,
                                std::uint64_t seed, unsigned workers = 1) {
  if (n_per_term == 0) throw UsageError("chsh_protocol: n_per_term must be at least 1");
  CHSHResult res;
  double variance = 0.0;
  for (unsigned x = 0; x < 2; ++x)
    for (unsigned y = 0; y < 2; ++y) {
      const MeasurementPair pair{settings.alice[x], settings.bob[y]};
      const auto est = estimate_correlation(protocol, pair, n_per_term, derive_seed(seed, 2 * x + y), workers);
      res.terms[x][y] = est.correlation;
      variance += (1.0 - est.correlation * est.correlation) / static_cast<double>(n_per_term);
    }
  res.s = chsh_value(res.terms);
  res.method = ChshMethod::MonteCarlo;
  res.std_error = std::sqrt(variance);
  return res;
}

// ---------------------------------------------------------------------------
// No-signaling

/// Which party's setting is held fixed while the remote setting varies.
enum class FixedParty { Alice, Bob };

struct MarginalEstimate {
  double p_zero;  // P(output of the fixed party = 0)
  double std_error;
};

struct NoSignalingReport {
  std::vector<MarginalEstimate> marginals;
  double max_deviation = 0.0;
  double max_z = 0.0;
  bool monte_carlo_pass = false;
  // Exact averaging over the PR bit; only defined for the PR protocol.
  std::optional<bool> exact_pass;

  bool pass() const { return monte_carlo_pass && exact_pass.value_or(true); }
};

/// For fixed hidden variables, flipping the PR bit must flip the output of
/// the fixed party, giving a marginal of exactly 1/2. Checked on
/// `exact_draws` random (lambda1, lambda2) per variant.
inline bool pr_singlet_marginals_exact(const std::vector<MeasurementPair>& variants, std::uint64_t exact_draws,
                                       std::uint64_t seed) {
  PhiloxStream rng(seed, 0);
  for (std::uint64_t i = 0; i < exact_draws; ++i) {
    const auto sr = SharedRandomness::draw(rng, seed);
    for (const auto& pair : variants) {
      const auto r0 = run_pr_singlet(pair, sr, kZero);
      const auto r1 = run_pr_singlet(pair, sr, kOne);
      const unsigned a_zeros = (r0.a == kZero) + (r1.a == kZero);
      const unsigned b_zeros = (r0.b == kZero) + (r1.b == kZero);
      if (a_zeros != 1 || b_zeros != 1) return false;
    }
  }
  return true;
}

inline NoSignalingReport no_signaling_test(ProtocolId protocol, const std::vector<MeasurementPair>& variants,
                                           std::uint64_t n, std::uint64_t seed, FixedParty fixed = FixedParty::Alice,
                                           unsigned workers = 1, std::uint64_t exact_draws = 1000) {
  if (variants.size() < 2) throw UsageError("no_signaling_test: need at least two setting variants");
  for (const auto& v : variants) {
    const bool same = fixed == FixedParty::Alice ? v.nu_a == variants.front().nu_a : v.nu_b == variants.front().nu_b;
    if (!same) throw UsageError("no_signaling_test: variants must share the fixed party's setting");
  }

  NoSignalingReport report;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    const Tally t = simulate(protocol, variants[i], n, derive_seed(seed, i), workers);
    const double p = static_cast<double>(fixed == FixedParty::Alice ? t.a_zero : t.b_zero) / static_cast<double>(n);
    report.marginals.push_back({p, binomial_std_error(p, n)});
  }
  for (std::size_t i = 0; i < report.marginals.size(); ++i)
    for (std::size_t j = i + 1; j < report.marginals.size(); ++j) {
      const auto& mi = report.marginals[i];
      const auto& mj = report.marginals[j];
      const double dev = std::abs(mi.p_zero - mj.p_zero);
      const double se = std::hypot(mi.std_error, mj.std_error);
      report.max_deviation = std::max(report.max_deviation, dev);
      report.max_z = std::max(report.max_z, se > 0.0 ? dev / se : (dev == 0.0 ? 0.0 : HUGE_VAL));
    }
  report.monte_carlo_pass = report.max_z <= kSigmaThreshold;
  if (protocol == ProtocolId::PrSinglet)
    report.exact_pass = pr_singlet_marginals_exact(variants, exact_draws, derive_seed(seed, variants.size()));
  return report;
}

/// The one-bit construction reproduces the PR box's joint table for every
/// input pair when lambda is averaged, and each output is exactly unbiased.
inline bool pr_from_one_bit_matches_pr_box() {
  for (unsigned x = 0; x < 2; ++x)
    for (unsigned y = 0; y < 2; ++y) {
      std::array<int, 4> box{}, one_bit{};
      std::array<int, 2> b_zero{};
      for (unsigned r = 0; r < 2; ++r) {
        const auto o = pr_box_eval(Bit(x), Bit(y), Bit(r));
        ++box[2 * o.a.value() + o.b.value()];
        Transcript channel;
        const auto c = pr_from_one_bit(Bit(x), Bit(y), Bit(r), channel);
        ++one_bit[2 * c.a.value() + c.b.value()];
        b_zero[0] += c.a == kZero;
        b_zero[1] += c.b == kZero;
        if (channel.bits_a_to_b() != 1 || channel.bits_b_to_a() != 0) return false;
      }
      if (box != one_bit || b_zero[0] != 1 || b_zero[1] != 1) return false;
    }
  return true;
}

// ---------------------------------------------------------------------------
// Monogamy

struct RateEstimate {
  double rate = 0.0;
  std::uint64_t trials = 0;
  double std_error = 0.0;
};

/// Bob enters y = 0, Charles z = 1; they decode Alice's x as b + c.
inline double monogamy_attack(Bit x, std::uint64_t trials, std::uint64_t seed) {
  if (trials == 0) throw UsageError("monogamy_attack: trials must be at least 1");
  PhiloxStream rng(seed, 0);
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const TripartiteBox box{uniform_bit(rng), uniform_bit(rng)};
    const auto out = box.eval(x, kZero, kOne);
    hits += (out.b ^ out.c) == x;
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

/// Same attack averaged exactly over all internal bits (r1, r2).
inline double monogamy_attack_exhaustive(Bit x) {
  int hits = 0;
  for (unsigned r1 = 0; r1 < 2; ++r1)
    for (unsigned r2 = 0; r2 < 2; ++r2) {
      const auto out = tripartite_eval(x, kZero, kOne, Bit(r1), Bit(r2));
      hits += (out.b ^ out.c) == x;
    }
  return hits / 4.0;
}

/// Control: with y = z the decoded bit b + c = x(y + z) = 0 carries no
/// information, so guessing x from it succeeds half the time.
inline RateEstimate monogamy_control(std::uint64_t trials, std::uint64_t seed) {
  if (trials == 0) throw UsageError("monogamy_control: trials must be at least 1");
  PhiloxStream rng(seed, 0);
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const Bit x = uniform_bit(rng);
    const Bit yz = uniform_bit(rng);
    const TripartiteBox box{uniform_bit(rng), uniform_bit(rng)};
    const auto out = box.eval(x, yz, yz);
    hits += (out.b ^ out.c) == x;
  }
  const double rate = static_cast<double>(hits) / static_cast<double>(trials);
  return {rate, trials, binomial_std_error(0.5, trials)};
}

// ---------------------------------------------------------------------------
// Angle sweep

struct SweepRow {
  double theta = 0.0;
  CorrelationEstimate estimate;
  double prediction = 0.0;
  double z = 0.0;
  Tally tally;
};

/// nu_A = +z, nu_B at theta_k = k pi / (n_angles - 1) in the x-z plane.
inline std::vector<SweepRow> sweep_correlation(ProtocolId protocol, std::uint64_t n_angles, std::uint64_t n_per_angle,
                                               std::uint64_t seed, unsigned workers = 1) {
  if (n_angles < 2) throw UsageError("sweep_correlation: n_angles must be at least 2");
  std::vector<SweepRow> rows;
  rows.reserve(n_angles);
  const UnitVector3 nu_a(0.0, 0.0, 1.0);
  for (std::uint64_t k = 0; k < n_angles; ++k) {
    const double theta = std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_angles - 1);
    const MeasurementPair pair{nu_a, UnitVector3::from_polar(theta)};
    SweepRow row;
    row.theta = theta;
    row.tally = simulate(protocol, pair, n_per_angle, derive_seed(seed, k), workers);
    row.estimate = CorrelationEstimate::from_counts(row.tally.unequal, row.tally.runs);
    row.prediction = predicted_p_unequal(protocol, pair);
    row.z = z_score(row.estimate, row.prediction);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace nlbit
