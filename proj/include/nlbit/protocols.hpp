#pragma once

// Singlet simulation protocols. All three consume the same SharedRandomness
// so they can be compared run by run on coupled hidden variables.
//
//   PrSinglet   one PR box, no communication
//   TonerBacon  one bit from Alice to Bob
//   LhvBaseline shared randomness only (cannot reproduce the singlet)

#include <cstdint>
#include <optional>
#include <string_view>

#include "nlbit/core.hpp"
#include "nlbit/random.hpp"
#include "nlbit/resources.hpp"

namespace nlbit {

enum class ProtocolId { PrSinglet, TonerBacon, LhvBaseline };

inline constexpr std::string_view protocol_name(ProtocolId id) {
  switch (id) {
    case ProtocolId::PrSinglet: return "pr-singlet";
    case ProtocolId::TonerBacon: return "toner-bacon";
    case ProtocolId::LhvBaseline: return "lhv-baseline";
  }
  return "unknown";
}

inline std::optional<ProtocolId> parse_protocol(std::string_view name) {
  for (auto id : {ProtocolId::PrSinglet, ProtocolId::TonerBacon, ProtocolId::LhvBaseline})
    if (protocol_name(id) == name) return id;
  return std::nullopt;
}

/// Communication and box usage every run of the protocol must report.
inline constexpr Transcript expected_transcript(ProtocolId id) {
  switch (id) {
    case ProtocolId::PrSinglet: return {0, 0, 1};
    case ProtocolId::TonerBacon: return {1, 0, 0};
    case ProtocolId::LhvBaseline: return {0, 0, 0};
  }
  return {};
}

struct MeasurementPair {
  UnitVector3 nu_a;
  UnitVector3 nu_b;
};

struct SeedLineage {
  std::uint64_t seed = 0;
  std::uint64_t run_index = 0;
};

struct RunRecord {
  Bit a;
  Bit b;
  Transcript transcript;
  ProtocolId protocol;
  SeedLineage lineage;

  bool unequal() const { return a != b; }
};

// Each party's functions see only its own setting, the shared vectors and its
// own box output.

/// x = sg(nu_A . l1) + sg(nu_A . l2)
inline Bit alice_input(const UnitVector3& nu_a, const SharedRandomness& sr) {
  return sg(dot(nu_a, sr.lambda1)) ^ sg(dot(nu_a, sr.lambda2));
}

/// A = a + sg(nu_A . l1)
inline Bit alice_output(Bit a, const UnitVector3& nu_a, const SharedRandomness& sr) {
  return a ^ sg(dot(nu_a, sr.lambda1));
}

/// y = sg(nu_B . l+) + sg(nu_B . l-)
inline Bit bob_input(const UnitVector3& nu_b, const SharedRandomness& sr) {
  const auto d = sr.derived();
  return sg(dot(nu_b.vec(), d.lambda_plus)) ^ sg(dot(nu_b.vec(), d.lambda_minus));
}

/// B = b + sg(nu_B . l+) + 1
inline Bit bob_output(Bit b, const UnitVector3& nu_b, const SharedRandomness& sr) {
  return b ^ sg(dot(nu_b.vec(), sr.derived().lambda_plus)) ^ kOne;
}

inline RunRecord run_pr_singlet(const MeasurementPair& pair, const SharedRandomness& sr, Bit r,
                                SeedLineage lineage = {}) {
  Transcript transcript;
  PRBox box(r);
  transcript.use_box();

  box.input(Port::A, alice_input(pair.nu_a, sr));
  box.input(Port::B, bob_input(pair.nu_b, sr));

  const Bit a_out = alice_output(box.output(Port::A), pair.nu_a, sr);
  const Bit b_out = bob_output(box.output(Port::B), pair.nu_b, sr);
  return {a_out, b_out, transcript, ProtocolId::PrSinglet, lineage};
}

inline RunRecord run_toner_bacon(const MeasurementPair& pair, const SharedRandomness& sr,
                                 SeedLineage lineage = {}) {
  Transcript transcript;

  // Alice
  const Bit s1 = sg(dot(pair.nu_a, sr.lambda1));
  const Bit a_out = s1;
  const Bit comm_bit = s1 ^ sg(dot(pair.nu_a, sr.lambda2));
  transcript.send_a_to_b(1);

  // Bob: (1 - c) s+ + c s- + 1, reduced mod 2
  const auto d = sr.derived();
  const unsigned s_plus = sg(dot(pair.nu_b.vec(), d.lambda_plus)).value();
  const unsigned s_minus = sg(dot(pair.nu_b.vec(), d.lambda_minus)).value();
  const unsigned c = comm_bit.value();
  const Bit b_out = Bit(((1u - c) * s_plus + c * s_minus + 1u) % 2u);
  return {a_out, b_out, transcript, ProtocolId::TonerBacon, lineage};
}

inline RunRecord run_lhv_baseline(const MeasurementPair& pair, const SharedRandomness& sr,
                                  SeedLineage lineage = {}) {
  const Bit a_out = sg(dot(pair.nu_a, sr.lambda1));
  const Bit b_out = sg(dot(pair.nu_b, sr.lambda1)) ^ kOne;
  return {a_out, b_out, Transcript{}, ProtocolId::LhvBaseline, lineage};
}

/// Dispatches on protocol; r is only consumed by PrSinglet.
inline RunRecord run_protocol(ProtocolId id, const MeasurementPair& pair, const SharedRandomness& sr,
                              Bit r, SeedLineage lineage = {}) {
  switch (id) {
    case ProtocolId::PrSinglet: return run_pr_singlet(pair, sr, r, lineage);
    case ProtocolId::TonerBacon: return run_toner_bacon(pair, sr, lineage);
    case ProtocolId::LhvBaseline: return run_lhv_baseline(pair, sr, lineage);
  }
  throw UsageError("run_protocol: unknown protocol");
}

}  // namespace nlbit
