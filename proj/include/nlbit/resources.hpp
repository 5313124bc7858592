#pragma once

// Non-local and classical resources with exact usage accounting.

#include <cstdint>
#include <optional>

#include "nlbit/core.hpp"

namespace nlbit {

/// Classical bits crossing the Alice/Bob cut and PR boxes consumed during one
/// run. Shared randomness agreed beforehand is free and not counted.
/// Counters only ever grow.
class Transcript {
 public:
  constexpr Transcript() = default;
  constexpr Transcript(std::uint64_t a_to_b, std::uint64_t b_to_a, std::uint64_t boxes)
      : bits_a_to_b_(a_to_b), bits_b_to_a_(b_to_a), nl_boxes_used_(boxes) {}

  constexpr void send_a_to_b(std::uint64_t bits = 1) { bits_a_to_b_ += bits; }
  constexpr void send_b_to_a(std::uint64_t bits = 1) { bits_b_to_a_ += bits; }
  constexpr void use_box() { ++nl_boxes_used_; }

  constexpr std::uint64_t bits_a_to_b() const { return bits_a_to_b_; }
  constexpr std::uint64_t bits_b_to_a() const { return bits_b_to_a_; }
  constexpr std::uint64_t bits_communicated() const { return bits_a_to_b_ + bits_b_to_a_; }
  constexpr std::uint64_t nl_boxes_used() const { return nl_boxes_used_; }

  friend constexpr bool operator==(const Transcript&, const Transcript&) = default;

 private:
  std::uint64_t bits_a_to_b_ = 0;
  std::uint64_t bits_b_to_a_ = 0;
  std::uint64_t nl_boxes_used_ = 0;
};

struct PrOutputs {
  Bit a;
  Bit b;
  friend constexpr bool operator==(const PrOutputs&, const PrOutputs&) = default;
};

/// The PR box relation a + b = x*y with internal unbiased bit r: a = r,
/// b = r + x*y.
constexpr PrOutputs pr_box_eval(Bit x, Bit y, Bit r) { return {r, r ^ (x & y)}; }

enum class Port { A, B };

/// One use of a PR box. Each port accepts exactly one input.
///
/// The simulator resolves outputs lazily: Alice's output is r and is
/// available as soon as her input is registered; Bob's output needs both
/// inputs. Whether this leaks anything across the cut is what the
/// no-signaling tests check.
class PRBox {
 public:
  explicit PRBox(Bit r) : r_(r) {}

  void input(Port port, Bit value) {
    auto& slot = port == Port::A ? x_ : y_;
    if (slot) throw UsageError(port == Port::A ? "PRBox: port A used twice" : "PRBox: port B used twice");
    slot = value;
  }

  Bit output(Port port) const {
    if (port == Port::A) {
      if (!x_) throw UsageError("PRBox: output A requested before input A");
      return r_;
    }
    if (!y_) throw UsageError("PRBox: output B requested before input B");
    if (!x_) throw UsageError("PRBox: output B unresolved until input A is registered");
    return pr_box_eval(*x_, *y_, r_).b;
  }

  bool consumed(Port port) const { return port == Port::A ? x_.has_value() : y_.has_value(); }

 private:
  Bit r_;
  std::optional<Bit> x_;
  std::optional<Bit> y_;
};

/// PR box from shared randomness plus one bit: Alice outputs the shared
/// unbiased bit lambda and sends x; Bob outputs x*y + lambda.
inline PrOutputs pr_from_one_bit(Bit x, Bit y, Bit lambda, Transcript& channel) {
  const Bit a = lambda;
  channel.send_a_to_b(1);
  const Bit received_x = x;
  const Bit b = (received_x & y) ^ lambda;
  return {a, b};
}

struct TripartiteOutputs {
  Bit a;
  Bit b;
  Bit c;  // Charles
  friend constexpr bool operator==(const TripartiteOutputs&, const TripartiteOutputs&) = default;
};

/// The hypothetical machine where Alice shares one PR box with both Bob and
/// Charles: a + b = x*y and a + c = x*z. r2 is carried to show that local
/// output randomization does not help; the canonical construction ignores it.
constexpr TripartiteOutputs tripartite_eval(Bit x, Bit y, Bit z, Bit r1, [[maybe_unused]] Bit r2) {
  return {r1, r1 ^ (x & y), r1 ^ (x & z)};
}

struct TripartiteBox {
  Bit r1;
  Bit r2;
  constexpr TripartiteOutputs eval(Bit x, Bit y, Bit z) const { return tripartite_eval(x, y, z, r1, r2); }
};

}  // namespace nlbit
