#pragma once

// Bit arithmetic and sphere geometry shared by every protocol.
//
// Bits are values in {0,1}; every sum of bits is taken modulo 2, so the
// additive operator is XOR and the product is AND. Measurement settings and
// hidden variables live on the unit sphere S^2 (the Bloch / Poincare sphere).

#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>

namespace nlbit {

/// Raised when a caller breaks a documented usage contract (one-shot ports,
/// empty sample counts, ...). Signals a bug in the calling protocol.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class Bit {
 public:
  constexpr Bit() = default;
  constexpr explicit Bit(unsigned v) : value_(static_cast<std::uint8_t>(v)) {
    if (v > 1u) throw std::invalid_argument("Bit: value must be 0 or 1");
  }

  constexpr unsigned value() const { return value_; }
  constexpr explicit operator bool() const { return value_ != 0; }

  // Addition modulo 2.
  friend constexpr Bit operator^(Bit l, Bit r) { return Bit(l.value_ ^ r.value_); }
  friend constexpr Bit operator+(Bit l, Bit r) { return l ^ r; }
  // Product x*y.
  friend constexpr Bit operator&(Bit l, Bit r) { return Bit(l.value_ & r.value_); }
  friend constexpr Bit operator*(Bit l, Bit r) { return l & r; }
  constexpr Bit flipped() const { return Bit(value_ ^ 1u); }

  friend constexpr bool operator==(Bit, Bit) = default;
  friend std::ostream& operator<<(std::ostream& os, Bit b) { return os << b.value(); }

 private:
  std::uint8_t value_ = 0;
};

inline constexpr Bit kZero{0};
inline constexpr Bit kOne{1};

/// The +-1 value used by Bell inequalities.
class SignedBit {
 public:
  constexpr explicit SignedBit(int v) : value_(v) {
    if (v != 1 && v != -1) throw std::invalid_argument("SignedBit: value must be +1 or -1");
  }
  constexpr int value() const { return value_; }

  friend constexpr SignedBit operator*(SignedBit l, SignedBit r) {
    return SignedBit(l.value_ * r.value_);
  }
  friend constexpr bool operator==(SignedBit, SignedBit) = default;

 private:
  int value_;
};

// a' = 1 - 2a
constexpr SignedBit to_signed(Bit b) { return SignedBit(1 - 2 * static_cast<int>(b.value())); }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr Vec3 operator+(const Vec3& a, const Vec3& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend constexpr Vec3 operator-(const Vec3& a, const Vec3& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr Vec3 operator*(double k, const Vec3& a) { return {k * a.x, k * a.y, k * a.z}; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;

  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double dot(const Vec3& u, const Vec3& v) {
  if (!u.finite() || !v.finite()) throw std::domain_error("dot: non-finite component");
  return u.x * v.x + u.y * v.y + u.z * v.z;
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline constexpr double kUnitTolerance = 1e-9;

/// A point on S^2: a measurement setting or a hidden-variable direction.
/// Construction checks |v| = 1 within kUnitTolerance.
class UnitVector3 {
 public:
  UnitVector3(double x, double y, double z) : UnitVector3(Vec3{x, y, z}) {}
  explicit UnitVector3(const Vec3& v) : v_(v) {
    if (!v.finite() || std::abs(norm(v) - 1.0) > kUnitTolerance)
      throw std::invalid_argument("UnitVector3: vector is not normalized");
  }

  /// Rescales a non-zero vector onto the sphere.
  static UnitVector3 normalized(const Vec3& v) {
    const double n = norm(v);
    if (!(n > 0.0)) throw std::invalid_argument("UnitVector3: cannot normalize zero vector");
    return UnitVector3((1.0 / n) * v);
  }

  /// Unit vector in the x-z plane at polar angle theta from +z.
  static UnitVector3 from_polar(double theta) {
    return normalized(Vec3{std::sin(theta), 0.0, std::cos(theta)});
  }

  const Vec3& vec() const { return v_; }
  operator const Vec3&() const { return v_; }  // NOLINT(google-explicit-constructor)
  double x() const { return v_.x; }
  double y() const { return v_.y; }
  double z() const { return v_.z; }

  UnitVector3 operator-() const { return UnitVector3(-v_); }
  friend bool operator==(const UnitVector3&, const UnitVector3&) = default;

 private:
  Vec3 v_;
};

inline double dot(const UnitVector3& u, const UnitVector3& v) { return dot(u.vec(), v.vec()); }

/// sg(t) = 1 if t >= 0, else 0. The tie t == 0 (either sign of zero) maps to 1.
inline Bit sg(double t) {
  if (!std::isfinite(t)) throw std::domain_error("sg: non-finite argument");
  return t >= 0.0 ? kOne : kZero;
}

/// lambda_plus = l1 + l2, lambda_minus = l1 - l2, both left unnormalized
/// (sg is scale invariant). For unit l1, l2 the two are orthogonal.
/// If l1 = +-l2 one of them is the zero vector and sg(0) = 1 applies.
struct DerivedVectorPair {
  Vec3 lambda_plus;
  Vec3 lambda_minus;

  static DerivedVectorPair from(const UnitVector3& l1, const UnitVector3& l2) {
    return {l1.vec() + l2.vec(), l1.vec() - l2.vec()};
  }
};

}  // namespace nlbit
