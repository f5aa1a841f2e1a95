#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>

// Register semantics: arbitrary-width integer and fixed-point registers.
// A register value is always stored as a width-tagged nonnegative bit
// pattern (RawBits); evaluation interprets the pattern according to the
// register's format. All arithmetic is exact — unbounded integers and
// rationals, never floating point.

namespace rac {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

enum class RegKind {
  UInt,        // ac_int<n, false>
  SInt,        // ac_int<n, true>
  UFixed,      // ac_fixed<n, m, false>
  SFixed,      // ac_fixed<n, m, true>
  Bool,        // width-1 register
  MachineUInt, // C uint (width 32 for input generation; unbounded in exprs)
  MachineInt,  // C int
};

struct RegFormat {
  RegKind kind = RegKind::UInt;
  int width = 1;
  int intBits = 0; // fixed kinds only: position of the implicit binary point

  bool isSigned() const {
    return kind == RegKind::SInt || kind == RegKind::SFixed ||
           kind == RegKind::MachineInt;
  }
  bool isFixed() const {
    return kind == RegKind::UFixed || kind == RegKind::SFixed;
  }
  bool isMachine() const {
    return kind == RegKind::MachineUInt || kind == RegKind::MachineInt;
  }

  friend bool operator==(const RegFormat& a, const RegFormat& b) {
    return a.kind == b.kind && a.width == b.width &&
           (!a.isFixed() || a.intBits == b.intBits);
  }
};

inline RegFormat uintFmt(int n) { return {RegKind::UInt, n, 0}; }
inline RegFormat sintFmt(int n) { return {RegKind::SInt, n, 0}; }
inline RegFormat ufixedFmt(int n, int m) { return {RegKind::UFixed, n, m}; }
inline RegFormat sfixedFmt(int n, int m) { return {RegKind::SFixed, n, m}; }
inline RegFormat boolFmt() { return {RegKind::Bool, 1, 0}; }
inline RegFormat machineUIntFmt() { return {RegKind::MachineUInt, 32, 0}; }
inline RegFormat machineIntFmt() { return {RegKind::MachineInt, 32, 0}; }

struct RawBits {
  int width = 1;
  Int magnitude; // invariant: 0 <= magnitude < 2^width
};

inline Int pow2(int e) { return Int(1) << e; }

inline Int floorDiv(const Int& a, const Int& b) {
  if (b == 0) return 0; // mirror of the target logic: division by zero is 0
  Int q = a / b;        // truncates toward zero
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// floor(x * 2^k) for any integer x and any sign of k.
inline Int floorShift(const Int& x, int k) {
  if (k >= 0) return x << k;
  return floorDiv(x, pow2(-k));
}

inline Int floorRat(const Rational& r) {
  return floorDiv(numerator(r), denominator(r));
}

inline Int modPow2(const Int& x, int w) {
  if (x >= 0) return x & (pow2(w) - 1);
  Int m = x % pow2(w); // in (-2^w, 0]
  return m == 0 ? m : m + pow2(w);
}

// v * 2^k for either sign of k.
inline Rational scalePow2(const Rational& v, int k) {
  if (k >= 0) return v * Rational(pow2(k));
  return v / Rational(pow2(-k));
}

// Two's-complement value of an n-bit pattern.
inline Int signedValue(const Int& mag, int n) {
  if (n > 0 && ((mag >> (n - 1)) & 1) != 0) return mag - pow2(n);
  return mag;
}

struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

// Evaluation of a register per its format.
inline Rational interpret(const RawBits& raw, const RegFormat& fmt) {
  if (raw.width != fmt.width)
    throw ContractViolation("interpret: width mismatch (" +
                            std::to_string(raw.width) + " vs " +
                            std::to_string(fmt.width) + ")");
  switch (fmt.kind) {
  case RegKind::UInt:
  case RegKind::MachineUInt:
  case RegKind::Bool:
    return Rational(raw.magnitude);
  case RegKind::SInt:
  case RegKind::MachineInt:
    return Rational(signedValue(raw.magnitude, fmt.width));
  case RegKind::UFixed:
    // interpreted value 2^(m-n) * x
    return scalePow2(Rational(raw.magnitude), fmt.intBits - fmt.width);
  case RegKind::SFixed:
    return scalePow2(Rational(signedValue(raw.magnitude, fmt.width)),
                     fmt.intBits - fmt.width);
  }
  throw ContractViolation("interpret: bad kind");
}

// Assignment: scale fixed-point values by 2^(n-m), floor, and keep the low
// n bits (wrap on overflow). The only supported rounding mode.
inline RawBits toRaw(const Rational& v, const RegFormat& fmt) {
  Int scaled;
  if (fmt.isFixed()) {
    scaled = floorRat(scalePow2(v, fmt.width - fmt.intBits));
  } else {
    scaled = floorRat(v); // integer kinds receive integers in valid programs
  }
  return {fmt.width, modPow2(scaled, fmt.width)};
}

// Bit-slice read: width w at base index. Out-of-range bits read as zero.
inline RawBits slc(const RawBits& raw, int base, int w) {
  Int shifted = raw.magnitude >> base;
  return {w, shifted & (pow2(w) - 1)};
}

// Bit-slice write: replaces bits [base+val.width-1 : base], preserving the
// rest. Requires base + val.width <= raw.width (checked statically upstream).
inline RawBits setSlc(const RawBits& raw, int base, const RawBits& val) {
  if (base + val.width > raw.width)
    throw ContractViolation("setSlc: slice exceeds register width");
  Int mask = (pow2(val.width) - 1) << base;
  Int cleared = raw.magnitude - (raw.magnitude & mask);
  Int out = cleared | (val.magnitude << base);
  return {raw.width, out & (pow2(raw.width) - 1)};
}

} // namespace rac
