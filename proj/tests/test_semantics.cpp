#include "rac/bits.hpp"
#include "rac/primitives.hpp"

#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <random>

using namespace rac;
using ractest::drawRaw;

namespace {

// Bit-level oracle for slices, independent of both slc and BITS: walk the
// two's-complement encoding bit by bit.
Int sliceOracle(const Int& x, int hi, int lo) {
  Int out = 0;
  for (int i = hi; i >= lo; --i) {
    out <<= 1;
    Int bit;
    if (x >= 0)
      bit = (x >> i) & 1;
    else
      bit = 1 - Int(((-x - 1) >> i) & 1);
    out |= bit;
  }
  return out;
}

Value P(const std::string& name, const ValueVec& args) {
  return primEval(name, args);
}

} // namespace

TEST_CASE("interpret follows the register format") {
  CHECK(interpret({8, 255}, sintFmt(8)) == Rational(-1));
  CHECK(interpret({4, 6}, ufixedFmt(4, 2)) == Rational(Int(3), Int(2)));
  CHECK(interpret({9, 256}, sintFmt(9)) == Rational(-256));
  CHECK(interpret({8, 255}, uintFmt(8)) == Rational(255));
  CHECK(interpret({1, 1}, boolFmt()) == Rational(1));
  CHECK(interpret({4, 6}, sfixedFmt(4, 2)) == Rational(Int(3), Int(2)));
  CHECK(interpret({4, 14}, sfixedFmt(4, 2)) == Rational(Int(-1), Int(2)));
  CHECK_THROWS_AS(interpret({8, 0}, uintFmt(9)), ContractViolation);
}

TEST_CASE("toRaw wraps and truncates toward negative infinity") {
  CHECK(toRaw(Rational(-128), uintFmt(8)).magnitude == 128);
  CHECK(toRaw(Rational(Int(3), Int(2)), ufixedFmt(4, 2)).magnitude == 6);
  CHECK(toRaw(Rational(256), uintFmt(8)).magnitude == 0);
  // floor on the scaled value: -3/4 at one fractional bit scales to -3/2,
  // floors to -2, wraps to width 4.
  CHECK(toRaw(Rational(Int(-3), Int(4)), sfixedFmt(4, 3)).magnitude == 14);
}

TEST_CASE("round trip interpret/toRaw is exact for every format") {
  for (int w = 1; w <= 10; ++w) {
    std::vector<RegFormat> fmts = {uintFmt(w), sintFmt(w)};
    for (int m = -2; m <= w + 2; ++m) {
      fmts.push_back(ufixedFmt(w, m));
      fmts.push_back(sfixedFmt(w, m));
    }
    if (w == 1) fmts.push_back(boolFmt());
    for (const auto& fmt : fmts) {
      for (Int raw = 0; raw < pow2(w); ++raw) {
        RawBits r{w, raw};
        Rational v = interpret(r, fmt);
        RawBits back = toRaw(v, fmt);
        REQUIRE(back.width == w);
        REQUIRE(back.magnitude == raw);
        // and re-interpreting the re-encoding is the identity on values
        REQUIRE(interpret(back, fmt) == v);
      }
    }
  }
}

TEST_CASE("SI matches signed interpretation exhaustively") {
  for (int n = 1; n <= 12; ++n)
    for (Int x = 0; x < pow2(n); ++x)
      REQUIRE(siPrim(x, n) == numerator(interpret({n, x}, sintFmt(n))));
}

TEST_CASE("slc reads out of range bits as zero") {
  CHECK(slc({32, 0x12345678}, 8, 8).magnitude == 0x56);
  CHECK(slc({32, 0xFF}, 0, 8).magnitude == 0xFF);
  CHECK(slc({8, 0xA5}, 4, 8).magnitude == 0x0A);
  CHECK(slc({8, 0xA5}, 4, 8).width == 8);
}

TEST_CASE("setSlc replaces the addressed bits only") {
  CHECK(setSlc({32, 0}, 8, {8, 0x7F}).magnitude == 0x7F00);
  CHECK(setSlc({32, 0xFFFFFFFF}, 0, {8, 0}).magnitude == 0xFFFFFF00);
  CHECK(setSlc({53, pow2(52) - 1}, 52, {1, 1}).magnitude == pow2(53) - 1);
  CHECK_THROWS_AS(setSlc({8, 0}, 4, {8, 1}), ContractViolation);
}

TEST_CASE("BITS agrees with slc and the bit-level oracle") {
  // exhaustive over width <= 8 patterns, all slice positions
  for (int w = 1; w <= 8; ++w) {
    for (Int x = 0; x < pow2(w); ++x) {
      for (int lo = 0; lo < w + 2; ++lo) {
        for (int hi = lo; hi < w + 2; ++hi) {
          Int viaBits = bitsPrim(Rational(x), hi, lo);
          Int viaSlc = slc({w, x}, lo, hi - lo + 1).magnitude;
          Int expected = sliceOracle(x, hi, lo);
          REQUIRE(viaBits == expected);
          REQUIRE(viaSlc == expected);
        }
      }
    }
  }
  // negative first arguments follow the two's-complement encoding
  std::mt19937_64 rng(7);
  for (int t = 0; t < 2000; ++t) {
    Int x = drawRaw(rng, 16) - pow2(15);
    int lo = static_cast<int>(rng() % 20);
    int hi = lo + static_cast<int>(rng() % 20);
    REQUIRE(bitsPrim(Rational(x), hi, lo) == sliceOracle(x, hi, lo));
  }
}

TEST_CASE("primitive examples") {
  CHECK(P("BITS", {Value(-128), Value(7), Value(0)}) == Value(128));
  Value nota = P("LOGNOT", {Value(5)});
  CHECK(P("BITS", {nota, Value(63), Value(0)}) == Value(pow2(64) - 6));
  CHECK(P("SI", {Value(256), Value(9)}) == Value(-256));
  CHECK(P("LOG<", {Value(-256), Value(-128)}) == Value(1));
  CHECK(P("LOG>=", {Value(0), Value(128)}) == Value(0));
  CHECK(P("SETBITS", {Value(0), Value(32), Value(15), Value(8), Value(0xAB)}) ==
        Value(0xAB00));
  CHECK(P("SETBITN", {Value(0), Value(53), Value(52), Value(1)}) ==
        Value(pow2(52)));
  CHECK(P("BITN", {Value(6), Value(1)}) == Value(1));
  CHECK(P("ASH", {Value(-7), Value(-1)}) == Value(-4)); // floor, not truncate
  CHECK(P("FLOOR", {Value(7), Value(2)}) == Value(3));
  CHECK(P("FLOOR", {Value(-7), Value(2)}) == Value(-4));
  CHECK(P("FLOOR", {Value(7), Value(0)}) == Value(0));
  CHECK(P("NFIX", {Value(-3)}) == Value(0));
  CHECK(P("NFIX", {Value(3)}) == Value(3));
  CHECK(P("INTEGERP", {Value(3)}).isTrue());
  CHECK(P("INTEGERP", {Value::nil()}).isNil());
  CHECK(P("ABS", {Value(-9)}) == Value(9));
  CHECK(P("EXPT", {Value(2), Value(-2)}) == Value(Rational(Int(1), Int(4))));
  CHECK(P("+", {Value(2), Value(3)}) == Value(5));
  CHECK(P("-", {Value(2)}) == Value(-2));
}

TEST_CASE("unknown primitives and bad arities are evaluator errors") {
  CHECK_THROWS_AS(P("FROB", {Value(1)}), RunError);
  CHECK_THROWS_AS(P("BITS", {Value(1)}), RunError);
  CHECK_THROWS_AS(P("SI", {Value::nil(), Value(4)}), RunError);
}

TEST_CASE("logical operations match native two's complement on 64 bits") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20000; ++t) {
    auto a64 = static_cast<std::int64_t>(rng());
    auto b64 = static_cast<std::int64_t>(rng());
    Int a(a64), b(b64);
    CHECK(logandPrim(a, b) == Int(a64 & b64));
    CHECK(logiorPrim(a, b) == Int(a64 | b64));
    CHECK(logxorPrim(a, b) == Int(a64 ^ b64));
    CHECK(lognotPrim(a) == Int(~a64));
  }
}

TEST_CASE("carry-save identity on 64-bit operands") {
  // sum + carry of the complemented operands equals ~a + ~b + 1 mod 2^64
  std::mt19937_64 rng(13);
  const Int m64 = pow2(64);
  for (int t = 0; t < 100000; ++t) {
    Int a = drawRaw(rng, 64), b = drawRaw(rng, 64);
    Int na = bitsPrim(Rational(lognotPrim(a)), 63, 0);
    Int nb = bitsPrim(Rational(lognotPrim(b)), 63, 0);
    Int sum = bitsPrim(Rational(logxorPrim(lognotPrim(a), lognotPrim(b))), 63, 0);
    Int carry = bitsPrim(
        Rational(logiorPrim(ashPrim(logandPrim(na, nb), 1), Int(1))), 63, 0);
    REQUIRE((sum + carry) % m64 == (na + nb + 1) % m64);
  }
}

TEST_CASE("AG and AS model arrays as alists") {
  Value arr = Value::nil();
  CHECK(P("AG", {Value(3), arr}) == Value(0)); // unbound reads default to 0
  arr = P("AS", {Value(3), Value(7), arr});
  arr = P("AS", {Value(1), Value(5), arr});
  CHECK(P("AG", {Value(3), arr}) == Value(7));
  CHECK(P("AG", {Value(1), arr}) == Value(5));
  CHECK(P("AG", {Value(0), arr}) == Value(0));
  // rebinding keeps a single entry per key
  Value arr2 = P("AS", {Value(3), Value(9), arr});
  CHECK(P("AG", {Value(3), arr2}) == Value(9));
  CHECK(arr2.alistValue().entries.size() == 2);
  // symbol keys (struct fields) coexist with integer keys
  Value s = P("AS", {Value::sym("X"), Value(1), Value::nil()});
  CHECK(P("AG", {Value::sym("X"), s}) == Value(1));
  CHECK(P("AG", {Value::sym("Y"), s}) == Value(0));
}

TEST_CASE("values compare structurally") {
  CHECK(Value(Rational(Int(4), Int(2))) == Value(2)); // normalized to integer
  CHECK(Value::mv({Value(1), Value(2)}) == Value::mv({Value(1), Value(2)}));
  CHECK(Value::mv({Value(1)}) != Value(1));
  CHECK(Value::truth() != Value(1));
  CHECK(Value::nil() != Value(0));
}
