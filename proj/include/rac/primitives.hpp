#pragma once

#include "rac/bits.hpp"
#include "rac/sexpr.hpp"

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

// The untyped primitive library that generated functional code calls:
// BITS, SETBITS, SI, the LOG-comparators, logical operations on unbounded
// two's-complement integers, array access via alists, and exact
// arithmetic. Values are immutable; every operation is a pure function.

namespace rac {

class Value;
using ValueVec = std::vector<Value>;

class Value {
public:
  struct NilT {};
  struct TrueT {};
  struct Alist {
    // Sorted by key (ints before symbols); no duplicate keys.
    std::vector<std::pair<Value, Value>> entries;
    friend bool operator==(const Alist& a, const Alist& b);
  };
  struct Mv {
    ValueVec parts;
    friend bool operator==(const Mv& a, const Mv& b) {
      return a.parts == b.parts;
    }
  };

  Value() : v_(NilT{}) {}
  Value(Int i) : v_(std::move(i)) {}
  Value(long i) : v_(Int(i)) {}
  Value(Rational r) {
    if (denominator(r) == 1)
      v_ = numerator(r);
    else
      v_ = std::move(r);
  }
  static Value nil() { return Value(); }
  static Value truth() {
    Value v;
    v.v_ = TrueT{};
    return v;
  }
  static Value sym(std::string s) {
    Value v;
    v.v_ = std::move(s);
    return v;
  }
  static Value alist(Alist a) {
    Value v;
    v.v_ = std::move(a);
    return v;
  }
  static Value mv(ValueVec parts) {
    Value v;
    v.v_ = Mv{std::move(parts)};
    return v;
  }
  static Value boolish(bool b) { return b ? Value(Int(1)) : Value(Int(0)); }

  bool isNil() const { return std::holds_alternative<NilT>(v_); }
  bool isTrue() const { return std::holds_alternative<TrueT>(v_); }
  bool isInt() const { return std::holds_alternative<Int>(v_); }
  bool isRat() const { return std::holds_alternative<Rational>(v_); }
  bool isNumber() const { return isInt() || isRat(); }
  bool isSym() const { return std::holds_alternative<std::string>(v_); }
  bool isAlist() const { return std::holds_alternative<Alist>(v_); }
  bool isMv() const { return std::holds_alternative<Mv>(v_); }

  const Int& intValue() const { return std::get<Int>(v_); }
  Rational ratValue() const {
    if (isInt()) return Rational(std::get<Int>(v_));
    return std::get<Rational>(v_);
  }
  const std::string& symValue() const { return std::get<std::string>(v_); }
  const Alist& alistValue() const { return std::get<Alist>(v_); }
  const Mv& mvValue() const { return std::get<Mv>(v_); }

  // ACL2 truth: everything except NIL.
  bool truthy() const { return !isNil(); }

  friend bool operator==(const Value& a, const Value& b) {
    if (a.isNumber() && b.isNumber()) {
      if (a.isInt() && b.isInt()) return a.intValue() == b.intValue();
      return a.ratValue() == b.ratValue();
    }
    return a.v_ == b.v_;
  }
  friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }

private:
  std::variant<NilT, TrueT, Int, Rational, std::string, Alist, Mv> v_;

  friend bool alistKeyLess(const Value& a, const Value& b);
};

inline bool operator==(const Value::Alist& a, const Value::Alist& b) {
  return a.entries == b.entries;
}

inline bool operator==(const Value::NilT&, const Value::NilT&) { return true; }
inline bool operator==(const Value::TrueT&, const Value::TrueT&) {
  return true;
}

inline bool alistKeyLess(const Value& a, const Value& b) {
  if (a.isInt() && b.isInt()) return a.intValue() < b.intValue();
  if (a.isInt() != b.isInt()) return a.isInt(); // ints sort before symbols
  return a.symValue() < b.symValue();
}

inline std::string printValue(const Value& v) {
  if (v.isNil()) return "NIL";
  if (v.isTrue()) return "T";
  if (v.isInt()) return v.intValue().str();
  if (v.isRat()) {
    Rational r = v.ratValue();
    return numerator(r).str() + "/" + denominator(r).str();
  }
  if (v.isSym()) return v.symValue();
  if (v.isAlist()) {
    std::string s = "(";
    bool first = true;
    for (const auto& [k, val] : v.alistValue().entries) {
      if (!first) s += ' ';
      first = false;
      s += "(" + printValue(k) + " . " + printValue(val) + ")";
    }
    return s + ")";
  }
  std::string s = "(MV";
  for (const auto& p : v.mvValue().parts) s += " " + printValue(p);
  return s + ")";
}

// ---------------------------------------------------------------------------
// Run-time errors shared by the evaluators.

enum class RunErrorKind {
  AssertionFailed,
  UnboundVariable,
  Arity,
  MeasureViolation,
  UnknownPrimitive,
  TypeError,
};

struct RunError {
  RunErrorKind kind;
  std::string function; // where it happened, when known
  std::string message;

  friend bool operator==(const RunError& a, const RunError& b) {
    return a.kind == b.kind && a.message == b.message;
  }
};

[[noreturn]] inline void throwRunError(RunErrorKind kind, std::string fn,
                                       std::string msg) {
  throw RunError{kind, std::move(fn), std::move(msg)};
}

// ---------------------------------------------------------------------------
// Integer-level primitives. BITS is defined by the arithmetic formula
// fl(mod(x, 2^(i+1)) / 2^j) — deliberately a different code path from the
// shift/mask slc in bits.hpp, so the two can be cross-checked.

inline Rational modRat(const Rational& a, const Rational& b) {
  if (b == 0) return a;
  Rational q = a / b;
  return a - b * Rational(floorDiv(numerator(q), denominator(q)));
}

inline Int bitsPrim(const Rational& x, const Int& i, const Int& j) {
  if (i < j || i < 0) return 0;
  Rational width = Rational(pow2(static_cast<int>(i) + 1));
  Rational m = modRat(x, width);
  Rational scaled =
      j >= 0 ? m / Rational(pow2(static_cast<int>(j)))
             : m * Rational(pow2(static_cast<int>(-j)));
  return floorRat(scaled);
}

inline Int bitnPrim(const Rational& x, const Int& n) {
  return bitsPrim(x, n, n);
}

inline Int siPrim(const Int& x, const Int& n) {
  if (n <= 0) return x;
  if (bitnPrim(Rational(x), n - 1) == 1) return x - pow2(static_cast<int>(n));
  return x;
}

inline Int setbitsPrim(const Int& x, const Int& w, const Int& i, const Int& j,
                       const Int& y) {
  int wi = static_cast<int>(w);
  Int low = j > 0 ? bitsPrim(Rational(x), j - 1, 0) : Int(0);
  Int mid = bitsPrim(Rational(y), i - j, 0) << static_cast<int>(j);
  Int high = i + 1 < w ? bitsPrim(Rational(x), w - 1, i + 1)
                             << static_cast<int>(i + 1)
                       : Int(0);
  return modPow2(high + mid + low, wi);
}

// Logical operations on unbounded two's-complement integers. Negative
// operands are reduced to nonnegative ones through the complement
// identity ~x = -x-1, so the underlying bignum only ever sees
// nonnegative bitwise operations.
inline Int lognotPrim(const Int& x) { return -x - 1; }

inline Int logandPrim(const Int& a, const Int& b) {
  if (a >= 0 && b >= 0) return a & b;
  if (a < 0 && b < 0) return -(((-a - 1) | (-b - 1)) + 1);
  const Int& pos = a >= 0 ? a : b;
  Int m = a >= 0 ? -b - 1 : -a - 1;
  return pos - (pos & m);
}

inline Int logiorPrim(const Int& a, const Int& b) {
  if (a >= 0 && b >= 0) return a | b;
  if (a < 0 && b < 0) return -(((-a - 1) & (-b - 1)) + 1);
  const Int& pos = a >= 0 ? a : b;
  Int m = a >= 0 ? -b - 1 : -a - 1;
  return -((m - (m & pos)) + 1);
}

inline Int logxorPrim(const Int& a, const Int& b) {
  if (a >= 0 && b >= 0) return a ^ b;
  if (a < 0 && b < 0) return (-a - 1) ^ (-b - 1);
  const Int& pos = a >= 0 ? a : b;
  Int m = a >= 0 ? -b - 1 : -a - 1;
  return -((pos ^ m) + 1);
}

inline Int ashPrim(const Int& x, const Int& k) {
  if (k >= 0) return x << static_cast<int>(k);
  return floorDiv(x, pow2(static_cast<int>(-k)));
}

// ---------------------------------------------------------------------------
// Alist access: AG returns the bound value or a default of 0; AS binds.

inline Value agPrim(const Value& key, const Value& arr) {
  if (arr.isNil()) return Value(Int(0));
  const auto& es = arr.alistValue().entries;
  auto it = std::lower_bound(
      es.begin(), es.end(), key,
      [](const auto& e, const Value& k) { return alistKeyLess(e.first, k); });
  if (it != es.end() && it->first == key) return it->second;
  return Value(Int(0));
}

inline Value asPrim(const Value& key, const Value& val, const Value& arr) {
  Value::Alist a = arr.isNil() ? Value::Alist{} : arr.alistValue();
  auto it = std::lower_bound(
      a.entries.begin(), a.entries.end(), key,
      [](const auto& e, const Value& k) { return alistKeyLess(e.first, k); });
  if (it != a.entries.end() && it->first == key)
    it->second = val;
  else
    a.entries.insert(it, {key, val});
  return Value::alist(std::move(a));
}

// ---------------------------------------------------------------------------
// primEval: dispatch for the primitive function library.

namespace detail {

inline const Int& wantInt(const char* who, const Value& v) {
  if (!v.isInt())
    throwRunError(RunErrorKind::TypeError, who,
                  std::string(who) + ": expected an integer, got " +
                      printValue(v));
  return v.intValue();
}

inline Rational wantNumber(const char* who, const Value& v) {
  if (!v.isNumber())
    throwRunError(RunErrorKind::TypeError, who,
                  std::string(who) + ": expected a number, got " +
                      printValue(v));
  return v.ratValue();
}

inline void wantArity(const std::string& name, const ValueVec& args,
                      std::size_t n) {
  if (args.size() != n)
    throwRunError(RunErrorKind::Arity, name,
                  name + ": expected " + std::to_string(n) +
                      " arguments, got " + std::to_string(args.size()));
}

} // namespace detail

inline bool isPrimitiveName(const std::string& n) {
  static const char* names[] = {
      "BITS",    "SETBITS", "SETBITN", "BITN",   "SI",     "LOG<",
      "LOG<=",   "LOG>",    "LOG>=",   "LOG=",   "LOG<>",  "LOGAND1",
      "LOGIOR1", "LOGNOT1", "LOGAND",  "LOGIOR", "LOGXOR", "LOGNOT",
      "ASH",     "FLOOR",   "NFIX",    "INTEGERP", "AG",   "AS",
      "ABS",     "EXPT",    "+",       "-",      "*",
  };
  for (const char* p : names)
    if (n == p) return true;
  return false;
}

inline Value primEval(const std::string& name, const ValueVec& args) {
  using detail::wantArity;
  using detail::wantInt;
  using detail::wantNumber;

  if (name == "BITS") {
    wantArity(name, args, 3);
    return Value(bitsPrim(wantNumber("BITS", args[0]),
                          wantInt("BITS", args[1]), wantInt("BITS", args[2])));
  }
  if (name == "SETBITS") {
    wantArity(name, args, 5);
    return Value(setbitsPrim(
        wantInt("SETBITS", args[0]), wantInt("SETBITS", args[1]),
        wantInt("SETBITS", args[2]), wantInt("SETBITS", args[3]),
        wantInt("SETBITS", args[4])));
  }
  if (name == "SETBITN") {
    wantArity(name, args, 4);
    const Int& n = wantInt("SETBITN", args[2]);
    return Value(setbitsPrim(wantInt("SETBITN", args[0]),
                             wantInt("SETBITN", args[1]), n, n,
                             wantInt("SETBITN", args[3])));
  }
  if (name == "BITN") {
    wantArity(name, args, 2);
    return Value(bitnPrim(wantNumber("BITN", args[0]),
                          wantInt("BITN", args[1])));
  }
  if (name == "SI") {
    wantArity(name, args, 2);
    return Value(siPrim(wantInt("SI", args[0]), wantInt("SI", args[1])));
  }
  if (name == "LOG<" || name == "LOG<=" || name == "LOG>" ||
      name == "LOG>=" || name == "LOG=" || name == "LOG<>") {
    wantArity(name, args, 2);
    Rational a = wantNumber(name.c_str(), args[0]);
    Rational b = wantNumber(name.c_str(), args[1]);
    bool r = name == "LOG<"    ? a < b
             : name == "LOG<=" ? a <= b
             : name == "LOG>"  ? a > b
             : name == "LOG>=" ? a >= b
             : name == "LOG="  ? a == b
                               : a != b;
    return Value::boolish(r);
  }
  if (name == "LOGAND1") {
    wantArity(name, args, 2);
    return Value::boolish(wantNumber("LOGAND1", args[0]) != 0 &&
                          wantNumber("LOGAND1", args[1]) != 0);
  }
  if (name == "LOGIOR1") {
    wantArity(name, args, 2);
    return Value::boolish(wantNumber("LOGIOR1", args[0]) != 0 ||
                          wantNumber("LOGIOR1", args[1]) != 0);
  }
  if (name == "LOGNOT1") {
    wantArity(name, args, 1);
    return Value::boolish(wantNumber("LOGNOT1", args[0]) == 0);
  }
  if (name == "LOGAND") {
    wantArity(name, args, 2);
    return Value(logandPrim(wantInt("LOGAND", args[0]),
                            wantInt("LOGAND", args[1])));
  }
  if (name == "LOGIOR") {
    wantArity(name, args, 2);
    return Value(logiorPrim(wantInt("LOGIOR", args[0]),
                            wantInt("LOGIOR", args[1])));
  }
  if (name == "LOGXOR") {
    wantArity(name, args, 2);
    return Value(logxorPrim(wantInt("LOGXOR", args[0]),
                            wantInt("LOGXOR", args[1])));
  }
  if (name == "LOGNOT") {
    wantArity(name, args, 1);
    return Value(lognotPrim(wantInt("LOGNOT", args[0])));
  }
  if (name == "ASH") {
    wantArity(name, args, 2);
    return Value(ashPrim(wantInt("ASH", args[0]), wantInt("ASH", args[1])));
  }
  if (name == "FLOOR") {
    wantArity(name, args, 2);
    Rational a = wantNumber("FLOOR", args[0]);
    Rational b = wantNumber("FLOOR", args[1]);
    if (b == 0) return Value(Int(0));
    return Value(floorRat(a / b));
  }
  if (name == "NFIX") {
    wantArity(name, args, 1);
    if (args[0].isInt() && args[0].intValue() >= 0) return args[0];
    return Value(Int(0));
  }
  if (name == "INTEGERP") {
    wantArity(name, args, 1);
    return args[0].isInt() ? Value::truth() : Value::nil();
  }
  if (name == "AG") {
    wantArity(name, args, 2);
    if (!args[1].isNil() && !args[1].isAlist())
      throwRunError(RunErrorKind::TypeError, "AG",
                    "AG: expected an alist, got " + printValue(args[1]));
    return agPrim(args[0], args[1]);
  }
  if (name == "AS") {
    wantArity(name, args, 3);
    if (!args[2].isNil() && !args[2].isAlist())
      throwRunError(RunErrorKind::TypeError, "AS",
                    "AS: expected an alist, got " + printValue(args[2]));
    return asPrim(args[0], args[1], args[2]);
  }
  if (name == "ABS") {
    wantArity(name, args, 1);
    Rational a = wantNumber("ABS", args[0]);
    return Value(a < 0 ? -a : a);
  }
  if (name == "EXPT") {
    wantArity(name, args, 2);
    Rational base = wantNumber("EXPT", args[0]);
    const Int& e = wantInt("EXPT", args[1]);
    if (e > 1'000'000 || e < -1'000'000)
      throwRunError(RunErrorKind::TypeError, "EXPT",
                    "EXPT: exponent out of supported range");
    int k = static_cast<int>(e < 0 ? -e : e);
    Rational r(1);
    for (int i = 0; i < k; ++i) r *= base;
    if (e < 0) {
      if (r == 0)
        throwRunError(RunErrorKind::TypeError, "EXPT", "EXPT: 0^negative");
      r = 1 / r;
    }
    return Value(r);
  }
  if (name == "+" || name == "*") {
    if (args.empty())
      return Value(Int(name == "+" ? 0 : 1));
    Rational acc = wantNumber(name.c_str(), args[0]);
    for (std::size_t i = 1; i < args.size(); ++i) {
      Rational x = wantNumber(name.c_str(), args[i]);
      if (name == "+")
        acc += x;
      else
        acc *= x;
    }
    return Value(acc);
  }
  if (name == "-") {
    if (args.size() == 1) return Value(-wantNumber("-", args[0]));
    wantArity(name, args, 2);
    return Value(wantNumber("-", args[0]) - wantNumber("-", args[1]));
  }
  throwRunError(RunErrorKind::UnknownPrimitive, name,
                "unknown primitive " + name);
}

} // namespace rac
