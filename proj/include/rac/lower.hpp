#pragma once

#include "rac/ast.hpp"
#include "rac/sexpr.hpp"
#include "rac/typecheck.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rac {

// Lowering of the typed syntax tree to the untyped S-expression IR.
// Register evaluation and truncation become explicit: signed reads wrap in
// SI, fixed-point reads scale by EXPT terms, and assignments truncate with
// BITS — except where a static range analysis proves the stored pattern
// already equals the value, in which case the conversion is elided.

// Interval of the mathematical value of a lowered term.
struct VRange {
  bool known = false;
  Rational lo, hi;

  static VRange exact(const Rational& v) { return {true, v, v}; }
  static VRange span(Rational l, Rational h) {
    return {true, std::move(l), std::move(h)};
  }
  static VRange unknown() { return {}; }

  bool within(const Rational& l, const Rational& h) const {
    return known && lo >= l && hi <= h;
  }
  VRange hull(const VRange& o) const {
    if (!known || !o.known) return unknown();
    return span(std::min(lo, o.lo), std::max(hi, o.hi));
  }
  VRange negate() const {
    if (!known) return unknown();
    return span(-hi, -lo);
  }
  VRange add(const VRange& o) const {
    if (!known || !o.known) return unknown();
    return span(lo + o.lo, hi + o.hi);
  }
  VRange sub(const VRange& o) const { return add(o.negate()); }
  VRange mul(const VRange& o) const {
    if (!known || !o.known) return unknown();
    Rational c[4] = {lo * o.lo, lo * o.hi, hi * o.lo, hi * o.hi};
    Rational mn = c[0], mx = c[0];
    for (const Rational& x : c) {
      mn = std::min(mn, x);
      mx = std::max(mx, x);
    }
    return span(mn, mx);
  }
  VRange scalePow2(int k) const {
    if (!known) return unknown();
    return span(rac::scalePow2(lo, k), rac::scalePow2(hi, k));
  }
  bool nonneg() const { return known && lo >= 0; }
};

inline VRange rawRange(int width) {
  return VRange::span(Rational(0), Rational(pow2(width) - 1));
}
inline VRange signedRange(int width) {
  return VRange::span(Rational(-pow2(width - 1)),
                      Rational(pow2(width - 1) - 1));
}

// A lowered expression: either the raw bit pattern of a register format
// (possibly out of range, to be wrapped where consumed), a mathematical
// value, or an aggregate (alist) term.
struct Lowered {
  enum class Level { RawReg, Value, Agg };
  Level level = Level::Value;
  SExpr term;
  VRange range;      // of the term's value as written
  int granExp = 0;   // term value is a multiple of 2^granExp
  RegFormat fmt{};   // RawReg only
};

struct LowerError : std::runtime_error {
  SrcPos pos;
  LowerError(std::string msg, SrcPos p)
      : std::runtime_error(std::move(msg)), pos(p) {}
};

struct ConstArrayDef {
  std::string name; // upper-cased
  std::vector<Int> raws;
};

struct IrFunction {
  std::string name; // upper-cased
  SExpr funcdef;    // (FUNCDEF NAME (PARAMS...) (BLOCK ...))
};

struct IrProgram {
  std::vector<ConstArrayDef> constArrays;
  std::vector<IrFunction> functions;

  const SExpr* find(const std::string& name) const {
    std::string u = SExpr::upcase(name);
    for (const auto& f : functions)
      if (f.name == u) return &f.funcdef;
    return nullptr;
  }
};

class Lowering {
public:
  Lowering(const Program& prog, const SymbolTables& tables)
      : prog_(prog), tables_(tables) {}

  IrProgram lowerProgram() {
    IrProgram ir;
    for (const auto& g : prog_.globals)
      for (const auto& d : g.decl->decls)
        if (!d.constArrayRaw.empty())
          ir.constArrays.push_back({SExpr::upcase(d.name), d.constArrayRaw});
    for (const auto& fn : prog_.functions)
      ir.functions.push_back({SExpr::upcase(fn.name), lowerFunction(fn)});
    return ir;
  }

  SExpr lowerFunction(const FuncDef& fn) {
    currentFn_ = &fn;
    SList params;
    for (const auto& p : fn.params) params.push_back(sym(p.name));
    SExpr body = lowerBlock(*fn.body);
    return SExpr::listOf(sym("FUNCDEF"), sym(fn.name),
                         SExpr::list(std::move(params)), std::move(body));
  }

  // exposed for tests and for assertion-message rendering
  Lowered lowerExpr(const Expr& e) { return lower(e); }

  SExpr lowerCondition(const Expr& e) { return boolTerm(lower(e)); }

private:
  const Program& prog_;
  const SymbolTables& tables_;
  const FuncDef* currentFn_ = nullptr;

  static SExpr sym(const std::string& s) { return SExpr::sym(s); }
  static SExpr num(Int v) { return SExpr::num(std::move(v)); }

  // --- small term builders with the constant folding the IR format needs ---

  static bool isNum(const SExpr& e) { return e.isNum(); }

  // term + k with shallow folding: constants fold, (+ t c) absorbs k
  static SExpr offset(const SExpr& t, const Int& k) {
    if (k == 0) return t;
    if (t.isNum()) return num(t.intValue() + k);
    if (t.headIs("+") && t.size() == 3 && t[2].isNum()) {
      Int c = t[2].intValue() + k;
      if (c == 0) return t[1];
      return SExpr::listOf(sym("+"), t[1], num(c));
    }
    return SExpr::listOf(sym("+"), t, num(k));
  }

  static SExpr mkBinary(const char* op, SExpr a, SExpr b) {
    if (a.isNum() && b.isNum()) {
      if (std::string(op) == "+") return num(a.intValue() + b.intValue());
      if (std::string(op) == "-") return num(a.intValue() - b.intValue());
      if (std::string(op) == "*") return num(a.intValue() * b.intValue());
    }
    return SExpr::listOf(sym(op), std::move(a), std::move(b));
  }

  // value * 2^k as a term; integer constants fold when k >= 0
  static SExpr mulPow2Term(SExpr t, int k) {
    if (k == 0) return t;
    if (t.isNum() && k > 0) return num(t.intValue() << k);
    return SExpr::listOf(sym("*"), std::move(t),
                         SExpr::listOf(sym("EXPT"), num(2), num(k)));
  }

  // --- conversions between levels ------------------------------------------

  // Wrap a raw-level term so its range fits the format width.
  static Lowered wrapRaw(Lowered l) {
    int n = l.fmt.width;
    if (!l.range.within(0, Rational(pow2(n) - 1))) {
      l.term = SExpr::listOf(sym("BITS"), std::move(l.term), num(n - 1), num(0));
      l.range = rawRange(n);
      l.granExp = 0;
    }
    return l;
  }

  // The mathematical value of a lowered expression.
  Lowered valueOf(Lowered l) {
    if (l.level != Lowered::Level::RawReg) return l;
    l = wrapRaw(std::move(l));
    const RegFormat f = l.fmt;
    Lowered v;
    v.level = Lowered::Level::Value;
    switch (f.kind) {
    case RegKind::UInt:
    case RegKind::Bool:
    case RegKind::MachineUInt:
      v.term = std::move(l.term);
      v.range = l.range;
      v.granExp = 0;
      return v;
    case RegKind::SInt:
    case RegKind::MachineInt:
      v.term = SExpr::listOf(sym("SI"), std::move(l.term), num(f.width));
      v.range = signedRange(f.width);
      v.granExp = 0;
      return v;
    case RegKind::UFixed:
      v.term = mulPow2Term(std::move(l.term), f.intBits - f.width);
      v.range = l.range.scalePow2(f.intBits - f.width);
      v.granExp = f.intBits - f.width;
      return v;
    case RegKind::SFixed:
      v.term = mulPow2Term(
          SExpr::listOf(sym("SI"), std::move(l.term), num(f.width)),
          f.intBits - f.width);
      v.range = signedRange(f.width).scalePow2(f.intBits - f.width);
      v.granExp = f.intBits - f.width;
      return v;
    }
    throw LowerError("bad format", {});
  }

  // Encode a lowered expression as the raw pattern of the target format:
  // scale fixed points, then truncate with BITS unless the range analysis
  // proves the scaled value is already the pattern.
  Lowered encode(Lowered l, const RegFormat& f) {
    int n = f.width;
    if (l.level == Lowered::Level::Agg)
      throw LowerError("cannot store an aggregate into a scalar", {});

    if (l.level == Lowered::Level::RawReg && !f.isFixed() && !l.fmt.isFixed()) {
      const RegFormat sf = l.fmt;
      if (!sf.isSigned()) {
        // unsigned source: the pattern is the value
        if (l.range.within(0, Rational(pow2(n) - 1))) {
          l.fmt = f;
          return l;
        }
        l.term = SExpr::listOf(sym("BITS"), std::move(l.term), num(n - 1),
                               num(0));
        l.range = rawRange(n);
        l.granExp = 0;
        l.fmt = f;
        return l;
      }
      if (sf.width == n && l.range.within(0, Rational(pow2(n) - 1))) {
        // same width: the value's low n bits are the pattern itself
        l.fmt = f;
        return l;
      }
    }

    Lowered v = valueOf(std::move(l));
    int scale = f.isFixed() ? f.width - f.intBits : 0;
    SExpr scaled = mulPow2Term(std::move(v.term), scale);
    VRange r = v.range.scalePow2(scale);
    int g = v.granExp + scale;
    Lowered out;
    out.level = Lowered::Level::RawReg;
    out.fmt = f;
    if (g >= 0 && r.within(0, Rational(pow2(n) - 1))) {
      out.term = std::move(scaled);
      out.range = r;
      return out;
    }
    out.term = SExpr::listOf(sym("BITS"), std::move(scaled), num(n - 1), num(0));
    out.range = rawRange(n);
    return out;
  }

  // A term with C truth semantics (nonzero means true). Register patterns
  // are used directly: a pattern is zero exactly when its value is.
  SExpr boolTerm(Lowered l) {
    if (l.level == Lowered::Level::RawReg) return wrapRaw(std::move(l)).term;
    return valueOf(std::move(l)).term;
  }

  // --- lvalue stores ---------------------------------------------------------

  // Rebuild the innermost modification as a read-modify-write chain and
  // return the root variable with its new value term.
  std::pair<SExpr, SExpr> store(const Expr& lhs, SExpr newValue) {
    switch (lhs.kind) {
    case ExprKind::Var:
      return {sym(lhs.name), std::move(newValue)};
    case ExprKind::Index: {
      SExpr idx = valueOf(lower(*lhs.b)).term;
      SExpr cur = aggTerm(*lhs.a);
      SExpr updated = SExpr::listOf(sym("AS"), std::move(idx),
                                    std::move(newValue), std::move(cur));
      return store(*lhs.a, std::move(updated));
    }
    case ExprKind::Field: {
      SExpr key = quoted(sym(lhs.name));
      SExpr cur = aggTerm(*lhs.a);
      SExpr updated = SExpr::listOf(sym("AS"), std::move(key),
                                    std::move(newValue), std::move(cur));
      return store(*lhs.a, std::move(updated));
    }
    default:
      throw LowerError("unsupported assignment target", lhs.pos);
    }
  }

  SExpr aggTerm(const Expr& e) {
    Lowered l = lower(e);
    return l.term;
  }

  // --- expressions ------------------------------------------------------------

  Lowered lower(const Expr& e) {
    switch (e.kind) {
    case ExprKind::IntLit: {
      Lowered l;
      l.term = num(e.intVal);
      // literals carry their machine type's range (pattern from the
      // corpus translations), widened when the value itself is larger
      Rational lo = std::min(Rational(e.intVal), Rational(-pow2(31)));
      Rational hi = std::max(Rational(e.intVal), Rational(pow2(31) - 1));
      l.range = VRange::span(lo, hi);
      return l;
    }
    case ExprKind::BoolLit: {
      Lowered l;
      l.level = Lowered::Level::RawReg;
      l.fmt = boolFmt();
      l.term = num(e.boolVal ? 1 : 0);
      l.range = VRange::exact(Rational(e.boolVal ? 1 : 0));
      return l;
    }
    case ExprKind::Var:
      return lowerVar(e);
    case ExprKind::Unary:
      return lowerUnary(e);
    case ExprKind::Binary:
      return lowerBinary(e);
    case ExprKind::Ternary:
      return lowerTernary(e);
    case ExprKind::Slice:
      return lowerSlice(e);
    case ExprKind::BitRef: {
      Lowered base = wrapRaw(lower(*e.a));
      SExpr idx = valueOf(lower(*e.b)).term;
      Lowered l;
      l.level = Lowered::Level::RawReg;
      l.fmt = boolFmt();
      l.term = SExpr::listOf(sym("BITN"), std::move(base.term), std::move(idx));
      l.range = VRange::span(Rational(0), Rational(1));
      return l;
    }
    case ExprKind::Index: {
      Lowered arr = lower(*e.a);
      SExpr idx = valueOf(lower(*e.b)).term;
      SExpr term =
          SExpr::listOf(sym("AG"), std::move(idx), std::move(arr.term));
      return elementLowered(std::move(term), e.type);
    }
    case ExprKind::Field: {
      Lowered s = lower(*e.a);
      SExpr term = SExpr::listOf(sym("AG"), quoted(sym(e.name)),
                                 std::move(s.term));
      return elementLowered(std::move(term), e.type);
    }
    case ExprKind::Call:
      return lowerCall(e);
    case ExprKind::Cast: {
      Lowered v = lower(*e.a);
      const RegFormat f = e.type->reg;
      if (v.level == Lowered::Level::RawReg && v.fmt == f) return v;
      return encode(std::move(v), f);
    }
    case ExprKind::TupleCtor:
      throw LowerError("tuple construction outside a return", e.pos);
    }
    throw LowerError("unhandled expression", e.pos);
  }

  Lowered elementLowered(SExpr term, const TypePtr& type) {
    Lowered l;
    if (type->isReg()) {
      l.level = Lowered::Level::RawReg;
      l.fmt = type->reg;
      l.term = std::move(term);
      l.range = rawRange(type->reg.width);
    } else {
      l.level = Lowered::Level::Agg;
      l.term = std::move(term);
    }
    return l;
  }

  Lowered lowerVar(const Expr& e) {
    auto en = tables_.enumConsts.find(SExpr::upcase(e.name));
    if (en != tables_.enumConsts.end()) {
      Lowered l;
      l.term = num(en->second);
      l.range = VRange::span(std::min(Rational(en->second), Rational(-pow2(31))),
                             std::max(Rational(en->second), Rational(pow2(31) - 1)));
      return l;
    }
    auto g = tables_.globals.find(SExpr::upcase(e.name));
    if (g != tables_.globals.end()) {
      if (g->second.scalar) {
        Lowered l;
        l.term = num(*g->second.scalar);
        l.range = VRange::span(
            std::min(Rational(*g->second.scalar), Rational(-pow2(31))),
            std::max(Rational(*g->second.scalar), Rational(pow2(31) - 1)));
        return l;
      }
      Lowered l; // constant array: a zero-argument definition
      l.level = Lowered::Level::Agg;
      l.term = SExpr::listOf(sym(e.name));
      return l;
    }
    const Type& t = *e.type;
    if (t.isReg() && !t.reg.isMachine()) {
      Lowered l;
      l.level = Lowered::Level::RawReg;
      l.fmt = t.reg;
      l.term = sym(e.name);
      l.range = rawRange(t.reg.width);
      return l;
    }
    if (t.isReg()) { // machine scalar: unbounded value with the 32-bit range
      Lowered l;
      l.term = sym(e.name);
      l.range = t.reg.kind == RegKind::MachineUInt
                    ? VRange::span(Rational(0), Rational(pow2(32) - 1))
                    : signedRange(32);
      return l;
    }
    Lowered l;
    l.level = Lowered::Level::Agg;
    l.term = sym(e.name);
    return l;
  }

  Lowered lowerUnary(const Expr& e) {
    if (e.op == "!") {
      Lowered l;
      l.level = Lowered::Level::RawReg;
      l.fmt = boolFmt();
      l.term = SExpr::listOf(sym("LOGNOT1"), boolTerm(lower(*e.a)));
      l.range = VRange::span(Rational(0), Rational(1));
      return l;
    }
    if (e.op == "~") {
      Lowered a = lower(*e.a);
      if (a.level == Lowered::Level::RawReg && !a.fmt.isSigned()) {
        // complement within the register's width; the out-of-range result
        // is wrapped where it is consumed
        Lowered out;
        out.level = Lowered::Level::RawReg;
        out.fmt = a.fmt;
        Lowered w = wrapRaw(std::move(a));
        out.range = VRange::span(-w.range.hi - 1, -w.range.lo - 1);
        out.term = SExpr::listOf(sym("LOGNOT"), std::move(w.term));
        return out;
      }
      Lowered v = valueOf(std::move(a));
      Lowered out;
      out.term = SExpr::listOf(sym("LOGNOT"), std::move(v.term));
      out.range = v.range.known
                      ? VRange::span(-v.range.hi - 1, -v.range.lo - 1)
                      : VRange::unknown();
      return out;
    }
    // unary minus (a folded literal never reaches here)
    Lowered v = valueOf(lower(*e.a));
    Lowered out;
    out.term = SExpr::listOf(sym("-"), std::move(v.term));
    out.range = v.range.negate();
    out.granExp = v.granExp;
    return out;
  }

  Lowered lowerBinary(const Expr& e) {
    const std::string& op = e.op;
    if (op == "&&" || op == "||") {
      Lowered l;
      l.level = Lowered::Level::RawReg;
      l.fmt = boolFmt();
      l.term = SExpr::listOf(sym(op == "&&" ? "LOGAND1" : "LOGIOR1"),
                             boolTerm(lower(*e.a)), boolTerm(lower(*e.b)));
      l.range = VRange::span(Rational(0), Rational(1));
      return l;
    }
    if (op == "==" || op == "!=" || op == "<" || op == "<=" || op == ">" ||
        op == ">=") {
      static const std::map<std::string, std::string> cmp = {
          {"==", "LOG="}, {"!=", "LOG<>"}, {"<", "LOG<"},
          {"<=", "LOG<="}, {">", "LOG>"},  {">=", "LOG>="}};
      Lowered l;
      l.level = Lowered::Level::RawReg;
      l.fmt = boolFmt();
      l.term = SExpr::listOf(sym(cmp.at(op)), valueOf(lower(*e.a)).term,
                             valueOf(lower(*e.b)).term);
      l.range = VRange::span(Rational(0), Rational(1));
      return l;
    }
    if (op == "&" || op == "|" || op == "^") {
      static const std::map<std::string, std::string> bit = {
          {"&", "LOGAND"}, {"|", "LOGIOR"}, {"^", "LOGXOR"}};
      Lowered a = lower(*e.a), b = lower(*e.b);
      if (a.level == Lowered::Level::RawReg) a = wrapRaw(std::move(a));
      if (b.level == Lowered::Level::RawReg) b = wrapRaw(std::move(b));
      bool bothRaw = a.level == Lowered::Level::RawReg &&
                     b.level == Lowered::Level::RawReg;
      Lowered out;
      SExpr term = SExpr::listOf(sym(bit.at(op)), a.term, b.term);
      if (bothRaw) {
        out.level = Lowered::Level::RawReg;
        out.fmt = uintFmt(std::max(a.fmt.width, b.fmt.width));
        out.range = op == "&" ? VRange::span(Rational(0),
                                             std::min(a.range.hi, b.range.hi))
                              : rawRange(out.fmt.width);
        out.term = std::move(term);
        return out;
      }
      out.term = std::move(term);
      out.range = bitwiseValueRange(op, a.range, b.range);
      return out;
    }
    if (op == "<<" || op == ">>") {
      Lowered a = valueOf(lower(*e.a));
      Lowered k = valueOf(lower(*e.b));
      Lowered out;
      SExpr count = op == "<<" ? k.term : negateTerm(k.term);
      out.term = SExpr::listOf(sym("ASH"), std::move(a.term), std::move(count));
      out.range = shiftRange(a.range, k.range, op == "<<");
      return out;
    }
    if (op == "/") {
      Lowered a = valueOf(lower(*e.a));
      Lowered b = valueOf(lower(*e.b));
      Lowered out;
      out.term = SExpr::listOf(sym("FLOOR"), std::move(a.term), std::move(b.term));
      out.range = a.range.known ? VRange::span(Rational(0), a.range.hi)
                                : VRange::unknown();
      return out;
    }
    // + - *
    Lowered a = valueOf(lower(*e.a));
    Lowered b = valueOf(lower(*e.b));
    Lowered out;
    out.term = mkBinary(op.c_str(), a.term, b.term);
    out.range = op == "+"   ? a.range.add(b.range)
                : op == "-" ? a.range.sub(b.range)
                            : a.range.mul(b.range);
    out.granExp = op == "*" ? a.granExp + b.granExp
                            : std::min(a.granExp, b.granExp);
    if (out.term.isNum()) out.range = VRange::exact(Rational(out.term.intValue()));
    return out;
  }

  static SExpr negateTerm(const SExpr& t) {
    if (t.isNum()) return num(-t.intValue());
    return SExpr::listOf(sym("-"), t);
  }

  static VRange bitwiseValueRange(const std::string& op, const VRange& a,
                                  const VRange& b) {
    if (!a.known || !b.known || a.lo < 0 || b.lo < 0) return VRange::unknown();
    if (op == "&") return VRange::span(Rational(0), std::min(a.hi, b.hi));
    Int hi = std::max(numerator(a.hi), numerator(b.hi));
    int bits = 1;
    while (pow2(bits) - 1 < hi) ++bits;
    return VRange::span(Rational(0), Rational(pow2(bits) - 1));
  }

  static VRange shiftRange(const VRange& a, const VRange& k, bool left) {
    if (!a.known || !k.known) return VRange::unknown();
    if (numerator(k.lo) < -100000 || numerator(k.hi) > 100000)
      return VRange::unknown();
    int kl = static_cast<int>(numerator(k.lo));
    int kh = static_cast<int>(numerator(k.hi));
    if (!left) {
      kl = -kh;
      kh = -static_cast<int>(numerator(k.lo));
    }
    Int corners[4] = {floorShift(floorRat(a.lo), kl),
                      floorShift(floorRat(a.lo), kh),
                      floorShift(floorRat(a.hi), kl),
                      floorShift(floorRat(a.hi), kh)};
    Int mn = corners[0], mx = corners[0];
    for (const Int& c : corners) {
      mn = std::min(mn, c);
      mx = std::max(mx, c);
    }
    return VRange::span(Rational(mn), Rational(mx));
  }

  Lowered lowerTernary(const Expr& e) {
    SExpr test = boolTerm(lower(*e.a));
    Lowered b = lower(*e.b);
    Lowered c = lower(*e.c);
    if (b.level == Lowered::Level::RawReg &&
        c.level == Lowered::Level::RawReg && b.fmt == c.fmt) {
      Lowered out;
      out.level = Lowered::Level::RawReg;
      out.fmt = b.fmt;
      out.term = SExpr::listOf(sym("IF1"), std::move(test), b.term, c.term);
      out.range = b.range.hull(c.range);
      return out;
    }
    Lowered vb = valueOf(std::move(b));
    Lowered vc = valueOf(std::move(c));
    Lowered out;
    out.term =
        SExpr::listOf(sym("IF1"), std::move(test), vb.term, vc.term);
    out.range = vb.range.hull(vc.range);
    out.granExp = std::min(vb.granExp, vc.granExp);
    return out;
  }

  Lowered lowerSlice(const Expr& e) {
    Lowered base = wrapRaw(lower(*e.a));
    SExpr lo = valueOf(lower(*e.b)).term;
    SExpr hi = offset(lo, e.sliceWidth - 1);
    Lowered out;
    out.level = Lowered::Level::RawReg;
    out.fmt = uintFmt(e.sliceWidth);
    out.term = SExpr::listOf(sym("BITS"), std::move(base.term), std::move(hi),
                             std::move(lo));
    out.range = rawRange(e.sliceWidth);
    return out;
  }

  Lowered lowerCall(const Expr& e) {
    const FuncDef* callee = tables_.functions.at(SExpr::upcase(e.name));
    SList call;
    call.push_back(sym(e.name));
    for (std::size_t i = 0; i < e.args.size(); ++i) {
      const TypePtr& pt = callee->params[i].resolvedType;
      Lowered a = lower(*e.args[i]);
      if (pt->isReg() && !pt->reg.isMachine())
        call.push_back(encode(std::move(a), pt->reg).term);
      else if (pt->isReg())
        call.push_back(valueOf(std::move(a)).term);
      else
        call.push_back(std::move(a.term)); // aggregates pass through
    }
    const TypePtr& rt = callee->returnType;
    Lowered out;
    out.term = SExpr::list(std::move(call));
    if (rt->isReg() && !rt->reg.isMachine()) {
      out.level = Lowered::Level::RawReg;
      out.fmt = rt->reg;
      out.range = rawRange(rt->reg.width);
    } else if (rt->isReg()) {
      out.range = rt->reg.kind == RegKind::MachineUInt
                      ? VRange::span(Rational(0), Rational(pow2(32) - 1))
                      : signedRange(32);
    } else {
      out.level = Lowered::Level::Agg; // tuple values: consumed by MV-ASSIGN
    }
    return out;
  }

  // --- statements ----------------------------------------------------------------

  SExpr lowerBlock(const Stmt& block) {
    SList items;
    items.push_back(sym("BLOCK"));
    for (const auto& s : block.stmts) lowerStmtInto(*s, items);
    return SExpr::list(std::move(items));
  }

  SExpr lowerStmt(const Stmt& s) {
    SList items;
    lowerStmtInto(s, items);
    if (items.size() == 1) return std::move(items[0]);
    items.insert(items.begin(), sym("BLOCK"));
    return SExpr::list(std::move(items));
  }

  void lowerStmtInto(const Stmt& s, SList& out) {
    switch (s.kind) {
    case StmtKind::Block:
      out.push_back(lowerBlock(s));
      return;
    case StmtKind::VarDecl:
      for (const auto& d : s.decls) {
        const Type& t = *d.resolvedType;
        if (d.init) {
          SExpr init = t.isReg() && !t.reg.isMachine()
                           ? encode(lower(*d.init), t.reg).term
                           : valueOf(lower(*d.init)).term;
          out.push_back(SExpr::listOf(sym("DECLARE"), sym(d.name),
                                      std::move(init)));
        } else if (t.isReg() && !t.reg.isMachine()) {
          out.push_back(SExpr::listOf(sym("DECLARE"), sym(d.name), num(0)));
        } else if (t.isReg()) {
          // uninitialized machine scalars have no defined value; reads
          // before the first assignment are runtime errors
        } else {
          out.push_back(
              SExpr::listOf(sym("DECLARE"), sym(d.name), sym("NIL")));
        }
      }
      return;
    case StmtKind::Assign: {
      out.push_back(lowerAssign(s));
      return;
    }
    case StmtKind::SliceAssign: {
      out.push_back(lowerSliceAssign(s));
      return;
    }
    case StmtKind::If: {
      SExpr test = lowerCondition(*s.cond);
      SExpr thenS = lowerStmt(*s.thenS);
      if (s.elseS)
        out.push_back(SExpr::listOf(sym("IF"), std::move(test),
                                    std::move(thenS), lowerStmt(*s.elseS)));
      else
        out.push_back(
            SExpr::listOf(sym("IF"), std::move(test), std::move(thenS)));
      return;
    }
    case StmtKind::For: {
      SList initList;
      lowerStmtInto(*s.init, initList);
      SExpr test = lowerCondition(*s.cond);
      SExpr update = loopUpdateTerm(*s.update);
      SExpr header = SExpr::listOf(std::move(initList[0]), std::move(test),
                                   std::move(update));
      out.push_back(SExpr::listOf(sym("FOR"), std::move(header),
                                  lowerStmt(*s.body)));
      return;
    }
    case StmtKind::Switch:
      out.push_back(lowerSwitch(s));
      return;
    case StmtKind::Return:
      out.push_back(SExpr::listOf(sym("RETURN"), lowerReturnValue(s)));
      return;
    case StmtKind::Assert:
      out.push_back(SExpr::listOf(sym("ASSERT"), lowerCondition(*s.expr)));
      return;
    case StmtKind::TupleAssign: {
      SList targets;
      for (const auto& t : s.targets) targets.push_back(sym(t));
      out.push_back(SExpr::listOf(sym("MV-ASSIGN"),
                                  SExpr::list(std::move(targets)),
                                  lower(*s.call).term));
      return;
    }
    }
  }

  SExpr lowerAssign(const Stmt& s) {
    const Expr& lhs = *s.lhs;
    if (lhs.kind == ExprKind::BitRef) {
      // bit write: read-modify-write with SETBITN
      SExpr bitVal = s.rhs->kind == ExprKind::IntLit
                         ? num(s.rhs->intVal)
                         : wrapRaw(lower(*s.rhs)).term;
      Lowered base = lower(*lhs.a);
      SExpr idx = valueOf(lower(*lhs.b)).term;
      SExpr updated =
          SExpr::listOf(sym("SETBITN"), std::move(base.term),
                        num(base.fmt.width), std::move(idx), std::move(bitVal));
      auto [root, term] = store(*lhs.a, std::move(updated));
      return SExpr::listOf(sym("ASSIGN"), std::move(root), std::move(term));
    }

    const Type& t = *lhs.type;
    Lowered rhsVal = lowerAssignSource(s);
    SExpr enc = t.isReg() && !t.reg.isMachine()
                    ? encode(std::move(rhsVal), t.reg).term
                    : valueOf(std::move(rhsVal)).term;
    auto [root, term] = store(lhs, std::move(enc));
    return SExpr::listOf(sym("ASSIGN"), std::move(root), std::move(term));
  }

  // the combined right-hand side of plain, compound, and ++/-- assignments
  Lowered lowerAssignSource(const Stmt& s) {
    if (s.op == "=") return lower(*s.rhs);
    if (s.op == "++" || s.op == "--") {
      Lowered cur = valueOf(lower(*s.lhs));
      Lowered out;
      out.term = offset(cur.term, Int(s.op == "++" ? 1 : -1));
      out.range = cur.range.add(VRange::exact(Rational(s.op == "++" ? 1 : -1)));
      return out;
    }
    std::string base = s.op.substr(0, s.op.size() - 1); // drop '='
    if (base == "<<" || base == ">>" || base == "+" || base == "-" ||
        base == "|" || base == "&" || base == "^") {
      Lowered a = base == "|" || base == "&" || base == "^"
                      ? lower(*s.lhs)
                      : valueOf(lower(*s.lhs));
      Lowered b = base == "|" || base == "&" || base == "^"
                      ? lower(*s.rhs)
                      : valueOf(lower(*s.rhs));
      return combineBinary(base, std::move(a), std::move(b));
    }
    throw LowerError("unsupported compound assignment " + s.op, s.pos);
  }

  Lowered combineBinary(const std::string& op, Lowered a, Lowered b) {
    if (op == "&" || op == "|" || op == "^") {
      if (a.level == Lowered::Level::RawReg) a = wrapRaw(std::move(a));
      if (b.level == Lowered::Level::RawReg) b = wrapRaw(std::move(b));
      static const std::map<std::string, std::string> bit = {
          {"&", "LOGAND"}, {"|", "LOGIOR"}, {"^", "LOGXOR"}};
      Lowered out;
      out.term = SExpr::listOf(sym(bit.at(op)), a.term, b.term);
      out.range = bitwiseValueRange(op, a.range, b.range);
      return out;
    }
    Lowered out;
    if (op == "<<" || op == ">>") {
      SExpr count = op == "<<" ? b.term : negateTerm(b.term);
      out.term = SExpr::listOf(sym("ASH"), a.term, std::move(count));
      out.range = shiftRange(a.range, b.range, op == "<<");
      return out;
    }
    out.term = mkBinary(op.c_str(), a.term, b.term);
    out.range = op == "+" ? a.range.add(b.range) : a.range.sub(b.range);
    out.granExp = std::min(a.granExp, b.granExp);
    return out;
  }

  SExpr lowerSliceAssign(const Stmt& s) {
    const Expr& lhs = *s.lhs;
    const Expr* baseExpr;
    SExpr lo;
    int width;
    SExpr rawValue;
    if (lhs.kind == ExprKind::Call) { // x.set_slc(base, value)
      baseExpr = lhs.a.get();
      lo = valueOf(lower(*lhs.args[0])).term;
      width = lhs.sliceWidth;
      rawValue = wrapRaw(lower(*lhs.args[1])).term;
    } else { // x[hi:lo] = value
      baseExpr = lhs.a.get();
      lo = valueOf(lower(*lhs.b)).term;
      width = lhs.sliceWidth;
      rawValue = wrapRaw(lower(*s.rhs)).term;
    }
    Lowered base = lower(*baseExpr);
    SExpr hi = offset(lo, width - 1);
    SExpr updated = SExpr::listOf(sym("SETBITS"), std::move(base.term),
                                  num(base.fmt.width), std::move(hi),
                                  std::move(lo), std::move(rawValue));
    auto [root, term] = store(*baseExpr, std::move(updated));
    return SExpr::listOf(sym("ASSIGN"), std::move(root), std::move(term));
  }

  SExpr loopUpdateTerm(const Stmt& up) {
    // validated shape: the new loop-variable value as a bare term
    Lowered l = lowerAssignSource(up);
    return valueOf(std::move(l)).term;
  }

  SExpr lowerSwitch(const Stmt& s) {
    SExpr scrut = valueOf(lower(*s.cond)).term;
    return lowerCases(s, scrut, 0);
  }

  SExpr lowerCases(const Stmt& s, const SExpr& scrut, std::size_t i) {
    // collect label-only cases that fall through to the next body
    std::vector<const SwitchCase*> group;
    std::size_t j = i;
    while (j < s.cases.size() && s.cases[j].body.empty() &&
           !s.cases[j].hasBreak && !s.cases[j].isDefault) {
      group.push_back(&s.cases[j]);
      ++j;
    }
    if (j >= s.cases.size()) {
      if (group.empty()) return SExpr::listOf(sym("BLOCK"));
      // trailing labels with no body: nothing to do
      return SExpr::listOf(sym("BLOCK"));
    }
    group.push_back(&s.cases[j]);
    const SwitchCase& body = *group.back();

    SList stmts;
    stmts.push_back(sym("BLOCK"));
    for (const auto& st : body.body) lowerStmtInto(*st, stmts);
    SExpr bodyBlock = SExpr::list(std::move(stmts));

    if (body.isDefault && group.size() == 1) return bodyBlock;

    SExpr test = labelTest(group, scrut);
    if (j + 1 >= s.cases.size())
      return SExpr::listOf(sym("IF"), std::move(test), std::move(bodyBlock));
    SExpr rest = lowerCases(s, scrut, j + 1);
    return SExpr::listOf(sym("IF"), std::move(test), std::move(bodyBlock),
                         std::move(rest));
  }

  SExpr labelTest(const std::vector<const SwitchCase*>& group,
                  const SExpr& scrut) {
    std::vector<SExpr> tests;
    for (const SwitchCase* c : group)
      for (const auto& l : c->labels)
        tests.push_back(SExpr::listOf(sym("LOG="), scrut,
                                      valueOf(lower(*l)).term));
    SExpr acc = tests.back();
    for (std::size_t k = tests.size() - 1; k-- > 0;)
      acc = SExpr::listOf(sym("LOGIOR1"), tests[k], std::move(acc));
    return acc;
  }

  SExpr lowerReturnValue(const Stmt& s) {
    const TypePtr& rt = currentFn_->returnType;
    if (s.expr->kind == ExprKind::TupleCtor) {
      SList mv;
      mv.push_back(sym("MV"));
      for (std::size_t i = 0; i < s.expr->args.size(); ++i)
        mv.push_back(
            encode(lower(*s.expr->args[i]), rt->elems[i]->reg).term);
      return SExpr::list(std::move(mv));
    }
    if (rt->isReg() && !rt->reg.isMachine())
      return encode(lower(*s.expr), rt->reg).term;
    return valueOf(lower(*s.expr)).term;
  }
};

inline IrProgram lowerProgram(const Program& prog, const SymbolTables& tables) {
  return Lowering(prog, tables).lowerProgram();
}

} // namespace rac
