#pragma once

#include "rac/ast.hpp"
#include "rac/diagnostics.hpp"
#include "rac/primitives.hpp"
#include "rac/sexpr.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rac {

// Symbol information shared with the later stages (lowering, both
// evaluators). Keys are upper-cased names, matching the symbol space of
// the generated code.
struct GlobalConstInfo {
  TypePtr type;
  std::optional<Int> scalar;   // math value for scalar constants
  std::vector<Int> arrayRaw;   // encoded element values for arrays
};

struct SymbolTables {
  std::map<std::string, TypePtr> typedefs;
  std::map<std::string, Int> enumConsts;     // by upper-cased name
  std::map<std::string, GlobalConstInfo> globals;
  std::map<std::string, const FuncDef*> functions;
  std::vector<std::string> functionOrder;
};

// Annotates every expression with its type, resolves typedefs and enum
// constants, folds constant expressions in types and case labels, and
// rejects what the restrictions exclude at the type level (slice overflow,
// signed division, tuple misuse, identifier clashes with the generated
// symbol space).
class TypeChecker {
public:
  static std::vector<Diagnostic> run(Program& prog, SymbolTables& tables) {
    TypeChecker tc(prog, tables);
    tc.checkProgram();
    return tc.diags_.all();
  }

private:
  struct Abort {};

  struct VarInfo {
    TypePtr type;
    bool isConst = false;
  };

  Program& prog_;
  SymbolTables& tables_;
  DiagnosticSink diags_;
  std::vector<std::map<std::string, VarInfo>> scopes_; // keys upper-cased
  const FuncDef* currentFn_ = nullptr;

  TypeChecker(Program& prog, SymbolTables& tables)
      : prog_(prog), tables_(tables) {}

  [[noreturn]] void fail(SrcPos pos, std::string rule, std::string msg) {
    diags_.report(pos, std::move(rule), std::move(msg));
    throw Abort{};
  }

  static std::string up(const std::string& s) { return SExpr::upcase(s); }

  // --- reserved names ------------------------------------------------------

  static bool reservedName(const std::string& upper) {
    static const char* extra[] = {"T",   "NIL", "MV",   "LET", "IF",
                                  "IF1", "AND", "OR",   "NOT", "ASSERT",
                                  "QUOTE", "DEFUN", "DEFUND", "DEFUNDD"};
    if (isPrimitiveName(upper)) return true;
    for (const char* e : extra)
      if (upper == e) return true;
    return false;
  }

  void checkName(SrcPos pos, const std::string& name) {
    if (reservedName(up(name)))
      fail(pos, "NAME-CLASH",
           "'" + name + "' collides with a primitive of the generated code");
  }

  // --- program level ---------------------------------------------------------

  void checkProgram() {
    try {
      for (auto& td : prog_.typedefs) {
        if (tables_.typedefs.count(td.name))
          fail(td.pos, "NAME-CLASH", "duplicate typedef " + td.name);
        td.resolved = resolveSpec(*td.spec);
        tables_.typedefs[td.name] = td.resolved;
      }
      for (auto& en : prog_.enums) {
        Int next = 0;
        for (auto& [name, valExpr] : en.items) {
          if (valExpr) next = foldConst(*valExpr, "enum constant");
          if (tables_.enumConsts.count(up(name)))
            fail(en.pos, "NAME-CLASH", "duplicate enum constant " + name);
          tables_.enumConsts[up(name)] = next;
          next = next + 1;
        }
        // an enum-typed variable behaves as a machine int
        tables_.typedefs[en.name] = makeRegType(machineIntFmt());
      }
      for (auto& sd : prog_.structs) {
        auto t = std::make_shared<Type>();
        t->k = Type::K::Struct;
        t->structName = sd.name;
        for (auto& [spec, d] : sd.fields) {
          checkName(d.pos, d.name);
          TypePtr ft = resolveSpec(*spec);
          if (d.arraySizeExpr) ft = makeArrayOf(ft, *d.arraySizeExpr);
          for (const auto& f : t->fields)
            if (up(f.name) == up(d.name))
              fail(d.pos, "NAME-CLASH", "duplicate field " + d.name);
          t->fields.push_back({d.name, ft});
        }
        sd.resolved = t;
        if (tables_.typedefs.count(sd.name))
          fail(sd.pos, "NAME-CLASH", "duplicate type name " + sd.name);
        tables_.typedefs[sd.name] = t;
      }
      for (auto& g : prog_.globals) checkGlobalConst(*g.decl);
      for (auto& fn : prog_.functions) checkFunction(fn);
    } catch (Abort&) {
    }
  }

  void checkGlobalConst(Stmt& decl) {
    TypePtr base = resolveSpec(*decl.declType);
    for (auto& d : decl.decls) {
      checkName(d.pos, d.name);
      TypePtr t = d.arraySizeExpr ? makeArrayOf(base, *d.arraySizeExpr) : base;
      d.resolvedType = t;
      GlobalConstInfo info;
      info.type = t;
      if (t->k == Type::K::Array) {
        if (d.arrayInit.empty())
          fail(d.pos, "TYPE", "global constant array needs an initializer");
        if (Int(d.arrayInit.size()) != t->arraySize)
          fail(d.pos, "ARITY",
               "initializer has " + std::to_string(d.arrayInit.size()) +
                   " elements for an array of " + t->arraySize.str());
        if (!t->elem->isReg() || t->elem->reg.isFixed())
          fail(d.pos, "TYPE",
               "global constant arrays must have integer register elements");
        for (auto& e : d.arrayInit) {
          Int v = foldConst(*e, "array element");
          d.constArrayRaw.push_back(
              toRaw(Rational(v), t->elem->reg).magnitude);
        }
        info.arrayRaw = d.constArrayRaw;
      } else if (t->isReg() && !t->reg.isFixed()) {
        if (!d.init)
          fail(d.pos, "TYPE", "global constant needs an initializer");
        Int v = foldConst(*d.init, "global constant");
        // stored as the interpreted value of the encoded constant
        Int raw = toRaw(Rational(v), t->reg).magnitude;
        d.constValue = numerator(interpret({t->reg.width, raw}, t->reg));
        info.scalar = d.constValue;
      } else {
        fail(d.pos, "TYPE",
             "global constants must be integer scalars or arrays of them");
      }
      std::string key = up(d.name);
      if (tables_.globals.count(key) || tables_.enumConsts.count(key))
        fail(d.pos, "NAME-CLASH", "duplicate global " + d.name);
      tables_.globals[key] = std::move(info);
    }
  }

  // --- types -------------------------------------------------------------------

  TypePtr makeArrayOf(TypePtr elem, Expr& sizeExpr) {
    Int n = foldConst(sizeExpr, "array size");
    if (n <= 0) fail(sizeExpr.pos, "WIDTH", "array size must be positive");
    auto t = std::make_shared<Type>();
    t->k = Type::K::Array;
    t->elem = std::move(elem);
    t->arraySize = n;
    return t;
  }

  TypePtr resolveSpec(TypeSpec& ts) {
    switch (ts.k) {
    case TypeSpec::K::Bool:
      return makeRegType(boolFmt());
    case TypeSpec::K::UInt:
      return makeRegType(machineUIntFmt());
    case TypeSpec::K::Int:
      return makeRegType(machineIntFmt());
    case TypeSpec::K::AcInt: {
      Int w = foldConst(*ts.widthExpr, "register width");
      if (w < 1 || w > 4096)
        fail(ts.pos, "WIDTH", "register width must be in [1, 4096]");
      int wi = static_cast<int>(w);
      return makeRegType(ts.isSignedTemplate ? sintFmt(wi) : uintFmt(wi));
    }
    case TypeSpec::K::AcFixed: {
      Int w = foldConst(*ts.widthExpr, "register width");
      Int m = foldConst(*ts.intBitsExpr, "integer bits");
      if (w < 1 || w > 4096)
        fail(ts.pos, "WIDTH", "register width must be in [1, 4096]");
      if (m < -4096 || m > 4096) fail(ts.pos, "WIDTH", "integer bits out of range");
      int wi = static_cast<int>(w), mi = static_cast<int>(m);
      return makeRegType(ts.isSignedTemplate ? sfixedFmt(wi, mi)
                                             : ufixedFmt(wi, mi));
    }
    case TypeSpec::K::Array: {
      TypePtr elem = resolveSpec(*ts.elem);
      return makeArrayOf(elem, *ts.widthExpr);
    }
    case TypeSpec::K::Tuple: {
      auto t = std::make_shared<Type>();
      t->k = Type::K::Tuple;
      for (auto& e : ts.tupleElems) t->elems.push_back(resolveSpec(e));
      return t;
    }
    case TypeSpec::K::Named: {
      auto it = tables_.typedefs.find(ts.name);
      if (it == tables_.typedefs.end())
        fail(ts.pos, "UNKNOWN-IDENT", "unknown type " + ts.name);
      return it->second;
    }
    }
    fail(ts.pos, "TYPE", "unsupported type");
  }

  // --- constant folding ----------------------------------------------------------

  std::optional<Int> tryFoldConst(const Expr& e) {
    switch (e.kind) {
    case ExprKind::IntLit:
      return e.intVal;
    case ExprKind::BoolLit:
      return Int(e.boolVal ? 1 : 0);
    case ExprKind::Var: {
      auto en = tables_.enumConsts.find(up(e.name));
      if (en != tables_.enumConsts.end()) return en->second;
      auto g = tables_.globals.find(up(e.name));
      if (g != tables_.globals.end() && g->second.scalar) return g->second.scalar;
      return std::nullopt;
    }
    case ExprKind::Unary: {
      auto a = tryFoldConst(*e.a);
      if (!a) return std::nullopt;
      if (e.op == "-") return -*a;
      if (e.op == "+") return a;
      if (e.op == "~") return -*a - 1;
      if (e.op == "!") return Int(*a == 0 ? 1 : 0);
      return std::nullopt;
    }
    case ExprKind::Binary: {
      auto a = tryFoldConst(*e.a), b = tryFoldConst(*e.b);
      if (!a || !b) return std::nullopt;
      if (e.op == "+") return *a + *b;
      if (e.op == "-") return *a - *b;
      if (e.op == "*") return *a * *b;
      if (e.op == "/") return *b == 0 ? std::nullopt : std::optional(floorDiv(*a, *b));
      if (e.op == "<<")
        return (*b < 0 || *b > 4096) ? std::nullopt
                                     : std::optional(*a << static_cast<int>(*b));
      if (e.op == ">>")
        return (*b < 0 || *b > 4096) ? std::nullopt
                                     : std::optional(floorShift(*a, -static_cast<int>(*b)));
      if (e.op == "&") return logandPrim(*a, *b);
      if (e.op == "|") return logiorPrim(*a, *b);
      if (e.op == "^") return logxorPrim(*a, *b);
      return std::nullopt;
    }
    default:
      return std::nullopt;
    }
  }

  Int foldConst(Expr& e, const char* what) {
    auto v = tryFoldConst(e);
    if (!v)
      fail(e.pos, "TYPE", std::string(what) + " must be a constant expression");
    return *v;
  }

  // --- scopes ------------------------------------------------------------------

  void declare(SrcPos pos, const std::string& name, TypePtr type,
               bool isConst) {
    checkName(pos, name);
    std::string key = up(name);
    for (const auto& scope : scopes_)
      if (scope.count(key))
        fail(pos, "NAME-CLASH",
             "'" + name + "' redeclares a name already in scope (names are "
             "case-insensitive after translation)");
    if (tables_.globals.count(key) || tables_.enumConsts.count(key))
      fail(pos, "NAME-CLASH", "'" + name + "' shadows a global constant");
    scopes_.back()[key] = {std::move(type), isConst};
  }

  const VarInfo* lookup(const std::string& name) const {
    std::string key = up(name);
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(key);
      if (f != it->end()) return &f->second;
    }
    return nullptr;
  }

  // --- functions ------------------------------------------------------------------

  void checkFunction(FuncDef& fn) {
    checkName(fn.pos, fn.name);
    if (tables_.functions.count(up(fn.name)))
      fail(fn.pos, "NAME-CLASH", "duplicate function " + fn.name);
    currentFn_ = &fn;
    fn.returnType = resolveSpec(*fn.returnSpec);
    if (fn.returnType->k == Type::K::Tuple) {
      for (const auto& el : fn.returnType->elems)
        if (!el->isReg())
          fail(fn.pos, "TYPE", "tuple components must be scalar registers");
    }
    scopes_.clear();
    scopes_.emplace_back();
    for (auto& p : fn.params) {
      p.resolvedType = resolveSpec(*p.spec);
      if (p.resolvedType->k == Type::K::Tuple)
        fail(p.pos, "TUPLE-CONTEXT", "tuple parameters are not allowed");
      declare(p.pos, p.name, p.resolvedType, false);
    }
    checkBlock(*fn.body);
    scopes_.pop_back();
    tables_.functions[up(fn.name)] = &fn;
    tables_.functionOrder.push_back(up(fn.name));
    currentFn_ = nullptr;
  }

  void checkBlock(Stmt& block) {
    scopes_.emplace_back();
    for (auto& s : block.stmts) checkStmt(*s);
    scopes_.pop_back();
  }

  void checkStmt(Stmt& s) {
    switch (s.kind) {
    case StmtKind::Block:
      checkBlock(s);
      break;
    case StmtKind::VarDecl:
      checkVarDecl(s);
      break;
    case StmtKind::Assign:
      checkAssign(s);
      break;
    case StmtKind::SliceAssign:
      checkSliceAssign(s);
      break;
    case StmtKind::If:
      checkCondition(*s.cond);
      checkStmt(*s.thenS);
      if (s.elseS) checkStmt(*s.elseS);
      break;
    case StmtKind::For:
      checkFor(s);
      break;
    case StmtKind::Switch:
      checkSwitchTypes(s);
      break;
    case StmtKind::Return:
      checkReturn(s);
      break;
    case StmtKind::Assert:
      checkCondition(*s.expr);
      break;
    case StmtKind::TupleAssign:
      checkTupleAssign(s);
      break;
    }
  }

  void checkVarDecl(Stmt& s) {
    TypePtr base = resolveSpec(*s.declType);
    if (base->k == Type::K::Tuple)
      fail(s.pos, "TUPLE-CONTEXT",
           "tuple types may only be used as function return types");
    for (auto& d : s.decls) {
      TypePtr t = d.arraySizeExpr ? makeArrayOf(base, *d.arraySizeExpr) : base;
      d.resolvedType = t;
      if (!d.arrayInit.empty())
        fail(d.pos, "SUBSET",
             "brace initializers are only supported for global constant "
             "arrays");
      if (d.init) {
        checkExpr(*d.init);
        requireConvertible(d.init->pos, d.init->type, t, "initializer");
      } else if (s.isConst) {
        fail(d.pos, "TYPE", "a constant declaration needs an initializer");
      }
      declare(d.pos, d.name, t, s.isConst);
    }
  }

  void checkAssign(Stmt& s) {
    TypePtr lt = checkLvalue(*s.lhs);
    if (s.op == "++" || s.op == "--") {
      if (!lt->isReg() || !lt->reg.isMachine())
        fail(s.pos, "TYPE", "++/-- require a uint or int variable");
      return;
    }
    checkExpr(*s.rhs);
    if (s.lhs->kind == ExprKind::BitRef) {
      if (s.op != "=")
        fail(s.pos, "TYPE", "compound assignment to a bit is not supported");
      requireBitValue(*s.rhs);
      return;
    }
    if (s.op == "=") {
      requireConvertible(s.rhs->pos, s.rhs->type, lt, "assignment");
      return;
    }
    // compound assignment: target must be a numeric scalar
    if (!lt->isScalarNumeric())
      fail(s.pos, "TYPE", "compound assignment needs a numeric target");
    if (s.op == "<<=" || s.op == ">>=" || s.op == "|=" || s.op == "&=" ||
        s.op == "^=") {
      if (!lt->isIntegerValued() || !s.rhs->type->isIntegerValued())
        fail(s.pos, "TYPE", s.op + " requires integer operands");
    }
    requireScalar(s.rhs->pos, s.rhs->type, "assignment source");
  }

  void checkSliceAssign(Stmt& s) {
    Expr& lhs = *s.lhs;
    if (lhs.kind == ExprKind::Call && lhs.name == "set_slc") {
      // x.set_slc(base, value): slice width from the value's type
      TypePtr bt = checkLvalue(*lhs.a);
      if (!bt->isReg() || bt->reg.isMachine())
        fail(lhs.pos, "TYPE", "set_slc requires a register");
      checkExpr(*lhs.args[0]);
      requireInteger(*lhs.args[0], "slice base index");
      checkExpr(*lhs.args[1]);
      TypePtr vt = lhs.args[1]->type;
      if (!vt->isReg() || vt->reg.isMachine() || vt->reg.isFixed())
        fail(lhs.args[1]->pos, "TYPE",
             "the written value must be a register, whose type fixes the "
             "slice width");
      lhs.sliceWidth = vt->reg.width;
      auto base = tryFoldConst(*lhs.args[0]);
      if (base && *base + lhs.sliceWidth > bt->reg.width) {
        Int hi = *base + lhs.sliceWidth - 1;
        fail(lhs.pos, "SLICE-RANGE",
             "slice [" + hi.str() + ":" + base->str() +
                 "] exceeds a width-" + std::to_string(bt->reg.width) +
                 " register");
      }
      if (base && *base < 0)
        fail(lhs.pos, "SLICE-RANGE", "slice base must be nonnegative");
      lhs.type = bt;
      return;
    }
    // x[hi:lo] = value
    TypePtr bt = checkLvalue(*lhs.a);
    if (!bt->isReg() || bt->reg.isMachine())
      fail(lhs.pos, "TYPE", "slice assignment requires a register");
    checkExpr(*lhs.sliceHi);
    checkExpr(*lhs.b);
    requireInteger(*lhs.b, "slice base index");
    resolveSliceWidth(lhs);
    checkExpr(*s.rhs);
    TypePtr vt = s.rhs->type;
    if (!vt->isReg() || vt->reg.isMachine() || vt->reg.isFixed() ||
        vt->reg.width != lhs.sliceWidth)
      fail(s.rhs->pos, "TYPE",
           "slice assignment needs a register value of width " +
               std::to_string(lhs.sliceWidth));
    auto lo = tryFoldConst(*lhs.b);
    if (lo && *lo + lhs.sliceWidth > bt->reg.width)
      fail(lhs.pos, "SLICE-RANGE", "slice exceeds the register width");
    lhs.type = bt;
  }

  void checkFor(Stmt& s) {
    scopes_.emplace_back();
    checkStmt(*s.init);
    if (!s.loopInfo)
      fail(s.pos, "LOOP-FORM", "loop failed validation");
    if (!s.loopInfo->varDeclaredInInit) {
      const VarInfo* vi = lookup(s.loopInfo->var);
      if (!vi)
        fail(s.pos, "UNKNOWN-IDENT",
             "loop variable " + s.loopInfo->var + " is not declared");
      if (!vi->type->isReg() || !vi->type->reg.isMachine())
        fail(s.pos, "LOOP-FORM", "the loop variable must be of type uint or int");
    }
    checkCondition(*s.cond);
    checkStmt(*s.update);
    checkStmt(*s.body);
    scopes_.pop_back();
  }

  void checkSwitchTypes(Stmt& s) {
    checkExpr(*s.cond);
    requireInteger(*s.cond, "switch scrutinee");
    std::vector<Int> seen;
    for (auto& c : s.cases) {
      for (auto& l : c.labels) {
        Int v = foldConst(*l, "case label");
        for (const Int& x : seen)
          if (x == v)
            fail(l->pos, "SWITCH-FORM", "duplicate case label " + v.str());
        seen.push_back(v);
      }
      scopes_.emplace_back();
      for (auto& st : c.body) checkStmt(*st);
      scopes_.pop_back();
    }
  }

  void checkReturn(Stmt& s) {
    TypePtr rt = currentFn_->returnType;
    if (s.expr->kind == ExprKind::TupleCtor) {
      if (rt->k != Type::K::Tuple)
        fail(s.expr->pos, "TYPE", "function does not return a tuple");
      if (s.expr->args.size() != rt->elems.size())
        fail(s.expr->pos, "ARITY",
             "tuple return needs " + std::to_string(rt->elems.size()) +
                 " components");
      for (std::size_t i = 0; i < s.expr->args.size(); ++i) {
        checkExpr(*s.expr->args[i]);
        requireConvertible(s.expr->args[i]->pos, s.expr->args[i]->type,
                           rt->elems[i], "tuple component");
      }
      s.expr->type = rt;
      return;
    }
    if (rt->k == Type::K::Tuple)
      fail(s.expr->pos, "TUPLE-CONTEXT",
           "a tuple-returning function must return tuple<...>(...)");
    checkExpr(*s.expr);
    requireConvertible(s.expr->pos, s.expr->type, rt, "return value");
  }

  void checkTupleAssign(Stmt& s) {
    Expr& call = *s.call;
    checkCallArgs(call);
    const FuncDef* callee = findFunction(call);
    TypePtr rt = callee->returnType;
    if (rt->k != Type::K::Tuple)
      fail(call.pos, "TUPLE-CONTEXT",
           "tie(...) requires a tuple-returning function");
    if (s.targets.size() != rt->elems.size())
      fail(s.pos, "ARITY",
           "tie(...) needs " + std::to_string(rt->elems.size()) + " targets");
    for (std::size_t i = 0; i < s.targets.size(); ++i) {
      const VarInfo* vi = lookup(s.targets[i]);
      if (!vi)
        fail(s.targetPos[i], "UNKNOWN-IDENT",
             "undeclared tie target " + s.targets[i]);
      if (vi->isConst)
        fail(s.targetPos[i], "TYPE", "cannot assign to a constant");
      if (!(vi->type->isReg() && rt->elems[i]->isReg() &&
            vi->type->reg == rt->elems[i]->reg))
        fail(s.targetPos[i], "TYPE",
             "tie target type must match the returned component exactly");
      for (std::size_t j = i + 1; j < s.targets.size(); ++j)
        if (up(s.targets[i]) == up(s.targets[j]))
          fail(s.targetPos[j], "NAME-CLASH", "duplicate tie target");
    }
    call.type = rt;
  }

  // --- expressions -------------------------------------------------------------

  TypePtr checkLvalue(Expr& e) {
    switch (e.kind) {
    case ExprKind::Var: {
      const VarInfo* vi = lookup(e.name);
      if (!vi) {
        if (tables_.globals.count(up(e.name)) ||
            tables_.enumConsts.count(up(e.name)))
          fail(e.pos, "TYPE", "cannot assign to a constant");
        fail(e.pos, "UNKNOWN-IDENT", "undeclared variable " + e.name);
      }
      if (vi->isConst) fail(e.pos, "TYPE", "cannot assign to a constant");
      e.type = vi->type;
      return e.type;
    }
    case ExprKind::Index: {
      TypePtr bt = checkLvalue(*e.a);
      checkExpr(*e.b);
      requireInteger(*e.b, "index");
      if (bt->k == Type::K::Array) {
        e.type = bt->elem;
        return e.type;
      }
      if (bt->isReg() && !bt->reg.isMachine()) {
        e.kind = ExprKind::BitRef;
        e.type = makeRegType(boolFmt());
        return e.type;
      }
      fail(e.pos, "TYPE", "only arrays and registers can be indexed");
    }
    case ExprKind::Field: {
      TypePtr bt = checkLvalue(*e.a);
      if (bt->k != Type::K::Struct)
        fail(e.pos, "TYPE", "field access requires a struct");
      for (const auto& f : bt->fields)
        if (up(f.name) == up(e.name)) {
          e.type = f.type;
          return e.type;
        }
      fail(e.pos, "UNKNOWN-IDENT",
           "no field " + e.name + " in struct " + bt->structName);
    }
    default:
      fail(e.pos, "TYPE", "not an assignable place");
    }
  }

  void checkCondition(Expr& e) {
    checkExpr(e);
    requireScalar(e.pos, e.type, "condition");
  }

  const FuncDef* findFunction(const Expr& call) {
    auto it = tables_.functions.find(up(call.name));
    if (it == tables_.functions.end())
      fail(call.pos, "UNKNOWN-IDENT",
           "call to unknown or not-yet-defined function " + call.name);
    return it->second;
  }

  void checkCallArgs(Expr& e) {
    const FuncDef* callee = findFunction(e);
    if (e.args.size() != callee->params.size())
      fail(e.pos, "ARITY",
           callee->name + " takes " + std::to_string(callee->params.size()) +
               " arguments, got " + std::to_string(e.args.size()));
    for (std::size_t i = 0; i < e.args.size(); ++i) {
      checkExpr(*e.args[i]);
      requireConvertible(e.args[i]->pos, e.args[i]->type,
                         callee->params[i].resolvedType, "argument");
    }
    e.type = callee->returnType;
  }

  void checkExpr(Expr& e) {
    switch (e.kind) {
    case ExprKind::IntLit:
      e.type = makeRegType(machineIntFmt());
      return;
    case ExprKind::BoolLit:
      e.type = makeRegType(boolFmt());
      return;
    case ExprKind::Var: {
      if (const VarInfo* vi = lookup(e.name)) {
        e.type = vi->type;
        return;
      }
      auto en = tables_.enumConsts.find(up(e.name));
      if (en != tables_.enumConsts.end()) {
        e.type = makeRegType(machineIntFmt());
        return;
      }
      auto g = tables_.globals.find(up(e.name));
      if (g != tables_.globals.end()) {
        e.type = g->second.type;
        return;
      }
      fail(e.pos, "UNKNOWN-IDENT", "undeclared identifier " + e.name);
    }
    case ExprKind::Unary:
      checkExpr(*e.a);
      if (e.op == "!") {
        requireScalar(e.a->pos, e.a->type, "operand of !");
        e.type = makeRegType(boolFmt());
      } else if (e.op == "~") {
        requireInteger(*e.a, "operand of ~");
        if (e.a->type->isReg() && !e.a->type->reg.isMachine() &&
            !e.a->type->reg.isSigned())
          e.type = e.a->type; // complement within the register's width
        else
          e.type = makeNumInt();
      } else {
        requireScalar(e.a->pos, e.a->type, "operand");
        e.type = e.a->type->isIntegerValued() ? makeNumInt() : makeNumRat();
      }
      return;
    case ExprKind::Binary:
      checkBinary(e);
      return;
    case ExprKind::Ternary: {
      checkCondition(*e.a);
      checkExpr(*e.b);
      checkExpr(*e.c);
      requireScalar(e.b->pos, e.b->type, "conditional branch");
      requireScalar(e.c->pos, e.c->type, "conditional branch");
      if (e.b->type->isReg() && e.c->type->isReg() &&
          e.b->type->reg == e.c->type->reg)
        e.type = e.b->type;
      else if (e.b->type->isIntegerValued() && e.c->type->isIntegerValued())
        e.type = makeNumInt();
      else
        e.type = makeNumRat();
      return;
    }
    case ExprKind::Slice: {
      checkExpr(*e.a);
      if (!e.a->type->isReg() || e.a->type->reg.isMachine())
        fail(e.pos, "TYPE", "slc requires a register");
      checkExpr(*e.b);
      requireInteger(*e.b, "slice base index");
      if (e.c) { // slc<w>(base)
        Int w = foldConst(*e.c, "slice width");
        if (w < 1) fail(e.pos, "WIDTH", "slice width must be positive");
        e.sliceWidth = static_cast<int>(w);
      } else {
        checkExpr(*e.sliceHi);
        resolveSliceWidth(e);
      }
      e.type = makeRegType(uintFmt(e.sliceWidth));
      return;
    }
    case ExprKind::Index: {
      checkExpr(*e.a);
      checkExpr(*e.b);
      requireInteger(*e.b, "index");
      if (e.a->type->k == Type::K::Array) {
        e.type = e.a->type->elem;
        return;
      }
      if (e.a->type->isReg() && !e.a->type->reg.isMachine()) {
        e.kind = ExprKind::BitRef;
        e.type = makeRegType(boolFmt());
        return;
      }
      fail(e.pos, "TYPE", "only arrays and registers can be indexed");
    }
    case ExprKind::BitRef:
      checkExpr(*e.a);
      checkExpr(*e.b);
      requireInteger(*e.b, "bit index");
      e.type = makeRegType(boolFmt());
      return;
    case ExprKind::Field: {
      checkExpr(*e.a);
      if (e.a->type->k != Type::K::Struct)
        fail(e.pos, "TYPE", "field access requires a struct");
      for (const auto& f : e.a->type->fields)
        if (up(f.name) == up(e.name)) {
          e.type = f.type;
          return;
        }
      fail(e.pos, "UNKNOWN-IDENT",
           "no field " + e.name + " in struct " + e.a->type->structName);
    }
    case ExprKind::Call: {
      if (e.name == "set_slc")
        fail(e.pos, "TYPE", "set_slc is a statement, not an expression");
      checkCallArgs(e);
      if (e.type->k == Type::K::Tuple)
        fail(e.pos, "TUPLE-CONTEXT",
             "a tuple-valued call is only allowed in tie(...) = f(...)");
      return;
    }
    case ExprKind::Cast: {
      TypePtr t = resolveSpec(*e.castType);
      if (!t->isReg())
        fail(e.pos, "TYPE", "casts are only supported for scalar types");
      checkExpr(*e.a);
      requireScalar(e.a->pos, e.a->type, "cast operand");
      e.type = t;
      return;
    }
    case ExprKind::TupleCtor:
      fail(e.pos, "TUPLE-CONTEXT",
           "tuple construction is only allowed in a return statement");
    }
  }

  void checkBinary(Expr& e) {
    checkExpr(*e.a);
    checkExpr(*e.b);
    const std::string& op = e.op;
    if (op == "%")
      fail(e.pos, "SUBSET", "the modulo operator is not supported");
    if (op == "&&" || op == "||") {
      requireScalar(e.a->pos, e.a->type, "logical operand");
      requireScalar(e.b->pos, e.b->type, "logical operand");
      e.type = makeRegType(boolFmt());
      return;
    }
    if (op == "==" || op == "!=" || op == "<" || op == "<=" || op == ">" ||
        op == ">=") {
      requireScalar(e.a->pos, e.a->type, "comparison operand");
      requireScalar(e.b->pos, e.b->type, "comparison operand");
      e.type = makeRegType(boolFmt());
      return;
    }
    if (op == "&" || op == "|" || op == "^") {
      requireInteger(*e.a, "bitwise operand");
      requireInteger(*e.b, "bitwise operand");
      const Type& ta = *e.a->type;
      const Type& tb = *e.b->type;
      if (ta.isReg() && tb.isReg() && !ta.reg.isMachine() &&
          !tb.reg.isMachine())
        e.type = makeRegType(uintFmt(std::max(ta.reg.width, tb.reg.width)));
      else
        e.type = makeNumInt();
      return;
    }
    if (op == "<<" || op == ">>") {
      requireInteger(*e.a, "shift operand");
      requireInteger(*e.b, "shift count");
      e.type = makeNumInt();
      return;
    }
    if (op == "/") {
      requireInteger(*e.a, "division operand");
      requireInteger(*e.b, "division operand");
      if (!provablyNonnegative(*e.a) || !provablyNonnegative(*e.b))
        fail(e.pos, "SIGNED-DIV",
             "division is only supported for unsigned operands");
      e.type = makeNumInt();
      return;
    }
    // + - *
    requireScalar(e.a->pos, e.a->type, "arithmetic operand");
    requireScalar(e.b->pos, e.b->type, "arithmetic operand");
    e.type = (e.a->type->isIntegerValued() && e.b->type->isIntegerValued())
                 ? makeNumInt()
                 : makeNumRat();
  }

  bool provablyNonnegative(const Expr& e) {
    if (e.kind == ExprKind::IntLit) return e.intVal >= 0;
    const Type& t = *e.type;
    if (t.isReg())
      return t.reg.kind == RegKind::UInt || t.reg.kind == RegKind::Bool ||
             t.reg.kind == RegKind::MachineUInt;
    return false;
  }

  // --- requirements ---------------------------------------------------------------

  void requireScalar(SrcPos pos, const TypePtr& t, const char* what) {
    if (!t || !t->isScalarNumeric())
      fail(pos, "TYPE", std::string(what) + " must be a numeric scalar");
  }

  void requireInteger(const Expr& e, const char* what) {
    if (!e.type || !e.type->isScalarNumeric() || !e.type->isIntegerValued())
      fail(e.pos, "TYPE", std::string(what) + " must be integer-valued");
  }

  void requireBitValue(const Expr& e) {
    if (e.kind == ExprKind::IntLit && (e.intVal == 0 || e.intVal == 1)) return;
    if (e.type && e.type->isReg() && e.type->reg.kind == RegKind::Bool) return;
    fail(e.pos, "TYPE",
         "a bit assignment needs a bool value or a 0/1 literal");
  }

  void requireConvertible(SrcPos pos, const TypePtr& from, const TypePtr& to,
                          const char* what) {
    if (!from || !to) fail(pos, "TYPE", "untyped expression");
    if (to->isScalarNumeric()) {
      // any numeric scalar converts; assignment encodes with floor and wrap
      if (!from->isScalarNumeric())
        fail(pos, "TYPE", std::string(what) + " must be a numeric scalar");
      return;
    }
    if (to->k == Type::K::Array) {
      if (from->k != Type::K::Array || !(from->elem->isReg()) ||
          !(to->elem->isReg()) || !(from->elem->reg == to->elem->reg) ||
          from->arraySize != to->arraySize)
        fail(pos, "TYPE", std::string(what) + " must be an identical array type");
      return;
    }
    if (to->k == Type::K::Struct) {
      if (from->k != Type::K::Struct || from->structName != to->structName)
        fail(pos, "TYPE", std::string(what) + " must be the same struct type");
      return;
    }
    fail(pos, "TYPE", "unsupported conversion");
  }

  // x[hi:lo]: the width hi-lo+1 must be a constant, found by cancelling the
  // linear parts of the two index expressions.
  void resolveSliceWidth(Expr& e) {
    auto wopt = constDifference(*e.sliceHi, *e.b);
    if (!wopt)
      fail(e.pos, "SLICE-RANGE",
           "slice bounds must differ by a constant width");
    Int w = *wopt + 1;
    if (w < 1) fail(e.pos, "SLICE-RANGE", "slice is empty");
    e.sliceWidth = static_cast<int>(w);
  }

  // hi - lo when both normalize to linear polynomials over the same terms.
  std::optional<Int> constDifference(const Expr& hi, const Expr& lo) {
    std::map<std::string, Int> ph, pl;
    Int ch = 0, cl = 0;
    if (!linearize(hi, 1, ph, ch) || !linearize(lo, 1, pl, cl))
      return std::nullopt;
    for (auto& [k, v] : pl) ph[k] -= v;
    for (auto& [k, v] : ph)
      if (v != 0) return std::nullopt;
    return ch - cl;
  }

  bool linearize(const Expr& e, Int scale, std::map<std::string, Int>& terms,
                 Int& constant) {
    switch (e.kind) {
    case ExprKind::IntLit:
      constant += scale * e.intVal;
      return true;
    case ExprKind::Var: {
      if (auto v = tryFoldConst(e)) {
        constant += scale * *v;
        return true;
      }
      terms[up(e.name)] += scale;
      return true;
    }
    case ExprKind::Unary:
      if (e.op == "-") return linearize(*e.a, -scale, terms, constant);
      if (e.op == "+") return linearize(*e.a, scale, terms, constant);
      return false;
    case ExprKind::Binary:
      if (e.op == "+")
        return linearize(*e.a, scale, terms, constant) &&
               linearize(*e.b, scale, terms, constant);
      if (e.op == "-")
        return linearize(*e.a, scale, terms, constant) &&
               linearize(*e.b, -scale, terms, constant);
      if (e.op == "*") {
        if (auto c = tryFoldConst(*e.a))
          return linearize(*e.b, scale * *c, terms, constant);
        if (auto c = tryFoldConst(*e.b))
          return linearize(*e.a, scale * *c, terms, constant);
        return false;
      }
      return false;
    default:
      return false;
    }
  }
};

inline std::vector<Diagnostic> typecheckProgram(Program& prog,
                                                SymbolTables& tables) {
  return TypeChecker::run(prog, tables);
}

} // namespace rac
