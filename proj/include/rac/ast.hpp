#pragma once

#include "rac/bits.hpp"
#include "rac/diagnostics.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rac {

// ---------------------------------------------------------------------------
// Resolved types (filled in by the type checker).

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct StructField {
  std::string name;
  TypePtr type;
};

struct Type {
  enum class K {
    Reg,     // register or machine scalar, incl. bool — format below
    NumInt,  // unbounded integer-valued intermediate
    NumRat,  // unbounded rational-valued intermediate (fixed-point arithmetic)
    Array,   // C array or array<T, N>
    Struct,
    Tuple,
  };
  K k = K::NumInt;
  RegFormat reg{};
  TypePtr elem;      // Array
  Int arraySize = 0; // Array
  std::string structName;
  std::vector<StructField> fields; // Struct
  std::vector<TypePtr> elems;      // Tuple

  bool isReg() const { return k == K::Reg; }
  bool isScalarNumeric() const {
    return k == K::Reg || k == K::NumInt || k == K::NumRat;
  }
  bool isIntegerValued() const {
    if (k == K::NumInt) return true;
    return k == K::Reg && !reg.isFixed();
  }
};

TypePtr inline makeRegType(RegFormat f) {
  auto t = std::make_shared<Type>();
  t->k = Type::K::Reg;
  t->reg = f;
  return t;
}
TypePtr inline makeNumInt() {
  static const TypePtr t = [] {
    auto p = std::make_shared<Type>();
    p->k = Type::K::NumInt;
    return p;
  }();
  return t;
}
TypePtr inline makeNumRat() {
  static const TypePtr t = [] {
    auto p = std::make_shared<Type>();
    p->k = Type::K::NumRat;
    return p;
  }();
  return t;
}

// ---------------------------------------------------------------------------
// Syntactic types, as written. Resolved against typedef/struct/enum tables
// during type checking; the spelling is kept for pseudocode rendering.

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct TypeSpec {
  enum class K { Named, Bool, UInt, Int, AcInt, AcFixed, Array, Tuple };
  K k = K::Named;
  SrcPos pos;
  std::string name;                    // Named
  ExprPtr widthExpr;                   // AcInt / AcFixed / Array size
  ExprPtr intBitsExpr;                 // AcFixed
  bool isSignedTemplate = false;       // AcInt / AcFixed
  std::unique_ptr<TypeSpec> elem;      // Array
  std::vector<TypeSpec> tupleElems;    // Tuple
  std::string spelling;
};

// ---------------------------------------------------------------------------
// Expressions.

enum class ExprKind {
  IntLit,
  BoolLit,
  Var,
  Unary,   // ! ~ - +
  Binary,  // arithmetic, shifts, bitwise, comparisons, && ||
  Ternary,
  Slice,   // x.slc<w>(base) or x[hi:lo]
  BitRef,  // x[i] where x is a register
  Index,   // a[i] where a is an array
  Field,   // s.f
  Call,
  Cast,       // T(e)
  TupleCtor,  // tuple<...>(e, ...) — return statements only
};

struct Expr {
  ExprKind kind;
  SrcPos pos;

  Int intVal;        // IntLit
  bool hexLit = false;
  bool boolVal = false; // BoolLit
  std::string name;  // Var, Call, Field member name
  std::string op;    // Unary / Binary
  ExprPtr a, b, c;   // operands: unary a; binary a,b; ternary a,b,c
                     // Slice: a = base, b = base-index; BitRef/Index: a, b
                     // Field/Cast: a
  std::vector<ExprPtr> args; // Call, TupleCtor
  int sliceWidth = 0;        // Slice (0 until known)
  ExprPtr sliceHi;           // Slice written as x[hi:lo] (pseudocode form)
  std::unique_ptr<TypeSpec> castType; // Cast / TupleCtor spec

  // set by typecheck
  TypePtr type;
};

inline ExprPtr makeExpr(ExprKind k, SrcPos pos) {
  auto e = std::make_unique<Expr>();
  e->kind = k;
  e->pos = pos;
  return e;
}

// ---------------------------------------------------------------------------
// Statements.

enum class StmtKind {
  VarDecl,
  Assign,      // lvalue op rhs; op in {=, +=, -=, <<=, >>=, |=, &=, ^=, ++, --}
  SliceAssign, // x.set_slc(i, v) / x[hi:lo] = v
  If,
  For,
  Switch,
  Return,
  Assert,
  Block,
  TupleAssign, // tie(a, b, ...) = f(...)
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Declarator {
  std::string name;
  SrcPos pos;
  ExprPtr init;                 // may be null
  std::vector<ExprPtr> arrayInit; // {…} initializer (global const arrays)
  ExprPtr arraySizeExpr;        // C array suffix
  TypePtr resolvedType;         // set by typecheck
  std::optional<Int> constValue;     // folded global scalar constant
  std::vector<Int> constArrayRaw;    // folded global array, encoded per element
};

// Loop-shape facts recorded by the validator for the code generator.
struct LoopInfo {
  std::string var;
  bool varDeclaredInInit = false;
  std::string cmpOp;   // < <= > >=
  const Expr* limit = nullptr;
  const Expr* extraTest = nullptr; // second conjunct of test1 && test2
  Int step;            // signed progress per iteration
};

struct SwitchCase {
  std::vector<ExprPtr> labels;
  bool isDefault = false;
  std::vector<StmtPtr> body;
  bool hasBreak = false;
  SrcPos pos;
};

struct Stmt {
  StmtKind kind;
  SrcPos pos;

  // VarDecl
  std::unique_ptr<TypeSpec> declType;
  bool isConst = false;
  std::vector<Declarator> decls;

  // Assign / SliceAssign: lhs, op, rhs (SliceAssign: lhs is Slice or BitRef)
  ExprPtr lhs;
  std::string op;
  ExprPtr rhs;

  // If: cond, thenS, elseS. For: init, cond, update, body. Switch: cond.
  ExprPtr cond;
  StmtPtr init, update;
  StmtPtr thenS, elseS, body;
  std::vector<SwitchCase> cases;

  // Return / Assert
  ExprPtr expr;

  // Block
  std::vector<StmtPtr> stmts;

  // TupleAssign
  std::vector<std::string> targets;
  std::vector<SrcPos> targetPos;
  ExprPtr call;

  std::optional<LoopInfo> loopInfo; // For, set by validate
};

inline StmtPtr makeStmt(StmtKind k, SrcPos pos) {
  auto s = std::make_unique<Stmt>();
  s->kind = k;
  s->pos = pos;
  return s;
}

// ---------------------------------------------------------------------------
// Top level.

struct TypedefDecl {
  std::string name;
  std::unique_ptr<TypeSpec> spec;
  SrcPos pos;
  TypePtr resolved;
};

struct EnumDecl {
  std::string name;
  std::vector<std::pair<std::string, ExprPtr>> items; // explicit value or null
  SrcPos pos;
};

struct StructDecl {
  std::string name;
  std::vector<std::pair<std::unique_ptr<TypeSpec>, Declarator>> fields;
  SrcPos pos;
  TypePtr resolved;
};

struct Param {
  std::string name;
  std::unique_ptr<TypeSpec> spec;
  SrcPos pos;
  TypePtr resolvedType;
};

struct FuncDef {
  std::string name;
  SrcPos pos;
  std::unique_ptr<TypeSpec> returnSpec;
  std::vector<Param> params;
  StmtPtr body; // Block
  TypePtr returnType;
};

struct GlobalConst {
  StmtPtr decl; // a const VarDecl
};

struct Program {
  std::vector<TypedefDecl> typedefs;
  std::vector<EnumDecl> enums;
  std::vector<StructDecl> structs;
  std::vector<GlobalConst> globals;
  std::vector<FuncDef> functions;

  const FuncDef* findFunction(std::string_view name) const {
    for (const auto& f : functions)
      if (f.name == name) return &f;
    return nullptr;
  }
};

} // namespace rac
