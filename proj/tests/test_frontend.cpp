#include "rac/parser.hpp"
#include "rac/typecheck.hpp"
#include "rac/validate.hpp"

#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace rac;
using ractest::corpusPath;
using ractest::readFile;

namespace {

ParseResult parseText(const std::string& src) { return parseSource(src); }

// Parse + validate + typecheck; returns the first diagnostic rule id, or ""
// if accepted.
std::string firstRejection(const std::string& src) {
  ParseResult r = parseSource(src);
  if (!r.ok()) return r.diagnostics.at(0).ruleId;
  auto vd = validateProgram(*r.program);
  if (!vd.empty()) return vd.at(0).ruleId;
  SymbolTables tables;
  auto td = typecheckProgram(*r.program, tables);
  if (!td.empty()) return td.at(0).ruleId;
  return "";
}

std::string wrapBody(const std::string& body) {
  return "typedef ac_int<8, false> ui8;\ntypedef ac_int<8, true> si8;\n"
         "ui8 f(ui8 x) {\n" + body + "\n}\n";
}

// Independent oracle for the return-placement conditions, kept separate
// from the validator so the two can be tested against each other.
bool returnBlockOk(const Stmt& block);

bool returnCarrierOk(const Stmt& s) {
  if (s.kind == StmtKind::Return) return true;
  if (s.kind == StmtKind::If) {
    if (!s.elseS) return false;
    auto branchOk = [](const Stmt& b) {
      if (b.kind == StmtKind::Return) return true;
      if (b.kind == StmtKind::If) return returnCarrierOk(b);
      if (b.kind == StmtKind::Block) return returnBlockOk(b);
      return false;
    };
    return branchOk(*s.thenS) && branchOk(*s.elseS);
  }
  return false;
}

bool hasReturn(const Stmt& s) {
  if (s.kind == StmtKind::Return) return true;
  for (const auto* p : {&s.thenS, &s.elseS, &s.body, &s.init, &s.update})
    if (*p && hasReturn(**p)) return true;
  for (const auto& c : s.cases)
    for (const auto& st : c.body)
      if (hasReturn(*st)) return true;
  for (const auto& st : s.stmts)
    if (hasReturn(*st)) return true;
  return false;
}

bool returnBlockOk(const Stmt& block) {
  if (block.stmts.empty()) return false;
  for (std::size_t i = 0; i + 1 < block.stmts.size(); ++i)
    if (hasReturn(*block.stmts[i])) return false;
  return returnCarrierOk(*block.stmts.back());
}

} // namespace

TEST_CASE("the corpus parses, validates and typechecks unmodified") {
  for (const char* name : {"add8.rac", "clz64.rac", "clz64_linear.rac",
                           "normalize.rac", "compare64.rac"}) {
    INFO(name);
    ParseResult r = parseText(readFile(corpusPath(name)));
    for (const auto& d : r.diagnostics) UNSCOPED_INFO(d.ruleId + ": " + d.message);
    REQUIRE(r.ok());
    auto vd = validateProgram(*r.program);
    for (const auto& d : vd) UNSCOPED_INFO(d.ruleId + ": " + d.message);
    REQUIRE(vd.empty());
    SymbolTables tables;
    auto td = typecheckProgram(*r.program, tables);
    for (const auto& d : td) UNSCOPED_INFO(d.ruleId + ": " + d.message);
    REQUIRE(td.empty());
  }
}

TEST_CASE("add8 parses to one function with the expected shape") {
  ParseResult r = parseText(readFile(corpusPath("add8.rac")));
  REQUIRE(r.ok());
  REQUIRE(r.program->functions.size() == 1);
  const FuncDef& fn = r.program->functions[0];
  CHECK(fn.name == "add8");
  CHECK(fn.params.size() == 2);
  // body: result/sum declarations, a for, a return
  REQUIRE(fn.body->stmts.size() == 4);
  const Stmt& loop = *fn.body->stmts[2];
  REQUIRE(loop.kind == StmtKind::For);
  const Stmt& loopBody = *loop.body;
  REQUIRE(loopBody.kind == StmtKind::Block);
  const Stmt& ifChain = *loopBody.stmts[3];
  REQUIRE(ifChain.kind == StmtKind::If);
  REQUIRE(ifChain.elseS);
  CHECK(ifChain.elseS->kind == StmtKind::If); // nested else-if chain
  CHECK(fn.body->stmts[3]->kind == StmtKind::Return);
}

TEST_CASE("empty input is a program with zero functions") {
  ParseResult r = parseText("");
  REQUIRE(r.ok());
  CHECK(r.program->functions.empty());
}

TEST_CASE("excluded constructs are rejected with rule SUBSET") {
  CHECK(firstRejection("int f() { while (1) {} }") == "SUBSET");
  CHECK(firstRejection("int f() { do {} while (1); }") == "SUBSET");
  CHECK(firstRejection(wrapBody("for (uint i=0; i<4; i++) { continue; }\n"
                                "return x;")) == "SUBSET");
  CHECK(firstRejection(wrapBody("for (uint i=0; i<4; i++) { break; }\n"
                                "return x;")) == "SUBSET");
  CHECK(firstRejection("int f(int* p) { return 0; }") == "SUBSET");
  CHECK(firstRejection("int f(int& r) { return 0; }") == "SUBSET");
  CHECK(firstRejection("int f() { goto done; }") == "SUBSET");
  CHECK(firstRejection("double f() { return 0; }") == "SUBSET");
  CHECK(firstRejection("int f(int x) { return x % 2; }") == "SUBSET");
  CHECK(firstRejection("#define N 4\nint f() { return 0; }") == "SUBSET");
}

TEST_CASE("loop form restrictions") {
  // accepted: comparison plus an extra boolean conjunct, nonconstant limit
  CHECK(firstRejection(
            "typedef ac_int<8, false> ui8;\n"
            "ui8 f(ui8 x, uint n) {\n"
            "  ui8 r = x;\n"
            "  for (uint i=0; i<n && !r[0]; i++) { r = r + 1; }\n"
            "  return r;}\n") == "");
  // accepted: descending with >=
  CHECK(firstRejection(wrapBody(
            "ui8 r = 0;\n"
            "for (uint i=8; i>=1; i--) { r = r + 1; }\n"
            "return r;")) == "");
  // rejected: no progress
  CHECK(firstRejection(wrapBody(
            "ui8 r = 0;\n"
            "for (uint i=0; i<4; i=i) { r = r + 1; }\n"
            "return r;")) == "LOOP-FORM");
  // rejected: steps away from the limit
  CHECK(firstRejection(wrapBody(
            "ui8 r = 0;\n"
            "for (uint i=0; i<4; i--) { r = r + 1; }\n"
            "return r;")) == "LOOP-FORM");
  // rejected: non-constant step
  CHECK(firstRejection(wrapBody(
            "ui8 r = 0;\n"
            "for (uint i=1; i<64; i=i+i) { r = r + 1; }\n"
            "return r;")) == "LOOP-FORM");
  // rejected: loop variable must be a machine integer
  CHECK(firstRejection(wrapBody(
            "ui8 r = 0;\n"
            "for (ui8 i=0; i<4; i++) { r = r + 1; }\n"
            "return r;")) == "LOOP-FORM");
  // rejected: test must compare the loop variable
  CHECK(firstRejection(wrapBody(
            "ui8 r = 0;\n"
            "for (uint i=0; x<4; i++) { r = r + 1; }\n"
            "return r;")) == "LOOP-FORM");
  // rejected: limit depends on the loop variable
  CHECK(firstRejection(wrapBody(
            "ui8 r = 0;\n"
            "for (uint i=0; i<i+1; i++) { r = r + 1; }\n"
            "return r;")) == "LOOP-FORM");
  // rejected: body assigns the loop variable
  CHECK(firstRejection(wrapBody(
            "ui8 r = 0;\n"
            "for (uint i=0; i<4; i++) { i = 0; }\n"
            "return r;")) == "LOOP-FORM");
}

TEST_CASE("return placement conditions") {
  CHECK(firstRejection(wrapBody("return x;\nreturn x;")) ==
        "RETURN-PLACEMENT");
  CHECK(firstRejection(wrapBody("ui8 r = 0;")) == "RETURN-PLACEMENT");
  // final if...else of returns is fine
  CHECK(firstRejection(wrapBody(
            "if (x == 0)\n  return 1;\nelse\n  return 0;")) == "");
  // branches may be blocks satisfying the conditions recursively
  CHECK(firstRejection(wrapBody(
            "if (x == 0) {\n  ui8 r = 1;\n  return r;\n}\nelse\n"
            "  return 0;")) == "");
  // a final if without else cannot carry the return
  CHECK(firstRejection(wrapBody("if (x == 0) return 1;")) ==
        "RETURN-PLACEMENT");
  // returns may not hide inside loops
  CHECK(firstRejection(wrapBody(
            "for (uint i=0; i<4; i++) { return x; }\nreturn x;")) ==
        "RETURN-PLACEMENT");
  // or inside switch cases
  CHECK(firstRejection(wrapBody(
            "switch (x) { case 0: return x; default: return x; }")) ==
        "RETURN-PLACEMENT");
}

TEST_CASE("validator agrees with the independent return-conditions oracle") {
  const char* bodies[] = {
      "return x;",
      "ui8 r = 0;\nreturn r;",
      "return x;\nreturn x;",
      "ui8 r = 0;",
      "if (x == 0)\n  return 1;\nelse\n  return 0;",
      "if (x == 0) return 1;",
      "if (x == 0) { ui8 r = 1; return r; } else { return 0; }",
      "if (x == 0) { return 1; } else { if (x == 1) return 2; else return 3; }",
      "if (x == 0) { ui8 r = 0; } else { return 0; }",
  };
  for (const char* body : bodies) {
    INFO(body);
    ParseResult r = parseText(wrapBody(body));
    REQUIRE(r.ok());
    bool oracle = returnBlockOk(*r.program->functions[0].body);
    bool validator = true;
    for (const auto& d : validateProgram(*r.program))
      if (d.ruleId == "RETURN-PLACEMENT") validator = false;
    CHECK(oracle == validator);
  }
}

TEST_CASE("switch restrictions") {
  // empty cases share the following body
  CHECK(firstRejection(wrapBody(
            "ui8 r = 0;\n"
            "switch (x) {\n"
            "case 0:\ncase 1:\n  r = 1;\n  break;\n"
            "case 2:\n  r = 2;\n  break;\n"
            "default:\n  r = 3;\n}\n"
            "return r;")) == "");
  // a non-empty case must break unless it is last
  CHECK(firstRejection(wrapBody(
            "ui8 r = 0;\n"
            "switch (x) {\ncase 0:\n  r = 1;\ncase 1:\n  r = 2;\n  break;\n}\n"
            "return r;")) == "SWITCH-FORM");
  // default must be last
  CHECK(firstRejection(wrapBody(
            "ui8 r = 0;\n"
            "switch (x) {\ndefault:\n  r = 1;\n  break;\ncase 0:\n  r = 2;\n"
            "  break;\n}\n"
            "return r;")) == "SWITCH-FORM");
  // break may only end a case
  CHECK(firstRejection(wrapBody(
            "ui8 r = 0;\n"
            "switch (x) {\ncase 0:\n  if (r == 0) break;\n  r = 1;\n  break;\n"
            "}\nreturn r;")) == "SUBSET");
  // duplicate labels
  CHECK(firstRejection(wrapBody(
            "ui8 r = 0;\n"
            "switch (x) {\ncase 0:\n  r = 1;\n  break;\ncase 0:\n  r = 2;\n"
            "  break;\n}\nreturn r;")) == "SWITCH-FORM");
}

TEST_CASE("tuple types are confined to return positions") {
  CHECK(firstRejection(
            "typedef ac_int<8, false> ui8;\n"
            "ui8 f(tuple<ui8, ui8> t) { return 0; }\n") == "TUPLE-CONTEXT");
  CHECK(firstRejection(wrapBody("tuple<ui8, ui8> t;\nreturn x;")) ==
        "TUPLE-CONTEXT");
  CHECK(firstRejection(wrapBody("ui8 y = tuple<ui8, ui8>(x, x);\nreturn y;")) ==
        "TUPLE-CONTEXT");
  // tie of a scalar-returning function
  CHECK(firstRejection(
            "typedef ac_int<8, false> ui8;\n"
            "ui8 g(ui8 x) { return x; }\n"
            "ui8 f(ui8 x) { ui8 a = 0; tie(a) = g(x); return a; }\n") ==
        "TUPLE-CONTEXT");
  // well-formed tuple return and destructuring
  CHECK(firstRejection(
            "typedef ac_int<8, false> ui8;\n"
            "tuple<ui8, ui8> halve(ui8 x) {\n"
            "  ui8 q = x;\n  ui8 r = x & 1;\n"
            "  return tuple<ui8, ui8>(q, r);\n}\n"
            "ui8 f(ui8 x) {\n"
            "  ui8 q = 0, r = 0;\n  tie(q, r) = halve(x);\n  return q;\n}\n") ==
        "");
  // arity mismatch at the destructuring site
  CHECK(firstRejection(
            "typedef ac_int<8, false> ui8;\n"
            "tuple<ui8, ui8> halve(ui8 x) {\n"
            "  ui8 q = x;\n  ui8 r = x & 1;\n"
            "  return tuple<ui8, ui8>(q, r);\n}\n"
            "ui8 f(ui8 x) {\n"
            "  ui8 q = 0;\n  tie(q) = halve(x);\n  return q;\n}\n") ==
        "ARITY");
}

TEST_CASE("type level rejections") {
  // slice exceeding the register width
  CHECK(firstRejection(
            "typedef ac_int<64, false> ui64;\ntypedef ac_int<8, false> ui8;\n"
            "ui64 f(ui64 x, ui8 y) {\n  x.set_slc(60, y);\n  return x;\n}\n") ==
        "SLICE-RANGE");
  CHECK(firstRejection(
            "typedef ac_int<64, false> ui64;\ntypedef ac_int<8, false> ui8;\n"
            "ui64 f(ui64 x, ui8 y) {\n  x.set_slc(56, y);\n  return x;\n}\n") ==
        "");
  // signed division
  CHECK(firstRejection("int f(int x) { return x / 2; }") == "SIGNED-DIV");
  CHECK(firstRejection("uint f(uint x) { return x / 2; }") == "");
  // unknown identifier
  CHECK(firstRejection(wrapBody("return y;")) == "UNKNOWN-IDENT");
  // call of a function defined later in the file
  CHECK(firstRejection(
            "typedef ac_int<8, false> ui8;\n"
            "ui8 f(ui8 x) { return g(x); }\n"
            "ui8 g(ui8 x) { return x; }\n") == "UNKNOWN-IDENT");
  // identifiers collide after case folding
  CHECK(firstRejection(wrapBody("ui8 foo = 0;\nui8 FOO = 1;\nreturn foo;")) ==
        "NAME-CLASH");
  // names reserved by the generated code
  CHECK(firstRejection(wrapBody("ui8 bits = 0;\nreturn bits;")) ==
        "NAME-CLASH");
  // shadowing is rejected
  CHECK(firstRejection(wrapBody(
            "ui8 r = 0;\nif (x == 0) { ui8 r = 1; }\nreturn r;")) ==
        "NAME-CLASH");
  // bit writes take bool values or 0/1 literals
  CHECK(firstRejection(wrapBody("x[0] = 1;\nreturn x;")) == "");
  CHECK(firstRejection(wrapBody("x[0] = 2;\nreturn x;")) == "TYPE");
}

TEST_CASE("pseudocode slice syntax parses back to the slc form") {
  // width is resolvable even with a symbolic base index
  std::string src =
      "typedef ac_int<8, false> ui8;\ntypedef ac_int<4, true> si4;\n"
      "ui8 f(ui8 x, uint i) {\n  si4 v = x[2*i+3:2*i];\n  return x;\n}\n";
  CHECK(firstRejection(src) == "");
  ParseResult r = parseText(src);
  REQUIRE(r.ok());
  SymbolTables tables;
  REQUIRE(validateProgram(*r.program).empty());
  REQUIRE(typecheckProgram(*r.program, tables).empty());
  const Stmt& decl = *r.program->functions[0].body->stmts[0];
  CHECK(decl.decls[0].init->kind == ExprKind::Slice);
  CHECK(decl.decls[0].init->sliceWidth == 4);
  // non-constant widths are rejected
  CHECK(firstRejection(
            "typedef ac_int<8, false> ui8;\n"
            "ui8 f(ui8 x, uint i, uint j) {\n"
            "  ui8 v = x[i:j];\n  return v;\n}\n") == "SLICE-RANGE");
}
