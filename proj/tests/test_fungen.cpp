#include "rac/fungen.hpp"
#include "rac/lower.hpp"
#include "rac/parser.hpp"
#include "rac/typecheck.hpp"
#include "rac/validate.hpp"

#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <set>

using namespace rac;
using ractest::corpusPath;
using ractest::readFile;

namespace {

Translation translateSource(const std::string& src) {
  ParseResult r = parseSource(src);
  for (const auto& d : r.diagnostics) UNSCOPED_INFO(d.ruleId + ": " + d.message);
  REQUIRE(r.ok());
  REQUIRE(validateProgram(*r.program).empty());
  SymbolTables tables;
  auto td = typecheckProgram(*r.program, tables);
  for (const auto& d : td) UNSCOPED_INFO(d.ruleId + ": " + d.message);
  REQUIRE(td.empty());
  IrProgram ir = lowerProgram(*r.program, tables);
  return translateIr(ir);
}

Translation translateFile(const std::string& name) {
  return translateSource(readFile(corpusPath(name)));
}

void expectDef(const Translation& t, const std::string& name,
               const SExpr& golden) {
  const FunDef* def = t.find(name);
  REQUIRE(def != nullptr);
  SExpr got = funDefToSExpr(*def);
  std::string path;
  if (structuralDiff(got, golden, path)) {
    INFO("difference at " + path + " in " + name);
    INFO("got:      " + printPretty(got));
    INFO("expected: " + printPretty(golden));
    FAIL();
  }
  SUCCEED();
}

} // namespace

TEST_CASE("translated output begins with the two directives") {
  Translation t = translateFile("add8.rac");
  auto forms = t.allForms();
  REQUIRE(forms.size() >= 2);
  CHECK(printCompact(forms[0]) == "(SET-IGNORE-OK T)");
  CHECK(printCompact(forms[1]) == "(SET-IRRELEVANT-FORMALS-OK T)");
}

TEST_CASE("add8 translates to the two expected definitions") {
  Translation t = translateFile("add8.rac");
  auto goldens = parseSExprs(readFile(corpusPath("golden/add8_fns.sexpr")));
  REQUIRE(goldens.size() == 4); // 2 directives + 2 definitions
  auto forms = t.allForms();
  REQUIRE(forms.size() == goldens.size());
  for (std::size_t i = 0; i < goldens.size(); ++i) {
    std::string path;
    if (structuralDiff(forms[i], goldens[i], path)) {
      INFO("form " + std::to_string(i) + " differs at " + path);
      INFO("got:      " + printPretty(forms[i]));
      INFO("expected: " + printPretty(goldens[i]));
      FAIL();
    }
  }
  SUCCEED();
}

TEST_CASE("the leading zero counter translates to the shown definitions") {
  Translation t = translateFile("clz64.rac");
  auto goldens = parseSExprs(readFile(corpusPath("golden/clz64_fns.sexpr")));
  REQUIRE(goldens.size() == 3);
  expectDef(t, "CLZ64-LOOP-1", goldens[0]);
  expectDef(t, "CLZ64-LOOP-2", goldens[1]);
  expectDef(t, "CLZ64", goldens[2]);
  // the innermost loop's body is not shown; its signature is fixed
  const FunDef* inner = t.find("CLZ64-LOOP-0");
  REQUIRE(inner != nullptr);
  CHECK(inner->params == std::vector<std::string>{"I", "N", "K", "C", "Z"});
  // definitions print in dependency order
  REQUIRE(t.defs.size() == 4);
  CHECK(t.defs[0].name == "CLZ64-LOOP-0");
  CHECK(t.defs[1].name == "CLZ64-LOOP-1");
  CHECK(t.defs[2].name == "CLZ64-LOOP-2");
  CHECK(t.defs[3].name == "CLZ64");
}

TEST_CASE("normalize translates to the shown definition") {
  Translation t = translateFile("normalize.rac");
  SExpr golden = parseSExpr(readFile(corpusPath("golden/normalize_fns.sexpr")));
  expectDef(t, "NORMALIZE", golden);
}

TEST_CASE("compare64 translates to the shown definition") {
  Translation t = translateFile("compare64.rac");
  SExpr golden =
      parseSExpr(readFile(corpusPath("golden/compare64_fns.sexpr")));
  expectDef(t, "COMPARE64", golden);
}

TEST_CASE("loop auxiliaries are numbered children first, later siblings first") {
  Translation t = translateSource(
      "typedef ac_int<8, false> ui8;\n"
      "ui8 f(ui8 x) {\n"
      "  ui8 a = 0;\n"
      "  for (uint i=0; i<2; i++) { a = a + 1; }\n"
      "  for (uint i=0; i<2; i++) {\n"
      "    for (uint j=0; j<2; j++) { a = a + x; }\n"
      "  }\n"
      "  return a;\n}\n");
  // the nested pair comes last in the source, so it is numbered first,
  // inner loop before outer; the first source loop is numbered last
  REQUIRE(t.defs.size() == 4);
  CHECK(t.defs[0].name == "F-LOOP-0"); // innermost of the nested pair
  CHECK(t.defs[0].params == std::vector<std::string>{"J", "X", "A"});
  CHECK(t.defs[1].name == "F-LOOP-1");
  CHECK(t.defs[2].name == "F-LOOP-2");
  std::string body = printCompact(t.defs[1].body);
  CHECK(body.find("(F-LOOP-0 0 X A)") != std::string::npos);
}

TEST_CASE("measures follow the loop direction") {
  Translation t = translateFile("clz64_linear.rac");
  const FunDef* aux = t.find("CLZ64-LOOP-0");
  REQUIRE(aux != nullptr);
  CHECK(aux->params == std::vector<std::string>{"I", "X"});
  REQUIRE(aux->measure);
  CHECK(printCompact(*aux->measure) == "(NFIX (- I -1))");
  // descending loop: guard keeps the comparison and the extra conjunct
  std::string body = printCompact(aux->body);
  CHECK(body.find("(AND (INTEGERP I) (>= I 0) (= (BITN X I) 0))") !=
        std::string::npos);
  CHECK(body.find("(CLZ64-LOOP-0 (- I 1) X)") != std::string::npos);

  Translation le = translateSource(
      "typedef ac_int<8, false> ui8;\n"
      "ui8 f(ui8 x) {\n  ui8 a = 0;\n"
      "  for (uint i=1; i<=4; i++) { a = a + x; }\n  return a;\n}\n");
  const FunDef* aux2 = le.find("F-LOOP-0");
  REQUIRE(aux2 != nullptr);
  CHECK(printCompact(*aux2->measure) == "(NFIX (- 5 I))");
}

TEST_CASE("nonconstant limits add an INTEGERP conjunct") {
  Translation t = translateSource(
      "typedef ac_int<8, false> ui8;\n"
      "ui8 f(ui8 x, uint n) {\n  ui8 a = 0;\n"
      "  for (uint i=0; i<n; i++) { a = a + x; }\n  return a;\n}\n");
  const FunDef* aux = t.find("F-LOOP-0");
  REQUIRE(aux != nullptr);
  std::string body = printCompact(aux->body);
  CHECK(body.find("(AND (INTEGERP I) (INTEGERP N) (< I N))") !=
        std::string::npos);
}

TEST_CASE("a loop with no externally visible effect is rejected") {
  CHECK_THROWS_AS(translateSource(
                      "typedef ac_int<8, false> ui8;\n"
                      "ui8 f(ui8 x) {\n"
                      "  for (uint i=0; i<4; i++) { ui8 t = x; }\n"
                      "  return x;\n}\n"),
                  TranslationError);
}

TEST_CASE("reading a never-bound machine variable is a translation error") {
  CHECK_THROWS_AS(translateSource("int f(int x) {\n  int y;\n  return y;\n}\n"),
                  TranslationError);
}

TEST_CASE("free symbols of every definition close over its parameters") {
  for (const char* name : {"add8.rac", "clz64.rac", "clz64_linear.rac",
                           "normalize.rac", "compare64.rac"}) {
    INFO(name);
    Translation t = translateFile(name);
    std::set<std::string> defNames;
    for (const auto& d : t.defs) defNames.insert(d.name);
    for (const auto& c : t.constArrays) defNames.insert(c.name);
    for (const auto& d : t.defs) {
      std::set<std::string> free;
      fungen_detail::freeSymbols(d.body, free);
      std::set<std::string> params(d.params.begin(), d.params.end());
      for (const auto& v : free) {
        if (params.count(v) || defNames.count(v) || isPrimitiveName(v))
          continue;
        static const std::set<std::string> special = {
            "NIL", "T", "MV", "IF", "IF1", "IN-FUNCTION",
            "AND", "OR", "NOT", "="};
        if (special.count(v)) continue;
        INFO("escaped symbol " + v + " in " + d.name);
        CHECK(false);
      }
    }
  }
}

TEST_CASE("global constant arrays become zero-argument definitions") {
  Translation t = translateSource(
      "typedef ac_int<6, false> ui6;\n"
      "const ui6 TBL[4] = {1, 2, 3, 63};\n"
      "ui6 f(uint i) {\n  ui6 v = TBL[i];\n  return v;\n}\n");
  REQUIRE(t.constArrays.size() == 1);
  SExpr def = Translation::constArrayToSExpr(t.constArrays[0]);
  CHECK(printCompact(def) ==
        "(DEFUND TBL NIL (AS 0 1 (AS 1 2 (AS 2 3 (AS 3 63 NIL)))))");
  const FunDef* f = t.find("F");
  REQUIRE(f != nullptr);
  CHECK(printCompact(f->body).find("(AG I (TBL))") != std::string::npos);
}
