#pragma once

#include "rac/ast.hpp"
#include "rac/diagnostics.hpp"
#include "rac/lexer.hpp"

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace rac {

struct ParseResult {
  std::optional<Program> program;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return program.has_value(); }
};

// Recursive-descent parser for the RAC subset: register typedefs, enums,
// structs, global constants, and functions over if/for/switch/return with
// slc / set_slc methods, assertions, and tuple returns. Constructs outside
// the subset (while, do, continue, break outside switch, pointers,
// references, goto) are rejected with rule SUBSET.
class Parser {
public:
  static ParseResult parse(std::string_view source) {
    DiagnosticSink diags;
    Lexer lex(source, diags);
    std::vector<Token> toks = lex.run();
    if (!diags.ok()) return {std::nullopt, diags.all()};
    Parser p(std::move(toks), diags);
    std::optional<Program> prog = p.parseProgram();
    if (!diags.ok()) return {std::nullopt, diags.all()};
    return {std::move(prog), {}};
  }

private:
  struct Abort {};

  Parser(std::vector<Token> toks, DiagnosticSink& diags)
      : toks_(std::move(toks)), diags_(diags) {
    typeNames_ = {"bool", "uint", "int", "ac_int", "ac_fixed", "array",
                  "tuple"};
  }

  // --- token helpers ---------------------------------------------------

  const Token& cur() const { return toks_[i_]; }
  const Token& peek(std::size_t n = 1) const {
    return toks_[std::min(i_ + n, toks_.size() - 1)];
  }
  Token take() { return toks_[i_++]; }
  bool at(std::string_view t) const { return cur().is(t); }
  bool atEnd() const { return cur().kind == Tok::End; }

  bool eat(std::string_view t) {
    if (at(t)) {
      ++i_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(SrcPos pos, std::string rule, std::string msg) {
    diags_.report(pos, std::move(rule), std::move(msg));
    throw Abort{};
  }

  void expect(std::string_view t, const char* what) {
    if (!eat(t))
      fail(cur().pos, "SYNTAX",
           std::string("expected '") + std::string(t) + "' " + what +
               ", got '" + cur().text + "'");
  }

  std::string expectIdent(const char* what) {
    if (cur().kind != Tok::Ident)
      fail(cur().pos, "SYNTAX",
           std::string("expected identifier ") + what + ", got '" +
               cur().text + "'");
    return take().text;
  }

  bool isTypeName(const std::string& s) const { return typeNames_.count(s); }

  bool atTypeName() const {
    if (cur().kind != Tok::Ident) return false;
    if (cur().is("std") && peek().is("::")) return true;
    return isTypeName(cur().text);
  }

  // --- program ----------------------------------------------------------

  std::optional<Program> parseProgram() {
    Program prog;
    try {
      while (!atEnd()) {
        if (at("typedef")) {
          parseTypedef(prog);
        } else if (at("struct")) {
          parseStruct(prog);
        } else if (at("enum")) {
          parseEnum(prog);
        } else if (at("const")) {
          auto s = parseVarDecl(true);
          prog.globals.push_back({std::move(s)});
        } else if (cur().is("float") || cur().is("double")) {
          fail(cur().pos, "SUBSET", "floating-point types are not allowed");
        } else if (atTypeName()) {
          parseFunction(prog);
        } else {
          fail(cur().pos, "SYNTAX",
               "expected a typedef, struct, enum, constant, or function "
               "definition, got '" + cur().text + "'");
        }
      }
    } catch (Abort&) {
      return std::nullopt;
    }
    return prog;
  }

  void parseTypedef(Program& prog) {
    SrcPos pos = take().pos; // typedef
    auto spec = parseTypeSpec();
    std::string name = expectIdent("after typedef");
    expect(";", "after typedef");
    typeNames_.insert(name);
    prog.typedefs.push_back({name, std::move(spec), pos, nullptr});
  }

  void parseStruct(Program& prog) {
    SrcPos pos = take().pos; // struct
    StructDecl sd;
    sd.pos = pos;
    sd.name = expectIdent("after struct");
    expect("{", "to open struct body");
    while (!eat("}")) {
      auto ft = parseTypeSpec();
      Declarator d;
      d.pos = cur().pos;
      d.name = expectIdent("as field name");
      if (at("["))
        d.arraySizeExpr = parseArraySuffix();
      expect(";", "after struct field");
      sd.fields.emplace_back(std::move(ft), std::move(d));
    }
    expect(";", "after struct definition");
    typeNames_.insert(sd.name);
    prog.structs.push_back(std::move(sd));
  }

  void parseEnum(Program& prog) {
    SrcPos pos = take().pos; // enum
    EnumDecl ed;
    ed.pos = pos;
    ed.name = expectIdent("after enum");
    expect("{", "to open enum body");
    for (;;) {
      std::string item = expectIdent("as enum constant");
      ExprPtr val;
      if (eat("=")) val = parseExpr();
      ed.items.emplace_back(item, std::move(val));
      if (eat("}")) break;
      expect(",", "between enum constants");
    }
    expect(";", "after enum definition");
    typeNames_.insert(ed.name);
    prog.enums.push_back(std::move(ed));
  }

  void parseFunction(Program& prog) {
    FuncDef fn;
    fn.returnSpec = parseTypeSpec();
    fn.pos = cur().pos;
    fn.name = expectIdent("as function name");
    expect("(", "to open parameter list");
    if (!at(")")) {
      for (;;) {
        Param p;
        p.spec = parseTypeSpec();
        if (at("&") || at("*"))
          fail(cur().pos, "SUBSET",
               "pointer and reference parameters are not allowed");
        p.pos = cur().pos;
        p.name = expectIdent("as parameter name");
        if (at("["))
          fail(cur().pos, "SUBSET",
               "C array parameters are not allowed; pass arrays by value "
               "with array<>");
        fn.params.push_back(std::move(p));
        if (!eat(",")) break;
      }
    }
    expect(")", "after parameters");
    fn.body = parseBlock();
    prog.functions.push_back(std::move(fn));
  }

  // --- types ------------------------------------------------------------

  std::unique_ptr<TypeSpec> parseTypeSpec() {
    auto ts = std::make_unique<TypeSpec>();
    ts->pos = cur().pos;
    eatStdPrefix();
    if (cur().kind != Tok::Ident)
      fail(cur().pos, "SYNTAX", "expected a type name");
    std::string head = take().text;
    if (head == "bool") {
      ts->k = TypeSpec::K::Bool;
      ts->spelling = "bool";
    } else if (head == "uint" || head == "unsigned") {
      ts->k = TypeSpec::K::UInt;
      ts->spelling = "uint";
    } else if (head == "int") {
      ts->k = TypeSpec::K::Int;
      ts->spelling = "int";
    } else if (head == "ac_int") {
      ts->k = TypeSpec::K::AcInt;
      expect("<", "in ac_int");
      ts->widthExpr = parseTemplateArg();
      expect(",", "in ac_int");
      ts->isSignedTemplate = parseBoolConst();
      expect(">", "in ac_int");
      ts->spelling = "ac_int<" + renderConst(*ts->widthExpr) + ", " +
                     (ts->isSignedTemplate ? "true" : "false") + ">";
    } else if (head == "ac_fixed") {
      ts->k = TypeSpec::K::AcFixed;
      expect("<", "in ac_fixed");
      ts->widthExpr = parseTemplateArg();
      expect(",", "in ac_fixed");
      ts->intBitsExpr = parseTemplateArg();
      expect(",", "in ac_fixed");
      ts->isSignedTemplate = parseBoolConst();
      expect(">", "in ac_fixed");
      ts->spelling = "ac_fixed<" + renderConst(*ts->widthExpr) + ", " +
                     renderConst(*ts->intBitsExpr) + ", " +
                     (ts->isSignedTemplate ? "true" : "false") + ">";
    } else if (head == "array") {
      ts->k = TypeSpec::K::Array;
      expect("<", "in array");
      ts->elem = parseTypeSpec();
      expect(",", "in array");
      ts->widthExpr = parseTemplateArg();
      expect(">", "in array");
      ts->spelling =
          "array<" + ts->elem->spelling + ", " + renderConst(*ts->widthExpr) + ">";
    } else if (head == "tuple") {
      ts->k = TypeSpec::K::Tuple;
      expect("<", "in tuple");
      for (;;) {
        ts->tupleElems.push_back(std::move(*parseTypeSpec()));
        if (!eat(",")) break;
      }
      expect(">", "in tuple");
      ts->spelling = "tuple<";
      for (std::size_t j = 0; j < ts->tupleElems.size(); ++j) {
        if (j) ts->spelling += ", ";
        ts->spelling += ts->tupleElems[j].spelling;
      }
      ts->spelling += ">";
    } else if (head == "float" || head == "double") {
      fail(ts->pos, "SUBSET", "floating-point types are not allowed");
    } else {
      ts->k = TypeSpec::K::Named;
      ts->name = head;
      ts->spelling = head;
    }
    if (at("*") || at("&"))
      fail(cur().pos, "SUBSET", "pointers and references are not allowed");
    return ts;
  }

  void eatStdPrefix() {
    if (cur().is("std") && peek().is("::")) {
      ++i_;
      ++i_;
    }
  }

  bool parseBoolConst() {
    if (eat("true")) return true;
    if (eat("false")) return false;
    fail(cur().pos, "SYNTAX", "expected true or false");
  }

  static std::string renderConst(const Expr& e) {
    if (e.kind == ExprKind::IntLit)
      return e.hexLit ? "0x" + e.intVal.str(0, std::ios_base::hex)
                      : e.intVal.str();
    if (e.kind == ExprKind::Var) return e.name;
    return "?";
  }

  ExprPtr parseArraySuffix() {
    expect("[", "");
    ExprPtr n = parseExpr();
    expect("]", "after array size");
    if (at("["))
      fail(cur().pos, "SUBSET", "multi-dimensional C arrays are not allowed");
    return n;
  }

  // --- statements ---------------------------------------------------------

  StmtPtr parseBlock() {
    SrcPos pos = cur().pos;
    expect("{", "to open a block");
    auto blk = makeStmt(StmtKind::Block, pos);
    while (!eat("}")) {
      if (atEnd()) fail(pos, "SYNTAX", "unterminated block");
      blk->stmts.push_back(parseStatement());
    }
    return blk;
  }

  StmtPtr parseStatement() {
    const Token& t = cur();
    if (t.kind == Tok::Ident) {
      if (t.is("while") || t.is("do") || t.is("goto") || t.is("continue"))
        fail(t.pos, "SUBSET", "'" + t.text + "' is not part of the language");
      if (t.is("break"))
        fail(t.pos, "SUBSET",
             "'break' is only allowed at the end of a switch case");
      if (t.is("if")) return parseIf();
      if (t.is("for")) return parseFor();
      if (t.is("switch")) return parseSwitch();
      if (t.is("return")) return parseReturn();
      if (t.is("assert")) return parseAssert();
      if (t.is("tie")) return parseTupleAssign();
      if (t.is("const")) return parseVarDecl(true);
      if (t.is("typedef") || t.is("struct") || t.is("enum"))
        fail(t.pos, "SUBSET",
             "type definitions must appear at the top level");
      if (t.is("float") || t.is("double"))
        fail(t.pos, "SUBSET", "floating-point types are not allowed");
      if (atTypeName() && !(peek().is("(")))
        return parseVarDecl(false);
    }
    if (t.is("{")) return parseBlock();
    if (t.is(";"))
      fail(t.pos, "SYNTAX", "stray ';'");
    return parseAssignLike();
  }

  StmtPtr parseVarDecl(bool isConst) {
    SrcPos pos = cur().pos;
    if (isConst) expect("const", "");
    auto st = makeStmt(StmtKind::VarDecl, pos);
    st->isConst = isConst;
    st->declType = parseTypeSpec();
    for (;;) {
      Declarator d;
      d.pos = cur().pos;
      d.name = expectIdent("as variable name");
      if (at("[")) d.arraySizeExpr = parseArraySuffix();
      if (eat("=")) {
        if (eat("{")) {
          if (!at("}")) {
            for (;;) {
              d.arrayInit.push_back(parseExpr());
              if (!eat(",")) break;
            }
          }
          expect("}", "after array initializer");
        } else {
          d.init = parseExpr();
        }
      }
      st->decls.push_back(std::move(d));
      if (!eat(",")) break;
    }
    expect(";", "after declaration");
    return st;
  }

  StmtPtr parseIf() {
    SrcPos pos = take().pos; // if
    auto st = makeStmt(StmtKind::If, pos);
    expect("(", "after if");
    st->cond = parseExpr();
    expect(")", "after if condition");
    st->thenS = parseStatement();
    if (eat("else")) st->elseS = parseStatement();
    return st;
  }

  StmtPtr parseFor() {
    SrcPos pos = take().pos; // for
    auto st = makeStmt(StmtKind::For, pos);
    expect("(", "after for");
    if (atTypeName())
      st->init = parseVarDecl(false); // consumes ';'
    else {
      st->init = parseAssignNoSemi();
      expect(";", "after loop initialization");
    }
    st->cond = parseExpr();
    expect(";", "after loop test");
    st->update = parseAssignNoSemi();
    expect(")", "after loop update");
    st->body = parseStatement();
    return st;
  }

  StmtPtr parseSwitch() {
    SrcPos pos = take().pos; // switch
    auto st = makeStmt(StmtKind::Switch, pos);
    expect("(", "after switch");
    st->cond = parseExpr();
    expect(")", "after switch scrutinee");
    expect("{", "to open switch body");
    while (!eat("}")) {
      SwitchCase c;
      c.pos = cur().pos;
      for (;;) {
        if (eat("case")) {
          c.labels.push_back(parseExpr());
          expect(":", "after case label");
        } else if (eat("default")) {
          c.isDefault = true;
          expect(":", "after default");
          break;
        } else {
          break;
        }
        if (!at("case") && !at("default")) break;
      }
      if (c.labels.empty() && !c.isDefault)
        fail(cur().pos, "SYNTAX", "expected case or default in switch");
      while (!at("case") && !at("default") && !at("}") && !at("break")) {
        if (atEnd()) fail(pos, "SYNTAX", "unterminated switch");
        c.body.push_back(parseStatement());
      }
      if (at("break")) {
        ++i_;
        expect(";", "after break");
        c.hasBreak = true;
      }
      st->cases.push_back(std::move(c));
    }
    return st;
  }

  StmtPtr parseReturn() {
    SrcPos pos = take().pos; // return
    auto st = makeStmt(StmtKind::Return, pos);
    st->expr = parseExpr();
    expect(";", "after return value");
    return st;
  }

  StmtPtr parseAssert() {
    SrcPos pos = take().pos; // assert
    auto st = makeStmt(StmtKind::Assert, pos);
    expect("(", "after assert");
    st->expr = parseExpr();
    expect(")", "after assertion");
    expect(";", "after assertion");
    return st;
  }

  StmtPtr parseTupleAssign() {
    SrcPos pos = take().pos; // tie
    auto st = makeStmt(StmtKind::TupleAssign, pos);
    expect("(", "after tie");
    for (;;) {
      st->targetPos.push_back(cur().pos);
      st->targets.push_back(expectIdent("as tie target"));
      if (!eat(",")) break;
    }
    expect(")", "after tie targets");
    expect("=", "after tie(...)");
    st->call = parseExpr();
    if (st->call->kind != ExprKind::Call)
      fail(st->call->pos, "TUPLE-CONTEXT",
           "the right-hand side of tie(...) must be a function call");
    expect(";", "after tuple assignment");
    return st;
  }

  StmtPtr parseAssignLike() {
    auto st = parseAssignNoSemi();
    expect(";", "after statement");
    return st;
  }

  StmtPtr parseAssignNoSemi() {
    SrcPos pos = cur().pos;
    ExprPtr lhs = parseUnary();
    // set_slc calls parse as a Call node named set_slc on the lvalue
    if (lhs->kind == ExprKind::Call && lhs->name == "set_slc") {
      auto st = makeStmt(StmtKind::SliceAssign, pos);
      st->lhs = std::move(lhs);
      st->op = "=";
      return st;
    }
    if (at("++") || at("--")) {
      auto st = makeStmt(StmtKind::Assign, pos);
      st->lhs = std::move(lhs);
      st->op = take().text;
      return st;
    }
    static const char* ops[] = {"=", "+=", "-=", "<<=", ">>=",
                                "|=", "&=", "^="};
    for (const char* op : ops) {
      if (at(op)) {
        ++i_;
        auto st = makeStmt(lhsIsSliceOrBit(*lhs) ? StmtKind::SliceAssign
                                                 : StmtKind::Assign,
                           pos);
        if (st->kind == StmtKind::SliceAssign && std::string(op) != "=")
          fail(pos, "SUBSET",
               "compound assignment to a bit or slice is not supported");
        st->lhs = std::move(lhs);
        st->op = op;
        st->rhs = parseExpr();
        return st;
      }
    }
    if (at("*=") || at("/=") || at("%="))
      fail(cur().pos, "SUBSET",
           "'" + cur().text + "' is not part of the language");
    fail(pos, "SYNTAX", "expected an assignment statement");
  }

  static bool lhsIsSliceOrBit(const Expr& e) {
    return e.kind == ExprKind::Slice;
  }

  // --- expressions ---------------------------------------------------------

  ExprPtr parseExpr() { return parseTernary(); }

  // Template arguments stop below the comparison and shift tiers so the
  // closing '>' is not taken as an operator.
  ExprPtr parseTemplateArg() { return parseBinary(8); }

  ExprPtr parseTernary() {
    ExprPtr c = parseBinary(0);
    if (eat("?")) {
      auto e = makeExpr(ExprKind::Ternary, c->pos);
      e->a = std::move(c);
      e->b = parseExpr();
      expect(":", "in conditional expression");
      e->c = parseExpr();
      return e;
    }
    return c;
  }

  // Precedence-climbing over binary operator tiers.
  ExprPtr parseBinary(int tier) {
    static const std::vector<std::vector<std::string>> tiers = {
        {"||"}, {"&&"}, {"|"}, {"^"}, {"&"},
        {"==", "!="}, {"<", "<=", ">", ">="}, {"<<", ">>"},
        {"+", "-"}, {"*", "/", "%"}};
    if (tier >= static_cast<int>(tiers.size())) return parseUnary();
    ExprPtr lhs = parseBinary(tier + 1);
    for (;;) {
      bool matched = false;
      for (const auto& op : tiers[tier]) {
        if (at(op)) {
          SrcPos pos = take().pos;
          auto e = makeExpr(ExprKind::Binary, pos);
          e->op = op;
          e->a = std::move(lhs);
          e->b = parseBinary(tier + 1);
          lhs = std::move(e);
          matched = true;
          break;
        }
      }
      if (!matched) return lhs;
    }
  }

  ExprPtr parseUnary() {
    if (at("!") || at("~") || at("-") || at("+")) {
      SrcPos pos = cur().pos;
      std::string op = take().text;
      auto e = makeExpr(ExprKind::Unary, pos);
      e->op = op;
      e->a = parseUnary();
      // fold unary minus into the literal so -128 lexes as one value
      if (e->op == "-" && e->a->kind == ExprKind::IntLit) {
        e->a->intVal = -e->a->intVal;
        return std::move(e->a);
      }
      if (e->op == "+" && e->a->kind == ExprKind::IntLit)
        return std::move(e->a);
      return e;
    }
    if (at("*") || at("&"))
      fail(cur().pos, "SUBSET", "pointers and references are not allowed");
    return parsePostfix();
  }

  ExprPtr parsePostfix() {
    ExprPtr e = parsePrimary();
    for (;;) {
      if (at("[")) {
        SrcPos pos = take().pos;
        ExprPtr idx = parseExpr();
        if (eat(":")) {
          auto s = makeExpr(ExprKind::Slice, pos);
          s->a = std::move(e);
          s->sliceHi = std::move(idx);
          s->b = parseExpr();
          expect("]", "after slice bounds");
          e = std::move(s);
        } else {
          expect("]", "after index");
          auto s = makeExpr(ExprKind::Index, pos);
          s->a = std::move(e);
          s->b = std::move(idx);
          e = std::move(s);
        }
      } else if (at(".")) {
        SrcPos pos = take().pos;
        std::string member = expectIdent("after '.'");
        if (member == "slc") {
          expect("<", "in slc");
          ExprPtr w = parseTemplateArg();
          expect(">", "after slc width");
          expect("(", "after slc");
          auto s = makeExpr(ExprKind::Slice, pos);
          s->a = std::move(e);
          s->b = parseExpr();
          s->c = std::move(w); // width expression, folded at typecheck
          expect(")", "after slc index");
          e = std::move(s);
        } else if (member == "set_slc") {
          expect("(", "after set_slc");
          auto s = makeExpr(ExprKind::Call, pos);
          s->name = "set_slc";
          s->a = std::move(e);
          s->args.push_back(parseExpr());
          expect(",", "between set_slc arguments");
          s->args.push_back(parseExpr());
          expect(")", "after set_slc arguments");
          return s; // statement form only; no further postfix
        } else {
          auto s = makeExpr(ExprKind::Field, pos);
          s->a = std::move(e);
          s->name = member;
          e = std::move(s);
        }
      } else {
        return e;
      }
    }
  }

  ExprPtr parsePrimary() {
    const Token& t = cur();
    if (t.kind == Tok::Number) {
      auto e = makeExpr(ExprKind::IntLit, t.pos);
      e->intVal = t.value;
      e->hexLit = t.hex;
      ++i_;
      return e;
    }
    if (t.is("(")) {
      ++i_;
      ExprPtr e = parseExpr();
      expect(")", "to close parenthesis");
      return e;
    }
    if (t.kind == Tok::Ident) {
      if (t.is("true") || t.is("false")) {
        auto e = makeExpr(ExprKind::BoolLit, t.pos);
        e->boolVal = t.is("true");
        ++i_;
        return e;
      }
      if (t.is("tuple") || (t.is("std") && peek().is("::") &&
                            peek(2).is("tuple"))) {
        return parseTupleCtor();
      }
      // cast: TypeName(expr) for scalar types
      if ((isTypeName(t.text) || t.is("uint") || t.is("int") || t.is("bool")) &&
          peek().is("(")) {
        auto e = makeExpr(ExprKind::Cast, t.pos);
        e->castType = parseTypeSpec();
        expect("(", "in cast");
        e->a = parseExpr();
        expect(")", "after cast operand");
        return e;
      }
      std::string name = take().text;
      if (at("(")) {
        ++i_;
        auto e = makeExpr(ExprKind::Call, t.pos);
        e->name = name;
        if (!at(")")) {
          for (;;) {
            e->args.push_back(parseExpr());
            if (!eat(",")) break;
          }
        }
        expect(")", "after call arguments");
        return e;
      }
      auto e = makeExpr(ExprKind::Var, t.pos);
      e->name = name;
      return e;
    }
    fail(t.pos, "SYNTAX", "expected an expression, got '" + t.text + "'");
  }

  ExprPtr parseTupleCtor() {
    SrcPos pos = cur().pos;
    eatStdPrefix();
    auto spec = std::make_unique<TypeSpec>();
    expect("tuple", "");
    spec->k = TypeSpec::K::Tuple;
    spec->pos = pos;
    expect("<", "in tuple");
    for (;;) {
      spec->tupleElems.push_back(std::move(*parseTypeSpec()));
      if (!eat(",")) break;
    }
    expect(">", "in tuple");
    spec->spelling = "tuple<";
    for (std::size_t j = 0; j < spec->tupleElems.size(); ++j) {
      if (j) spec->spelling += ", ";
      spec->spelling += spec->tupleElems[j].spelling;
    }
    spec->spelling += ">";
    auto e = makeExpr(ExprKind::TupleCtor, pos);
    e->castType = std::move(spec);
    expect("(", "after tuple type");
    for (;;) {
      e->args.push_back(parseExpr());
      if (!eat(",")) break;
    }
    expect(")", "after tuple components");
    return e;
  }

  std::vector<Token> toks_;
  DiagnosticSink& diags_;
  std::size_t i_ = 0;
  std::set<std::string> typeNames_;
};

inline ParseResult parseSource(std::string_view source) {
  return Parser::parse(source);
}

} // namespace rac
