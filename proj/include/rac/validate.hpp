#pragma once

#include "rac/ast.hpp"
#include "rac/diagnostics.hpp"

#include <string>
#include <vector>

namespace rac {

// Restriction checks that make the functional translation possible:
//  - every for loop has the shape (init; var op limit [&& extra]; update)
//    with constant-step progress toward the limit, so a measure exists;
//  - return statements only where the recursive return-placement
//    conditions allow them;
//  - switch cases either break, fall through empty, or come last;
//  - tuple construction appears only in return statements.
// Loop shape facts are recorded on each For node for the code generator.
class Validator {
public:
  static std::vector<Diagnostic> run(Program& prog) {
    Validator v;
    for (auto& fn : prog.functions) v.checkFunction(fn);
    for (auto& g : prog.globals)
      if (!g.decl->isConst)
        v.diags_.report(g.decl->pos, "SUBSET",
                        "global variables must be const");
    return v.diags_.all();
  }

private:
  DiagnosticSink diags_;

  void checkFunction(FuncDef& fn) {
    checkReturnBlock(*fn.body, fn.name);
    walkStmt(*fn.body);
  }

  // --- return placement ---------------------------------------------------

  static bool containsReturn(const Stmt& s) {
    if (s.kind == StmtKind::Return) return true;
    auto sub = [](const StmtPtr& p) { return p && containsReturn(*p); };
    if (sub(s.thenS) || sub(s.elseS) || sub(s.body) || sub(s.init) ||
        sub(s.update))
      return true;
    for (const auto& c : s.cases)
      for (const auto& st : c.body)
        if (containsReturn(*st)) return true;
    for (const auto& st : s.stmts)
      if (containsReturn(*st)) return true;
    return false;
  }

  // Conditions on a statement block: (1) it is non-empty, (2) only the
  // final statement contains a return, (3) the final statement is a return
  // or an if...else whose branches satisfy this recursively.
  void checkReturnBlock(const Stmt& block, const std::string& fnName) {
    if (block.stmts.empty()) {
      diags_.report(block.pos, "RETURN-PLACEMENT",
                    "function body block must be a non-empty sequence of "
                    "statements");
      return;
    }
    for (std::size_t i = 0; i + 1 < block.stmts.size(); ++i) {
      if (containsReturn(*block.stmts[i]))
        diags_.report(block.stmts[i]->pos, "RETURN-PLACEMENT",
                      "only the final statement of a block may contain a "
                      "return");
    }
    checkReturnCarrier(*block.stmts.back(), fnName);
  }

  void checkReturnCarrier(const Stmt& s, const std::string& fnName) {
    if (s.kind == StmtKind::Return) return;
    if (s.kind == StmtKind::If) {
      if (!s.elseS) {
        diags_.report(s.pos, "RETURN-PLACEMENT",
                      "the final if must have an else branch that returns");
        return;
      }
      checkReturnBranch(*s.thenS, fnName);
      checkReturnBranch(*s.elseS, fnName);
      return;
    }
    diags_.report(s.pos, "RETURN-PLACEMENT",
                  "the final statement must be a return or an if...else of "
                  "returns");
  }

  void checkReturnBranch(const Stmt& s, const std::string& fnName) {
    if (s.kind == StmtKind::Return) return;
    if (s.kind == StmtKind::If) {
      checkReturnCarrier(s, fnName);
      return;
    }
    if (s.kind == StmtKind::Block) {
      checkReturnBlock(s, fnName);
      return;
    }
    diags_.report(s.pos, "RETURN-PLACEMENT",
                  "each branch of a final if must return");
  }

  // --- statement walk -------------------------------------------------------

  void walkStmt(Stmt& s) {
    switch (s.kind) {
    case StmtKind::Block:
      for (auto& st : s.stmts) walkStmt(*st);
      break;
    case StmtKind::If:
      checkExpr(*s.cond);
      walkStmt(*s.thenS);
      if (s.elseS) walkStmt(*s.elseS);
      break;
    case StmtKind::For:
      checkLoop(s);
      walkStmt(*s.body);
      break;
    case StmtKind::Switch:
      checkSwitch(s);
      break;
    case StmtKind::VarDecl:
      checkDeclTuple(s);
      for (auto& d : s.decls) {
        if (d.init) checkExpr(*d.init);
        for (auto& e : d.arrayInit) checkExpr(*e);
      }
      break;
    case StmtKind::Assign:
    case StmtKind::SliceAssign:
      if (s.lhs) checkExpr(*s.lhs);
      if (s.rhs) checkExpr(*s.rhs);
      break;
    case StmtKind::Return:
      if (s.expr) checkExprAllowTuple(*s.expr);
      break;
    case StmtKind::Assert:
      checkExpr(*s.expr);
      break;
    case StmtKind::TupleAssign:
      for (auto& a : s.call->args) checkExpr(*a);
      break;
    }
  }

  void checkDeclTuple(const Stmt& s) {
    if (s.declType && s.declType->k == TypeSpec::K::Tuple)
      diags_.report(s.pos, "TUPLE-CONTEXT",
                    "tuple types may only be used as function return types");
  }

  // Tuple construction is restricted to return statements.
  void checkExpr(const Expr& e) {
    if (e.kind == ExprKind::TupleCtor) {
      diags_.report(e.pos, "TUPLE-CONTEXT",
                    "tuple construction is only allowed in a return "
                    "statement");
      return;
    }
    checkExprAllowTuple(e);
  }

  void checkExprAllowTuple(const Expr& e) {
    auto sub = [&](const ExprPtr& p) {
      if (p) checkExpr(*p);
    };
    sub(e.a);
    sub(e.b);
    sub(e.c);
    sub(e.sliceHi);
    for (const auto& a : e.args) checkExpr(*a);
  }

  // --- switch ---------------------------------------------------------------

  void checkSwitch(Stmt& s) {
    checkExpr(*s.cond);
    if (s.cases.empty()) {
      diags_.report(s.pos, "SWITCH-FORM", "switch has no cases");
      return;
    }
    bool sawDefault = false;
    for (std::size_t i = 0; i < s.cases.size(); ++i) {
      SwitchCase& c = s.cases[i];
      bool last = i + 1 == s.cases.size();
      if (sawDefault)
        diags_.report(c.pos, "SWITCH-FORM", "default must be the last case");
      if (c.isDefault) sawDefault = true;
      if (!c.body.empty() && !c.hasBreak && !last)
        diags_.report(c.pos, "SWITCH-FORM",
                      "a non-empty case must end in break or be the last "
                      "case");
      if (c.body.empty() && !c.hasBreak && last && !c.isDefault)
        diags_.report(c.pos, "SWITCH-FORM", "final case has no body");
      for (auto& l : c.labels) checkExpr(*l);
      for (auto& st : c.body) walkStmt(*st);
    }
  }

  // --- loops ------------------------------------------------------------------

  void checkLoop(Stmt& s) {
    LoopInfo info;

    // init: declaration of, or assignment to, the loop variable
    const Stmt& init = *s.init;
    if (init.kind == StmtKind::VarDecl) {
      if (init.decls.size() != 1 || !init.decls[0].init ||
          init.decls[0].arraySizeExpr) {
        diags_.report(init.pos, "LOOP-FORM",
                      "loop initialization must declare a single initialized "
                      "loop variable");
        return;
      }
      if (init.declType->k != TypeSpec::K::UInt &&
          init.declType->k != TypeSpec::K::Int) {
        diags_.report(init.pos, "LOOP-FORM",
                      "the loop variable must be of type uint or int");
        return;
      }
      info.var = init.decls[0].name;
      info.varDeclaredInInit = true;
    } else if (init.kind == StmtKind::Assign && init.op == "=" &&
               init.lhs->kind == ExprKind::Var) {
      info.var = init.lhs->name; // machine-ness checked with types known
    } else {
      diags_.report(init.pos, "LOOP-FORM",
                    "loop initialization must declare or assign the loop "
                    "variable");
      return;
    }

    // test: var op limit, optionally && extra
    const Expr* test = s.cond.get();
    if (test->kind == ExprKind::Binary && test->op == "&&") {
      info.extraTest = test->b.get();
      test = test->a.get();
    }
    if (test->kind != ExprKind::Binary ||
        (test->op != "<" && test->op != "<=" && test->op != ">" &&
         test->op != ">=") ||
        test->a->kind != ExprKind::Var || test->a->name != info.var) {
      diags_.report(s.cond->pos, "LOOP-FORM",
                    "loop test must compare the loop variable against a "
                    "limit with <, <=, > or >=");
      return;
    }
    info.cmpOp = test->op;
    info.limit = test->b.get();
    if (mentionsVar(*info.limit, info.var)) {
      diags_.report(info.limit->pos, "LOOP-FORM",
                    "the loop limit must not depend on the loop variable");
      return;
    }

    // update: constant-step assignment to the loop variable
    const Stmt& up = *s.update;
    bool haveStep = false;
    if (up.kind == StmtKind::Assign && up.lhs->kind == ExprKind::Var &&
        up.lhs->name == info.var) {
      if (up.op == "++") {
        info.step = 1;
        haveStep = true;
      } else if (up.op == "--") {
        info.step = -1;
        haveStep = true;
      } else if ((up.op == "+=" || up.op == "-=") &&
                 up.rhs->kind == ExprKind::IntLit) {
        info.step = up.op == "+=" ? up.rhs->intVal : -up.rhs->intVal;
        haveStep = true;
      } else if (up.op == "=" && up.rhs->kind == ExprKind::Binary &&
                 (up.rhs->op == "+" || up.rhs->op == "-")) {
        const Expr& l = *up.rhs->a;
        const Expr& r = *up.rhs->b;
        if (l.kind == ExprKind::Var && l.name == info.var &&
            r.kind == ExprKind::IntLit) {
          info.step = up.rhs->op == "+" ? r.intVal : -r.intVal;
          haveStep = true;
        } else if (up.rhs->op == "+" && r.kind == ExprKind::Var &&
                   r.name == info.var && l.kind == ExprKind::IntLit) {
          info.step = l.intVal;
          haveStep = true;
        }
      }
    }
    if (!haveStep) {
      diags_.report(up.pos, "LOOP-FORM",
                    "loop update must change the loop variable by a "
                    "constant");
      return;
    }

    // progress toward the limit, so a measure can be derived
    bool ascending = info.cmpOp == "<" || info.cmpOp == "<=";
    if (info.step == 0 || (ascending && info.step < 0) ||
        (!ascending && info.step > 0)) {
      diags_.report(up.pos, "LOOP-FORM",
                    "loop update must make progress toward the limit");
      return;
    }

    if (assignsVar(*s.body, info.var)) {
      diags_.report(s.body->pos, "LOOP-FORM",
                    "the loop body must not assign the loop variable");
      return;
    }

    s.loopInfo = std::move(info);
  }

  static bool mentionsVar(const Expr& e, const std::string& name) {
    if (e.kind == ExprKind::Var && e.name == name) return true;
    auto sub = [&](const ExprPtr& p) { return p && mentionsVar(*p, name); };
    if (sub(e.a) || sub(e.b) || sub(e.c) || sub(e.sliceHi)) return true;
    for (const auto& a : e.args)
      if (mentionsVar(*a, name)) return true;
    return false;
  }

  static bool assignsVar(const Stmt& s, const std::string& name) {
    switch (s.kind) {
    case StmtKind::Assign:
    case StmtKind::SliceAssign: {
      const Expr* root = s.lhs.get();
      while (root &&
             (root->kind == ExprKind::Index || root->kind == ExprKind::Field ||
              root->kind == ExprKind::Slice ||
              (root->kind == ExprKind::Call && root->name == "set_slc")))
        root = root->a.get();
      return root && root->kind == ExprKind::Var && root->name == name;
    }
    case StmtKind::TupleAssign:
      for (const auto& t : s.targets)
        if (t == name) return true;
      return false;
    case StmtKind::VarDecl:
      return false; // a redeclaration is a shadowing error elsewhere
    default:
      break;
    }
    auto sub = [&](const StmtPtr& p) { return p && assignsVar(*p, name); };
    if (sub(s.thenS) || sub(s.elseS) || sub(s.body) || sub(s.init) ||
        sub(s.update))
      return true;
    for (const auto& c : s.cases)
      for (const auto& st : c.body)
        if (assignsVar(*st, name)) return true;
    for (const auto& st : s.stmts)
      if (assignsVar(*st, name)) return true;
    return false;
  }
};

inline std::vector<Diagnostic> validateProgram(Program& prog) {
  return Validator::run(prog);
}

} // namespace rac
