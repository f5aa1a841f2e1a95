#pragma once

#include "rac/ast.hpp"

#include <string>

namespace rac {

// Verilog-flavored pseudocode view of a checked program: slc / set_slc
// calls become slice syntax x[hi:lo], templates are erased into the
// typedef names, one statement per line. The output parses back into a
// structurally identical program.
class PseudocodeRenderer {
public:
  static std::string renderProgram(const Program& prog) {
    PseudocodeRenderer r;
    for (const auto& td : prog.typedefs)
      r.line("typedef " + td.spec->spelling + " " + td.name + ";");
    for (const auto& en : prog.enums) {
      std::string s = "enum " + en.name + " {";
      for (std::size_t i = 0; i < en.items.size(); ++i) {
        if (i) s += ", ";
        s += en.items[i].first;
        if (en.items[i].second)
          s += " = " + r.expr(*en.items[i].second, 0);
      }
      r.line(s + "};");
    }
    for (const auto& sd : prog.structs) {
      r.line("struct " + sd.name + " {");
      r.indent_ += 2;
      for (const auto& [spec, d] : sd.fields) {
        std::string f = spec->spelling + " " + d.name;
        if (d.arraySizeExpr) f += "[" + r.expr(*d.arraySizeExpr, 0) + "]";
        r.line(f + ";");
      }
      r.indent_ -= 2;
      r.line("};");
    }
    for (const auto& g : prog.globals) r.stmt(*g.decl);
    for (const auto& fn : prog.functions) {
      if (!r.out_.empty()) r.line("");
      r.renderFunction(fn);
    }
    return r.out_;
  }

  static std::string render(const Program& prog, const FuncDef& fn) {
    PseudocodeRenderer r;
    (void)prog;
    r.renderFunction(fn);
    return r.out_;
  }

private:
  std::string out_;
  int indent_ = 0;

  void line(const std::string& s) {
    out_.append(static_cast<std::size_t>(indent_), ' ');
    out_ += s;
    out_ += '\n';
  }

  void renderFunction(const FuncDef& fn) {
    std::string head = fn.returnSpec->spelling + " " + fn.name + "(";
    for (std::size_t i = 0; i < fn.params.size(); ++i) {
      if (i) head += ", ";
      head += fn.params[i].spec->spelling + " " + fn.params[i].name;
    }
    line(head + ") {");
    indent_ += 2;
    for (const auto& s : fn.body->stmts) stmt(*s);
    indent_ -= 2;
    line("}");
  }

  void stmt(const Stmt& s) {
    switch (s.kind) {
    case StmtKind::Block:
      line("{");
      indent_ += 2;
      for (const auto& st : s.stmts) stmt(*st);
      indent_ -= 2;
      line("}");
      return;
    case StmtKind::VarDecl: {
      for (const auto& d : s.decls) {
        std::string t = std::string(s.isConst ? "const " : "") +
                        s.declType->spelling + " " + d.name;
        if (d.arraySizeExpr) t += "[" + expr(*d.arraySizeExpr, 0) + "]";
        if (d.init) t += " = " + expr(*d.init, 0);
        if (!d.arrayInit.empty()) {
          t += " = {";
          for (std::size_t i = 0; i < d.arrayInit.size(); ++i) {
            if (i) t += ", ";
            t += expr(*d.arrayInit[i], 0);
          }
          t += "}";
        }
        line(t + ";");
      }
      return;
    }
    case StmtKind::Assign:
      if (s.op == "++" || s.op == "--")
        line(expr(*s.lhs, 0) + s.op + ";");
      else
        line(expr(*s.lhs, 0) + " " + s.op + " " + expr(*s.rhs, 0) + ";");
      return;
    case StmtKind::SliceAssign: {
      const Expr& lhs = *s.lhs;
      if (lhs.kind == ExprKind::Call) { // x.set_slc(base, value)
        line(expr(*lhs.a, 0) + "[" + sliceHiText(*lhs.args[0], lhs.sliceWidth) +
             ":" + expr(*lhs.args[0], 0, true) + "] = " +
             expr(*lhs.args[1], 0) + ";");
      } else {
        line(expr(*lhs.a, 0) + "[" + sliceHiText(*lhs.b, lhs.sliceWidth) +
             ":" + expr(*lhs.b, 0, true) + "] = " + expr(*s.rhs, 0) + ";");
      }
      return;
    }
    case StmtKind::If: {
      line("if (" + expr(*s.cond, 0) + ")");
      branch(*s.thenS);
      if (s.elseS) {
        line("else");
        branch(*s.elseS);
      }
      return;
    }
    case StmtKind::For: {
      std::string init = inlineStmt(*s.init);
      std::string update = inlineStmt(*s.update);
      line("for (" + init + "; " + expr(*s.cond, 0) + "; " + update + ")");
      branch(*s.body);
      return;
    }
    case StmtKind::Switch: {
      line("switch (" + expr(*s.cond, 0) + ") {");
      for (const auto& c : s.cases) {
        for (const auto& l : c.labels) line("case " + expr(*l, 0) + ":");
        if (c.isDefault) line("default:");
        indent_ += 2;
        for (const auto& st : c.body) stmt(*st);
        if (c.hasBreak) line("break;");
        indent_ -= 2;
      }
      line("}");
      return;
    }
    case StmtKind::Return:
      line("return " + expr(*s.expr, 0) + ";");
      return;
    case StmtKind::Assert:
      line("assert(" + expr(*s.expr, 0) + ");");
      return;
    case StmtKind::TupleAssign: {
      std::string t = "tie(";
      for (std::size_t i = 0; i < s.targets.size(); ++i) {
        if (i) t += ", ";
        t += s.targets[i];
      }
      line(t + ") = " + expr(*s.call, 0) + ";");
      return;
    }
    }
  }

  void branch(const Stmt& s) {
    if (s.kind == StmtKind::Block) {
      stmt(s);
    } else {
      indent_ += 2;
      stmt(s);
      indent_ -= 2;
    }
  }

  std::string inlineStmt(const Stmt& s) {
    if (s.kind == StmtKind::VarDecl) {
      const Declarator& d = s.decls[0];
      return s.declType->spelling + " " + d.name + " = " + expr(*d.init, 0);
    }
    if (s.op == "++" || s.op == "--") return expr(*s.lhs, 0) + s.op;
    return expr(*s.lhs, 0) + " " + s.op + " " + expr(*s.rhs, 0);
  }

  // hi text of a slice at a given width: base+width-1 with constants folded
  std::string sliceHiText(const Expr& base, int width) {
    if (base.kind == ExprKind::IntLit) {
      Int hi = base.intVal + width - 1;
      return hi.str();
    }
    return expr(base, 9, true) + "+" + std::to_string(width - 1);
  }

  static int precOf(const std::string& op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "|") return 3;
    if (op == "^") return 4;
    if (op == "&") return 5;
    if (op == "==" || op == "!=") return 6;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") return 7;
    if (op == "<<" || op == ">>") return 8;
    if (op == "+" || op == "-") return 9;
    return 10; // * /
  }

  std::string expr(const Expr& e, int parentPrec, bool tight = false) {
    switch (e.kind) {
    case ExprKind::IntLit:
      if (e.hexLit && e.intVal >= 0)
        return "0x" + e.intVal.str(0, std::ios_base::hex);
      return e.intVal.str();
    case ExprKind::BoolLit:
      return e.boolVal ? "true" : "false";
    case ExprKind::Var:
      return e.name;
    case ExprKind::Unary: {
      std::string s = e.op + expr(*e.a, 11, tight);
      return parentPrec > 11 ? "(" + s + ")" : s;
    }
    case ExprKind::Binary: {
      int p = precOf(e.op);
      std::string pad = tight ? "" : " ";
      std::string s = expr(*e.a, p, tight) + pad + e.op + pad +
                      expr(*e.b, p + 1, tight);
      return parentPrec > p ? "(" + s + ")" : s;
    }
    case ExprKind::Ternary: {
      std::string s = expr(*e.a, 1) + " ? " + expr(*e.b, 0) + " : " +
                      expr(*e.c, 0);
      return parentPrec > 0 ? "(" + s + ")" : s;
    }
    case ExprKind::Slice:
      return expr(*e.a, 12) + "[" + sliceHiText(*e.b, e.sliceWidth) + ":" +
             expr(*e.b, 0, true) + "]";
    case ExprKind::BitRef:
    case ExprKind::Index:
      return expr(*e.a, 12) + "[" + expr(*e.b, 0, true) + "]";
    case ExprKind::Field:
      return expr(*e.a, 12) + "." + e.name;
    case ExprKind::Call: {
      std::string s = e.name + "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) s += ", ";
        s += expr(*e.args[i], 0);
      }
      return s + ")";
    }
    case ExprKind::Cast:
      return e.castType->spelling + "(" + expr(*e.a, 0) + ")";
    case ExprKind::TupleCtor: {
      std::string s = e.castType->spelling + "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) s += ", ";
        s += expr(*e.args[i], 0);
      }
      return s + ")";
    }
    }
    return "?";
  }
};

inline std::string renderPseudocode(const Program& prog) {
  return PseudocodeRenderer::renderProgram(prog);
}

} // namespace rac
