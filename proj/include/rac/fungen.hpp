#pragma once

#include "rac/lower.hpp"
#include "rac/sexpr.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace rac {

// Translation of the imperative IR into purely functional definitions.
// Statement sequences become binding nests (LET / LET* / MV-LET) driven by
// per-statement (reads, writes, term) triples; every for loop becomes a
// recursive auxiliary function with an NFIX measure derived from its test.

struct TranslationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FunDef {
  bool aux = false; // loop auxiliary (printed DEFUN) vs top level (DEFUND)
  int auxIndex = -1;
  std::string name;
  std::vector<std::string> params;
  std::optional<SExpr> measure;
  SExpr body;
};

inline SExpr funDefToSExpr(const FunDef& d) {
  SList items;
  items.push_back(SExpr::sym(d.aux ? "DEFUN" : "DEFUND"));
  items.push_back(SExpr::sym(d.name));
  SList ps;
  for (const auto& p : d.params) ps.push_back(SExpr::sym(p));
  items.push_back(SExpr::list(std::move(ps)));
  if (d.measure)
    items.push_back(SExpr::listOf(
        SExpr::sym("DECLARE"),
        SExpr::listOf(SExpr::sym("XARGS"), SExpr::sym(":MEASURE"),
                      *d.measure)));
  items.push_back(d.body);
  return SExpr::list(std::move(items));
}

struct Translation {
  std::vector<SExpr> directives; // (SET-IGNORE-OK T) ...
  std::vector<ConstArrayDef> constArrays;
  std::vector<FunDef> defs;

  const FunDef* find(const std::string& name) const {
    std::string u = SExpr::upcase(name);
    for (const auto& d : defs)
      if (d.name == u) return &d;
    return nullptr;
  }

  std::vector<SExpr> allForms() const {
    std::vector<SExpr> out = directives;
    for (const auto& c : constArrays) out.push_back(constArrayToSExpr(c));
    for (const auto& d : defs) out.push_back(funDefToSExpr(d));
    return out;
  }

  static SExpr constArrayToSExpr(const ConstArrayDef& c) {
    SExpr acc = SExpr::sym("NIL");
    for (std::size_t i = c.raws.size(); i-- > 0;)
      acc = SExpr::listOf(SExpr::sym("AS"), SExpr::num(Int(i)),
                          SExpr::num(c.raws[i]), std::move(acc));
    return SExpr::listOf(SExpr::sym("DEFUND"), SExpr::sym(c.name),
                         SExpr::sym("NIL"), std::move(acc));
  }
};

// ---------------------------------------------------------------------------
// Binder-aware symbol utilities over generated terms.

namespace fungen_detail {

inline bool isLetHead(const SExpr& e) {
  return e.headIs("LET") || e.headIs("LET*");
}

// occurrences of `var` as a free symbol
inline int countFree(const SExpr& e, const std::string& var) {
  if (e.isSym()) return e.symName() == var ? 1 : 0;
  if (!e.isList() || e.items().empty()) return 0;
  if (e.headIs("QUOTE")) return 0;
  if (isLetHead(e) && e.size() == 3) {
    int n = 0;
    bool sequential = e.headIs("LET*");
    bool shadowed = false;
    for (const auto& b : e[1].items()) {
      if (!shadowed || !sequential) n += countFree(b[1], var);
      if (b[0].isSym() && b[0].symName() == var) shadowed = true;
    }
    if (!shadowed) n += countFree(e[2], var);
    return n;
  }
  if (e.headIs("MV-LET") && e.size() == 4) {
    int n = countFree(e[2], var);
    bool shadowed = false;
    for (const auto& v : e[1].items())
      if (v.isSym() && v.symName() == var) shadowed = true;
    if (!shadowed) n += countFree(e[3], var);
    return n;
  }
  int n = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (i == 0 && e[0].isSym()) continue; // operator / function position
    n += countFree(e[i], var);
  }
  return n;
}

inline void freeSymbols(const SExpr& e, std::set<std::string>& out,
                        std::set<std::string> bound = {}) {
  if (e.isSym()) {
    if (!bound.count(e.symName())) out.insert(e.symName());
    return;
  }
  if (!e.isList() || e.items().empty()) return;
  if (e.headIs("QUOTE")) return;
  if (isLetHead(e) && e.size() == 3) {
    bool sequential = e.headIs("LET*");
    std::set<std::string> inner = bound;
    for (const auto& b : e[1].items()) {
      freeSymbols(b[1], out, sequential ? inner : bound);
      if (b[0].isSym()) inner.insert(b[0].symName());
    }
    freeSymbols(e[2], out, inner);
    return;
  }
  if (e.headIs("MV-LET") && e.size() == 4) {
    freeSymbols(e[2], out, bound);
    std::set<std::string> inner = bound;
    for (const auto& v : e[1].items())
      if (v.isSym()) inner.insert(v.symName());
    freeSymbols(e[3], out, inner);
    return;
  }
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (i == 0 && e[0].isSym()) continue;
    freeSymbols(e[i], out, bound);
  }
}

// Substitute `replacement` for the free occurrences of `var`. Fails (returns
// false) if an occurrence sits under a binder that captures a free variable
// of the replacement.
inline bool substitute(SExpr& e, const std::string& var,
                       const SExpr& replacement,
                       const std::set<std::string>& replFree) {
  if (e.isSym()) {
    if (e.symName() == var) e = replacement;
    return true;
  }
  if (!e.isList() || e.items().empty()) return true;
  if (e.headIs("QUOTE")) return true;
  auto capturedBy = [&](const std::string& binder) {
    return replFree.count(binder) > 0;
  };
  if (isLetHead(e) && e.size() == 3) {
    bool sequential = e.headIs("LET*");
    bool shadowed = false;
    bool captured = false;
    for (auto& b : e.items()[1].items()) {
      if (!shadowed || !sequential)
        if (!substitute(b.items()[1], var, replacement, replFree))
          return false;
      if (b[0].isSym()) {
        if (b[0].symName() == var) shadowed = true;
        if (capturedBy(b[0].symName())) captured = true;
      }
    }
    if (!shadowed) {
      if (captured && countFree(e[2], var) > 0) return false;
      if (!substitute(e.items()[2], var, replacement, replFree)) return false;
    }
    return true;
  }
  if (e.headIs("MV-LET") && e.size() == 4) {
    if (!substitute(e.items()[2], var, replacement, replFree)) return false;
    bool shadowed = false;
    bool captured = false;
    for (const auto& v : e[1].items())
      if (v.isSym()) {
        if (v.symName() == var) shadowed = true;
        if (capturedBy(v.symName())) captured = true;
      }
    if (!shadowed) {
      if (captured && countFree(e[3], var) > 0) return false;
      if (!substitute(e.items()[3], var, replacement, replFree)) return false;
    }
    return true;
  }
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (i == 0 && e[0].isSym()) continue;
    if (!substitute(e.items()[i], var, replacement, replFree)) return false;
  }
  return true;
}

} // namespace fungen_detail

// ---------------------------------------------------------------------------

class FunGen {
public:
  explicit FunGen(const IrProgram& ir) : ir_(ir) {}

  Translation translate() {
    Translation out;
    out.directives.push_back(
        SExpr::listOf(SExpr::sym("SET-IGNORE-OK"), SExpr::sym("T")));
    out.directives.push_back(
        SExpr::listOf(SExpr::sym("SET-IRRELEVANT-FORMALS-OK"), SExpr::sym("T")));
    out.constArrays = ir_.constArrays;
    for (const auto& fn : ir_.functions) translateFunction(fn, out);
    return out;
  }

private:
  const IrProgram& ir_;

  // per-function state
  std::string fnName_;
  std::map<const SExpr*, int> loopNumbers_;
  std::vector<int> numbersInEncounterOrder_; // pre-order over the source tree
  std::size_t loopCursor_ = 0;
  std::vector<FunDef> pendingAux_;
  std::set<std::string> boundSoFar_; // forward never-bound check

  struct Triple {
    std::vector<std::string> writes;
    SExpr term;
    bool isAssert = false;
    bool isDefaultDeclare = false;
    bool dead = false; // produces no binding
  };

  static const SList& stmts(const SExpr& block) { return block.items(); }

  void translateFunction(const IrFunction& fn, Translation& out) {
    fnName_ = fn.name;
    loopNumbers_.clear();
    pendingAux_.clear();
    const SExpr& def = fn.funcdef; // (FUNCDEF NAME (PARAMS) (BLOCK ...))
    numberLoops(def[3]);
    numbersInEncounterOrder_.clear();
    loopCursor_ = 0;
    preOrderLoops(def[3]);

    boundSoFar_.clear();
    for (const auto& p : def[2].items()) boundSoFar_.insert(p.symName());
    for (const auto& c : ir_.constArrays) boundSoFar_.insert(c.name);

    const SList& body = def[3].items(); // BLOCK ...
    std::vector<SExpr> list(body.begin() + 1, body.end());
    if (list.empty()) throw TranslationError(fnName_ + ": empty body");

    SExpr finalStmt = list.back();
    list.pop_back();
    std::vector<Triple> triples = makeTriples(list);

    bool mvFinal = false;
    SExpr base = finalTerm(finalStmt, mvFinal);
    SExpr nest = buildNest(triples, std::move(base), mvFinal);

    FunDef top;
    top.aux = false;
    top.name = fn.name;
    for (const auto& p : def[2].items()) top.params.push_back(p.symName());
    top.body = std::move(nest);

    std::stable_sort(pendingAux_.begin(), pendingAux_.end(),
                     [](const FunDef& a, const FunDef& b) {
                       return a.auxIndex < b.auxIndex;
                     });
    for (auto& aux : pendingAux_) out.defs.push_back(std::move(aux));
    out.defs.push_back(std::move(top));
  }

  // --- loop numbering: later siblings before earlier, children before parent

  void numberLoops(const SExpr& node) {
    if (!node.isList()) return;
    if (node.headIs("BLOCK")) {
      const SList& xs = node.items();
      for (std::size_t i = xs.size(); i-- > 1;) numberLoopsStmt(xs[i]);
      return;
    }
    numberLoopsStmt(node);
  }

  void numberLoopsStmt(const SExpr& s) {
    if (!s.isList()) return;
    if (s.headIs("FOR")) {
      numberLoops(s[2]); // children first
      int n = static_cast<int>(loopNumbers_.size());
      loopNumbers_[&s] = n;
      return;
    }
    if (s.headIs("IF")) {
      // later branches first to keep the reversed statement order
      if (s.size() == 4) numberLoops(s[3]);
      numberLoops(s[2]);
      return;
    }
    if (s.headIs("BLOCK")) numberLoops(s);
  }

  // Loops in the order the translation encounters them (statements forward,
  // a loop before its body, then branches in order). Statements are copied
  // during translation, so the numbers are consumed as a sequence rather
  // than looked up by node.
  void preOrderLoops(const SExpr& node) {
    if (!node.isList()) return;
    if (node.headIs("FOR")) {
      numbersInEncounterOrder_.push_back(loopNumbers_.at(&node));
      preOrderLoops(node[2]);
      return;
    }
    if (node.headIs("IF")) {
      preOrderLoops(node[2]);
      if (node.size() == 4) preOrderLoops(node[3]);
      return;
    }
    if (node.headIs("BLOCK"))
      for (std::size_t i = 1; i < node.size(); ++i) preOrderLoops(node[i]);
  }

  // --- triples ---------------------------------------------------------------

  std::vector<Triple> makeTriples(const std::vector<SExpr>& list) {
    std::vector<Triple> out;
    for (const auto& s : list) appendTriples(s, out);
    return out;
  }

  void appendTriples(const SExpr& s, std::vector<Triple>& out) {
    if (s.headIs("BLOCK")) { // inline nested plain blocks
      for (std::size_t i = 1; i < s.size(); ++i) appendTriples(s[i], out);
      return;
    }
    out.push_back(stmtTriple(s));
    if (!out.back().dead) {
      checkReads(out.back());
      for (const auto& w : out.back().writes) boundSoFar_.insert(w);
    } else {
      out.pop_back();
    }
  }

  void checkReads(const Triple& t) {
    std::set<std::string> free;
    fungen_detail::freeSymbols(t.term, free);
    for (const auto& v : free) {
      if (boundSoFar_.count(v) || isPrimitiveName(v) || isKnownFunction(v) ||
          isSpecialSymbol(v))
        continue;
      throw TranslationError(fnName_ + ": " + v +
                             " is read before it is bound");
    }
  }

  bool isKnownFunction(const std::string& n) const {
    if (ir_.find(n)) return true;
    for (const auto& c : ir_.constArrays)
      if (c.name == n) return true;
    return false;
  }

  static bool isSpecialSymbol(const std::string& n) {
    static const std::set<std::string> s = {"NIL", "T",  "MV",  "MV-LET",
                                            "LET", "LET*", "IF", "IF1",
                                            "IN-FUNCTION", "AND", "OR", "NOT",
                                            "=", "ASSERT"};
    return s.count(n) > 0;
  }

  Triple stmtTriple(const SExpr& s) {
    Triple t;
    if (s.headIs("DECLARE")) {
      t.writes = {s[1].symName()};
      t.term = s[2];
      t.isDefaultDeclare =
          (s[2].isNum() && s[2].intValue() == 0) || s[2].isSym("NIL");
      return t;
    }
    if (s.headIs("ASSIGN")) {
      t.writes = {s[1].symName()};
      t.term = s[2];
      return t;
    }
    if (s.headIs("ASSERT")) {
      t.writes = {"ASSERT"};
      t.isAssert = true;
      t.term = SExpr::listOf(SExpr::sym("IN-FUNCTION"), SExpr::sym(fnName_),
                             s[1]);
      return t;
    }
    if (s.headIs("MV-ASSIGN")) {
      for (const auto& v : s[1].items()) t.writes.push_back(v.symName());
      t.term = s[2];
      return t;
    }
    if (s.headIs("IF")) return ifTriple(s);
    if (s.headIs("FOR")) return loopTriple(s);
    if (s.headIs("RETURN"))
      throw TranslationError(fnName_ + ": unexpected return position");
    throw TranslationError(fnName_ + ": unexpected statement " +
                           printCompact(s));
  }

  // --- conditional statements -----------------------------------------------

  // writes of a statement list, first-write order, excluding its own declares
  void collectWrites(const SList& xs, std::size_t from,
                     std::vector<std::string>& writes,
                     std::set<std::string>& locals) {
    for (std::size_t i = from; i < xs.size(); ++i) {
      const SExpr& s = xs[i];
      if (!s.isList()) continue;
      if (s.headIs("DECLARE")) {
        locals.insert(s[1].symName());
      } else if (s.headIs("ASSIGN")) {
        noteWrite(s[1].symName(), writes, locals);
      } else if (s.headIs("MV-ASSIGN")) {
        for (const auto& v : s[1].items())
          noteWrite(v.symName(), writes, locals);
      } else if (s.headIs("IF")) {
        std::set<std::string> branchLocals;
        std::vector<std::string> ws = branchWrites(s);
        for (const auto& w : ws) noteWrite(w, writes, locals);
      } else if (s.headIs("FOR")) {
        for (const auto& w : loopWrites(s)) noteWrite(w, writes, locals);
      } else if (s.headIs("BLOCK")) {
        collectWrites(s.items(), 1, writes, locals);
      }
    }
  }

  static void noteWrite(const std::string& v, std::vector<std::string>& writes,
                        const std::set<std::string>& locals) {
    if (locals.count(v)) return;
    if (std::find(writes.begin(), writes.end(), v) == writes.end())
      writes.push_back(v);
  }

  std::vector<std::string> stmtListWrites(const SExpr& stmtOrBlock) {
    std::vector<std::string> writes;
    std::set<std::string> locals;
    if (stmtOrBlock.headIs("BLOCK"))
      collectWrites(stmtOrBlock.items(), 1, writes, locals);
    else {
      SList one = {SExpr::sym("BLOCK"), stmtOrBlock};
      collectWrites(one, 1, writes, locals);
    }
    return writes;
  }

  std::vector<std::string> branchWrites(const SExpr& ifStmt) {
    std::vector<std::string> w = stmtListWrites(ifStmt[2]);
    if (ifStmt.size() == 4)
      for (const auto& v : stmtListWrites(ifStmt[3]))
        if (std::find(w.begin(), w.end(), v) == w.end()) w.push_back(v);
    return w;
  }

  Triple ifTriple(const SExpr& s) {
    std::vector<std::string> w = branchWrites(s);
    Triple t;
    if (w.empty()) {
      if (!containsAssert(s)) {
        t.dead = true;
        return t;
      }
      // effect-only conditional: bind the dummy ASSERT variable
      SExpr thenT = branchTerm(s[2], {}, true);
      SExpr elseT = s.size() == 4 ? branchTerm(s[3], {}, true) : SExpr::list({});
      t.writes = {"ASSERT"};
      t.isAssert = true;
      t.term = SExpr::listOf(SExpr::sym("IF1"), s[1], std::move(thenT),
                             std::move(elseT));
      return t;
    }
    t.writes = w;
    SExpr thenT = branchTerm(s[2], w, false);
    SExpr elseT = s.size() == 4 ? branchTerm(s[3], w, false)
                                : passThrough(w);
    t.term = SExpr::listOf(SExpr::sym("IF1"), s[1], std::move(thenT),
                           std::move(elseT));
    return t;
  }

  static bool containsAssert(const SExpr& s) {
    if (!s.isList()) return false;
    if (s.headIs("ASSERT")) return true;
    for (const auto& x : s.items())
      if (containsAssert(x)) return true;
    return false;
  }

  SExpr passThrough(const std::vector<std::string>& w) {
    if (w.size() == 1) return SExpr::sym(w[0]);
    SList mv;
    mv.push_back(SExpr::sym("MV"));
    for (const auto& v : w) mv.push_back(SExpr::sym(v));
    return SExpr::list(std::move(mv));
  }

  // A branch becomes its own nest ending in the updated values of the
  // written variables (or the empty value for effect-only branches), with
  // single-use bindings inlined.
  SExpr branchTerm(const SExpr& stmtOrBlock, const std::vector<std::string>& w,
                   bool effectOnly) {
    std::vector<SExpr> list;
    if (stmtOrBlock.headIs("BLOCK"))
      list.assign(stmtOrBlock.items().begin() + 1, stmtOrBlock.items().end());
    else
      list.push_back(stmtOrBlock);
    std::vector<Triple> triples = makeTriples(list);
    SExpr base = effectOnly ? SExpr::list({}) : passThrough(w);
    return buildNest(triples, std::move(base), /*substitute=*/true);
  }

  // --- loops -----------------------------------------------------------------

  std::vector<std::string> loopWrites(const SExpr& forStmt) {
    // (c): variables assigned within the loop that are not local to it,
    // in first-write order, plus a non-local loop variable
    const SExpr& header = forStmt[1];
    const SExpr& init = header[0];
    std::string var = init[1].symName();
    std::vector<std::string> w = stmtListWrites(forStmt[2]);
    std::set<std::string> locals = declaredIn(forStmt[2]);
    std::vector<std::string> out;
    for (const auto& v : w)
      if (!locals.count(v) && v != var) out.push_back(v);
    if (init.headIs("ASSIGN")) out.push_back(var); // pre-declared loop var
    return out;
  }

  static std::set<std::string> declaredIn(const SExpr& node) {
    std::set<std::string> out;
    if (!node.isList()) return out;
    if (node.headIs("DECLARE")) {
      out.insert(node[1].symName());
      return out;
    }
    for (const auto& x : node.items())
      for (const auto& d : declaredIn(x)) out.insert(d);
    return out;
  }

  static void symbolsInOrder(const SExpr& e, std::vector<std::string>& out) {
    if (e.isSym()) {
      out.push_back(e.symName());
      return;
    }
    if (!e.isList()) return;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (i == 0 && e[i].isSym() && e.size() > 1) continue;
      symbolsInOrder(e[i], out);
    }
  }

  Triple loopTriple(const SExpr& s) {
    if (loopCursor_ >= numbersInEncounterOrder_.size())
      throw TranslationError(fnName_ + ": loop numbering missed a loop");
    int loopNumber = numbersInEncounterOrder_[loopCursor_++];
    std::string loopName = fnName_ + "-LOOP-" + std::to_string(loopNumber);

    const SExpr& header = s[1];
    const SExpr& init = header[0];
    const SExpr& test = header[1];
    const SExpr& update = header[2];
    std::string var = init[1].symName();
    SExpr initValue = init[2];

    // translate the body first (inner loops resolve their own numbers)
    std::vector<SExpr> bodyList;
    if (s[2].headIs("BLOCK"))
      bodyList.assign(s[2].items().begin() + 1, s[2].items().end());
    else
      bodyList.push_back(s[2]);

    std::set<std::string> savedBound = boundSoFar_;
    boundSoFar_.insert(var);
    std::vector<Triple> bodyTriples = makeTriples(bodyList);
    boundSoFar_ = std::move(savedBound);

    // classes: (a) loop variable, (b) read context, (c) updated results.
    // A non-local loop variable joins (c) for the returned values but is
    // not repeated in the parameter list.
    std::vector<std::string> cClass = loopWritesFromTriples(bodyTriples, s);
    if (cClass.empty())
      throw TranslationError(
          fnName_ + ": loop assigns no variable visible outside of it");
    std::vector<std::string> cParams;
    for (const auto& v : cClass)
      if (v != var) cParams.push_back(v);

    std::set<std::string> locals = declaredIn(s[2]);
    std::set<std::string> inC(cClass.begin(), cClass.end());
    std::vector<std::string> bClass;
    std::vector<std::string> scanOrder;
    symbolsInOrder(init[2], scanOrder);
    symbolsInOrder(test, scanOrder);
    for (const auto& t : bodyTriples) symbolsInOrder(t.term, scanOrder);
    symbolsInOrder(update, scanOrder);
    for (const auto& v : scanOrder) {
      if (v == var || inC.count(v) || locals.count(v)) continue;
      if (isPrimitiveName(v) || isKnownFunction(v) || isSpecialSymbol(v) ||
          isAuxName(v))
        continue;
      if (std::find(bClass.begin(), bClass.end(), v) == bClass.end())
        bClass.push_back(v);
    }

    // guard: (AND (INTEGERP var) [(INTEGERP limit)] test [extra])
    SExpr cmp = test;
    std::optional<SExpr> extra;
    if (test.headIs("LOGAND1")) {
      cmp = test[1];
      extra = test[2];
    }
    SExpr limit = cmp[2];
    SList guard;
    guard.push_back(SExpr::sym("AND"));
    guard.push_back(SExpr::listOf(SExpr::sym("INTEGERP"), SExpr::sym(var)));
    if (!limit.isNum())
      guard.push_back(SExpr::listOf(SExpr::sym("INTEGERP"), limit));
    guard.push_back(toLogicTerm(cmp));
    if (extra) guard.push_back(toLogicTerm(*extra));

    // measure: the gap between the loop variable and the limit
    bool ascending = cmp[0].isSym("LOG<") || cmp[0].isSym("LOG<=");
    SExpr measure;
    if (ascending) {
      SExpr bound = cmp[0].isSym("LOG<=") ? addConst(limit, 1) : limit;
      measure = SExpr::listOf(
          SExpr::sym("NFIX"),
          SExpr::listOf(SExpr::sym("-"), std::move(bound), SExpr::sym(var)));
    } else {
      SExpr bound = cmp[0].isSym("LOG>=") ? addConst(limit, -1) : limit;
      measure = SExpr::listOf(
          SExpr::sym("NFIX"),
          SExpr::listOf(SExpr::sym("-"), SExpr::sym(var), std::move(bound)));
    }

    // recursive call with the loop variable replaced by its update
    SList call;
    call.push_back(SExpr::sym(loopName));
    call.push_back(update);
    for (const auto& v : bClass) call.push_back(SExpr::sym(v));
    for (const auto& v : cParams) call.push_back(SExpr::sym(v));
    SExpr recur = SExpr::list(std::move(call));

    SExpr nest = buildNest(bodyTriples, std::move(recur), false);
    SExpr retTerm = passThrough(cClass);

    FunDef aux;
    aux.aux = true;
    aux.auxIndex = loopNumber;
    aux.name = loopName;
    aux.params.push_back(var);
    for (const auto& v : bClass) aux.params.push_back(v);
    for (const auto& v : cParams) aux.params.push_back(v);
    aux.measure = std::move(measure);
    aux.body = SExpr::listOf(SExpr::sym("IF"), SExpr::list(std::move(guard)),
                             std::move(nest), std::move(retTerm));
    pendingAux_.push_back(std::move(aux));

    // call at the loop's site: the initialization value and current bindings
    SList site;
    site.push_back(SExpr::sym(loopName));
    site.push_back(std::move(initValue));
    for (const auto& v : bClass) site.push_back(SExpr::sym(v));
    for (const auto& v : cParams) site.push_back(SExpr::sym(v));

    Triple t;
    t.writes = cClass;
    t.term = SExpr::list(std::move(site));
    return t;
  }

  bool isAuxName(const std::string& n) const {
    return n.find("-LOOP-") != std::string::npos;
  }

  std::vector<std::string> loopWritesFromTriples(
      const std::vector<Triple>& triples, const SExpr& forStmt) {
    const SExpr& init = forStmt[1][0];
    std::string var = init[1].symName();
    std::set<std::string> locals = declaredIn(forStmt[2]);
    std::vector<std::string> out;
    for (const auto& t : triples) {
      if (t.isAssert) continue;
      for (const auto& w : t.writes)
        if (!locals.count(w) && w != var &&
            std::find(out.begin(), out.end(), w) == out.end())
          out.push_back(w);
    }
    if (init.headIs("ASSIGN")) out.push_back(var);
    return out;
  }

  static SExpr addConst(const SExpr& t, int k) {
    if (t.isNum()) return SExpr::num(t.intValue() + k);
    if (k >= 0)
      return SExpr::listOf(SExpr::sym("+"), t, SExpr::num(Int(k)));
    return SExpr::listOf(SExpr::sym("-"), t, SExpr::num(Int(-k)));
  }

  // 1/0-valued IR test terms as T/NIL logic terms for guards
  static SExpr toLogicTerm(const SExpr& t) {
    static const std::map<std::string, std::string> cmp = {
        {"LOG<", "<"}, {"LOG<=", "<="}, {"LOG>", ">"}, {"LOG>=", ">="},
        {"LOG=", "="}};
    if (t.isList() && t.size() == 3 && t[0].isSym()) {
      auto it = cmp.find(t[0].symName());
      if (it != cmp.end())
        return SExpr::listOf(SExpr::sym(it->second), t[1], t[2]);
      if (t[0].isSym("LOG<>"))
        return SExpr::listOf(
            SExpr::sym("NOT"),
            SExpr::listOf(SExpr::sym("="), t[1], t[2]));
      if (t[0].isSym("LOGAND1"))
        return SExpr::listOf(SExpr::sym("AND"), toLogicTerm(t[1]),
                             toLogicTerm(t[2]));
      if (t[0].isSym("LOGIOR1"))
        return SExpr::listOf(SExpr::sym("OR"), toLogicTerm(t[1]),
                             toLogicTerm(t[2]));
    }
    if (t.isList() && t.size() == 2 && t[0].isSym("LOGNOT1"))
      return SExpr::listOf(SExpr::sym("="), t[1], SExpr::num(Int(0)));
    return SExpr::listOf(SExpr::sym("NOT"),
                         SExpr::listOf(SExpr::sym("="), t, SExpr::num(Int(0))));
  }

  // --- final statements ---------------------------------------------------------

  SExpr finalTerm(const SExpr& s, bool& mvFinal) {
    if (s.headIs("RETURN")) {
      mvFinal = s[1].headIs("MV");
      return s[1];
    }
    if (s.headIs("IF")) {
      mvFinal = false;
      return returnIfTerm(s);
    }
    if (s.headIs("BLOCK"))
      throw TranslationError(fnName_ + ": unexpected block as final statement");
    throw TranslationError(fnName_ + ": final statement must return");
  }

  SExpr returnIfTerm(const SExpr& s) {
    SExpr thenT = returnBranchTerm(s[2]);
    SExpr elseT = returnBranchTerm(s[3]);
    return SExpr::listOf(SExpr::sym("IF1"), s[1], std::move(thenT),
                         std::move(elseT));
  }

  SExpr returnBranchTerm(const SExpr& s) {
    if (s.headIs("RETURN")) return s[1];
    if (s.headIs("IF")) return returnIfTerm(s);
    if (s.headIs("BLOCK")) {
      std::vector<SExpr> list(s.items().begin() + 1, s.items().end());
      SExpr finalStmt = list.back();
      list.pop_back();
      std::vector<Triple> triples = makeTriples(list);
      bool mv = false;
      SExpr base = finalTerm(finalStmt, mv);
      return buildNest(triples, std::move(base), mv);
    }
    throw TranslationError(fnName_ + ": branch of the final if must return");
  }

  // --- nest construction ----------------------------------------------------------

  struct Binding {
    std::string var;
    SExpr term;
  };

  // Wrap `acc` in the pending single bindings, grouped into one LET (when
  // the bindings are independent and distinct) or LET*.
  static SExpr flushGroup(std::vector<Binding>& group, SExpr acc) {
    if (group.empty()) return acc;
    bool needsSequential = false;
    std::set<std::string> earlier;
    for (const auto& b : group) {
      std::set<std::string> free;
      fungen_detail::freeSymbols(b.term, free);
      for (const auto& v : free)
        if (earlier.count(v)) needsSequential = true;
      if (earlier.count(b.var)) needsSequential = true; // duplicate name
      earlier.insert(b.var);
    }
    SList bindings;
    for (auto& b : group)
      bindings.push_back(SExpr::listOf(SExpr::sym(b.var), std::move(b.term)));
    SExpr out = SExpr::listOf(
        SExpr::sym(needsSequential ? "LET*" : "LET"),
        SExpr::list(std::move(bindings)), std::move(acc));
    group.clear();
    return out;
  }

  // Build the binding nest over the triples with `acc` as the innermost
  // body. In substitution mode (conditional branches and tuple-valued
  // returns), single bindings whose variable occurs exactly once are
  // inlined; the mode ends at the first multi-value statement.
  static SExpr buildNest(const std::vector<Triple>& triples, SExpr acc,
                         bool substitutionMode) {
    std::vector<Binding> group; // collected in reverse
    bool substituting = substitutionMode;
    for (std::size_t i = triples.size(); i-- > 0;) {
      const Triple& t = triples[i];
      if (t.writes.size() > 1) {
        acc = flushGroup(group, std::move(acc));
        SList vars;
        for (const auto& v : t.writes) vars.push_back(SExpr::sym(v));
        acc = SExpr::listOf(SExpr::sym("MV-LET"), SExpr::list(std::move(vars)),
                            t.term, std::move(acc));
        substituting = false;
        continue;
      }
      const std::string& v = t.writes[0];
      // occurrences below this statement: group bindings in source order,
      // stopping at a rebinding, then the nest body
      auto occurrences = [&](const std::string& name) {
        int n = 0;
        for (const auto& b : group) {
          n += fungen_detail::countFree(b.term, name);
          if (b.var == name) return n; // shadowed below
        }
        return n + fungen_detail::countFree(acc, name);
      };
      if (t.isAssert) {
        group.insert(group.begin(), {v, t.term});
        continue;
      }
      if (t.isDefaultDeclare && occurrences(v) == 0) continue; // dropped
      if (substituting && !t.isDefaultDeclare && occurrences(v) == 1 &&
          group.empty()) {
        std::set<std::string> replFree;
        fungen_detail::freeSymbols(t.term, replFree);
        SExpr candidate = acc;
        if (fungen_detail::substitute(candidate, v, t.term, replFree)) {
          acc = std::move(candidate);
          continue;
        }
      }
      group.insert(group.begin(), {v, t.term});
    }
    return flushGroup(group, std::move(acc));
  }
};

inline Translation translateIr(const IrProgram& ir) {
  return FunGen(ir).translate();
}

// Canonical text of a translation: one definition per top-level form,
// beginning with the SET- directives.
inline std::string renderTranslation(const Translation& t) {
  std::string out;
  for (const auto& form : t.allForms()) {
    out += printPretty(form);
    out += "\n\n";
  }
  if (!out.empty()) out.pop_back();
  return out;
}

} // namespace rac
