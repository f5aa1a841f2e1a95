#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

// Untyped symbolic expressions: the parser IR and the shape of all
// generated functional code. Atoms are unbounded integers and
// case-insensitive symbols (canonically upper case); everything else
// is a list.

namespace rac {

using Int = boost::multiprecision::cpp_int;

class SExpr;
using SList = std::vector<SExpr>;

class SExpr {
public:
  SExpr() : repr_(SList{}) {}

  static SExpr sym(std::string_view name) {
    SExpr e;
    e.repr_ = upcase(name);
    return e;
  }
  static SExpr num(Int v) {
    SExpr e;
    e.repr_ = std::move(v);
    return e;
  }
  static SExpr num(long v) { return num(Int(v)); }
  static SExpr list(SList items) {
    SExpr e;
    e.repr_ = std::move(items);
    return e;
  }
  template <typename... Ts>
  static SExpr listOf(Ts&&... items) {
    SList v;
    v.reserve(sizeof...(items));
    (v.push_back(std::forward<Ts>(items)), ...);
    return list(std::move(v));
  }

  bool isSym() const { return std::holds_alternative<std::string>(repr_); }
  bool isNum() const { return std::holds_alternative<Int>(repr_); }
  bool isList() const { return std::holds_alternative<SList>(repr_); }
  bool isAtom() const { return !isList(); }

  const std::string& symName() const { return std::get<std::string>(repr_); }
  const Int& intValue() const { return std::get<Int>(repr_); }
  const SList& items() const { return std::get<SList>(repr_); }
  SList& items() { return std::get<SList>(repr_); }

  bool isSym(std::string_view name) const {
    return isSym() && symName() == upcase(name);
  }
  // A call-shaped list: (HEAD ...).
  bool headIs(std::string_view name) const {
    return isList() && !items().empty() && items()[0].isSym(name);
  }
  std::size_t size() const { return items().size(); }
  const SExpr& operator[](std::size_t i) const { return items()[i]; }

  friend bool operator==(const SExpr& a, const SExpr& b) {
    return a.repr_ == b.repr_;
  }
  friend bool operator!=(const SExpr& a, const SExpr& b) { return !(a == b); }

  static std::string upcase(std::string_view s) {
    std::string r(s);
    for (char& c : r)
      if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    return r;
  }

private:
  std::variant<Int, std::string, SList> repr_;
};

inline SExpr quoted(SExpr e) {
  return SExpr::listOf(SExpr::sym("QUOTE"), std::move(e));
}

// ---------------------------------------------------------------------------
// Printing. Canonical form: upper-case symbols, single spaces, (QUOTE X)
// rendered as 'X. The pretty printer keeps forms on one line until they
// exceed the width, then breaks after the head.

inline std::string printCompact(const SExpr& e) {
  if (e.isNum()) return e.intValue().str();
  if (e.isSym()) return e.symName();
  if (e.headIs("QUOTE") && e.size() == 2) return "'" + printCompact(e[1]);
  std::string out = "(";
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (i) out += ' ';
    out += printCompact(e[i]);
  }
  out += ')';
  return out;
}

namespace detail {

inline void printPrettyRec(const SExpr& e, std::string& out, int indent,
                           int width) {
  std::string flat = printCompact(e);
  if (e.isAtom() || indent + static_cast<int>(flat.size()) <= width) {
    out += flat;
    return;
  }
  const SList& xs = e.items();
  if (e.headIs("QUOTE") && xs.size() == 2) {
    out += '\'';
    printPrettyRec(xs[1], out, indent + 1, width);
    return;
  }
  out += '(';
  // Head plus as many following atoms as fit, then one element per line.
  std::size_t i = 0;
  int col = indent + 1;
  while (i < xs.size() && xs[i].isAtom()) {
    std::string a = printCompact(xs[i]);
    if (i > 0) {
      out += ' ';
      ++col;
    }
    out += a;
    col += static_cast<int>(a.size());
    ++i;
    if (i < xs.size() && !xs[i].isAtom()) break;
  }
  for (; i < xs.size(); ++i) {
    out += '\n';
    out.append(static_cast<std::size_t>(indent) + 2, ' ');
    printPrettyRec(xs[i], out, indent + 2, width);
  }
  out += ')';
}

} // namespace detail

inline std::string printPretty(const SExpr& e, int width = 90) {
  std::string out;
  detail::printPrettyRec(e, out, 0, width);
  return out;
}

// ---------------------------------------------------------------------------
// Reader.

struct SExprParseError : std::runtime_error {
  std::size_t offset;
  SExprParseError(const std::string& msg, std::size_t off)
      : std::runtime_error(msg), offset(off) {}
};

namespace detail {

class SExprReader {
public:
  explicit SExprReader(std::string_view text) : text_(text) {}

  std::vector<SExpr> readAll() {
    std::vector<SExpr> result;
    skipSpace();
    while (pos_ < text_.size()) {
      result.push_back(readOne());
      skipSpace();
    }
    return result;
  }

private:
  void skipSpace() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  SExpr readOne() {
    skipSpace();
    if (pos_ >= text_.size())
      throw SExprParseError("unexpected end of input", pos_);
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      SList items;
      for (;;) {
        skipSpace();
        if (pos_ >= text_.size())
          throw SExprParseError("unterminated list", pos_);
        if (text_[pos_] == ')') {
          ++pos_;
          return SExpr::list(std::move(items));
        }
        items.push_back(readOne());
      }
    }
    if (c == ')') throw SExprParseError("unbalanced ')'", pos_);
    if (c == '\'') {
      ++pos_;
      return quoted(readOne());
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() && !isDelim(text_[pos_])) ++pos_;
    std::string_view tok = text_.substr(start, pos_ - start);
    if (isIntToken(tok)) return SExpr::num(Int(std::string(tok)));
    return SExpr::sym(tok);
  }

  static bool isDelim(char c) {
    return c == '(' || c == ')' || c == ' ' || c == '\t' || c == '\n' ||
           c == '\r' || c == ';' || c == '\'';
  }

  static bool isIntToken(std::string_view t) {
    std::size_t i = (t.size() > 1 && (t[0] == '-' || t[0] == '+')) ? 1 : 0;
    if (i >= t.size()) return false;
    for (; i < t.size(); ++i)
      if (t[i] < '0' || t[i] > '9') return false;
    return true;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

} // namespace detail

inline std::vector<SExpr> parseSExprs(std::string_view text) {
  return detail::SExprReader(text).readAll();
}

inline SExpr parseSExpr(std::string_view text) {
  auto v = parseSExprs(text);
  if (v.size() != 1)
    throw SExprParseError("expected exactly one expression", 0);
  return std::move(v[0]);
}

// ---------------------------------------------------------------------------
// Structural comparison for golden files. Symbols already compare
// case-insensitively (upcased at construction); DEFUN / DEFUND / DEFUNDD
// are interchangeable markers.

inline bool isDefMarker(const SExpr& e) {
  return e.isSym("DEFUN") || e.isSym("DEFUND") || e.isSym("DEFUNDD");
}

inline bool structuralEqual(const SExpr& a, const SExpr& b) {
  if (a.isSym() && b.isSym() && isDefMarker(a) && isDefMarker(b)) return true;
  if (a.isList() && b.isList()) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!structuralEqual(a[i], b[i])) return false;
    return true;
  }
  return a == b;
}

// First point of difference, as a path like "[2][0]", for diagnostics.
inline bool structuralDiff(const SExpr& a, const SExpr& b, std::string& path) {
  if (structuralEqual(a, b)) return false;
  if (a.isList() && b.isList()) {
    std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!structuralEqual(a[i], b[i])) {
        path += "[" + std::to_string(i) + "]";
        return structuralDiff(a[i], b[i], path);
      }
    }
    path += ".length";
    return true;
  }
  return true;
}

} // namespace rac
