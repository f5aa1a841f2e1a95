#pragma once

#include "rac/bits.hpp"
#include "rac/diagnostics.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace rac {

enum class Tok {
  Ident,
  Number,
  Punct,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  Int value;       // Number
  bool hex = false;
  SrcPos pos;

  bool is(std::string_view t) const { return text == t; }
  bool isIdent(std::string_view t) const { return kind == Tok::Ident && text == t; }
};

// Hand-rolled scanner. Skips // and /* */ comments and #include lines;
// any other preprocessor directive is outside the subset.
class Lexer {
public:
  Lexer(std::string_view src, DiagnosticSink& diags)
      : src_(src), diags_(diags) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skipTrivia();
      if (pos_ >= src_.size()) break;
      SrcPos at = here();
      char c = src_[pos_];
      if (isIdentStart(c)) {
        std::size_t s = pos_;
        while (pos_ < src_.size() && isIdentChar(src_[pos_])) ++pos_;
        out.push_back({Tok::Ident, std::string(src_.substr(s, pos_ - s)),
                       Int(0), false, at});
      } else if (c >= '0' && c <= '9') {
        out.push_back(lexNumber(at));
      } else {
        Token t = lexPunct(at);
        if (!t.text.empty()) out.push_back(std::move(t));
      }
    }
    out.push_back({Tok::End, "", Int(0), false, here()});
    return out;
  }

private:
  SrcPos here() const { return {line_, static_cast<int>(pos_ - lineStart_) + 1}; }

  void advanceLine() {
    ++line_;
    lineStart_ = pos_;
  }

  void skipTrivia() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        ++pos_;
        advanceLine();
      } else if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
        SrcPos at = here();
        pos_ += 2;
        for (;;) {
          if (pos_ + 1 >= src_.size()) {
            diags_.report(at, "SYNTAX", "unterminated comment");
            pos_ = src_.size();
            break;
          }
          if (src_[pos_] == '\n') {
            ++pos_;
            advanceLine();
          } else if (src_[pos_] == '*' && src_[pos_ + 1] == '/') {
            pos_ += 2;
            break;
          } else {
            ++pos_;
          }
        }
      } else if (c == '#') {
        SrcPos at = here();
        std::size_t s = pos_;
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        std::string_view directive = src_.substr(s, pos_ - s);
        if (directive.substr(0, 8) != "#include")
          diags_.report(at, "SUBSET",
                        "preprocessor directives other than #include are not "
                        "part of the language");
      } else {
        break;
      }
    }
  }

  Token lexNumber(SrcPos at) {
    std::size_t s = pos_;
    bool hex = false;
    if (src_[pos_] == '0' && pos_ + 1 < src_.size() &&
        (src_[pos_ + 1] == 'x' || src_[pos_ + 1] == 'X')) {
      hex = true;
      pos_ += 2;
      while (pos_ < src_.size() && isHexDigit(src_[pos_])) ++pos_;
    } else {
      while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9')
        ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '.' || src_[pos_] == 'e' ||
                                 src_[pos_] == 'E' || src_[pos_] == 'f')) {
        diags_.report(at, "SUBSET", "floating-point literals are not allowed");
        while (pos_ < src_.size() && isIdentChar(src_[pos_])) ++pos_;
      }
    }
    std::string text(src_.substr(s, pos_ - s));
    Int v;
    if (hex) {
      v = 0;
      for (std::size_t i = 2; i < text.size(); ++i)
        v = v * 16 + hexVal(text[i]);
    } else {
      v = Int(text);
    }
    return {Tok::Number, text, v, hex, at};
  }

  Token lexPunct(SrcPos at) {
    static const char* threes[] = {"<<=", ">>="};
    static const char* twos[] = {"<<", ">>", "<=", ">=", "==", "!=", "&&",
                                 "||", "+=", "-=", "|=", "&=", "^=", "++",
                                 "--", "::", "*=", "/=", "%="};
    std::string_view rest = src_.substr(pos_);
    for (const char* p : threes)
      if (rest.substr(0, 3) == p) {
        pos_ += 3;
        return {Tok::Punct, p, Int(0), false, at};
      }
    for (const char* p : twos)
      if (rest.substr(0, 2) == p) {
        pos_ += 2;
        return {Tok::Punct, p, Int(0), false, at};
      }
    char c = src_[pos_];
    if (std::string_view("+-*/%<>=!~&|^?:;,.(){}[]").find(c) !=
        std::string_view::npos) {
      ++pos_;
      return {Tok::Punct, std::string(1, c), Int(0), false, at};
    }
    diags_.report(at, "SYNTAX", std::string("stray character '") + c + "'");
    ++pos_;
    return {Tok::Punct, "", Int(0), false, at};
  }

  static bool isIdentStart(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool isIdentChar(char c) {
    return isIdentStart(c) || (c >= '0' && c <= '9');
  }
  static bool isHexDigit(char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') ||
           (c >= 'A' && c <= 'F');
  }
  static int hexVal(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return c - 'A' + 10;
  }

  std::string_view src_;
  DiagnosticSink& diags_;
  std::size_t pos_ = 0;
  std::size_t lineStart_ = 0;
  int line_ = 1;
};

} // namespace rac
