#pragma once

#include <string>
#include <vector>

namespace rac {

struct SrcPos {
  int line = 0;
  int col = 0;
};

// Every rejection carries exactly one rule id and a position.
// Rule ids in use: SYNTAX, SUBSET, LOOP-FORM, RETURN-PLACEMENT, SWITCH-FORM,
// TUPLE-CONTEXT, SIGNED-DIV, SLICE-RANGE, UNKNOWN-IDENT, NAME-CLASH, ARITY,
// TYPE, WIDTH.
struct Diagnostic {
  SrcPos pos;
  std::string ruleId;
  std::string message;
};

inline std::string formatDiagnostic(const std::string& file,
                                    const Diagnostic& d) {
  return file + ":" + std::to_string(d.pos.line) + ":" +
         std::to_string(d.pos.col) + ": " + d.ruleId + ": " + d.message;
}

class DiagnosticSink {
public:
  void report(SrcPos pos, std::string ruleId, std::string message) {
    diags_.push_back({pos, std::move(ruleId), std::move(message)});
  }
  bool ok() const { return diags_.empty(); }
  const std::vector<Diagnostic>& all() const { return diags_; }
  void append(const DiagnosticSink& other) {
    diags_.insert(diags_.end(), other.diags_.begin(), other.diags_.end());
  }

private:
  std::vector<Diagnostic> diags_;
};

} // namespace rac
