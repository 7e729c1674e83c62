#pragma once

// Error reporting: every user-facing failure carries a stable code (see
// docs/errors.md) and a source location, formatted as
//   file:line:col: [E0NN] message

#include <cstdio>
#include <stdexcept>
#include <string>

namespace cohtt {

struct SrcLoc {
  std::string file;
  int line = 0;  // 1-based; 0 = unknown
  int col = 0;
};

enum ErrCode {
  E_IO = 1,                 // E001 cannot read input
  E_LEX_CHAR = 2,           // E002 illegal character
  E_LEX_COMMENT = 3,        // E003 unterminated block comment
  E_PARSE = 4,              // E004 syntax error
  E_UNBOUND = 5,            // E005 unbound name
  E_DUPLICATE = 6,          // E006 duplicate top-level name
  E_CANNOT_INFER = 7,       // E007 cannot infer a type
  E_MISMATCH = 8,           // E008 type mismatch
  E_NOT_FUNCTION = 9,       // E009 applying a non-function
  E_MODAL = 10,             // E010 crisp-variable discipline violation
  E_UNSOLVED_META = 11,     // E011 unsolved implicit argument
  E_RULE_HEAD = 12,         // E012 rewrite head is not a matchable constant
  E_RULE_PATTERN = 13,      // E013 rewrite left-hand side is not a pattern
  E_RULE_TYPE = 14,         // E014 rewrite target is not an identity type
  E_UNIVERSE = 15,          // E015 universe error
  E_BUDGET = 16,            // E016 rewrite budget exceeded
  E_NOT_TYPE = 17,          // E017 expression is not a type
  E_IMPLICIT_NAME = 18,     // E018 no implicit argument with the given name
  E_LEVEL = 19,             // E019 level constraint unsolvable
  E_INTERNAL = 20,          // E020 internal invariant failure
};

class Error : public std::runtime_error {
public:
  Error(ErrCode code, SrcLoc loc, const std::string& msg)
      : std::runtime_error(format(code, loc, msg)), code(code), loc(std::move(loc)), msg(msg) {}

  ErrCode code;
  SrcLoc loc;
  std::string msg;

  static std::string format(ErrCode code, const SrcLoc& loc, const std::string& msg) {
    char head[32];
    std::snprintf(head, sizeof head, "[E%03d]", static_cast<int>(code));
    std::string out;
    if (!loc.file.empty() || loc.line > 0) {
      out += loc.file.empty() ? "<input>" : loc.file;
      out += ":" + std::to_string(loc.line) + ":" + std::to_string(loc.col) + ": ";
    }
    out += head;
    out += " ";
    out += msg;
    return out;
  }
};

[[noreturn]] inline void fail(ErrCode code, const SrcLoc& loc, const std::string& msg) {
  throw Error(code, loc, msg);
}

}  // namespace cohtt
