#pragma once

// Surface abstract syntax as parsed, before elaboration. Every node carries
// its source location for error reporting.

#include <memory>
#include <string>
#include <vector>

#include "cohtt/errors.hpp"

namespace cohtt {

struct STerm;
using SPtr = std::shared_ptr<const STerm>;

enum class St {
  Name,      // identifier (variable or constant)
  Univ,      // Set <level>     (a = level)
  UnivTop,   // Setw
  LevelT,    // Level
  LZero,     // lzero
  LSuc,      // lsuc <atom>     (a)
  LMax,      // a \/ b
  Pi,        // single binder: name, implicit_, crisp; a = dom, b = cod
  Lam,       // name, implicit_; a = body
  App,       // a b; implicit_; name = argument name for {x := t}
  Sigma,     // name; a = first, b = second     (name empty: non-dependent)
  Pair,      // (a , b)
  Fst, Snd,  // fst a / snd a
  Id,        // Id a b c
  Eq,        // a = b [: c]     (c may be null: infer from a)
  Refl,
  J,         // J a b c  = J motive proof base  -> a motive, b proof, c base
  Unit, TT, Empty,
  Absurd,    // absurd a b  (a = result type, b = scrutinee)
  Bool, TrueL, FalseL,
  BoolElim,  // boolElim a b c d (motive, true case, false case, scrutinee)
  Flat,      // Flat a
  Con,       // con a
  LetCon,    // let con <name> = a [at <name2>. b] in c
};

struct STerm {
  St tag;
  SrcLoc loc;
  std::string name, name2;
  bool implicit_ = false;
  bool crisp = false;
  SPtr a, b, c, d;

  explicit STerm(St t, SrcLoc l) : tag(t), loc(std::move(l)) {}
};

inline std::shared_ptr<STerm> smk(St t, SrcLoc l) { return std::make_shared<STerm>(t, std::move(l)); }

struct SBinder {
  std::string name;
  bool implicit_ = false;
  bool crisp = false;
  SPtr type;
  SrcLoc loc;
};

struct SDecl {
  enum K { Def, Postulate, Rewrite } k = Def;
  std::string name;  // Def/Postulate
  SrcLoc loc;
  std::vector<SBinder> binders;
  SPtr type;
  SPtr body;
  std::vector<std::string> ruleNames;  // Rewrite
};

// Parse a whole file (src) under the given file name for locations.
std::vector<SDecl> parseFile(const std::string& src, const std::string& fileName);

// Parse a single term (used by tests and the normalize round-trip).
SPtr parseTerm(const std::string& src, const std::string& fileName);

}  // namespace cohtt
