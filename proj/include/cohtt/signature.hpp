#pragma once

// Top-level signature: definitions, postulates, and registered rewrite
// rules. Rule left-hand sides are compiled to first-order patterns over a
// telescope of rule variables; matching binds each variable once, and later
// occurrences of the same variable are checked by conversion.

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "cohtt/errors.hpp"
#include "cohtt/term.hpp"

namespace cohtt {

struct Pat;
using PatPtr = std::shared_ptr<const Pat>;

struct Pat {
  enum K {
    Flex,    // binding occurrence of rule variable `var` (under `binders` lambdas:
             // the candidate must not capture them — escape check)
    Check,   // repeated occurrence of rule variable `var`: conversion check
    ConApp,  // constant `con` applied to `ps` (spine applications only)
    Prim,    // builtin literal: Refl/TrueC/FalseC/TT/LZero
    PLam,    // lambda pattern; body in ps[0]
    Rigid,   // closed term (no rule variables): compared by conversion
    BVar,    // occurrence of the pattern-lambda variable numbered `var`
             // (0 = outermost); matches exactly that variable
    Defer,   // argument that is a term over rule variables but not itself a
             // pattern (`rigid` holds the term); once every rule variable is
             // bound elsewhere, it is instantiated and compared by conversion
  } k = Flex;
  int var = 0;
  int binders = 0;  // Flex: lambdas crossed (their variables must not escape)
  std::string con;
  std::vector<PatPtr> ps;
  Tm prim = Tm::Refl;
  TermPtr rigid;
};

std::shared_ptr<Pat> pmk(Pat::K k);

struct RewriteRule {
  std::string name;          // name of the declaration the rule came from
  std::string head;          // constant whose applications are matched
  std::vector<PatPtr> args;  // one per matched argument position
  int nvars = 0;             // telescope size
  TermPtr lhs;               // elaborated left side (nvars free indices)
  TermPtr rhs;               // elaborated right side (nvars free indices)
  SrcLoc loc;
};

struct Decl {
  enum Kind { Def, Postulate, Rewrite } kind = Def;
  std::string name;   // for Rewrite: the name of the rule's source declaration
  TermPtr type;       // Def/Postulate: closed type
  TermPtr body;       // Def: closed body
  int rule = -1;      // Rewrite: index into Signature::rules
  SrcLoc loc;
};

struct Signature {
  std::vector<Decl> decls;
  std::unordered_map<std::string, int> byName;  // defs and postulates only
  std::vector<RewriteRule> rules;
  std::unordered_map<std::string, std::vector<int>> rulesByHead;

  const Decl* find(const std::string& n) const {
    auto it = byName.find(n);
    return it == byName.end() ? nullptr : &decls[it->second];
  }

  void addDecl(Decl d, const SrcLoc& loc) {
    if (d.kind != Decl::Rewrite) {
      if (byName.count(d.name))
        fail(E_DUPLICATE, loc, "duplicate top-level name '" + d.name + "'");
      byName[d.name] = static_cast<int>(decls.size());
    }
    decls.push_back(std::move(d));
  }

  void addRule(RewriteRule r) {
    int idx = static_cast<int>(rules.size());
    rulesByHead[r.head].push_back(idx);
    rules.push_back(std::move(r));
  }

  const std::vector<int>* rulesFor(const std::string& head) const {
    auto it = rulesByHead.find(head);
    return it == rulesByHead.end() ? nullptr : &it->second;
  }
};

}  // namespace cohtt
