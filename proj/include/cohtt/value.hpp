#pragma once

// Semantic domain for normalization by evaluation. Values use de Bruijn
// LEVELS (absolute), environments are persistent lists, and binders are
// closures over the defining environment.
//
// Neutrals keep two views when the head is a defined constant: the named
// head + spine (used for rewrite matching and for printing stuck calls), and
// a lazy unfolding (used by eliminations and as a conversion fallback). If
// forcing the unfolding reaches a non-neutral value, that value wins; if it
// is stuck, the named view is kept.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cohtt/errors.hpp"
#include "cohtt/term.hpp"

namespace cohtt {

struct Value;
using Vp = std::shared_ptr<Value>;
struct ECtx;

// --- environments ----------------------------------------------------------

struct EnvNode;
using Env = std::shared_ptr<const EnvNode>;
struct EnvNode {
  Vp v;
  Env next;
  int len;  // length including this node
};

inline Env envPush(const Env& e, Vp v) {
  auto n = std::make_shared<EnvNode>();
  n->v = std::move(v);
  n->next = e;
  n->len = e ? e->len + 1 : 1;
  return n;
}
inline int envLen(const Env& e) { return e ? e->len : 0; }
inline const Vp& envLookup(const Env& e, int idx) {
  const EnvNode* n = e.get();
  while (idx-- > 0) n = n->next.get();
  return n->v;
}

// --- levels ----------------------------------------------------------------

// Canonical universe level: max(k, a1+o1, ..., an+on) where each atom is a
// rigid level variable (by de Bruijn level) or an unsolved level meta.
struct VLevel {
  struct Atom {
    bool isMeta = false;
    int id = 0;  // variable level or meta id
    unsigned off = 0;
    bool operator<(const Atom& o) const {
      return isMeta != o.isMeta ? isMeta < o.isMeta : id < o.id;
    }
  };
  unsigned k = 0;
  std::vector<Atom> atoms;  // sorted, one entry per (isMeta,id)

  static VLevel constant(unsigned k) { VLevel l; l.k = k; return l; }
  static VLevel var(int lvl, unsigned off = 0) {
    VLevel l; l.atoms.push_back({false, lvl, off}); return l;
  }
  static VLevel meta(int id, unsigned off = 0) {
    VLevel l; l.atoms.push_back({true, id, off}); return l;
  }
  bool isConst(unsigned v) const { return atoms.empty() && k == v; }
  bool hasAtoms() const { return !atoms.empty(); }
  bool mentionsVarLevel(int lvl) const {
    for (auto& a : atoms) if (!a.isMeta && a.id == lvl) return true;
    return false;
  }
  bool hasMetaAtom() const {
    for (auto& a : atoms) if (a.isMeta) return true;
    return false;
  }
};

VLevel lsucL(const VLevel& l);
VLevel lmaxL(const VLevel& a, const VLevel& b);
bool levelEq(const VLevel& a, const VLevel& b);  // on forced levels

// --- values ----------------------------------------------------------------

struct Closure {
  Env env;
  TermPtr body;  // one extra free index
};

struct Head {
  enum K { Var, Const, Meta } k = Var;
  int id = 0;        // variable level or meta id
  std::string name;  // constant name
};

struct Elim {
  enum K { App, Fst, Snd, J, BElim, FElim, Absurd } k = App;
  bool implicit_ = false;        // App
  Vp arg;                        // App argument / BElim false case
  Vp motive;                     // J / BElim / FElim / Absurd (Absurd: result type)
  Vp base;                       // J base / BElim true case
  Closure branch;                // FElim branch (binds the crisp variable)
  std::string name, name2;       // FElim binder hints
};

struct Lazy {
  std::function<Vp(ECtx&)> make;
  Vp memo;
  Vp force(ECtx& E) {
    if (!memo) {
      memo = make(E);
      make = nullptr;
    }
    return memo;
  }
};

enum class Vt {
  Pi, Lam, Sigma, Pair,
  Univ, LevelVal, LevelT,
  Id, Refl,
  Unit, TT, Empty,
  Bool, True, False,
  Flat, Con,
  Neutral,
  SortAny,  // internal: "any universe" (motive codomain check); never user-facing
};

struct Value {
  Vt tag;
  std::string name;             // binder hint (Pi/Lam/Sigma)
  bool implicit_ = false;       // Pi/Lam
  bool crisp = false;           // Pi/Lam
  bool top = false;             // Univ: limit sort
  Vp v1, v2, v3;                // Pi dom=v1; Pair v1,v2; Id ty=v1,l=v2,r=v3; Flat ty=v1; Con v1
  Closure cl;                   // Pi/Sigma codomain, Lam body
  VLevel level;                 // Univ / LevelVal / Flat level
  Head head;                    // Neutral
  std::vector<Elim> spine;      // Neutral
  std::shared_ptr<Lazy> unfold; // Neutral: lazy unfolding (defined heads)

  explicit Value(Vt t) : tag(t) {}
};

inline Vp vmk(Vt t) { return std::make_shared<Value>(t); }

inline Vp vVar(int lvl) {
  auto v = vmk(Vt::Neutral);
  v->head = {Head::Var, lvl, {}};
  return v;
}
inline Vp vUniv(VLevel l) { auto v = vmk(Vt::Univ); v->level = std::move(l); return v; }
inline Vp vUnivTop() { auto v = vmk(Vt::Univ); v->top = true; return v; }
inline Vp vLevel(VLevel l) { auto v = vmk(Vt::LevelVal); v->level = std::move(l); return v; }

// --- metavariable store ----------------------------------------------------

struct MetaInfo {
  Vp type;                   // value; its free variable levels are < ctxLen
  int ctxLen = 0;
  std::vector<bool> usable;  // crisp-usability mask of the creation context
  std::string hint;
  SrcLoc loc;
  bool solved = false;
  TermPtr solutionBody;      // term with ctxLen free indices
  bool isLevel = false;
  VLevel solutionLevel;      // for level metas (atoms are absolute levels)
  TermPtr zonkedBody;        // memoized fully-resolved solution
  bool zonking = false;      // cycle guard while resolving
};

struct MetaState {
  std::vector<MetaInfo> metas;
  int fresh(Vp type, int ctxLen, std::vector<bool> usable, std::string hint, SrcLoc loc, bool isLevel) {
    MetaInfo mi;
    mi.type = std::move(type);
    mi.ctxLen = ctxLen;
    mi.usable = std::move(usable);
    mi.hint = std::move(hint);
    mi.loc = std::move(loc);
    mi.isLevel = isLevel;
    metas.push_back(std::move(mi));
    return static_cast<int>(metas.size()) - 1;
  }
};

}  // namespace cohtt
