#pragma once

// Core syntax. Terms use de Bruijn indices; binder names are kept only as
// printing hints and are ignored by equality. Universe levels are ordinary
// terms (of type Level), so `Univ` carries its level as a child.
//
// Child slots per tag (slots marked * bind one variable in that child):
//   Var      idx
//   Const    name
//   Meta     idx (meta id)
//   Univ     a = level term; top=true means the limit sort (Setw), a null
//   LevelT LZero              (no children)
//   LSuc     a          LMax  a, b
//   Pi       name, implicit_, crisp; a = domain, b* = codomain
//   Lam      name, implicit_, crisp; a* = body
//   App      implicit_; a = function, b = argument
//   Sigma    name; a = first type, b* = second type
//   Pair     a, b       Fst/Snd  a
//   Id       a = type, b = left, c = right
//   Refl                (no children)
//   J        a = motive (a plain term of function type), b = base, c = proof
//   Unit TT Empty Bool TrueC FalseC   (no children)
//   Absurd   a = result type, b = scrutinee
//   BoolElim a = motive, b = true case, c = false case, d = scrutinee
//   Flat     a = level term, b = type
//   Con      a = body (checked under crisp restriction)
//   FlatElim name = branch binder, name2 = motive binder;
//            a = motive (plain term), b = scrutinee, c* = branch (crisp var)

#include <memory>
#include <string>

namespace cohtt {

enum class Tm {
  Var, Const, Meta,
  Univ, LevelT, LZero, LSuc, LMax,
  Pi, Lam, App,
  Sigma, Pair, Fst, Snd,
  Id, Refl, J,
  Unit, TT, Empty, Absurd,
  Bool, TrueC, FalseC, BoolElim,
  Flat, Con, FlatElim,
};

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  Tm tag;
  int idx = 0;             // Var index or Meta id
  bool top = false;        // Univ: limit sort
  bool implicit_ = false;  // Pi/Lam binder, App argument
  bool crisp = false;      // Pi/Lam binder
  std::string name;        // Const name or binder hint
  std::string name2;       // FlatElim motive binder hint
  TermPtr a, b, c, d;

  explicit Term(Tm t) : tag(t) {}
};

// --- constructors ---------------------------------------------------------

inline TermPtr mk(Tm t) { return std::make_shared<Term>(t); }

inline TermPtr mkVar(int i) { auto t = std::make_shared<Term>(Tm::Var); t->idx = i; return t; }
inline TermPtr mkConst(std::string n) { auto t = std::make_shared<Term>(Tm::Const); t->name = std::move(n); return t; }
inline TermPtr mkMeta(int id) { auto t = std::make_shared<Term>(Tm::Meta); t->idx = id; return t; }

inline TermPtr mkUniv(TermPtr level) { auto t = std::make_shared<Term>(Tm::Univ); t->a = std::move(level); return t; }
inline TermPtr mkUnivTop() { auto t = std::make_shared<Term>(Tm::Univ); t->top = true; return t; }
inline TermPtr mkLZero() { return mk(Tm::LZero); }
inline TermPtr mkLSuc(TermPtr l) { auto t = std::make_shared<Term>(Tm::LSuc); t->a = std::move(l); return t; }
inline TermPtr mkLMax(TermPtr l, TermPtr r) { auto t = std::make_shared<Term>(Tm::LMax); t->a = std::move(l); t->b = std::move(r); return t; }

inline TermPtr mkPi(std::string n, bool implicit_, bool crisp, TermPtr dom, TermPtr cod) {
  auto t = std::make_shared<Term>(Tm::Pi);
  t->name = std::move(n); t->implicit_ = implicit_; t->crisp = crisp;
  t->a = std::move(dom); t->b = std::move(cod);
  return t;
}
inline TermPtr mkLam(std::string n, bool implicit_, bool crisp, TermPtr body) {
  auto t = std::make_shared<Term>(Tm::Lam);
  t->name = std::move(n); t->implicit_ = implicit_; t->crisp = crisp;
  t->a = std::move(body);
  return t;
}
inline TermPtr mkApp(TermPtr f, TermPtr x, bool implicit_ = false) {
  auto t = std::make_shared<Term>(Tm::App);
  t->implicit_ = implicit_; t->a = std::move(f); t->b = std::move(x);
  return t;
}
inline TermPtr mkSigma(std::string n, TermPtr fstTy, TermPtr sndTy) {
  auto t = std::make_shared<Term>(Tm::Sigma);
  t->name = std::move(n); t->a = std::move(fstTy); t->b = std::move(sndTy);
  return t;
}
inline TermPtr mkPair(TermPtr x, TermPtr y) { auto t = std::make_shared<Term>(Tm::Pair); t->a = std::move(x); t->b = std::move(y); return t; }
inline TermPtr mkFst(TermPtr p) { auto t = std::make_shared<Term>(Tm::Fst); t->a = std::move(p); return t; }
inline TermPtr mkSnd(TermPtr p) { auto t = std::make_shared<Term>(Tm::Snd); t->a = std::move(p); return t; }

inline TermPtr mkId(TermPtr ty, TermPtr l, TermPtr r) {
  auto t = std::make_shared<Term>(Tm::Id);
  t->a = std::move(ty); t->b = std::move(l); t->c = std::move(r);
  return t;
}
inline TermPtr mkJ(TermPtr motive, TermPtr base, TermPtr proof) {
  auto t = std::make_shared<Term>(Tm::J);
  t->a = std::move(motive); t->b = std::move(base); t->c = std::move(proof);
  return t;
}
inline TermPtr mkAbsurd(TermPtr ty, TermPtr e) { auto t = std::make_shared<Term>(Tm::Absurd); t->a = std::move(ty); t->b = std::move(e); return t; }
inline TermPtr mkBoolElim(TermPtr motive, TermPtr tc, TermPtr fc, TermPtr b) {
  auto t = std::make_shared<Term>(Tm::BoolElim);
  t->a = std::move(motive); t->b = std::move(tc); t->c = std::move(fc); t->d = std::move(b);
  return t;
}
inline TermPtr mkFlat(TermPtr level, TermPtr ty) { auto t = std::make_shared<Term>(Tm::Flat); t->a = std::move(level); t->b = std::move(ty); return t; }
inline TermPtr mkCon(TermPtr e) { auto t = std::make_shared<Term>(Tm::Con); t->a = std::move(e); return t; }
inline TermPtr mkFlatElim(std::string branchName, std::string motiveName, TermPtr motive, TermPtr scrut, TermPtr branch) {
  auto t = std::make_shared<Term>(Tm::FlatElim);
  t->name = std::move(branchName); t->name2 = std::move(motiveName);
  t->a = std::move(motive); t->b = std::move(scrut); t->c = std::move(branch);
  return t;
}

// --- structural operations (src/term.cpp) ---------------------------------

// Add `d` to every free variable with index >= cutoff.
TermPtr shiftAbove(const TermPtr& t, int cutoff, int d);
inline TermPtr shiftTerm(const TermPtr& t, int d) { return d == 0 ? t : shiftAbove(t, 0, d); }

// Instantiate variable `j` with `s` (binder-removing substitution): variables
// above j are decremented, s is shifted under binders.
TermPtr instantiate(const TermPtr& t, int j, const TermPtr& s);

// Structural equality up to binder names.
bool alphaEq(const TermPtr& l, const TermPtr& r);

// Does variable with index `idx` occur free?
bool usesVar(const TermPtr& t, int idx);

// Does any Meta node occur?
bool hasMeta(const TermPtr& t);

}  // namespace cohtt
