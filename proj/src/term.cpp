#include "cohtt/term.hpp"

namespace cohtt {

namespace {

// Binding depth added by each child slot; -1 marks an absent slot.
struct Slots { int a, b, c, d; };

Slots slots(Tm tag) {
  switch (tag) {
    case Tm::Univ: case Tm::LSuc: case Tm::Fst: case Tm::Snd: case Tm::Con:
      return {0, -1, -1, -1};
    case Tm::LMax: case Tm::App: case Tm::Pair: case Tm::Absurd: case Tm::Flat:
      return {0, 0, -1, -1};
    case Tm::Pi: case Tm::Sigma:
      return {0, 1, -1, -1};
    case Tm::Lam:
      return {1, -1, -1, -1};
    case Tm::Id: case Tm::J:
      return {0, 0, 0, -1};
    case Tm::BoolElim:
      return {0, 0, 0, 0};
    case Tm::FlatElim:
      return {0, 0, 1, -1};
    default:
      return {-1, -1, -1, -1};
  }
}

TermPtr rebuild(const TermPtr& t, TermPtr a, TermPtr b, TermPtr c, TermPtr d) {
  if (a == t->a && b == t->b && c == t->c && d == t->d) return t;
  auto n = std::make_shared<Term>(*t);
  n->a = std::move(a); n->b = std::move(b); n->c = std::move(c); n->d = std::move(d);
  return n;
}

// Rewrites every variable occurrence; onVar receives the node and the number
// of binders crossed.
template <class F>
TermPtr mapVars(const TermPtr& t, int depth, const F& onVar) {
  if (!t) return t;
  if (t->tag == Tm::Var) return onVar(t, depth);
  Slots s = slots(t->tag);
  auto go = [&](const TermPtr& ch, int delta) {
    return (delta < 0 || !ch) ? ch : mapVars(ch, depth + delta, onVar);
  };
  return rebuild(t, go(t->a, s.a), go(t->b, s.b), go(t->c, s.c), go(t->d, s.d));
}

}  // namespace

TermPtr shiftAbove(const TermPtr& t, int cutoff, int d) {
  if (d == 0) return t;
  return mapVars(t, 0, [&](const TermPtr& v, int depth) -> TermPtr {
    return v->idx >= cutoff + depth ? mkVar(v->idx + d) : v;
  });
}

TermPtr instantiate(const TermPtr& t, int j, const TermPtr& s) {
  return mapVars(t, 0, [&](const TermPtr& v, int depth) -> TermPtr {
    int target = j + depth;
    if (v->idx == target) return shiftTerm(s, depth);
    if (v->idx > target) return mkVar(v->idx - 1);
    return v;
  });
}

bool alphaEq(const TermPtr& l, const TermPtr& r) {
  if (l == r) return true;
  if (!l || !r) return false;
  if (l->tag != r->tag || l->idx != r->idx || l->top != r->top ||
      l->implicit_ != r->implicit_ || l->crisp != r->crisp)
    return false;
  if (l->tag == Tm::Const && l->name != r->name) return false;
  return alphaEq(l->a, r->a) && alphaEq(l->b, r->b) && alphaEq(l->c, r->c) && alphaEq(l->d, r->d);
}

bool usesVar(const TermPtr& t, int idx) {
  bool found = false;
  mapVars(t, 0, [&](const TermPtr& v, int depth) -> TermPtr {
    if (v->idx == idx + depth) found = true;
    return v;
  });
  return found;
}

bool hasMeta(const TermPtr& t) {
  if (!t) return false;
  if (t->tag == Tm::Meta) return true;
  return hasMeta(t->a) || hasMeta(t->b) || hasMeta(t->c) || hasMeta(t->d);
}

}  // namespace cohtt
