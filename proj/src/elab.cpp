#include "cohtt/elab.hpp"

#include <algorithm>
#include <utility>

#include "cohtt/printer.hpp"
#include "cohtt/rewrite.hpp"

namespace cohtt {

// ---------------------------------------------------------------------------
// Context plumbing
// ---------------------------------------------------------------------------

Elaborator::Elaborator(Signature& s, ElabOptions o) : sig(s), opt(o) {
  E.sig = &sig;
  E.metas = &metas;
  E.budget = opt.budget;
  E.matchCheck = opt.matchCheck;
  E.matchLog = &matchLog;
}

Elaborator::RestrictGuard::RestrictGuard(Elaborator& el) : e(el), saved(el.restriction) {
  el.restriction = el.depth();
}
Elaborator::RestrictGuard::~RestrictGuard() { e.restriction = saved; }

std::vector<std::string> Elaborator::ctxNames() const {
  std::vector<std::string> ns;
  ns.reserve(entries.size());
  for (auto& e : entries) ns.push_back(e.name);
  return ns;
}

void Elaborator::push(const std::string& name, Vp type, bool crisp) {
  Vp val;
  // Level-typed variables enter the environment as canonical level values so
  // that level arithmetic and comparison see them uniformly.
  if (whnf(E, type)->tag == Vt::LevelT)
    val = vLevel(VLevel::var(depth()));
  else
    val = vVar(depth());
  env = envPush(env, std::move(val));
  entries.push_back({name, std::move(type), crisp});
}

void Elaborator::pop() {
  entries.pop_back();
  env = env->next;
}

bool Elaborator::isDiscreteType(const Vp& ty) {
  Vp w = whnf(E, ty);
  switch (w->tag) {
    case Vt::Bool:
    case Vt::Unit:
    case Vt::Empty:
      return true;
    case Vt::Id:
      return isDiscreteType(w->v1);
    default:
      return false;
  }
}

bool Elaborator::usableVar(int level) {
  if (entries[level].crisp || level >= restriction) return true;
  return isDiscreteType(entries[level].type);
}

Vp Elaborator::constType(const std::string& name) {
  auto it = ctypes.find(name);
  if (it != ctypes.end()) return it->second;
  const Decl* d = sig.find(name);
  if (!d) fail(E_INTERNAL, curLoc, "missing type for constant '" + name + "'");
  Vp v = evaluate(E, d->type, nullptr);
  ctypes[name] = v;
  return v;
}

std::string Elaborator::showSafe(const Vp& v) {
  try {
    return printValue(E, v, depth(), ctxNames());
  } catch (const Error& e) {
    if (e.code == E_BUDGET) throw;
    return "<value>";
  }
}

// ---------------------------------------------------------------------------
// Metas
// ---------------------------------------------------------------------------

TermPtr Elaborator::freshMeta(Vp type, const std::string& hint, const SrcLoc& loc,
                              bool crispPos, bool isLevel) {
  int saved = restriction;
  if (crispPos) restriction = depth();
  std::vector<bool> mask(depth());
  for (int i = 0; i < depth(); ++i) mask[i] = usableVar(i);
  restriction = saved;
  int id = metas.fresh(std::move(type), depth(), std::move(mask), hint, loc, isLevel);
  return mkMeta(id);
}

Vp Elaborator::metaValue(int mid) { return evaluate(E, mkMeta(mid), env); }

static bool termMentionsMeta(const TermPtr& t, int mid) {
  if (!t) return false;
  if (t->tag == Tm::Meta && t->idx == mid) return true;
  return termMentionsMeta(t->a, mid) || termMentionsMeta(t->b, mid) ||
         termMentionsMeta(t->c, mid) || termMentionsMeta(t->d, mid);
}

// ---------------------------------------------------------------------------
// Type synthesis for values (partial)
// ---------------------------------------------------------------------------

Vp Elaborator::typeOfNeutral(int d, const Value& n) {
  Vp ty, cur;
  size_t i0 = 0;
  switch (n.head.k) {
    case Head::Var:
      if (n.head.id >= depth()) return nullptr;  // scratch variable
      ty = entries[n.head.id].type;
      cur = envLookup(env, depth() - 1 - n.head.id);
      break;
    case Head::Const:
      if (!sig.find(n.head.name)) return nullptr;
      ty = constType(n.head.name);
      cur = constValue(E, n.head.name);
      break;
    case Head::Meta: {
      const MetaInfo& mi = metas.metas[n.head.id];
      ty = mi.type;
      i0 = static_cast<size_t>(mi.ctxLen);
      cur = neutralFrom(n.head, std::vector<Elim>(n.spine.begin(), n.spine.begin() + i0));
      break;
    }
  }
  for (size_t i = i0; i < n.spine.size(); ++i) {
    const Elim& e = n.spine[i];
    Vp w = whnf(E, ty);
    switch (e.k) {
      case Elim::App:
        if (w->tag != Vt::Pi) return nullptr;
        ty = evalClosure(E, w->cl, e.arg);
        break;
      case Elim::Fst:
        if (w->tag != Vt::Sigma) return nullptr;
        ty = w->v1;
        break;
      case Elim::Snd:
        if (w->tag != Vt::Sigma) return nullptr;
        ty = evalClosure(E, w->cl, doFst(E, cur));
        break;
      case Elim::J:
        if (w->tag != Vt::Id) return nullptr;
        ty = applyVal(E, applyVal(E, e.motive, w->v3), cur);
        break;
      case Elim::BElim:
      case Elim::FElim:
        ty = applyVal(E, e.motive, cur);
        break;
      case Elim::Absurd:
        ty = e.motive;
        break;
    }
    cur = applyElim(E, cur, e);
  }
  return ty;
}

std::optional<Sort> Elaborator::sortOfType(int d, const Vp& ty0) {
  Vp ty = whnf(E, ty0);
  switch (ty->tag) {
    case Vt::Univ:
      if (ty->top) return std::nullopt;
      return Sort{false, lsucL(forceLevel(E, ty->level))};
    case Vt::Bool:
    case Vt::Unit:
    case Vt::Empty:
    case Vt::LevelT:
      return Sort{false, VLevel::constant(0)};
    case Vt::Id:
      return sortOfType(d, ty->v1);
    case Vt::Flat:
      return Sort{false, forceLevel(E, ty->level)};
    case Vt::Pi:
    case Vt::Sigma: {
      auto s1 = sortOfType(d, ty->v1);
      if (!s1) return std::nullopt;
      Vp fresh = whnf(E, ty->v1)->tag == Vt::LevelT ? vLevel(VLevel::var(d)) : vVar(d);
      auto s2 = sortOfType(d + 1, evalClosure(E, ty->cl, fresh));
      if (!s2) return std::nullopt;
      if (s1->top || s2->top || s2->l.mentionsVarLevel(d)) return Sort{true, {}};
      return Sort{false, lmaxL(s1->l, s2->l)};
    }
    case Vt::Neutral: {
      Vp t = typeOfNeutral(d, *ty);
      if (!t) return std::nullopt;
      Vp w = whnf(E, t);
      if (w->tag != Vt::Univ) return std::nullopt;
      if (w->top) return Sort{true, {}};
      return Sort{false, forceLevel(E, w->level)};
    }
    default:
      return std::nullopt;
  }
}

Vp Elaborator::synthType(int d, const Vp& v0) {
  Vp v = whnf(E, v0);
  switch (v->tag) {
    case Vt::Univ:
      if (v->top) return nullptr;
      return vUniv(lsucL(forceLevel(E, v->level)));
    case Vt::LevelT:
    case Vt::Bool:
    case Vt::Unit:
    case Vt::Empty:
      return vUniv(VLevel::constant(0));
    case Vt::LevelVal:
      return vmk(Vt::LevelT);
    case Vt::True:
    case Vt::False:
      return vmk(Vt::Bool);
    case Vt::TT:
      return vmk(Vt::Unit);
    case Vt::Pi:
    case Vt::Sigma:
    case Vt::Id: {
      auto s = sortOfType(d, v);
      if (!s) return nullptr;
      return s->top ? vUnivTop() : vUniv(s->l);
    }
    case Vt::Flat:
      return vUniv(forceLevel(E, v->level));
    case Vt::Con: {
      Vp t = synthType(d, v->v1);
      if (!t) return nullptr;
      auto s = sortOfType(d, t);
      if (!s || s->top) return nullptr;
      auto f = vmk(Vt::Flat);
      f->level = s->l;
      f->v1 = t;
      return f;
    }
    case Vt::Neutral:
      return typeOfNeutral(d, *v);
    default:
      return nullptr;  // Lam / Pair / Refl: not synthesizable
  }
}

// ---------------------------------------------------------------------------
// Unification
// ---------------------------------------------------------------------------

void Elaborator::solveLevelMeta(int mid, const VLevel& lv) {
  MetaInfo& mi = metas.metas[mid];
  VLevel l = forceLevel(E, lv);
  for (auto& at : l.atoms) {
    if (at.isMeta && at.id == mid) throw UnifyFail{vLevel(VLevel::meta(mid)), vLevel(l), true};
    if (!at.isMeta) {
      if (at.id >= mi.ctxLen) throw UnifyFail{vLevel(VLevel::meta(mid)), vLevel(l), true};
      if (!mi.usable[at.id])
        fail(E_MODAL, mi.loc,
             "the implicit level argument would be solved using '" + entries[at.id].name +
                 "', which is not usable in a crisp position");
    }
  }
  mi.solved = true;
  mi.solutionLevel = l;
  mi.solutionBody = readbackLevel(mi.ctxLen, l);
  ++solveCount;
  retryPending();
}

void Elaborator::unifyLevels(const VLevel& a0, const VLevel& b0) {
  VLevel a = forceLevel(E, a0), b = forceLevel(E, b0);
  if (levelEq(a, b)) return;

  auto subtract = [](const VLevel& l, unsigned o) -> std::optional<VLevel> {
    if (o == 0) return l;
    VLevel r;
    for (auto& at : l.atoms) {
      if (at.off < o) return std::nullopt;
      VLevel one = at.isMeta ? VLevel::meta(at.id, at.off - o) : VLevel::var(at.id, at.off - o);
      r = lmaxL(r, one);
    }
    if (l.k >= o)
      r = lmaxL(r, VLevel::constant(l.k - o));
    else if (l.k != 0)
      return std::nullopt;
    return r;
  };

  // Try to isolate one meta atom of `f` and solve it against `g`.
  auto trySide = [&](const VLevel& f, const VLevel& g) -> bool {
    for (auto& at : f.atoms) {
      if (!at.isMeta || metas.metas[at.id].solved) continue;
      VLevel rest = VLevel::constant(f.k);
      for (auto& o : f.atoms)
        if (!(o.isMeta == at.isMeta && o.id == at.id))
          rest = lmaxL(rest, o.isMeta ? VLevel::meta(o.id, o.off) : VLevel::var(o.id, o.off));
      auto cand = subtract(g, at.off);
      if (!cand) continue;
      bool occurs = false;
      for (auto& c : cand->atoms)
        if (c.isMeta && c.id == at.id) occurs = true;
      if (occurs) continue;
      VLevel shifted = *cand;
      for (unsigned i = 0; i < at.off; ++i) shifted = lsucL(shifted);
      if (!levelEq(lmaxL(rest, shifted), g)) continue;
      solveLevelMeta(at.id, *cand);
      return true;
    }
    return false;
  };

  if (trySide(a, b)) return;
  if (trySide(b, a)) return;
  throw UnifyFail{vLevel(a), vLevel(b), true};
}

void Elaborator::unifyLevelsOr(int d, const VLevel& a, const VLevel& b) {
  try {
    unifyLevels(a, b);
  } catch (UnifyFail&) {
    VLevel fa = forceLevel(E, a), fb = forceLevel(E, b);
    if (fa.hasMetaAtom() || fb.hasMetaAtom()) {
      pending.push_back({vLevel(fa), vLevel(fb), curLoc, d});
      return;
    }
    throw;
  }
}

void Elaborator::solveMeta(int mid, const Vp& rhs, int extra,
                           const std::vector<bool>* extraImplicit) {
  MetaInfo& mi = metas.metas[mid];
  TermPtr body;
  try {
    body = readback(E, mi.ctxLen + extra, rhs);  // scope check: free levels must fit
  } catch (const Error& e) {
    if (e.code == E_BUDGET) throw;
    throw UnifyFail{metaValue(mid), rhs, false};
  }
  if (termMentionsMeta(body, mid)) throw UnifyFail{metaValue(mid), rhs, false};
  for (int l = 0; l < mi.ctxLen; ++l) {
    if (!mi.usable[l] && usesVar(body, mi.ctxLen + extra - 1 - l))
      fail(E_MODAL, mi.loc,
           "the implicit argument" + (mi.hint.empty() ? "" : " {" + mi.hint + "}") +
               " would be solved using '" + entries[l].name +
               "', which is not usable in a crisp position");
  }
  // Abstract over the extra applied variables the equation was stated under.
  for (int i = extra - 1; i >= 0; --i)
    body = mkLam("x", extraImplicit && (*extraImplicit)[i], false, body);
  // Eta-contract so occurrences zonk to the bare head where possible.
  while (body->tag == Tm::Lam && body->a->tag == Tm::App && body->a->b->tag == Tm::Var &&
         body->a->b->idx == 0 && body->a->implicit_ == body->implicit_ &&
         !usesVar(body->a->a, 0))
    body = shiftAbove(body->a->a, 0, -1);
  mi.solved = true;
  mi.solutionBody = body;
  ++solveCount;
  // Propagate the solution's type into the meta's recorded type; this is
  // what pins most level metas.
  if (extra == 0)
    if (Vp st = synthType(depth(), rhs)) unify(depth(), st, mi.type);
  retryPending();
}

bool Elaborator::solveFromSpine(const Vp& m, const Vp& rhs) {
  const MetaInfo& mi = metas.metas[m->head.id];
  if (static_cast<int>(m->spine.size()) < mi.ctxLen) return false;
  int extra = static_cast<int>(m->spine.size()) - mi.ctxLen;
  std::vector<bool> extraImplicit(extra, false);
  for (int i = 0; i < mi.ctxLen + extra; ++i) {
    const Elim& e = m->spine[i];
    if (e.k != Elim::App) return false;
    Vp a = whnf(E, e.arg);
    // Context entries must be the corresponding variables; any further
    // applications must continue the run of fresh variables in order, so the
    // solution can abstract over them.
    if (a->tag == Vt::Neutral) {
      if (a->head.k != Head::Var || !a->spine.empty() || a->head.id != i) return false;
    } else if (a->tag == Vt::LevelVal) {
      VLevel l = forceLevel(E, a->level);
      if (l.k != 0 || l.atoms.size() != 1 || l.atoms[0].isMeta || l.atoms[0].id != i ||
          l.atoms[0].off != 0)
        return false;
    } else {
      return false;
    }
    if (i >= mi.ctxLen) extraImplicit[i - mi.ctxLen] = e.implicit_;
  }
  try {
    solveMeta(m->head.id, rhs, extra, &extraImplicit);
  } catch (UnifyFail&) {
    return false;  // out of scope or occurs failure: leave for postponement
  }
  return true;
}

void Elaborator::unifySpines(int d, const Value& a, const Value& b) {
  if (a.spine.size() != b.spine.size()) throw UnifyFail{vmk(Vt::Neutral), vmk(Vt::Neutral)};
  for (size_t i = 0; i < a.spine.size(); ++i) {
    const Elim& x = a.spine[i];
    const Elim& y = b.spine[i];
    if (x.k != y.k) throw UnifyFail{vmk(Vt::Neutral), vmk(Vt::Neutral)};
    switch (x.k) {
      case Elim::App:
        unify(d, x.arg, y.arg);
        break;
      case Elim::Fst:
      case Elim::Snd:
        break;
      case Elim::J:
        unify(d, x.motive, y.motive);
        unify(d, x.base, y.base);
        break;
      case Elim::BElim:
        unify(d, x.motive, y.motive);
        unify(d, x.base, y.base);
        unify(d, x.arg, y.arg);
        break;
      case Elim::FElim: {
        unify(d, x.motive, y.motive);
        Vp fresh = vVar(d);
        unify(d + 1, evalClosure(E, x.branch, fresh), evalClosure(E, y.branch, fresh));
        break;
      }
      case Elim::Absurd:
        unify(d, x.motive, y.motive);
        break;
    }
  }
}

void Elaborator::unify(int d, const Vp& a0, const Vp& b0) {
  Vp a = whnf(E, a0), b = whnf(E, b0);
  if (a == b) return;

  // Universe levels.
  if (a->tag == Vt::LevelVal || b->tag == Vt::LevelVal) {
    auto asLvl = [&](const Vp& w) -> std::optional<VLevel> {
      if (w->tag == Vt::LevelVal) return forceLevel(E, w->level);
      if (w->tag == Vt::Neutral && w->spine.empty() && w->head.k == Head::Var)
        return VLevel::var(w->head.id);
      return std::nullopt;
    };
    auto la = asLvl(a), lb = asLvl(b);
    if (la && lb) {
      unifyLevelsOr(d, *la, *lb);
      return;
    }
    throw UnifyFail{a, b};
  }

  // Eta.
  if (a->tag == Vt::Lam || b->tag == Vt::Lam) {
    Vp fresh = vVar(d);
    unify(d + 1, applyVal(E, a, fresh), applyVal(E, b, fresh));
    return;
  }
  if (a->tag == Vt::Pair || b->tag == Vt::Pair) {
    unify(d, doFst(E, a), doFst(E, b));
    unify(d, doSnd(E, a), doSnd(E, b));
    return;
  }

  // Flexible sides.
  auto flexOf = [&](const Vp& w) {
    return w->tag == Vt::Neutral && w->head.k == Head::Meta;
  };
  bool fa = flexOf(a), fb = flexOf(b);
  if (fa && fb && a->head.id == b->head.id) {
    try {
      unifySpines(d, *a, *b);
      return;
    } catch (UnifyFail&) {
      pending.push_back({a, b, curLoc, d});
      return;
    }
  }
  if (fa && solveFromSpine(a, b)) return;
  if (fb && solveFromSpine(b, a)) return;
  if (fa || fb) {
    pending.push_back({a, b, curLoc, d});
    return;
  }

  auto unfolded = [&](const Vp& w) -> Vp {
    if (w->tag == Vt::Neutral && w->unfold) return whnf(E, w->unfold->force(E));
    return w;
  };

  if (a->tag != b->tag) {
    Vp ua = unfolded(a), ub = unfolded(b);
    if (ua != a || ub != b) {
      unify(d, ua, ub);
      return;
    }
    throw UnifyFail{a, b};
  }

  switch (a->tag) {
    case Vt::Univ:
      if (a->top != b->top) throw UnifyFail{a, b};
      if (!a->top) unifyLevelsOr(d, a->level, b->level);
      return;
    case Vt::LevelT:
    case Vt::Refl:
    case Vt::Unit:
    case Vt::TT:
    case Vt::Empty:
    case Vt::Bool:
    case Vt::True:
    case Vt::False:
      return;
    case Vt::Id:
      unify(d, a->v1, b->v1);
      unify(d, a->v2, b->v2);
      unify(d, a->v3, b->v3);
      return;
    case Vt::Flat:
      unifyLevelsOr(d, a->level, b->level);
      unify(d, a->v1, b->v1);
      return;
    case Vt::Con:
      unify(d, a->v1, b->v1);
      return;
    case Vt::Pi: {
      if (a->implicit_ != b->implicit_ || a->crisp != b->crisp) throw UnifyFail{a, b};
      unify(d, a->v1, b->v1);
      Vp fresh = whnf(E, a->v1)->tag == Vt::LevelT ? vLevel(VLevel::var(d)) : vVar(d);
      unify(d + 1, evalClosure(E, a->cl, fresh), evalClosure(E, b->cl, fresh));
      return;
    }
    case Vt::Sigma: {
      unify(d, a->v1, b->v1);
      Vp fresh = whnf(E, a->v1)->tag == Vt::LevelT ? vLevel(VLevel::var(d)) : vVar(d);
      unify(d + 1, evalClosure(E, a->cl, fresh), evalClosure(E, b->cl, fresh));
      return;
    }
    case Vt::Neutral: {
      bool sameHead = a->head.k == b->head.k && a->head.id == b->head.id &&
                      a->head.name == b->head.name;
      if (sameHead) {
        // Compare spines, but fall back to unfolding if that fails (two
        // applications of a defined constant can agree after reduction).
        size_t savedPending = pending.size();
        long long savedSolve = solveCount;
        try {
          unifySpines(d, *a, *b);
          return;
        } catch (UnifyFail&) {
          if (savedSolve != solveCount) throw;  // partial solving: don't retry blindly
          pending.resize(savedPending);
        }
      }
      Vp ua = unfolded(a), ub = unfolded(b);
      if (ua != a || ub != b) {
        unify(d, ua, ub);
        return;
      }
      throw UnifyFail{a, b};
    }
    default:
      throw UnifyFail{a, b};
  }
}

void Elaborator::retryPending() {
  if (retrying) return;
  retrying = true;
  long long last = -1;
  while (last != solveCount && !pending.empty()) {
    last = solveCount;
    std::vector<Constraint> work;
    work.swap(pending);
    for (auto& c : work) {
      try {
        unify(c.d, c.a, c.b);
      } catch (UnifyFail& f) {
        retrying = false;
        mismatch(c.loc, f, "deferred constraint failed");
      }
    }
  }
  retrying = false;
}

void Elaborator::flushPending() {
  retryPending();
  if (pending.empty()) return;
  std::vector<Constraint> work;
  work.swap(pending);
  for (auto& c : work) {
    try {
      unify(c.d, c.a, c.b);
    } catch (UnifyFail& f) {
      mismatch(c.loc, f, "constraint failed");
    }
  }
  // Anything re-postponed involves an unsolved meta; ensureAllSolved reports
  // it with a better location.
}

void Elaborator::mismatch(const SrcLoc& loc, const UnifyFail& f, const std::string& context) {
  fail(f.levels ? E_LEVEL : E_MISMATCH, loc,
       context + ": cannot match '" + showSafe(f.a) + "' with '" + showSafe(f.b) + "'");
}

void Elaborator::unifyOr(const SrcLoc& loc, const Vp& found, const Vp& expected,
                         const std::string& context) {
  SrcLoc saved = curLoc;
  curLoc = loc;
  try {
    unify(depth(), found, expected);
  } catch (UnifyFail& f) {
    std::string msg = context + ": expected '" + showSafe(expected) + "', found '" +
                      showSafe(found) + "'";
    if (f.a != found && f.b != expected && f.a != expected && f.b != found)
      msg += " (clashing parts: '" + showSafe(f.a) + "' vs '" + showSafe(f.b) + "')";
    fail(f.levels ? E_LEVEL : E_MISMATCH, loc, msg);
  }
  curLoc = saved;
}

// ---------------------------------------------------------------------------
// Bidirectional elaboration
// ---------------------------------------------------------------------------

std::pair<TermPtr, Vp> Elaborator::insertImplicits(TermPtr t, Vp ty, const SrcLoc& loc) {
  for (;;) {
    Vp w = whnf(E, ty);
    if (w->tag != Vt::Pi || !w->implicit_) return {std::move(t), w};
    bool lvl = whnf(E, w->v1)->tag == Vt::LevelT;
    TermPtr m = freshMeta(w->v1, w->name, loc, w->crisp, lvl);
    Vp mv = evaluate(E, m, env);
    t = mkApp(std::move(t), m, true);
    ty = evalClosure(E, w->cl, std::move(mv));
  }
}

std::pair<TermPtr, Vp> Elaborator::infer(const SPtr& s) {
  curLoc = s->loc;
  E.loc = s->loc;
  switch (s->tag) {
    case St::Name: {
      for (int i = depth() - 1; i >= 0; --i) {
        if (entries[i].name == s->name) {
          if (!usableVar(i))
            fail(E_MODAL, s->loc,
                 "variable '" + s->name +
                     "' is not usable here: it is bound outside a crisp boundary and its "
                     "type is not discrete (mark the binder @flat)");
          return {mkVar(depth() - 1 - i), entries[i].type};
        }
      }
      if (sig.find(s->name)) return {mkConst(s->name), constType(s->name)};
      fail(E_UNBOUND, s->loc, "unbound name '" + s->name + "'");
    }
    case St::Univ: {
      TermPtr lt = check(s->a, vmk(Vt::LevelT));
      VLevel lv = evalLevel(E, lt, env);
      return {mkUniv(lt), vUniv(lsucL(lv))};
    }
    case St::UnivTop:
      fail(E_UNIVERSE, s->loc, "Setw is too large to have a type; it can only be used as a type");
    case St::LevelT:
      return {mk(Tm::LevelT), vUniv(VLevel::constant(0))};
    case St::LZero:
      return {mkLZero(), vmk(Vt::LevelT)};
    case St::LSuc:
      return {mkLSuc(check(s->a, vmk(Vt::LevelT))), vmk(Vt::LevelT)};
    case St::LMax:
      return {mkLMax(check(s->a, vmk(Vt::LevelT)), check(s->b, vmk(Vt::LevelT))),
              vmk(Vt::LevelT)};
    case St::Pi: {
      TermPtr domT;
      Sort s1;
      if (s->crisp) {
        RestrictGuard g(*this);
        std::tie(domT, s1) = isType(s->a);
      } else {
        std::tie(domT, s1) = isType(s->a);
      }
      int bindLvl = depth();
      push(s->name, evalHere(domT), s->crisp);
      auto [codT, s2] = isType(s->b);
      pop();
      TermPtr t = mkPi(s->name, s->implicit_, s->crisp, domT, codT);
      if (s1.top || s2.top || s2.l.mentionsVarLevel(bindLvl)) return {t, vUnivTop()};
      return {t, vUniv(lmaxL(s1.l, s2.l))};
    }
    case St::Sigma: {
      auto [aT, s1] = isType(s->a);
      int bindLvl = depth();
      push(s->name, evalHere(aT), false);
      auto [bT, s2] = isType(s->b);
      pop();
      TermPtr t = mkSigma(s->name, aT, bT);
      if (s1.top || s2.top || s2.l.mentionsVarLevel(bindLvl)) return {t, vUnivTop()};
      return {t, vUniv(lmaxL(s1.l, s2.l))};
    }
    case St::Lam:
      fail(E_CANNOT_INFER, s->loc,
           "cannot infer a type for this lambda; use it where a function type is expected");
    case St::Pair:
      fail(E_CANNOT_INFER, s->loc,
           "cannot infer a type for this pair; use it where a pair type is expected");
    case St::Refl:
      fail(E_CANNOT_INFER, s->loc, "cannot infer the endpoints of refl from context");
    case St::App: {
      auto [f, fty] = infer(s->a);
      if (s->implicit_) {
        Vp w;
        if (!s->name.empty()) {
          for (;;) {
            w = whnf(E, fty);
            if (w->tag != Vt::Pi || !w->implicit_)
              fail(E_IMPLICIT_NAME, s->loc,
                   "no implicit argument named '" + s->name + "' remains to be given");
            if (w->name == s->name) break;
            bool lvl = whnf(E, w->v1)->tag == Vt::LevelT;
            TermPtr m = freshMeta(w->v1, w->name, s->loc, w->crisp, lvl);
            f = mkApp(std::move(f), m, true);
            fty = evalClosure(E, w->cl, evaluate(E, m, env));
          }
        } else {
          w = whnf(E, fty);
          if (w->tag != Vt::Pi || !w->implicit_)
            fail(E_IMPLICIT_NAME, s->loc, "the function does not expect an implicit argument here");
        }
        TermPtr arg;
        if (w->crisp) {
          RestrictGuard g(*this);
          arg = check(s->b, w->v1);
        } else {
          arg = check(s->b, w->v1);
        }
        return {mkApp(std::move(f), arg, true), evalClosure(E, w->cl, evalHere(arg))};
      }
      Vp w;
      std::tie(f, w) = insertImplicits(std::move(f), std::move(fty), s->loc);
      if (w->tag != Vt::Pi) {
        if (w->tag == Vt::Neutral && w->head.k == Head::Meta)
          fail(E_CANNOT_INFER, s->loc, "cannot apply a value whose type is not yet determined");
        fail(E_NOT_FUNCTION, s->loc,
             "this expression is applied to an argument, but its type is '" + showSafe(w) + "'");
      }
      TermPtr arg;
      if (w->crisp) {
        RestrictGuard g(*this);
        arg = check(s->b, w->v1);
      } else {
        arg = check(s->b, w->v1);
      }
      return {mkApp(std::move(f), arg, false), evalClosure(E, w->cl, evalHere(arg))};
    }
    case St::Fst: {
      auto [p, pt] = infer(s->a);
      Vp w = whnf(E, pt);
      if (w->tag != Vt::Sigma)
        fail(E_MISMATCH, s->loc, "fst expects a pair; found a value of type '" + showSafe(w) + "'");
      return {mkFst(p), w->v1};
    }
    case St::Snd: {
      auto [p, pt] = infer(s->a);
      Vp w = whnf(E, pt);
      if (w->tag != Vt::Sigma)
        fail(E_MISMATCH, s->loc, "snd expects a pair; found a value of type '" + showSafe(w) + "'");
      return {mkSnd(p), evalClosure(E, w->cl, doFst(E, evalHere(p)))};
    }
    case St::Id: {
      auto [A, sA] = isType(s->a);
      Vp Av = evalHere(A);
      TermPtr x = check(s->b, Av);
      TermPtr y = check(s->c, Av);
      return {mkId(A, x, y), sA.top ? vUnivTop() : vUniv(sA.l)};
    }
    case St::Eq: {
      if (s->c) {
        auto [A, sA] = isType(s->c);
        Vp Av = evalHere(A);
        TermPtr x = check(s->a, Av);
        TermPtr y = check(s->b, Av);
        return {mkId(A, x, y), sA.top ? vUnivTop() : vUniv(sA.l)};
      }
      auto [x, xt] = infer(s->a);
      std::tie(x, xt) = insertImplicits(std::move(x), std::move(xt), s->loc);
      auto so = sortOfType(depth(), xt);
      if (!so)
        fail(E_CANNOT_INFER, s->loc,
             "cannot infer the universe of this equation; annotate it as 'a = b : A'");
      TermPtr y = check(s->b, xt);
      return {mkId(rb(xt), x, y), so->top ? vUnivTop() : vUniv(so->l)};
    }
    case St::J: {
      auto [p, pt] = infer(s->b);
      std::tie(p, pt) = insertImplicits(std::move(p), std::move(pt), s->loc);
      Vp w = whnf(E, pt);
      if (w->tag != Vt::Id)
        fail(E_MISMATCH, s->loc,
             "J expects an identity proof; found a value of type '" + showSafe(w) + "'");
      TermPtr At = rb(w->v1);
      TermPtr at = rb(w->v2);
      TermPtr lmeta = freshMeta(vmk(Vt::LevelT), "", s->loc, false, true);
      TermPtr motiveTy =
          mkPi("y'", false, false, At,
               mkPi("q'", false, false, mkId(shiftTerm(At, 1), shiftTerm(at, 1), mkVar(0)),
                    mkUniv(lmeta)));
      Vp motiveTyV = evalHere(motiveTy);
      TermPtr M = check(s->a, motiveTyV);
      Vp Mv = evalHere(M);
      TermPtr base = check(s->c, applyVal(E, applyVal(E, Mv, w->v2), vmk(Vt::Refl)));
      Vp resTy = applyVal(E, applyVal(E, Mv, w->v3), evalHere(p));
      return {mkJ(M, base, p), resTy};
    }
    case St::Unit:
      return {mk(Tm::Unit), vUniv(VLevel::constant(0))};
    case St::Empty:
      return {mk(Tm::Empty), vUniv(VLevel::constant(0))};
    case St::Bool:
      return {mk(Tm::Bool), vUniv(VLevel::constant(0))};
    case St::TT:
      return {mk(Tm::TT), vmk(Vt::Unit)};
    case St::TrueL:
      return {mk(Tm::TrueC), vmk(Vt::Bool)};
    case St::FalseL:
      return {mk(Tm::FalseC), vmk(Vt::Bool)};
    case St::BoolElim: {
      TermPtr lmeta = freshMeta(vmk(Vt::LevelT), "", s->loc, false, true);
      Vp motiveTyV = evalHere(mkPi("b'", false, false, mk(Tm::Bool), mkUniv(lmeta)));
      TermPtr M = check(s->a, motiveTyV);
      Vp Mv = evalHere(M);
      TermPtr tc = check(s->b, applyVal(E, Mv, vmk(Vt::True)));
      TermPtr fc = check(s->c, applyVal(E, Mv, vmk(Vt::False)));
      TermPtr scr = check(s->d, vmk(Vt::Bool));
      return {mkBoolElim(M, tc, fc, scr), applyVal(E, Mv, evalHere(scr))};
    }
    case St::Absurd: {
      auto [A, sA] = isType(s->a);
      (void)sA;
      TermPtr e = check(s->b, vmk(Vt::Empty));
      return {mkAbsurd(A, e), evalHere(A)};
    }
    case St::Flat: {
      TermPtr A;
      Sort sA;
      {
        RestrictGuard g(*this);
        std::tie(A, sA) = isType(s->a);
      }
      if (sA.top) fail(E_UNIVERSE, s->loc, "Flat applies only to small types");
      return {mkFlat(readbackLevel(depth(), sA.l), A), vUniv(sA.l)};
    }
    case St::Con: {
      TermPtr e;
      Vp et;
      {
        RestrictGuard g(*this);
        std::tie(e, et) = infer(s->a);
        std::tie(e, et) = insertImplicits(std::move(e), std::move(et), s->loc);
      }
      auto so = sortOfType(depth(), et);
      if (!so || so->top)
        fail(E_CANNOT_INFER, s->loc, "cannot infer the universe of the type under con");
      auto f = vmk(Vt::Flat);
      f->level = so->l;
      f->v1 = et;
      return {mkCon(e), f};
    }
    case St::LetCon: {
      auto [sc, scTy] = infer(s->a);
      std::tie(sc, scTy) = insertImplicits(std::move(sc), std::move(scTy), s->loc);
      Vp fw = whnf(E, scTy);
      if (fw->tag != Vt::Flat)
        fail(E_MISMATCH, s->loc,
             "let con expects the scrutinee to have a Flat type; found '" + showSafe(fw) + "'");
      Vp A = fw->v1;
      if (s->b) {
        push(s->name2, fw, false);
        auto [Ct, cs] = isType(s->b);
        (void)cs;
        pop();
        TermPtr motive = mkLam(s->name2, false, false, Ct);
        Vp Mv = evalHere(motive);
        push(s->name, A, true);
        auto conY = vmk(Vt::Con);
        conY->v1 = envLookup(env, 0);
        TermPtr body = check(s->c, applyVal(E, Mv, conY));
        pop();
        return {mkFlatElim(s->name, s->name2, motive, sc, body),
                applyVal(E, Mv, evalHere(sc))};
      }
      push(s->name, A, true);
      auto [body, bty] = infer(s->c);
      int yl = depth() - 1;
      if (mentionsVarRange(E, bty, yl, yl + 1))
        fail(E_CANNOT_INFER, s->loc,
             "cannot infer a result type for let con: it depends on the opened variable; "
             "annotate with 'at x. C'");
      TermPtr btyT = readback(E, depth(), bty);
      pop();
      TermPtr motive = mkLam("_", false, false, btyT);
      return {mkFlatElim(s->name, "_", motive, sc, body), bty};
    }
  }
  fail(E_INTERNAL, s->loc, "unknown surface form");
}

TermPtr Elaborator::check(const SPtr& s, const Vp& ty) {
  curLoc = s->loc;
  E.loc = s->loc;
  Vp w = whnf(E, ty);

  // Insert an implicit lambda when checking a non-implicit-lambda against an
  // implicit function type.
  if (w->tag == Vt::Pi && w->implicit_ && !(s->tag == St::Lam && s->implicit_)) {
    push(w->name, w->v1, w->crisp);
    TermPtr body = check(s, evalClosure(E, w->cl, envLookup(env, 0)));
    pop();
    return mkLam(w->name, true, w->crisp, body);
  }

  auto flex = [&](const Vp& v) { return v->tag == Vt::Neutral && v->head.k == Head::Meta; };

  switch (s->tag) {
    case St::Lam: {
      if (w->tag != Vt::Pi) {
        if (flex(w))
          fail(E_CANNOT_INFER, s->loc, "cannot determine the type of this lambda from context");
        fail(E_MISMATCH, s->loc,
             "found a lambda where a value of type '" + showSafe(w) + "' is expected");
      }
      if (s->implicit_ && !w->implicit_)
        fail(E_MISMATCH, s->loc, "implicit lambda where an explicit function is expected");
      push(s->name, w->v1, w->crisp);
      TermPtr body = check(s->a, evalClosure(E, w->cl, envLookup(env, 0)));
      pop();
      return mkLam(s->name, w->implicit_, w->crisp, body);
    }
    case St::Pair: {
      if (w->tag != Vt::Sigma) {
        if (flex(w))
          fail(E_CANNOT_INFER, s->loc, "cannot determine the type of this pair from context");
        fail(E_MISMATCH, s->loc,
             "found a pair where a value of type '" + showSafe(w) + "' is expected");
      }
      TermPtr x = check(s->a, w->v1);
      TermPtr y = check(s->b, evalClosure(E, w->cl, evalHere(x)));
      return mkPair(x, y);
    }
    case St::Refl: {
      if (w->tag != Vt::Id) {
        if (flex(w))
          fail(E_CANNOT_INFER, s->loc, "cannot determine the type of refl from context");
        fail(E_MISMATCH, s->loc,
             "found refl where a value of type '" + showSafe(w) + "' is expected");
      }
      unifyOr(s->loc, w->v2, w->v3, "the two endpoints of refl must be equal");
      return mk(Tm::Refl);
    }
    case St::Con: {
      if (w->tag != Vt::Flat) {
        if (flex(w))
          fail(E_CANNOT_INFER, s->loc, "cannot determine the type of con from context");
        fail(E_MISMATCH, s->loc,
             "found con where a value of type '" + showSafe(w) + "' is expected");
      }
      RestrictGuard g(*this);
      TermPtr e = check(s->a, w->v1);
      return mkCon(e);
    }
    case St::LetCon: {
      if (s->b) break;  // explicit motive: infer then unify
      auto [sc, scTy] = infer(s->a);
      std::tie(sc, scTy) = insertImplicits(std::move(sc), std::move(scTy), s->loc);
      Vp fw = whnf(E, scTy);
      if (fw->tag != Vt::Flat)
        fail(E_MISMATCH, s->loc,
             "let con expects the scrutinee to have a Flat type; found '" + showSafe(fw) + "'");
      TermPtr motive = mkLam("_", false, false, shiftTerm(rb(w), 1));
      push(s->name, fw->v1, true);
      TermPtr body = check(s->c, w);
      pop();
      return mkFlatElim(s->name, "_", motive, sc, body);
    }
    default:
      break;
  }

  auto [t, ti] = infer(s);
  std::tie(t, ti) = insertImplicits(std::move(t), std::move(ti), s->loc);
  unifyOr(s->loc, ti, w, "type mismatch");
  return t;
}

std::pair<TermPtr, Sort> Elaborator::isType(const SPtr& s) {
  if (s->tag == St::UnivTop) return {mkUnivTop(), Sort{true, {}}};
  auto [t, ty] = infer(s);
  std::tie(t, ty) = insertImplicits(std::move(t), std::move(ty), s->loc);
  Vp w = whnf(E, ty);
  if (w->tag == Vt::Univ) {
    if (w->top) return {t, Sort{true, {}}};
    return {t, Sort{false, forceLevel(E, w->level)}};
  }
  fail(E_NOT_TYPE, s->loc, "expected a type, found a value of type '" + showSafe(w) + "'");
}

// ---------------------------------------------------------------------------
// Zonking
// ---------------------------------------------------------------------------

void Elaborator::ensureAllSolved() {
  for (size_t i = 0; i < metas.metas.size(); ++i) {
    const MetaInfo& mi = metas.metas[i];
    if (mi.solved) continue;
    std::string what = "?" + std::to_string(i);
    if (!mi.hint.empty()) what += " (for implicit {" + mi.hint + "})";
    fail(E_UNSOLVED_META, mi.loc,
         "unsolved implicit argument " + what + "; supply it explicitly with {" +
             (mi.hint.empty() ? "..." : mi.hint + " := ...") + "}");
  }
}

TermPtr Elaborator::zonk(const TermPtr& t, int d) {
  if (!t) return t;
  if (t->tag == Tm::Meta) {
    MetaInfo& mi = metas.metas[t->idx];
    if (!mi.solved)
      fail(E_UNSOLVED_META, mi.loc, "unsolved implicit argument ?" + std::to_string(t->idx));
    if (!mi.zonkedBody) {
      if (mi.zonking) fail(E_INTERNAL, mi.loc, "cyclic implicit-argument solution");
      mi.zonking = true;
      mi.zonkedBody = zonk(mi.solutionBody, mi.ctxLen);
      mi.zonking = false;
    }
    return shiftTerm(mi.zonkedBody, d - mi.ctxLen);
  }
  auto bindsAt = [&](int slot) {
    switch (t->tag) {
      case Tm::Pi:
      case Tm::Sigma:
        return slot == 1;
      case Tm::Lam:
        return slot == 0;
      case Tm::FlatElim:
        return slot == 2;
      default:
        return false;
    }
  };
  TermPtr a = zonk(t->a, d + (bindsAt(0) ? 1 : 0));
  TermPtr b = zonk(t->b, d + (bindsAt(1) ? 1 : 0));
  TermPtr c = zonk(t->c, d + (bindsAt(2) ? 1 : 0));
  TermPtr dd = zonk(t->d, d + (bindsAt(3) ? 1 : 0));
  if (a == t->a && b == t->b && c == t->c && dd == t->d) return t;
  auto r = std::make_shared<Term>(*t);
  r->a = a;
  r->b = b;
  r->c = c;
  r->d = dd;
  return r;
}

// ---------------------------------------------------------------------------
// Declarations
// ---------------------------------------------------------------------------

void Elaborator::processDecl(const SDecl& d) {
  curLoc = d.loc;
  E.loc = d.loc;
  E.fired = 0;  // the rewrite budget is per declaration
  entries.clear();
  env = nullptr;
  restriction = 0;
  pending.clear();

  if (d.k == SDecl::Rewrite) {
    for (auto& nm : d.ruleNames) {
      const Decl* dd = sig.find(nm);
      if (!dd) fail(E_UNBOUND, d.loc, "rewrite refers to an unknown declaration '" + nm + "'");
      RewriteRule r = compileRule(E, nm, dd->type, d.loc);
      int idx = static_cast<int>(sig.rules.size());
      sig.addRule(std::move(r));
      Decl rd;
      rd.kind = Decl::Rewrite;
      rd.name = nm;
      rd.rule = idx;
      rd.loc = d.loc;
      sig.addDecl(std::move(rd), d.loc);
    }
    return;
  }

  if (sig.find(d.name)) fail(E_DUPLICATE, d.loc, "duplicate top-level name '" + d.name + "'");

  metas = MetaState{};
  solveCount = 0;

  std::vector<TermPtr> binderTypes;
  for (auto& b : d.binders) {
    TermPtr bt;
    Sort bs;
    if (b.crisp) {
      RestrictGuard g(*this);
      std::tie(bt, bs) = isType(b.type);
    } else {
      std::tie(bt, bs) = isType(b.type);
    }
    (void)bs;
    binderTypes.push_back(bt);
    push(b.name, evalHere(bt), b.crisp);
  }

  auto [Tt, sort] = isType(d.type);
  (void)sort;
  Vp Tv = evalHere(Tt);
  TermPtr body;
  if (d.k == SDecl::Def) body = check(d.body, Tv);

  flushPending();
  ensureAllSolved();

  int n = static_cast<int>(d.binders.size());
  for (int i = 0; i < n; ++i) binderTypes[i] = zonk(binderTypes[i], i);
  TermPtr type = zonk(Tt, n);
  if (body) body = zonk(body, n);
  for (int i = n - 1; i >= 0; --i) {
    type = mkPi(d.binders[i].name, d.binders[i].implicit_, d.binders[i].crisp, binderTypes[i],
                type);
    if (body)
      body = mkLam(d.binders[i].name, d.binders[i].implicit_, d.binders[i].crisp, body);
  }

  entries.clear();
  env = nullptr;
  restriction = 0;

  if (opt.kernelRecheck) {
    try {
      if (d.k == SDecl::Def)
        kernelCheckDecl(sig, type, body, opt.budget);
      else
        kernelCheckType(sig, type, opt.budget);
    } catch (const Error& e) {
      if (e.code == E_BUDGET) throw;
      fail(E_INTERNAL, d.loc,
           "the checked form of '" + d.name + "' failed independent re-checking: " + e.what());
    }
  }

  Decl out;
  out.kind = d.k == SDecl::Def ? Decl::Def : Decl::Postulate;
  out.name = d.name;
  out.type = type;
  out.body = body;
  out.loc = d.loc;
  sig.addDecl(std::move(out), d.loc);
}

TermPtr Elaborator::normalizeConst(const std::string& name, const SrcLoc& loc) {
  const Decl* dd = sig.find(name);
  if (!dd) fail(E_UNBOUND, loc, "unknown constant '" + name + "'");
  E.fired = 0;
  E.loc = loc;
  return normalizeClosed(E, mkConst(name));
}

// ---------------------------------------------------------------------------
// Kernel re-checking (meta-free)
// ---------------------------------------------------------------------------

namespace {

struct Kernel {
  ECtx E;
  struct KEntry {
    std::string name;
    Vp type;
    bool crisp;
  };
  std::vector<KEntry> entries;
  Env env;
  int restriction = 0;
  std::unordered_map<std::string, Vp> ctypes;

  explicit Kernel(const Signature& sig, long long budget) {
    E.sig = &sig;
    E.metas = nullptr;
    E.budget = budget;
  }

  int depth() const { return static_cast<int>(entries.size()); }

  struct RestrictGuard {
    Kernel& k;
    int saved;
    explicit RestrictGuard(Kernel& kk) : k(kk), saved(kk.restriction) {
      kk.restriction = kk.depth();
    }
    ~RestrictGuard() { k.restriction = saved; }
  };

  void push(const std::string& name, Vp type, bool crisp) {
    Vp val;
    if (whnf(E, type)->tag == Vt::LevelT)
      val = vLevel(VLevel::var(depth()));
    else
      val = vVar(depth());
    env = envPush(env, std::move(val));
    entries.push_back({name, std::move(type), crisp});
  }
  void pop() {
    entries.pop_back();
    env = env->next;
  }

  bool isDiscreteType(const Vp& ty) {
    Vp w = whnf(E, ty);
    switch (w->tag) {
      case Vt::Bool:
      case Vt::Unit:
      case Vt::Empty:
        return true;
      case Vt::Id:
        return isDiscreteType(w->v1);
      default:
        return false;
    }
  }
  bool usableVar(int level) {
    if (entries[level].crisp || level >= restriction) return true;
    return isDiscreteType(entries[level].type);
  }

  Vp constType(const std::string& name, const SrcLoc& loc) {
    auto it = ctypes.find(name);
    if (it != ctypes.end()) return it->second;
    const Decl* d = E.sig->find(name);
    if (!d) fail(E_UNBOUND, loc, "unbound constant '" + name + "'");
    Vp v = evaluate(E, d->type, nullptr);
    ctypes[name] = v;
    return v;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> ns;
    for (auto& e : entries) ns.push_back(e.name);
    return ns;
  }
  std::string show(const Vp& v) {
    try {
      return printValue(E, v, depth(), names());
    } catch (const Error& e) {
      if (e.code == E_BUDGET) throw;
      return "<value>";
    }
  }
  std::string showT(const TermPtr& t) { return printTerm(t, names()); }

  Vp evalHere(const TermPtr& t) { return evaluate(E, t, env); }

  Vp typeOfNeutral(int d, const Value& n, const SrcLoc& loc) {
    Vp ty, cur;
    switch (n.head.k) {
      case Head::Var:
        if (n.head.id >= depth()) fail(E_INTERNAL, loc, "loose variable in kernel value");
        ty = entries[n.head.id].type;
        cur = envLookup(env, depth() - 1 - n.head.id);
        break;
      case Head::Const:
        ty = constType(n.head.name, loc);
        cur = constValue(E, n.head.name);
        break;
      case Head::Meta:
        fail(E_INTERNAL, loc, "metavariable in kernel value");
    }
    for (auto& e : n.spine) {
      Vp w = whnf(E, ty);
      switch (e.k) {
        case Elim::App:
          if (w->tag != Vt::Pi) fail(E_INTERNAL, loc, "kernel: application of a non-function");
          ty = evalClosure(E, w->cl, e.arg);
          break;
        case Elim::Fst:
          if (w->tag != Vt::Sigma) fail(E_INTERNAL, loc, "kernel: fst of a non-pair");
          ty = w->v1;
          break;
        case Elim::Snd:
          if (w->tag != Vt::Sigma) fail(E_INTERNAL, loc, "kernel: snd of a non-pair");
          ty = evalClosure(E, w->cl, doFst(E, cur));
          break;
        case Elim::J:
          if (w->tag != Vt::Id) fail(E_INTERNAL, loc, "kernel: J of a non-identity");
          ty = applyVal(E, applyVal(E, e.motive, w->v3), cur);
          break;
        case Elim::BElim:
        case Elim::FElim:
          ty = applyVal(E, e.motive, cur);
          break;
        case Elim::Absurd:
          ty = e.motive;
          break;
      }
      cur = applyElim(E, cur, e);
    }
    return ty;
  }

  std::optional<Sort> sortOfType(int d, const Vp& ty0, const SrcLoc& loc) {
    Vp ty = whnf(E, ty0);
    switch (ty->tag) {
      case Vt::Univ:
        if (ty->top) return std::nullopt;
        return Sort{false, lsucL(forceLevel(E, ty->level))};
      case Vt::Bool:
      case Vt::Unit:
      case Vt::Empty:
      case Vt::LevelT:
        return Sort{false, VLevel::constant(0)};
      case Vt::Id:
        return sortOfType(d, ty->v1, loc);
      case Vt::Flat:
        return Sort{false, forceLevel(E, ty->level)};
      case Vt::Pi:
      case Vt::Sigma: {
        auto s1 = sortOfType(d, ty->v1, loc);
        if (!s1) return std::nullopt;
        Vp fresh = whnf(E, ty->v1)->tag == Vt::LevelT ? vLevel(VLevel::var(d)) : vVar(d);
        auto s2 = sortOfType(d + 1, evalClosure(E, ty->cl, fresh), loc);
        if (!s2) return std::nullopt;
        if (s1->top || s2->top || s2->l.mentionsVarLevel(d)) return Sort{true, {}};
        return Sort{false, lmaxL(s1->l, s2->l)};
      }
      case Vt::Neutral: {
        Vp t = typeOfNeutral(d, *ty, loc);
        Vp w = whnf(E, t);
        if (w->tag != Vt::Univ) return std::nullopt;
        if (w->top) return Sort{true, {}};
        return Sort{false, forceLevel(E, w->level)};
      }
      default:
        return std::nullopt;
    }
  }

  Sort isType(const TermPtr& t, const SrcLoc& loc) {
    if (t->tag == Tm::Univ && t->top) return Sort{true, {}};
    Vp ty = infer(t, loc);
    Vp w = whnf(E, ty);
    if (w->tag != Vt::Univ)
      fail(E_NOT_TYPE, loc, "kernel: '" + showT(t) + "' is not a type (its type is '" +
                                show(w) + "')");
    if (w->top) return Sort{true, {}};
    return Sort{false, forceLevel(E, w->level)};
  }

  Vp infer(const TermPtr& t, const SrcLoc& loc) {
    switch (t->tag) {
      case Tm::Var: {
        int lvl = depth() - 1 - t->idx;
        if (t->idx < 0 || lvl < 0) fail(E_INTERNAL, loc, "kernel: variable index out of range");
        if (!usableVar(lvl))
          fail(E_MODAL, loc,
               "variable '" + entries[lvl].name +
                   "' is not usable here: it is bound outside a crisp boundary and its type "
                   "is not discrete");
        return entries[lvl].type;
      }
      case Tm::Const:
        return constType(t->name, loc);
      case Tm::Meta:
        fail(E_INTERNAL, loc, "kernel: unexpected metavariable");
      case Tm::Univ:
        if (t->top) fail(E_UNIVERSE, loc, "Setw is too large to have a type");
        check(t->a, vmk(Vt::LevelT), loc);
        return vUniv(lsucL(evalLevel(E, t->a, env)));
      case Tm::LevelT:
        return vUniv(VLevel::constant(0));
      case Tm::LZero:
        return vmk(Vt::LevelT);
      case Tm::LSuc:
        check(t->a, vmk(Vt::LevelT), loc);
        return vmk(Vt::LevelT);
      case Tm::LMax:
        check(t->a, vmk(Vt::LevelT), loc);
        check(t->b, vmk(Vt::LevelT), loc);
        return vmk(Vt::LevelT);
      case Tm::Pi: {
        Sort s1;
        if (t->crisp) {
          RestrictGuard g(*this);
          s1 = isType(t->a, loc);
        } else {
          s1 = isType(t->a, loc);
        }
        int bindLvl = depth();
        push(t->name, evalHere(t->a), t->crisp);
        Sort s2 = isType(t->b, loc);
        pop();
        if (s1.top || s2.top || s2.l.mentionsVarLevel(bindLvl)) return vUnivTop();
        return vUniv(lmaxL(s1.l, s2.l));
      }
      case Tm::Sigma: {
        Sort s1 = isType(t->a, loc);
        int bindLvl = depth();
        push(t->name, evalHere(t->a), false);
        Sort s2 = isType(t->b, loc);
        pop();
        if (s1.top || s2.top || s2.l.mentionsVarLevel(bindLvl)) return vUnivTop();
        return vUniv(lmaxL(s1.l, s2.l));
      }
      case Tm::Lam:
        fail(E_CANNOT_INFER, loc, "kernel: cannot infer the type of a lambda");
      case Tm::App: {
        Vp fty = infer(t->a, loc);
        Vp w = whnf(E, fty);
        if (w->tag != Vt::Pi)
          fail(E_NOT_FUNCTION, loc,
               "kernel: applying a value of non-function type '" + show(w) + "'");
        if (w->implicit_ != t->implicit_)
          fail(E_MISMATCH, loc, "kernel: implicit/explicit application mismatch");
        if (w->crisp) {
          RestrictGuard g(*this);
          check(t->b, w->v1, loc);
        } else {
          check(t->b, w->v1, loc);
        }
        return evalClosure(E, w->cl, evalHere(t->b));
      }
      case Tm::Pair:
        fail(E_CANNOT_INFER, loc, "kernel: cannot infer the type of a pair");
      case Tm::Fst: {
        Vp w = whnf(E, infer(t->a, loc));
        if (w->tag != Vt::Sigma)
          fail(E_MISMATCH, loc, "kernel: fst of a value of type '" + show(w) + "'");
        return w->v1;
      }
      case Tm::Snd: {
        Vp w = whnf(E, infer(t->a, loc));
        if (w->tag != Vt::Sigma)
          fail(E_MISMATCH, loc, "kernel: snd of a value of type '" + show(w) + "'");
        return evalClosure(E, w->cl, doFst(E, evalHere(t->a)));
      }
      case Tm::Id: {
        Sort sA = isType(t->a, loc);
        Vp Av = evalHere(t->a);
        check(t->b, Av, loc);
        check(t->c, Av, loc);
        return sA.top ? vUnivTop() : vUniv(sA.l);
      }
      case Tm::Refl:
        fail(E_CANNOT_INFER, loc, "kernel: cannot infer the endpoints of refl");
      case Tm::J: {
        Vp pt = whnf(E, infer(t->c, loc));
        if (pt->tag != Vt::Id)
          fail(E_MISMATCH, loc, "kernel: J applied to a value of type '" + show(pt) + "'");
        if (t->a->tag == Tm::Lam && t->a->a->tag == Tm::Lam) {
          // A literal lambda motive is checked against the telescope
          // (y : A) (q : Id A a y) with any universe as codomain.
          push(t->a->name, pt->v1, false);
          Vp idTy = vmk(Vt::Id);
          idTy->v1 = pt->v1;
          idTy->v2 = pt->v2;
          idTy->v3 = envLookup(env, 0);
          push(t->a->a->name, idTy, false);
          isType(t->a->a->a, loc);
          pop();
          pop();
        } else {
          Vp mTy = whnf(E, infer(t->a, loc));
          if (mTy->tag != Vt::Pi || !convertible(E, depth(), mTy->v1, pt->v1))
            fail(E_MISMATCH, loc, "kernel: J motive does not abstract over the endpoint type");
          Vp freshY = vVar(depth());
          Vp cod1 = whnf(E, evalClosure(E, mTy->cl, freshY));
          if (cod1->tag != Vt::Pi)
            fail(E_MISMATCH, loc, "kernel: J motive must also abstract over the proof");
          Vp expectId = vmk(Vt::Id);
          expectId->v1 = pt->v1;
          expectId->v2 = pt->v2;
          expectId->v3 = freshY;
          if (!convertible(E, depth() + 1, cod1->v1, expectId))
            fail(E_MISMATCH, loc, "kernel: J motive domain is not the expected identity type");
          Vp cod2 = whnf(E, evalClosure(E, cod1->cl, vVar(depth() + 1)));
          if (cod2->tag != Vt::Univ)
            fail(E_MISMATCH, loc, "kernel: J motive must land in a universe");
        }
        Vp Mv = evalHere(t->a);
        check(t->b, applyVal(E, applyVal(E, Mv, pt->v2), vmk(Vt::Refl)), loc);
        return applyVal(E, applyVal(E, Mv, pt->v3), evalHere(t->c));
      }
      case Tm::Unit:
      case Tm::Empty:
      case Tm::Bool:
        return vUniv(VLevel::constant(0));
      case Tm::TT:
        return vmk(Vt::Unit);
      case Tm::TrueC:
      case Tm::FalseC:
        return vmk(Vt::Bool);
      case Tm::Absurd: {
        isType(t->a, loc);
        check(t->b, vmk(Vt::Empty), loc);
        return evalHere(t->a);
      }
      case Tm::BoolElim: {
        if (t->a->tag == Tm::Lam) {
          push(t->a->name, vmk(Vt::Bool), false);
          isType(t->a->a, loc);
          pop();
        } else {
          Vp mTy = whnf(E, infer(t->a, loc));
          if (mTy->tag != Vt::Pi || whnf(E, mTy->v1)->tag != Vt::Bool)
            fail(E_MISMATCH, loc, "kernel: boolElim motive must abstract over Bool");
          Vp cod = whnf(E, evalClosure(E, mTy->cl, vVar(depth())));
          if (cod->tag != Vt::Univ)
            fail(E_MISMATCH, loc, "kernel: boolElim motive must land in a universe");
        }
        Vp Mv = evalHere(t->a);
        check(t->b, applyVal(E, Mv, vmk(Vt::True)), loc);
        check(t->c, applyVal(E, Mv, vmk(Vt::False)), loc);
        check(t->d, vmk(Vt::Bool), loc);
        return applyVal(E, Mv, evalHere(t->d));
      }
      case Tm::Flat: {
        Sort s;
        {
          RestrictGuard g(*this);
          s = isType(t->b, loc);
        }
        check(t->a, vmk(Vt::LevelT), loc);
        VLevel lv = evalLevel(E, t->a, env);
        if (s.top || !levelEq(forceLevel(E, s.l), forceLevel(E, lv)))
          fail(E_UNIVERSE, loc, "kernel: Flat level annotation disagrees with the type");
        return vUniv(lv);
      }
      case Tm::Con: {
        Vp ty;
        {
          RestrictGuard g(*this);
          ty = infer(t->a, loc);
        }
        auto s = sortOfType(depth(), ty, loc);
        if (!s || s->top)
          fail(E_UNIVERSE, loc, "kernel: cannot compute the universe of the type under con");
        auto f = vmk(Vt::Flat);
        f->level = s->l;
        f->v1 = ty;
        return f;
      }
      case Tm::FlatElim: {
        Vp scTy = whnf(E, infer(t->b, loc));
        if (scTy->tag != Vt::Flat)
          fail(E_MISMATCH, loc,
               "kernel: let con scrutinee has type '" + show(scTy) + "', not a Flat type");
        if (t->a->tag == Tm::Lam) {
          push(t->a->name, scTy, false);
          isType(t->a->a, loc);
          pop();
        } else {
          Vp mTy = whnf(E, infer(t->a, loc));
          if (mTy->tag != Vt::Pi || !convertible(E, depth(), mTy->v1, scTy))
            fail(E_MISMATCH, loc, "kernel: let con motive must abstract over the Flat type");
          Vp cod = whnf(E, evalClosure(E, mTy->cl, vVar(depth())));
          if (cod->tag != Vt::Univ)
            fail(E_MISMATCH, loc, "kernel: let con motive must land in a universe");
        }
        Vp Mv = evalHere(t->a);
        push(t->name, scTy->v1, true);
        auto conY = vmk(Vt::Con);
        conY->v1 = envLookup(env, 0);
        check(t->c, applyVal(E, Mv, conY), loc);
        pop();
        return applyVal(E, Mv, evalHere(t->b));
      }
    }
    fail(E_INTERNAL, loc, "kernel: unknown term tag");
  }

  void check(const TermPtr& t, const Vp& ty, const SrcLoc& loc) {
    Vp w = whnf(E, ty);
    switch (t->tag) {
      case Tm::Lam: {
        if (w->tag != Vt::Pi)
          fail(E_MISMATCH, loc, "kernel: lambda against non-function type '" + show(w) + "'");
        if (w->implicit_ != t->implicit_ || w->crisp != t->crisp)
          fail(E_MISMATCH, loc, "kernel: lambda binder flags disagree with the function type");
        push(t->name, w->v1, w->crisp);
        check(t->a, evalClosure(E, w->cl, envLookup(env, 0)), loc);
        pop();
        return;
      }
      case Tm::Pair: {
        if (w->tag != Vt::Sigma)
          fail(E_MISMATCH, loc, "kernel: pair against non-pair type '" + show(w) + "'");
        check(t->a, w->v1, loc);
        check(t->b, evalClosure(E, w->cl, evalHere(t->a)), loc);
        return;
      }
      case Tm::Refl: {
        if (w->tag != Vt::Id)
          fail(E_MISMATCH, loc, "kernel: refl against non-identity type '" + show(w) + "'");
        if (!convertible(E, depth(), w->v2, w->v3))
          fail(E_MISMATCH, loc,
               "kernel: refl endpoints are not convertible: '" + show(w->v2) + "' vs '" +
                   show(w->v3) + "'");
        return;
      }
      case Tm::Con: {
        if (w->tag != Vt::Flat)
          fail(E_MISMATCH, loc, "kernel: con against non-Flat type '" + show(w) + "'");
        RestrictGuard g(*this);
        check(t->a, w->v1, loc);
        return;
      }
      default: {
        Vp ti = infer(t, loc);
        if (!convertible(E, depth(), ti, w))
          fail(E_MISMATCH, loc,
               "kernel: '" + showT(t) + "' has type '" + show(ti) + "' but '" + show(w) +
                   "' is required");
        return;
      }
    }
  }
};

}  // namespace

void kernelCheckType(const Signature& sig, const TermPtr& type, long long budget) {
  Kernel k(sig, budget);
  k.isType(type, SrcLoc{});
}

void kernelCheckDecl(const Signature& sig, const TermPtr& type, const TermPtr& body,
                     long long budget) {
  Kernel k(sig, budget);
  k.isType(type, SrcLoc{});
  k.check(body, evaluate(k.E, type, nullptr), SrcLoc{});
}

TermPtr kernelInferClosed(const Signature& sig, const TermPtr& t, long long budget) {
  Kernel k(sig, budget);
  Vp ty = k.infer(t, SrcLoc{});
  return readback(k.E, 0, ty);
}

}  // namespace cohtt
