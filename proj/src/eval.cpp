#include "cohtt/eval.hpp"

#include <algorithm>

#include "cohtt/rewrite.hpp"

namespace cohtt {

// --- levels ----------------------------------------------------------------

namespace {

// Canonical form: atoms sorted and merged by key; the constant survives only
// if some valuation can make it the maximum, i.e. if it exceeds every atom
// offset (an atom with offset o is always >= o).
void canonLevel(VLevel& l) {
  std::sort(l.atoms.begin(), l.atoms.end());
  std::vector<VLevel::Atom> out;
  for (auto& a : l.atoms) {
    if (!out.empty() && out.back().isMeta == a.isMeta && out.back().id == a.id)
      out.back().off = std::max(out.back().off, a.off);
    else
      out.push_back(a);
  }
  l.atoms = std::move(out);
  for (auto& a : l.atoms)
    if (a.off >= l.k) { l.k = 0; break; }
}

VLevel addOff(VLevel l, unsigned off) {
  l.k += off;
  for (auto& a : l.atoms) a.off += off;
  canonLevel(l);
  return l;
}

}  // namespace

VLevel lsucL(const VLevel& l) { return addOff(l, 1); }

VLevel lmaxL(const VLevel& a, const VLevel& b) {
  VLevel out;
  out.k = std::max(a.k, b.k);
  out.atoms = a.atoms;
  out.atoms.insert(out.atoms.end(), b.atoms.begin(), b.atoms.end());
  canonLevel(out);
  return out;
}

bool levelEq(const VLevel& a, const VLevel& b) {
  if (a.k != b.k || a.atoms.size() != b.atoms.size()) return false;
  for (size_t i = 0; i < a.atoms.size(); ++i) {
    auto &x = a.atoms[i], &y = b.atoms[i];
    if (x.isMeta != y.isMeta || x.id != y.id || x.off != y.off) return false;
  }
  return true;
}

VLevel forceLevel(ECtx& E, const VLevel& l) {
  if (!E.metas || !l.hasMetaAtom()) return l;
  VLevel out = VLevel::constant(l.k);
  for (auto& a : l.atoms) {
    if (a.isMeta && E.metas->metas[a.id].solved) {
      out = lmaxL(out, addOff(forceLevel(E, E.metas->metas[a.id].solutionLevel), a.off));
    } else {
      VLevel atom;
      atom.atoms.push_back(a);
      out = lmaxL(out, atom);
    }
  }
  return out;
}

VLevel valueToLevel(ECtx& E, const Vp& v0) {
  Vp v = whnf(E, v0);
  if (v->tag == Vt::LevelVal) return forceLevel(E, v->level);
  if (v->tag == Vt::Neutral && v->spine.empty()) {
    if (v->head.k == Head::Var) return VLevel::var(v->head.id);
    if (v->head.k == Head::Meta) return VLevel::meta(v->head.id);
  }
  fail(E_INTERNAL, E.loc, "expression did not reduce to a universe level");
}

VLevel evalLevel(ECtx& E, const TermPtr& t, const Env& env) {
  return valueToLevel(E, evaluate(E, t, env));
}

TermPtr readbackLevel(int depth, const VLevel& l) {
  std::vector<TermPtr> parts;
  for (auto& a : l.atoms) {
    TermPtr t = a.isMeta ? mkMeta(a.id) : mkVar(depth - 1 - a.id);
    for (unsigned i = 0; i < a.off; ++i) t = mkLSuc(t);
    parts.push_back(t);
  }
  if (l.k > 0 || parts.empty()) {
    TermPtr t = mkLZero();
    for (unsigned i = 0; i < l.k; ++i) t = mkLSuc(t);
    parts.push_back(t);
  }
  TermPtr out = parts[0];
  for (size_t i = 1; i < parts.size(); ++i) out = mkLMax(out, parts[i]);
  return out;
}

// --- neutrals and eliminations ----------------------------------------------

Vp neutralFrom(const Head& h, std::vector<Elim> spine) {
  auto v = vmk(Vt::Neutral);
  v->head = h;
  v->spine = std::move(spine);
  return v;
}

namespace {

Vp extendNeutral(ECtx& E, const Vp& n, Elim e) {
  std::vector<Elim> sp = n->spine;
  sp.push_back(std::move(e));
  if (n->head.k == Head::Const && sp.back().k == Elim::App) {
    if (Vp r = tryRewrite(E, n->head.name, sp)) return r;
  }
  auto v = vmk(Vt::Neutral);
  v->head = n->head;
  v->spine = std::move(sp);
  if (n->unfold) {
    Vp parent = n;
    Elim elim = v->spine.back();
    v->unfold = std::make_shared<Lazy>();
    v->unfold->make = [parent, elim](ECtx& E2) {
      Vp u = whnf(E2, parent->unfold->force(E2));
      return whnf(E2, applyElim(E2, u, elim));
    };
  }
  return v;
}

Vp forceSolvedMeta(ECtx& E, const Value& n, const MetaInfo& mi) {
  if (static_cast<int>(n.spine.size()) < mi.ctxLen)
    fail(E_INTERNAL, E.loc, "underapplied metavariable");
  Env env = nullptr;
  for (int i = 0; i < mi.ctxLen; ++i) env = envPush(env, n.spine[i].arg);
  Vp v = evaluate(E, mi.solutionBody, env);
  for (size_t i = mi.ctxLen; i < n.spine.size(); ++i) v = applyElim(E, v, n.spine[i]);
  return v;
}

}  // namespace

Vp evalClosure(ECtx& E, const Closure& cl, Vp arg) {
  return evaluate(E, cl.body, envPush(cl.env, std::move(arg)));
}

Vp applyVal(ECtx& E, const Vp& f, Vp arg, bool implicit_) {
  if (f->tag == Vt::Lam) return evalClosure(E, f->cl, std::move(arg));
  if (f->tag == Vt::Neutral) {
    Elim e;
    e.k = Elim::App;
    e.arg = std::move(arg);
    e.implicit_ = implicit_;
    return extendNeutral(E, f, std::move(e));
  }
  Vp fw = whnf(E, f);
  if (fw != f) return applyVal(E, fw, std::move(arg), implicit_);
  fail(E_INTERNAL, E.loc, "applied a non-function value");
}

Vp doFst(ECtx& E, const Vp& p0) {
  Vp p = whnf(E, p0);
  if (p->tag == Vt::Pair) return p->v1;
  if (p->tag == Vt::Neutral) {
    Elim e;
    e.k = Elim::Fst;
    return extendNeutral(E, p, std::move(e));
  }
  fail(E_INTERNAL, E.loc, "fst of a non-pair value");
}

Vp doSnd(ECtx& E, const Vp& p0) {
  Vp p = whnf(E, p0);
  if (p->tag == Vt::Pair) return p->v2;
  if (p->tag == Vt::Neutral) {
    Elim e;
    e.k = Elim::Snd;
    return extendNeutral(E, p, std::move(e));
  }
  fail(E_INTERNAL, E.loc, "snd of a non-pair value");
}

Vp doJ(ECtx& E, Vp motive, Vp base, const Vp& proof0) {
  Vp proof = whnf(E, proof0);
  if (proof->tag == Vt::Refl) return base;
  if (proof->tag == Vt::Neutral) {
    Elim e;
    e.k = Elim::J;
    e.motive = std::move(motive);
    e.base = std::move(base);
    return extendNeutral(E, proof, std::move(e));
  }
  fail(E_INTERNAL, E.loc, "identity eliminated a non-proof value");
}

Vp doBoolElim(ECtx& E, Vp motive, Vp tcase, Vp fcase, const Vp& scrut0) {
  Vp scrut = whnf(E, scrut0);
  if (scrut->tag == Vt::True) return tcase;
  if (scrut->tag == Vt::False) return fcase;
  if (scrut->tag == Vt::Neutral) {
    Elim e;
    e.k = Elim::BElim;
    e.motive = std::move(motive);
    e.base = std::move(tcase);
    e.arg = std::move(fcase);
    return extendNeutral(E, scrut, std::move(e));
  }
  fail(E_INTERNAL, E.loc, "boolElim of a non-boolean value");
}

Vp doFlatElim(ECtx& E, Vp motive, Closure branch, const Vp& scrut0,
              std::string name, std::string name2) {
  Vp scrut = whnf(E, scrut0);
  if (scrut->tag == Vt::Con) return evalClosure(E, branch, scrut->v1);
  if (scrut->tag == Vt::Neutral) {
    Elim e;
    e.k = Elim::FElim;
    e.motive = std::move(motive);
    e.branch = std::move(branch);
    e.name = std::move(name);
    e.name2 = std::move(name2);
    return extendNeutral(E, scrut, std::move(e));
  }
  fail(E_INTERNAL, E.loc, "crisp elimination of a non-con value");
}

Vp doAbsurd(ECtx& E, Vp motive, const Vp& scrut0) {
  Vp scrut = whnf(E, scrut0);
  if (scrut->tag == Vt::Neutral) {
    Elim e;
    e.k = Elim::Absurd;
    e.motive = std::move(motive);
    return extendNeutral(E, scrut, std::move(e));
  }
  fail(E_INTERNAL, E.loc, "absurd of a non-neutral value");
}

Vp applyElim(ECtx& E, const Vp& v, const Elim& e) {
  switch (e.k) {
    case Elim::App: return applyVal(E, v, e.arg, e.implicit_);
    case Elim::Fst: return doFst(E, v);
    case Elim::Snd: return doSnd(E, v);
    case Elim::J: return doJ(E, e.motive, e.base, v);
    case Elim::BElim: return doBoolElim(E, e.motive, e.base, e.arg, v);
    case Elim::FElim: return doFlatElim(E, e.motive, e.branch, v, e.name, e.name2);
    case Elim::Absurd: return doAbsurd(E, e.motive, v);
  }
  fail(E_INTERNAL, E.loc, "unknown elimination");
}

Vp constValue(ECtx& E, const std::string& name) {
  const Decl* d = E.sig->find(name);
  if (!d) fail(E_INTERNAL, E.loc, "unknown constant '" + name + "'");
  if (Vp r = tryRewrite(E, name, {})) return r;
  auto v = vmk(Vt::Neutral);
  v->head = {Head::Const, 0, name};
  if (d->kind == Decl::Def) {
    std::string n = name;
    v->unfold = std::make_shared<Lazy>();
    v->unfold->make = [n](ECtx& E2) {
      return whnf(E2, evaluate(E2, E2.sig->find(n)->body, nullptr));
    };
  }
  return v;
}

// --- evaluation --------------------------------------------------------------

Vp evaluate(ECtx& E, const TermPtr& t, const Env& env) {
  switch (t->tag) {
    case Tm::Var:
      return envLookup(env, t->idx);
    case Tm::Const:
      return constValue(E, t->name);
    case Tm::Meta: {
      if (!E.metas) fail(E_INTERNAL, E.loc, "metavariable in kernel evaluation");
      MetaInfo& mi = E.metas->metas[t->idx];
      if (mi.isLevel) {
        if (mi.solved) {
          // The solution's variables refer to the meta's own context, which
          // is the prefix of the current environment; evaluate the index
          // form there rather than splicing absolute levels.
          int d = envLen(env);
          if (d >= mi.ctxLen) {
            Env p = env;
            for (int k = d; k > mi.ctxLen; --k) p = p->next;
            return vLevel(evalLevel(E, mi.solutionBody, p));
          }
          return vLevel(forceLevel(E, mi.solutionLevel));
        }
        return vLevel(VLevel::meta(t->idx));
      }
      auto v = vmk(Vt::Neutral);
      v->head = {Head::Meta, t->idx, {}};
      int d = envLen(env);
      for (int lvl = 0; lvl < mi.ctxLen; ++lvl) {
        Elim e;
        e.k = Elim::App;
        e.arg = envLookup(env, d - 1 - lvl);
        v->spine.push_back(std::move(e));
      }
      return v;
    }
    case Tm::Univ:
      return t->top ? vUnivTop() : vUniv(evalLevel(E, t->a, env));
    case Tm::LevelT:
      return vmk(Vt::LevelT);
    case Tm::LZero:
      return vLevel(VLevel::constant(0));
    case Tm::LSuc:
      return vLevel(lsucL(evalLevel(E, t->a, env)));
    case Tm::LMax:
      return vLevel(lmaxL(evalLevel(E, t->a, env), evalLevel(E, t->b, env)));
    case Tm::Pi: {
      auto v = vmk(Vt::Pi);
      v->name = t->name;
      v->implicit_ = t->implicit_;
      v->crisp = t->crisp;
      v->v1 = evaluate(E, t->a, env);
      v->cl = {env, t->b};
      return v;
    }
    case Tm::Lam: {
      auto v = vmk(Vt::Lam);
      v->name = t->name;
      v->implicit_ = t->implicit_;
      v->crisp = t->crisp;
      v->cl = {env, t->a};
      return v;
    }
    case Tm::App:
      return applyVal(E, evaluate(E, t->a, env), evaluate(E, t->b, env), t->implicit_);
    case Tm::Sigma: {
      auto v = vmk(Vt::Sigma);
      v->name = t->name;
      v->v1 = evaluate(E, t->a, env);
      v->cl = {env, t->b};
      return v;
    }
    case Tm::Pair: {
      auto v = vmk(Vt::Pair);
      v->v1 = evaluate(E, t->a, env);
      v->v2 = evaluate(E, t->b, env);
      return v;
    }
    case Tm::Fst:
      return doFst(E, evaluate(E, t->a, env));
    case Tm::Snd:
      return doSnd(E, evaluate(E, t->a, env));
    case Tm::Id: {
      auto v = vmk(Vt::Id);
      v->v1 = evaluate(E, t->a, env);
      v->v2 = evaluate(E, t->b, env);
      v->v3 = evaluate(E, t->c, env);
      return v;
    }
    case Tm::Refl:
      return vmk(Vt::Refl);
    case Tm::J:
      return doJ(E, evaluate(E, t->a, env), evaluate(E, t->b, env), evaluate(E, t->c, env));
    case Tm::Unit:
      return vmk(Vt::Unit);
    case Tm::TT:
      return vmk(Vt::TT);
    case Tm::Empty:
      return vmk(Vt::Empty);
    case Tm::Absurd:
      return doAbsurd(E, evaluate(E, t->a, env), evaluate(E, t->b, env));
    case Tm::Bool:
      return vmk(Vt::Bool);
    case Tm::TrueC:
      return vmk(Vt::True);
    case Tm::FalseC:
      return vmk(Vt::False);
    case Tm::BoolElim:
      return doBoolElim(E, evaluate(E, t->a, env), evaluate(E, t->b, env),
                        evaluate(E, t->c, env), evaluate(E, t->d, env));
    case Tm::Flat: {
      auto v = vmk(Vt::Flat);
      v->level = evalLevel(E, t->a, env);
      v->v1 = evaluate(E, t->b, env);
      return v;
    }
    case Tm::Con: {
      auto v = vmk(Vt::Con);
      v->v1 = evaluate(E, t->a, env);
      return v;
    }
    case Tm::FlatElim:
      return doFlatElim(E, evaluate(E, t->a, env), Closure{env, t->c},
                        evaluate(E, t->b, env), t->name, t->name2);
  }
  fail(E_INTERNAL, E.loc, "unknown term tag in evaluation");
}

Vp whnf(ECtx& E, Vp v) {
  for (;;) {
    if (v->tag != Vt::Neutral) return v;
    if (v->head.k == Head::Meta && E.metas) {
      MetaInfo& mi = E.metas->metas[v->head.id];
      if (mi.solved) {
        v = forceSolvedMeta(E, *v, mi);
        continue;
      }
      return v;
    }
    if (v->unfold) {
      Vp u = v->unfold->force(E);
      if (u->tag != Vt::Neutral) {
        v = u;
        continue;
      }
      if (E.deepUnfold && u != v &&
          !(v->head.k == Head::Const && E.sig && E.sig->rulesFor(v->head.name))) {
        // Full normalization chases definitions, except heads that carry
        // rewrite rules: unfolding those would erase the head the rules
        // match on, making the normal form less reduced, not more.
        v = u;
        continue;
      }
      return v;  // stuck under unfolding: keep the named view
    }
    return v;
  }
}

// --- readback ----------------------------------------------------------------

TermPtr readback(ECtx& E, int depth, const Vp& v0) {
  Vp v = whnf(E, v0);
  switch (v->tag) {
    case Vt::Pi: {
      TermPtr dom = readback(E, depth, v->v1);
      TermPtr cod = readback(E, depth + 1, evalClosure(E, v->cl, vVar(depth)));
      return mkPi(v->name, v->implicit_, v->crisp, dom, cod);
    }
    case Vt::Lam: {
      TermPtr body = readback(E, depth + 1, evalClosure(E, v->cl, vVar(depth)));
      return mkLam(v->name, v->implicit_, v->crisp, body);
    }
    case Vt::Sigma: {
      TermPtr dom = readback(E, depth, v->v1);
      TermPtr cod = readback(E, depth + 1, evalClosure(E, v->cl, vVar(depth)));
      return mkSigma(v->name, dom, cod);
    }
    case Vt::Pair:
      return mkPair(readback(E, depth, v->v1), readback(E, depth, v->v2));
    case Vt::Univ:
      return v->top ? mkUnivTop() : mkUniv(readbackLevel(depth, forceLevel(E, v->level)));
    case Vt::LevelVal:
      return readbackLevel(depth, forceLevel(E, v->level));
    case Vt::LevelT:
      return mk(Tm::LevelT);
    case Vt::Id:
      return mkId(readback(E, depth, v->v1), readback(E, depth, v->v2), readback(E, depth, v->v3));
    case Vt::Refl:
      return mk(Tm::Refl);
    case Vt::Unit:
      return mk(Tm::Unit);
    case Vt::TT:
      return mk(Tm::TT);
    case Vt::Empty:
      return mk(Tm::Empty);
    case Vt::Bool:
      return mk(Tm::Bool);
    case Vt::True:
      return mk(Tm::TrueC);
    case Vt::False:
      return mk(Tm::FalseC);
    case Vt::Flat:
      return mkFlat(readbackLevel(depth, forceLevel(E, v->level)), readback(E, depth, v->v1));
    case Vt::Con:
      return mkCon(readback(E, depth, v->v1));
    case Vt::SortAny:
      fail(E_INTERNAL, E.loc, "internal sort marker escaped to readback");
    case Vt::Neutral: {
      TermPtr acc;
      switch (v->head.k) {
        case Head::Var: {
          int idx = depth - 1 - v->head.id;
          if (idx < 0) fail(E_INTERNAL, E.loc, "variable escaped its scope during readback");
          acc = mkVar(idx);
          break;
        }
        case Head::Const:
          acc = mkConst(v->head.name);
          break;
        case Head::Meta:
          acc = mkMeta(v->head.id);
          break;
      }
      bool isMetaHead = v->head.k == Head::Meta;
      for (size_t i = 0; i < v->spine.size(); ++i) {
        const Elim& e = v->spine[i];
        switch (e.k) {
          case Elim::App: {
            // Don't print the variable spine a contextual meta was created
            // with; solutions are scope-checked separately.
            if (isMetaHead && E.metas && i < static_cast<size_t>(E.metas->metas[v->head.id].ctxLen))
              break;
            acc = mkApp(acc, readback(E, depth, e.arg), e.implicit_);
            break;
          }
          case Elim::Fst:
            acc = mkFst(acc);
            break;
          case Elim::Snd:
            acc = mkSnd(acc);
            break;
          case Elim::J:
            acc = mkJ(readback(E, depth, e.motive), readback(E, depth, e.base), acc);
            break;
          case Elim::BElim:
            acc = mkBoolElim(readback(E, depth, e.motive), readback(E, depth, e.base),
                             readback(E, depth, e.arg), acc);
            break;
          case Elim::FElim: {
            TermPtr motive = readback(E, depth, e.motive);
            TermPtr branch = readback(E, depth + 1, evalClosure(E, e.branch, vVar(depth)));
            acc = mkFlatElim(e.name, e.name2, motive, acc, branch);
            break;
          }
          case Elim::Absurd:
            acc = mkAbsurd(readback(E, depth, e.motive), acc);
            break;
        }
      }
      return acc;
    }
  }
  fail(E_INTERNAL, E.loc, "unknown value tag in readback");
}

// --- conversion ---------------------------------------------------------------

namespace {

// The unfolded view of a stuck neutral (or the value itself when there is
// nothing to unfold).
Vp forcedView(ECtx& E, const Vp& v) {
  if (v->tag == Vt::Neutral && v->unfold) return v->unfold->force(E);
  return v;
}

bool convSpine(ECtx& E, int d, const Value& a, const Value& b) {
  if (a.spine.size() != b.spine.size()) return false;
  for (size_t i = 0; i < a.spine.size(); ++i) {
    const Elim &x = a.spine[i], &y = b.spine[i];
    if (x.k != y.k) return false;
    switch (x.k) {
      case Elim::App:
        if (!convertible(E, d, x.arg, y.arg)) return false;
        break;
      case Elim::Fst:
      case Elim::Snd:
        break;
      case Elim::J:
        if (!convertible(E, d, x.motive, y.motive)) return false;
        if (!convertible(E, d, x.base, y.base)) return false;
        break;
      case Elim::BElim:
        if (!convertible(E, d, x.motive, y.motive)) return false;
        if (!convertible(E, d, x.base, y.base)) return false;
        if (!convertible(E, d, x.arg, y.arg)) return false;
        break;
      case Elim::FElim: {
        if (!convertible(E, d, x.motive, y.motive)) return false;
        Vp fresh = vVar(d);
        if (!convertible(E, d + 1, evalClosure(E, x.branch, fresh), evalClosure(E, y.branch, fresh)))
          return false;
        break;
      }
      case Elim::Absurd:
        if (!convertible(E, d, x.motive, y.motive)) return false;
        break;
    }
  }
  return true;
}

bool convNeutral(ECtx& E, int d, const Vp& a, const Vp& b) {
  bool sameHead = a->head.k == b->head.k && a->head.id == b->head.id &&
                  a->head.name == b->head.name;
  if (sameHead && convSpine(E, d, *a, *b)) return true;
  Vp ua = forcedView(E, a), ub = forcedView(E, b);
  if (ua == a && ub == b) return false;
  return convertible(E, d, ua, ub);
}

}  // namespace

bool convertible(ECtx& E, int d, const Vp& a0, const Vp& b0) {
  Vp a = whnf(E, a0), b = whnf(E, b0);
  if (a == b) return true;

  // Function extensionality on the nose: compare under a fresh variable.
  if (a->tag == Vt::Lam || b->tag == Vt::Lam) {
    Vp fresh = vVar(d);
    return convertible(E, d + 1, applyVal(E, a, fresh), applyVal(E, b, fresh));
  }
  // Surjective pairing.
  if (a->tag == Vt::Pair || b->tag == Vt::Pair) {
    return convertible(E, d, doFst(E, a), doFst(E, b)) &&
           convertible(E, d, doSnd(E, a), doSnd(E, b));
  }
  // The internal "any universe" marker accepts every sort.
  if (a->tag == Vt::SortAny) return b->tag == Vt::Univ || b->tag == Vt::SortAny;
  if (b->tag == Vt::SortAny) return a->tag == Vt::Univ;

  if (a->tag != b->tag) {
    Vp ua = forcedView(E, a), ub = forcedView(E, b);
    if (ua != a || ub != b) return convertible(E, d, ua, ub);
    return false;
  }
  switch (a->tag) {
    case Vt::Univ:
      if (a->top != b->top) return false;
      return a->top || levelEq(forceLevel(E, a->level), forceLevel(E, b->level));
    case Vt::LevelVal:
      return levelEq(forceLevel(E, a->level), forceLevel(E, b->level));
    case Vt::LevelT:
    case Vt::Refl:
    case Vt::Unit:
    case Vt::TT:
    case Vt::Empty:
    case Vt::Bool:
    case Vt::True:
    case Vt::False:
      return true;
    case Vt::Id:
      return convertible(E, d, a->v1, b->v1) && convertible(E, d, a->v2, b->v2) &&
             convertible(E, d, a->v3, b->v3);
    case Vt::Flat:
      return levelEq(forceLevel(E, a->level), forceLevel(E, b->level)) &&
             convertible(E, d, a->v1, b->v1);
    case Vt::Con:
      return convertible(E, d, a->v1, b->v1);
    case Vt::Pi: {
      if (a->implicit_ != b->implicit_ || a->crisp != b->crisp) return false;
      if (!convertible(E, d, a->v1, b->v1)) return false;
      Vp fresh = vVar(d);
      return convertible(E, d + 1, evalClosure(E, a->cl, fresh), evalClosure(E, b->cl, fresh));
    }
    case Vt::Sigma: {
      if (!convertible(E, d, a->v1, b->v1)) return false;
      Vp fresh = vVar(d);
      return convertible(E, d + 1, evalClosure(E, a->cl, fresh), evalClosure(E, b->cl, fresh));
    }
    case Vt::Neutral:
      return convNeutral(E, d, a, b);
    default:
      return false;
  }
}

// --- scanning -----------------------------------------------------------------

namespace {

constexpr int kScanBase = 1 << 20;

bool scanLevel(const VLevel& l, int lo, int hi) {
  for (auto& a : l.atoms)
    if (!a.isMeta && a.id >= lo && a.id < hi) return true;
  return false;
}

bool scanVal(ECtx& E, const Vp& v0, int lo, int hi, int scratch) {
  Vp v = whnf(E, v0);
  auto scanClosure = [&](const Closure& cl) {
    return scanVal(E, evalClosure(E, const_cast<Closure&>(cl), vVar(scratch)), lo, hi, scratch + 1);
  };
  switch (v->tag) {
    case Vt::Pi:
    case Vt::Sigma:
      return scanVal(E, v->v1, lo, hi, scratch) || scanClosure(v->cl);
    case Vt::Lam:
      return scanClosure(v->cl);
    case Vt::Pair:
      return scanVal(E, v->v1, lo, hi, scratch) || scanVal(E, v->v2, lo, hi, scratch);
    case Vt::Univ:
    case Vt::LevelVal:
      return scanLevel(forceLevel(E, v->level), lo, hi);
    case Vt::Id:
      return scanVal(E, v->v1, lo, hi, scratch) || scanVal(E, v->v2, lo, hi, scratch) ||
             scanVal(E, v->v3, lo, hi, scratch);
    case Vt::Flat:
      return scanLevel(forceLevel(E, v->level), lo, hi) || scanVal(E, v->v1, lo, hi, scratch);
    case Vt::Con:
      return scanVal(E, v->v1, lo, hi, scratch);
    case Vt::Neutral: {
      if (v->head.k == Head::Var && v->head.id >= lo && v->head.id < hi) return true;
      for (const Elim& e : v->spine) {
        switch (e.k) {
          case Elim::App:
            if (scanVal(E, e.arg, lo, hi, scratch)) return true;
            break;
          case Elim::Fst:
          case Elim::Snd:
            break;
          case Elim::J:
            if (scanVal(E, e.motive, lo, hi, scratch) || scanVal(E, e.base, lo, hi, scratch))
              return true;
            break;
          case Elim::BElim:
            if (scanVal(E, e.motive, lo, hi, scratch) || scanVal(E, e.base, lo, hi, scratch) ||
                scanVal(E, e.arg, lo, hi, scratch))
              return true;
            break;
          case Elim::FElim:
            if (scanVal(E, e.motive, lo, hi, scratch) || scanClosure(e.branch)) return true;
            break;
          case Elim::Absurd:
            if (scanVal(E, e.motive, lo, hi, scratch)) return true;
            break;
        }
      }
      return false;
    }
    default:
      return false;
  }
}

}  // namespace

bool mentionsVarRange(ECtx& E, const Vp& v, int lo, int hi) {
  return scanVal(E, v, lo, hi, kScanBase);
}

TermPtr normalizeClosed(ECtx& E, const TermPtr& t) {
  bool saved = E.deepUnfold;
  E.deepUnfold = true;
  TermPtr out;
  try {
    out = readback(E, 0, evaluate(E, t, nullptr));
  } catch (...) {
    E.deepUnfold = saved;
    throw;
  }
  E.deepUnfold = saved;
  return out;
}

}  // namespace cohtt
