#include "cohtt/rewrite.hpp"

#include <algorithm>
#include <functional>

namespace cohtt {

std::shared_ptr<Pat> pmk(Pat::K k) {
  auto p = std::make_shared<Pat>();
  p->k = k;
  return p;
}

// --- compilation -------------------------------------------------------------

namespace {

// Does t mention any telescope variable (index >= bdepth)?
bool mentionsTelescope(const TermPtr& t, int bdepth) {
  if (!t) return false;
  if (t->tag == Tm::Var) return t->idx >= bdepth;
  // Children under binders raise the cutoff by one.
  int da = 0, db = 0, dc = 0;
  switch (t->tag) {
    case Tm::Pi: case Tm::Sigma: db = 1; break;
    case Tm::Lam: da = 1; break;
    case Tm::FlatElim: dc = 1; break;
    default: break;
  }
  return mentionsTelescope(t->a, bdepth + da) || mentionsTelescope(t->b, bdepth + db) ||
         mentionsTelescope(t->c, bdepth + dc) || mentionsTelescope(t->d, bdepth);
}

struct RuleCompiler {
  const std::string& name;
  const SrcLoc& loc;
  int nvars;
  std::vector<bool> seen;

  // A non-pattern argument term: acceptable at the top level of the spine,
  // where it is rechecked by conversion after the pattern positions have
  // bound every rule variable.
  PatPtr deferred(const TermPtr& t, int bdepth) {
    if (bdepth > 0)
      fail(E_RULE_PATTERN, loc,
           "rule '" + name + "': non-pattern argument under a pattern lambda is not supported");
    auto p = pmk(Pat::Defer);
    p->rigid = t;
    return p;
  }

  PatPtr go(const TermPtr& t, int bdepth) {
    if (!mentionsTelescope(t, 0)) {
      // No free variables of any kind: compare the whole subterm by
      // conversion, so eta-expanded or reduced candidates still match.
      auto p = pmk(Pat::Rigid);
      p->rigid = t;
      return p;
    }
    switch (t->tag) {
      case Tm::Var: {
        if (t->idx < bdepth) {
          auto p = pmk(Pat::BVar);
          p->var = bdepth - 1 - t->idx;  // number binders outermost-first
          p->binders = bdepth;
          return p;
        }
        int slot = nvars - 1 - (t->idx - bdepth);
        auto p = pmk(seen[slot] ? Pat::Check : Pat::Flex);
        p->var = slot;
        p->binders = bdepth;
        seen[slot] = true;
        return p;
      }
      case Tm::App: {
        // Collect the application spine.
        std::vector<TermPtr> args;
        TermPtr h = t;
        while (h->tag == Tm::App) {
          args.push_back(h->b);
          h = h->a;
        }
        std::reverse(args.begin(), args.end());
        if (h->tag != Tm::Const) return deferred(t, bdepth);
        auto p = pmk(Pat::ConApp);
        p->con = h->name;
        for (auto& a : args) p->ps.push_back(go(a, bdepth));
        return p;
      }
      case Tm::Const: {
        auto p = pmk(Pat::ConApp);
        p->con = t->name;
        return p;
      }
      case Tm::Lam: {
        auto p = pmk(Pat::PLam);
        p->ps.push_back(go(t->a, bdepth + 1));
        return p;
      }
      case Tm::Refl: case Tm::TrueC: case Tm::FalseC: case Tm::TT: case Tm::LZero: {
        auto p = pmk(Pat::Prim);
        p->prim = t->tag;
        return p;
      }
      default:
        return deferred(t, bdepth);
    }
  }
};

}  // namespace

RewriteRule compileRule(ECtx& E, const std::string& declName, const TermPtr& declType,
                        const SrcLoc& loc) {
  // Peel the Pi telescope.
  TermPtr t = declType;
  int nvars = 0;
  while (t->tag == Tm::Pi) {
    t = t->b;
    ++nvars;
  }
  if (t->tag != Tm::Id)
    fail(E_RULE_TYPE, loc,
         "rule '" + declName + "': type must be an identity type under a Pi telescope");
  TermPtr lhs = t->b, rhs = t->c;

  // The left side must be a (possibly empty) application of a signature
  // constant.
  TermPtr h = lhs;
  std::vector<TermPtr> args;
  while (h->tag == Tm::App) {
    args.push_back(h->b);
    h = h->a;
  }
  std::reverse(args.begin(), args.end());
  if (h->tag != Tm::Const)
    fail(E_RULE_HEAD, loc,
         "rule '" + declName + "': left side must be headed by a signature constant");
  const Decl* hd = E.sig->find(h->name);
  if (!hd || (hd->kind != Decl::Def && hd->kind != Decl::Postulate))
    fail(E_RULE_HEAD, loc, "rule '" + declName + "': unknown head constant '" + h->name + "'");

  RewriteRule r;
  r.name = declName;
  r.head = h->name;
  r.nvars = nvars;
  r.lhs = lhs;
  r.rhs = rhs;
  r.loc = loc;
  RuleCompiler rc{declName, loc, nvars, std::vector<bool>(nvars, false)};
  for (auto& a : args) r.args.push_back(rc.go(a, 0));

  // Right side variables are automatically within the telescope; check that
  // every rule variable is actually bound by the left side, so matching
  // determines the replacement.
  for (int i = 0; i < nvars; ++i)
    if (!rc.seen[i] && usesVar(rhs, nvars - 1 - i))
      fail(E_RULE_PATTERN, loc,
           "rule '" + declName + "': right side uses a variable the left side does not bind");

  // Deferred arguments are instantiated after matching, so each variable they
  // use must be bound by some genuine pattern position.
  std::function<void(const PatPtr&)> checkDefer = [&](const PatPtr& p) {
    if (p->k == Pat::Defer) {
      for (int i = 0; i < nvars; ++i)
        if (!rc.seen[i] && usesVar(p->rigid, nvars - 1 - i))
          fail(E_RULE_PATTERN, loc,
               "rule '" + declName +
                   "': a non-pattern argument uses a variable no pattern position binds");
    }
    for (auto& q : p->ps) checkDefer(q);
  };
  for (auto& p : r.args) checkDefer(p);
  return r;
}

// --- matching ----------------------------------------------------------------

namespace {

constexpr int kMatchDepth = 1 << 21;

struct Matcher {
  ECtx& E;
  const RewriteRule& rule;
  std::vector<Vp> bound;
  std::vector<std::pair<TermPtr, Vp>> deferred;
  int nFresh = 0;

  explicit Matcher(ECtx& e, const RewriteRule& r) : E(e), rule(r), bound(r.nvars) {}

  bool matchPat(const PatPtr& p, const Vp& v) {
    switch (p->k) {
      case Pat::Flex: {
        if (p->binders > 0 && mentionsVarRange(E, v, kMatchDepth, kMatchDepth + nFresh))
          return false;  // candidate would capture a pattern-lambda variable
        bound[p->var] = v;
        return true;
      }
      case Pat::Check:
        return bound[p->var] && convertible(E, kMatchDepth + nFresh, v, bound[p->var]);
      case Pat::ConApp: {
        Vp w = whnf(E, v);
        // A defined constant may hide the wanted head; follow unfoldings.
        while (w->tag == Vt::Neutral &&
               !(w->head.k == Head::Const && w->head.name == p->con) && w->unfold)
          w = whnf(E, w->unfold->force(E));
        if (w->tag != Vt::Neutral || w->head.k != Head::Const || w->head.name != p->con)
          return false;
        if (w->spine.size() != p->ps.size()) return false;
        for (size_t i = 0; i < p->ps.size(); ++i) {
          if (w->spine[i].k != Elim::App) return false;
          if (!matchPat(p->ps[i], w->spine[i].arg)) return false;
        }
        return true;
      }
      case Pat::Prim: {
        Vp w = whnf(E, v);
        while (w->tag == Vt::Neutral && w->unfold) w = whnf(E, w->unfold->force(E));
        switch (p->prim) {
          case Tm::Refl: return w->tag == Vt::Refl;
          case Tm::TrueC: return w->tag == Vt::True;
          case Tm::FalseC: return w->tag == Vt::False;
          case Tm::TT: return w->tag == Vt::TT;
          case Tm::LZero: return w->tag == Vt::LevelVal && forceLevel(E, w->level).isConst(0);
          default: return false;
        }
      }
      case Pat::PLam: {
        Vp w = whnf(E, v);
        Vp fresh = vVar(kMatchDepth + nFresh);
        ++nFresh;
        bool ok;
        if (w->tag == Vt::Lam)
          ok = matchPat(p->ps[0], evalClosure(E, w->cl, fresh));
        else if (w->tag == Vt::Neutral)
          ok = matchPat(p->ps[0], applyVal(E, w, fresh));
        else
          ok = false;
        --nFresh;
        return ok;
      }
      case Pat::Rigid:
        return convertible(E, kMatchDepth + nFresh, v, evaluate(E, p->rigid, nullptr));
      case Pat::BVar: {
        Vp w = whnf(E, v);
        while (w->tag == Vt::Neutral && w->head.k != Head::Var && w->unfold)
          w = whnf(E, w->unfold->force(E));
        return w->tag == Vt::Neutral && w->head.k == Head::Var &&
               w->head.id == kMatchDepth + p->var && w->spine.empty();
      }
      case Pat::Defer:
        deferred.emplace_back(p->rigid, v);
        return true;
    }
    return false;
  }

  bool run(const std::vector<Elim>& spine) {
    for (size_t i = 0; i < rule.args.size(); ++i)
      if (!matchPat(rule.args[i], spine[i].arg)) return false;
    if (!deferred.empty()) {
      Env env = nullptr;
      for (auto& b : bound) env = envPush(env, b ? b : vmk(Vt::TT));
      for (auto& [t, v] : deferred)
        if (!convertible(E, kMatchDepth, v, evaluate(E, t, env))) return false;
    }
    return true;
  }
};

}  // namespace

Vp tryRewrite(ECtx& E, const std::string& head, const std::vector<Elim>& spine) {
  if (E.noRewrite || !E.sig) return nullptr;
  const std::vector<int>* idxs = E.sig->rulesFor(head);
  if (!idxs) return nullptr;
  for (const Elim& e : spine)
    if (e.k != Elim::App) return nullptr;
  for (int ri : *idxs) {
    const RewriteRule& r = E.sig->rules[ri];
    if (r.args.size() != spine.size()) continue;
    Matcher m(E, r);
    if (!m.run(spine)) continue;

    if (++E.fired > E.budget)
      fail(E_BUDGET, E.loc,
           "rewrite budget exceeded after " + std::to_string(E.fired - 1) +
               " firings (last rule '" + r.name + "')");

    if (E.matchCheck && E.matchLog) {
      bool saved = E.noRewrite;
      E.noRewrite = true;
      Env env = nullptr;
      for (auto& b : m.bound) env = envPush(env, b ? b : vmk(Vt::TT));
      Vp instance = evaluate(E, r.lhs, env);
      Vp candidate = neutralFrom({Head::Const, 0, head}, spine);
      if (!convertible(E, kMatchDepth, instance, candidate))
        E.matchLog->push_back("rule '" + r.name +
                              "': matched instance is not convertible with its pattern");
      E.noRewrite = saved;
    }

    Env env = nullptr;
    for (auto& b : m.bound) env = envPush(env, b ? b : vmk(Vt::TT));
    return evaluate(E, r.rhs, env);
  }
  return nullptr;
}

// --- overlap report ------------------------------------------------------------

namespace {

// A key identifying the rigid head a pattern insists on; empty when unknown
// or flexible.
std::string rigidKey(const PatPtr& p) {
  switch (p->k) {
    case Pat::ConApp: return "c:" + p->con;
    case Pat::Prim:
      switch (p->prim) {
        case Tm::Refl: return "#refl";
        case Tm::TrueC: return "#true";
        case Tm::FalseC: return "#false";
        case Tm::TT: return "#tt";
        case Tm::LZero: return "#lzero";
        default: return "";
      }
    case Pat::Rigid: {
      TermPtr h = p->rigid;
      while (h && h->tag == Tm::App) h = h->a;
      if (!h) return "";
      switch (h->tag) {
        case Tm::Const: return "c:" + h->name;
        case Tm::Refl: return "#refl";
        case Tm::TrueC: return "#true";
        case Tm::FalseC: return "#false";
        case Tm::TT: return "#tt";
        case Tm::LZero: return "#lzero";
        default: return "";  // lambdas and other forms: no stable head
      }
    }
    default: return "";
  }
}

bool patsCompatible(const PatPtr& a, const PatPtr& b) {
  if (a->k == Pat::Flex || a->k == Pat::Check || a->k == Pat::Defer) return true;
  if (b->k == Pat::Flex || b->k == Pat::Check || b->k == Pat::Defer) return true;
  if (a->k == Pat::BVar || b->k == Pat::BVar) {
    if (a->k == Pat::BVar && b->k == Pat::BVar) return a->var == b->var;
    return false;  // a pattern-lambda variable never equals a rigid form
  }
  std::string ka = rigidKey(a), kb = rigidKey(b);
  if (!ka.empty() && !kb.empty() && ka != kb) return false;
  if (a->k == Pat::PLam || b->k == Pat::PLam) {
    if (a->k == Pat::PLam && b->k == Pat::PLam) return patsCompatible(a->ps[0], b->ps[0]);
    return true;  // eta can expose a lambda against any stuck form
  }
  if (a->k == Pat::Prim && b->k == Pat::Prim) return a->prim == b->prim;
  if (a->k == Pat::ConApp && b->k == Pat::ConApp) {
    if (a->con != b->con || a->ps.size() != b->ps.size()) return false;
    for (size_t i = 0; i < a->ps.size(); ++i)
      if (!patsCompatible(a->ps[i], b->ps[i])) return false;
    return true;
  }
  return true;  // remaining mixed rigid forms: compared conservatively
}

}  // namespace

std::vector<std::string> overlapReport(const Signature& sig) {
  std::vector<std::string> out;
  for (size_t i = 0; i < sig.rules.size(); ++i) {
    for (size_t j = i + 1; j < sig.rules.size(); ++j) {
      const RewriteRule &a = sig.rules[i], &b = sig.rules[j];
      if (a.head != b.head || a.args.size() != b.args.size()) continue;
      bool ok = true;
      for (size_t k = 0; ok && k < a.args.size(); ++k)
        ok = patsCompatible(a.args[k], b.args[k]);
      if (ok) out.push_back("overlap: " + a.name + " ~ " + b.name + " @ " + a.head);
    }
  }
  return out;
}

}  // namespace cohtt
