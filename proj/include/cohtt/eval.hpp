#pragma once

// Evaluation, weak head normalization, readback, and (pure) conversion.
//
// All of these thread an ECtx carrying the signature, the metavariable store
// (when elaborating), and the rewrite budget. User rewrite rules fire each
// time a constant-headed neutral gains an argument; each firing counts
// against the budget.

#include "cohtt/signature.hpp"
#include "cohtt/term.hpp"
#include "cohtt/value.hpp"

namespace cohtt {

constexpr long long kDefaultBudget = 10'000'000;

struct ECtx {
  const Signature* sig = nullptr;
  MetaState* metas = nullptr;           // null in kernel-only passes
  long long budget = kDefaultBudget;
  long long fired = 0;                  // rewrite firings so far
  bool matchCheck = false;              // record match-soundness violations
  bool noRewrite = false;               // internal: used by the soundness check
  bool deepUnfold = false;              // full normalization: chase definitions
  std::vector<std::string>* matchLog = nullptr;
  SrcLoc loc;                           // best-effort location for budget errors
};

Vp evaluate(ECtx& E, const TermPtr& t, const Env& env);
Vp evalClosure(ECtx& E, const Closure& cl, Vp arg);
Vp applyVal(ECtx& E, const Vp& f, Vp arg, bool implicit_ = false);
Vp applyElim(ECtx& E, const Vp& v, const Elim& e);
Vp doFst(ECtx& E, const Vp& p);
Vp doSnd(ECtx& E, const Vp& p);
Vp doJ(ECtx& E, Vp motive, Vp base, const Vp& proof);
Vp doBoolElim(ECtx& E, Vp motive, Vp tcase, Vp fcase, const Vp& scrut);
Vp doFlatElim(ECtx& E, Vp motive, Closure branch, const Vp& scrut,
              std::string name, std::string name2);
Vp doAbsurd(ECtx& E, Vp motive, const Vp& scrut);

// Weak head normal form. Resolves solved metas; forces the unfolding of
// defined-constant neutrals, keeping the unfolded value only if it made
// progress (reached a non-neutral).
Vp whnf(ECtx& E, Vp v);

// Quote a value back to a term at the given binder depth.
TermPtr readback(ECtx& E, int depth, const Vp& v);

// Definitional equality (no meta solving; unsolved metas are rigid).
bool convertible(ECtx& E, int depth, const Vp& a, const Vp& b);

// Levels.
VLevel evalLevel(ECtx& E, const TermPtr& t, const Env& env);
VLevel forceLevel(ECtx& E, const VLevel& l);
VLevel valueToLevel(ECtx& E, const Vp& v);
TermPtr readbackLevel(int depth, const VLevel& l);

// Value of a top-level constant (glued for definitions).
Vp constValue(ECtx& E, const std::string& name);

// Build a neutral from a head and spine slice (no unfolding attached).
Vp neutralFrom(const Head& h, std::vector<Elim> spine);

// Convenience: evaluate then read back a closed term.
TermPtr normalizeClosed(ECtx& E, const TermPtr& t);

// Does the value mention any of the variable levels in [lo, hi)? Looks under
// closures by instantiating them at scratch levels.
bool mentionsVarRange(ECtx& E, const Vp& v, int lo, int hi);

}  // namespace cohtt
