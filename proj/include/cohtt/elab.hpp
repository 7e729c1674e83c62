#pragma once

// Elaboration of surface declarations into the core language, and an
// independent kernel checker for the (zonked, meta-free) output.
//
// Elaboration is bidirectional. Implicit arguments become contextual
// metavariables applied to the whole context prefix; solving is first-order
// pattern unification, with two pragmatic extras: non-pattern equations are
// postponed and retried after each solve, and solving a meta propagates the
// solution's synthesized type into the meta's recorded type (which is what
// determines most level metas).
//
// The crisp-variable discipline uses a single context with per-entry crisp
// flags and a restriction mark: inside a crisp position (Flat formation, con,
// crisp Pi domains, arguments to crisp Pis) only entries that are crisp,
// discrete built-ins, or bound inside the restriction are usable.

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cohtt/eval.hpp"
#include "cohtt/signature.hpp"
#include "cohtt/surface.hpp"

namespace cohtt {

struct Sort {
  bool top = false;
  VLevel l;
};

struct ElabOptions {
  long long budget = kDefaultBudget;
  bool matchCheck = false;    // record match-soundness violations
  bool kernelRecheck = true;  // re-check every declaration with the kernel
};

class Elaborator {
 public:
  Elaborator(Signature& sig, ElabOptions opt = {});

  void processDecl(const SDecl& d);

  // Normal form of a defined constant (post-elaboration).
  TermPtr normalizeConst(const std::string& name, const SrcLoc& loc);

  Signature& sig;
  MetaState metas;
  ECtx E;
  ElabOptions opt;
  std::vector<std::string> matchLog;

 private:
  struct Entry {
    std::string name;
    Vp type;
    bool crisp;
  };
  std::vector<Entry> entries;
  Env env;
  int restriction = 0;
  SrcLoc curLoc;
  long long solveCount = 0;
  std::unordered_map<std::string, Vp> ctypes;  // constant type values

  struct Constraint {
    Vp a, b;
    SrcLoc loc;
    int d = 0;  // depth at postponement (all free levels are below it)
  };
  std::vector<Constraint> pending;
  bool retrying = false;

  struct RestrictGuard {
    Elaborator& e;
    int saved;
    explicit RestrictGuard(Elaborator& el);
    ~RestrictGuard();
  };

  int depth() const { return static_cast<int>(entries.size()); }
  std::vector<std::string> ctxNames() const;
  void push(const std::string& name, Vp type, bool crisp);
  void pop();
  bool usableVar(int level);
  bool isDiscreteType(const Vp& ty);
  Vp constType(const std::string& name);
  std::string showSafe(const Vp& v);

  Vp evalHere(const TermPtr& t) { return evaluate(E, t, env); }
  TermPtr rb(const Vp& v) { return readback(E, depth(), v); }

  // Unification (solving).
  struct UnifyFail {
    Vp a, b;
    bool levels = false;
  };
  void unify(int d, const Vp& a, const Vp& b);
  void unifyLevels(const VLevel& a, const VLevel& b);
  void unifyLevelsOr(int d, const VLevel& a, const VLevel& b);
  void unifySpines(int d, const Value& a, const Value& b);
  bool solveFromSpine(const Vp& metaSide, const Vp& rhs);
  void solveMeta(int mid, const Vp& rhs, int extra = 0,
                 const std::vector<bool>* extraImplicit = nullptr);
  void solveLevelMeta(int mid, const VLevel& rhs);
  void retryPending();
  void flushPending();
  [[noreturn]] void mismatch(const SrcLoc& loc, const UnifyFail& f, const std::string& context);
  void unifyOr(const SrcLoc& loc, const Vp& found, const Vp& expected, const std::string& context);

  // Metas.
  TermPtr freshMeta(Vp type, const std::string& hint, const SrcLoc& loc, bool crispPos,
                    bool isLevel);
  Vp metaValue(int mid);

  // Type synthesis for values (partial; used to propagate solution types).
  Vp synthType(int d, const Vp& v);
  Vp typeOfNeutral(int d, const Value& n);
  std::optional<Sort> sortOfType(int d, const Vp& ty);

  // Bidirectional elaboration.
  std::pair<TermPtr, Vp> infer(const SPtr& s);
  TermPtr check(const SPtr& s, const Vp& ty);
  std::pair<TermPtr, Sort> isType(const SPtr& s);
  std::pair<TermPtr, Vp> insertImplicits(TermPtr t, Vp ty, const SrcLoc& loc);

  // Zonking.
  TermPtr zonk(const TermPtr& t, int d);
  void ensureAllSolved();
};

// Kernel re-checking of meta-free core terms. Throws on failure.
void kernelCheckDecl(const Signature& sig, const TermPtr& type, const TermPtr& body,
                     long long budget = kDefaultBudget);
void kernelCheckType(const Signature& sig, const TermPtr& type,
                     long long budget = kDefaultBudget);
// Kernel type inference for a closed core term (tests).
TermPtr kernelInferClosed(const Signature& sig, const TermPtr& t,
                          long long budget = kDefaultBudget);

}  // namespace cohtt
