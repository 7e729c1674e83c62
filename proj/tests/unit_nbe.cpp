#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "cohtt/corpus.hpp"
#include "cohtt/elab.hpp"
#include "cohtt/eval.hpp"
#include "cohtt/printer.hpp"
#include "cohtt/rewrite.hpp"
#include "testutil.hpp"

using namespace cohtt;
using testutil::errorOf;

// --- evaluation units --------------------------------------------------------

TEST_CASE("beta, pairs, and built-in eliminators compute") {
  Signature sig;
  ECtx E;
  E.sig = &sig;

  Vp v = whnf(E, evaluate(E, mkApp(mkLam("x", false, false, mkVar(0)), mk(Tm::TT)), nullptr));
  CHECK(v->tag == Vt::TT);

  v = whnf(E, evaluate(E, mkFst(mkPair(mk(Tm::TT), mk(Tm::TrueC))), nullptr));
  CHECK(v->tag == Vt::TT);
  v = whnf(E, evaluate(E, mkSnd(mkPair(mk(Tm::TT), mk(Tm::TrueC))), nullptr));
  CHECK(v->tag == Vt::True);

  // identity elimination on a literal reflexivity proof returns the base
  Vp motive = evaluate(E, mkLam("y", false, false, mkLam("q", false, false, mk(Tm::Bool))), nullptr);
  CHECK(doJ(E, motive, vmk(Vt::True), vmk(Vt::Refl))->tag == Vt::True);
  // ... and sticks on a variable proof
  Vp stuck = doJ(E, motive, vmk(Vt::True), vVar(0));
  REQUIRE(stuck->tag == Vt::Neutral);
  REQUIRE(stuck->spine.size() == 1);
  CHECK(stuck->spine[0].k == Elim::J);

  CHECK(doBoolElim(E, motive, vmk(Vt::TT), vmk(Vt::True), vmk(Vt::True))->tag == Vt::TT);
  CHECK(doBoolElim(E, motive, vmk(Vt::TT), vmk(Vt::True), vmk(Vt::False))->tag == Vt::True);

  // flat elimination projects the crisp body out of a box
  Vp box = vmk(Vt::Con);
  box->v1 = vmk(Vt::True);
  Closure branch{nullptr, mkVar(0)};
  CHECK(doFlatElim(E, motive, branch, box, "u", "w")->tag == Vt::True);
}

TEST_CASE("readback turns variable levels into the right indices") {
  Signature sig;
  ECtx E;
  E.sig = &sig;
  TermPtr t = readback(E, 2, vVar(0));
  REQUIRE(t->tag == Tm::Var);
  CHECK(t->idx == 1);
  t = readback(E, 2, vVar(1));
  CHECK(t->idx == 0);
  // a lambda value reads back with a fresh variable under the binder
  Vp lamv = evaluate(E, mkLam("x", false, false, mkVar(0)), nullptr);
  t = readback(E, 0, lamv);
  REQUIRE(t->tag == Tm::Lam);
  CHECK(t->a->tag == Tm::Var);
  CHECK(t->a->idx == 0);
}

TEST_CASE("glued evaluation: reducible calls unfold, stuck calls keep their name") {
  Signature sig;
  checkSource(sig,
              "postulate pb : Bool\n"
              "def notb : Bool -> Bool := \\b. boolElim (\\u. Bool) false true b\n"
              "def red : Bool := notb true\n"
              "def stuck : Bool := notb pb\n");
  CHECK(normalFormString(sig, "red") == "false");
  ECtx E;
  E.sig = &sig;
  Vp w = whnf(E, evaluate(E, mkConst("stuck"), nullptr));
  REQUIRE(w->tag == Vt::Neutral);
  CHECK(w->head.k == Head::Const);
  CHECK(w->head.name == "stuck");
}

// --- reference interpreter oracle for the boolean fragment --------------------

namespace {

// Closed terms of type Bool built from literals, lambda-bound booleans,
// immediate applications, projections of literal pairs, and boolElim with a
// constant motive. A direct environment-passing interpreter decides them.
TermPtr genB(std::mt19937& rng, int scope, int depth) {
  unsigned c = rng() % (depth > 0 ? 6u : 3u);
  switch (c) {
    case 0: return mk(Tm::TrueC);
    case 1: return mk(Tm::FalseC);
    case 2: return scope > 0 ? mkVar(static_cast<int>(rng() % scope)) : mk(Tm::TrueC);
    case 3:
      return mkBoolElim(mkLam("u", false, false, mk(Tm::Bool)), genB(rng, scope, depth - 1),
                        genB(rng, scope, depth - 1), genB(rng, scope, depth - 1));
    case 4:
      return mkApp(mkLam("x", false, false, genB(rng, scope + 1, depth - 1)),
                   genB(rng, scope, depth - 1));
    default: {
      TermPtr p = mkPair(genB(rng, scope, depth - 1), genB(rng, scope, depth - 1));
      return rng() % 2 ? mkFst(p) : mkSnd(p);
    }
  }
}

bool refEval(const TermPtr& t, std::vector<bool>& env) {
  switch (t->tag) {
    case Tm::TrueC: return true;
    case Tm::FalseC: return false;
    case Tm::Var: return env[env.size() - 1 - static_cast<size_t>(t->idx)];
    case Tm::BoolElim: return refEval(t->d, env) ? refEval(t->b, env) : refEval(t->c, env);
    case Tm::App: {
      bool arg = refEval(t->b, env);
      env.push_back(arg);
      bool r = refEval(t->a->a, env);
      env.pop_back();
      return r;
    }
    case Tm::Fst: return refEval(t->a->a, env);
    case Tm::Snd: return refEval(t->a->b, env);
    default: REQUIRE(false); return false;
  }
}

}  // namespace

TEST_CASE("normalization agrees with a direct interpreter on closed boolean terms") {
  Signature sig;
  std::mt19937 rng(20240813);
  for (int i = 0; i < 600; ++i) {
    TermPtr t = genB(rng, 0, 5);
    std::vector<bool> env;
    bool want = refEval(t, env);
    ECtx E;
    E.sig = &sig;
    TermPtr nf = normalizeClosed(E, t);
    CHECK(nf->tag == (want ? Tm::TrueC : Tm::FalseC));
    CHECK(alphaEq(normalizeClosed(E, nf), nf));
  }
}

TEST_CASE("normal forms of open boolean terms are stable under renormalization") {
  Signature sig;
  std::mt19937 rng(31337);
  for (int i = 0; i < 300; ++i) {
    TermPtr t = genB(rng, 2, 4);
    ECtx E;
    E.sig = &sig;
    Env env = envPush(envPush(nullptr, vVar(0)), vVar(1));
    TermPtr nf = readback(E, 2, evaluate(E, t, env));
    TermPtr nf2 = readback(E, 2, evaluate(E, nf, env));
    CHECK(alphaEq(nf, nf2));
  }
}

// --- conversion: eta laws ----------------------------------------------------

TEST_CASE("conversion applies function and pair eta, but not postulated path eta") {
  Signature sig = testutil::corpusSig();
  checkSource(sig,
              "postulate SP : (x : Bool) * Bool\n"
              "postulate F : Bool -> Bool\n"
              "def se : Id ((x : Bool) * Bool) SP (fst SP , snd SP) := refl\n"
              "def pe : Id (Bool -> Bool) F (\\x. F x) := refl\n");
  CHECK(sig.find("se") != nullptr);
  CHECK(sig.find("pe") != nullptr);

  Signature sig2 = testutil::corpusSig();
  auto e = errorOf([&] {
    checkSource(sig2,
                "postulate PF : Path (\\i. Bool) true true\n"
                "def bad : Id (Path (\\i. Bool) true true) (pabs (\\i. papp PF i)) PF := refl\n");
  });
  REQUIRE(e);
  CHECK(e->code == E_MISMATCH);
}

// --- rewrite rule compilation errors ------------------------------------------

TEST_CASE("rule declarations with unmatchable shapes are rejected with stable codes") {
  // left side headed by a projection, not a constant
  auto e = errorOf([] {
    Signature sig;
    checkSource(sig,
                "postulate SP : (x : Bool) * Bool\n"
                "postulate fb : fst SP = true : Bool\n"
                "rewrite fb\n");
  });
  REQUIRE(e);
  CHECK(e->code == E_RULE_HEAD);

  // left side headed by a rule variable
  e = errorOf([] {
    Signature sig;
    checkSource(sig,
                "postulate vr (f : Bool -> Bool) : f true = true : Bool\n"
                "rewrite vr\n");
  });
  REQUIRE(e);
  CHECK(e->code == E_RULE_HEAD);

  // non-pattern argument under a binder cannot be deferred
  e = errorOf([] {
    Signature sig;
    checkSource(sig,
                "postulate mh : (Bool -> Bool) -> Bool\n"
                "postulate mr (f : Bool -> Bool) (x : Bool) : mh (\\y. f x) = x : Bool\n"
                "rewrite mr\n");
  });
  REQUIRE(e);
  CHECK(e->code == E_RULE_PATTERN);

  // a deferred argument binds nothing, so the right side mentions an unbound variable
  e = errorOf([] {
    Signature sig;
    checkSource(sig,
                "postulate mh2 : Bool -> Bool\n"
                "postulate mr2 (f : Bool -> Bool) (x : Bool) : mh2 (f x) = x : Bool\n"
                "rewrite mr2\n");
  });
  REQUIRE(e);
  CHECK(e->code == E_RULE_PATTERN);

  // target type is not an identity type
  e = errorOf([] {
    Signature sig;
    checkSource(sig,
                "postulate ni : Bool\n"
                "rewrite ni\n");
  });
  REQUIRE(e);
  CHECK(e->code == E_RULE_TYPE);
}

// --- rewrite matching behavior -------------------------------------------------

TEST_CASE("matching under a binder refuses candidates that capture the bound variable") {
  Signature sig;
  checkSource(sig,
              "postulate hw : (Bool -> Bool) -> Bool\n"
              "postulate hr (b : Bool) : hw (\\x. b) = b : Bool\n"
              "rewrite hr\n"
              "def d1 : Bool := hw (\\x. true)\n"
              "def d2 : Bool := hw (\\x. x)\n");
  CHECK(normalFormString(sig, "d1") == "true");
  CHECK(normalFormString(sig, "d2") == "hw (\\x. x)");
}

TEST_CASE("overlapping rules fire in registration order") {
  const std::string decls =
      "postulate mc : Bool -> Bool\n"
      "postulate r1 (b : Bool) : mc b = true : Bool\n"
      "postulate r2 (b : Bool) : mc b = false : Bool\n";
  Signature sig;
  checkSource(sig, decls + "rewrite r1\nrewrite r2\ndef d : Bool := mc false\n");
  CHECK(normalFormString(sig, "d") == "true");
  Signature sig2;
  checkSource(sig2, decls + "rewrite r2\nrewrite r1\ndef d : Bool := mc false\n");
  CHECK(normalFormString(sig2, "d") == "false");
}

TEST_CASE("closed rule arguments match up to conversion, not syntax") {
  // the recursor rule for the successor case names `succ` itself; an
  // eta-expansion of it must still match
  Signature sig = testutil::corpusSig();
  checkSource(sig,
              "postulate nn : N\n"
              "def ep : N := recN nn N zero (\\k. succ k)\n");
  CHECK(normalFormString(sig, "ep") == "nn");
}

TEST_CASE("non-pattern arguments are deferred and checked by conversion") {
  Signature sig = testutil::corpusSig();
  checkSource(sig, "def dp : Bool := papp {lzero} (pabs (\\i. true)) i0\n");
  CHECK(normalFormString(sig, "dp") == "true");
}

TEST_CASE("a rule with a structured scrutinee fires exactly on matching instances") {
  Signature sig = testutil::corpusSig();
  checkSource(sig,
              "postulate X : Set lzero\n"
              "postulate x0 : X\n"
              "postulate lx : Id X x0 x0\n"
              "def lp1 : Id X x0 x0 := ap (\\s. recS1 s X x0 lx) loop\n"
              "def lp2 : Id X x0 x0 := ap (\\s. recS1 base X x0 lx) loop\n");
  CHECK(normalFormString(sig, "lp1") == "lx");
  std::string nf2 = normalFormString(sig, "lp2");
  CHECK(nf2 != "lx");
  CHECK(nf2 == "ap {lzero} {lzero} {S1} {X} {base} {base} (\\s. x0) loop");
}

// --- rewrite budget ------------------------------------------------------------

TEST_CASE("the firing budget stops runaway rewriting with a stable code") {
  Signature sig = testutil::corpusSig();
  auto e = errorOf([&] { (void)normalFormString(sig, "four", 1); });
  REQUIRE(e);
  CHECK(e->code == E_BUDGET);
  // a small but sufficient budget still checks the whole corpus
  Signature sig2;
  CorpusOptions opt;
  opt.budget = 50;
  CorpusReport rep = checkCorpus(sig2, opt);
  CHECK(rep.decls > 0);
}
