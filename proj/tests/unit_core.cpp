#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "cohtt/corpus.hpp"
#include "cohtt/printer.hpp"
#include "cohtt/surface.hpp"
#include "cohtt/term.hpp"
#include "cohtt/value.hpp"
#include "testutil.hpp"

using namespace cohtt;
using testutil::errorOf;

// --- universe levels ---------------------------------------------------------

namespace {

// Unnormalized level expression, evaluated directly as the reference
// semantics for the max-plus normal form.
struct LExpr {
  enum K { Const, Var, Suc, Max } k;
  unsigned c = 0;
  int v = 0;
  std::shared_ptr<LExpr> a, b;
};
using LPtr = std::shared_ptr<LExpr>;

LPtr lconst(unsigned c) {
  auto e = std::make_shared<LExpr>();
  e->k = LExpr::Const;
  e->c = c;
  return e;
}
LPtr lvar(int v) {
  auto e = std::make_shared<LExpr>();
  e->k = LExpr::Var;
  e->v = v;
  return e;
}
LPtr lsuc(LPtr a) {
  auto e = std::make_shared<LExpr>();
  e->k = LExpr::Suc;
  e->a = std::move(a);
  return e;
}
LPtr lmax(LPtr a, LPtr b) {
  auto e = std::make_shared<LExpr>();
  e->k = LExpr::Max;
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

unsigned evalAt(const LPtr& e, const std::vector<unsigned>& vals) {
  switch (e->k) {
    case LExpr::Const: return e->c;
    case LExpr::Var: return vals[e->v];
    case LExpr::Suc: return evalAt(e->a, vals) + 1;
    case LExpr::Max: return std::max(evalAt(e->a, vals), evalAt(e->b, vals));
  }
  return 0;
}

VLevel toLevel(const LPtr& e) {
  switch (e->k) {
    case LExpr::Const: return VLevel::constant(e->c);
    case LExpr::Var: return VLevel::var(e->v);
    case LExpr::Suc: return lsucL(toLevel(e->a));
    case LExpr::Max: return lmaxL(toLevel(e->a), toLevel(e->b));
  }
  return VLevel::constant(0);
}

LPtr randLExpr(std::mt19937& rng, int depth) {
  switch (rng() % (depth > 0 ? 4u : 2u)) {
    case 0: return lconst(rng() % 3);
    case 1: return lvar(static_cast<int>(rng() % 2));
    case 2: return lsuc(randLExpr(rng, depth - 1));
    default: return lmax(randLExpr(rng, depth - 1), randLExpr(rng, depth - 1));
  }
}

// Does the expression's meaning under every valuation of the two variables
// match on both sides? Values up to 8 exceed every constant and offset a
// depth-3 expression can build, so distinct normal forms always separate.
bool sameMeaning(const LPtr& x, const LPtr& y) {
  for (unsigned v0 : {0u, 1u, 4u, 8u})
    for (unsigned v1 : {0u, 1u, 4u, 8u})
      if (evalAt(x, {v0, v1}) != evalAt(y, {v0, v1})) return false;
  return true;
}

}  // namespace

TEST_CASE("level normal forms: directed examples") {
  // max(lzero, lsuc lzero) collapses to the constant 1
  CHECK(levelEq(lmaxL(VLevel::constant(0), lsucL(VLevel::constant(0))), VLevel::constant(1)));
  // max is idempotent on atoms
  CHECK(levelEq(lmaxL(VLevel::var(0), VLevel::var(0)), VLevel::var(0)));
  // lzero is a unit for max
  CHECK(levelEq(VLevel::var(0), lmaxL(VLevel::var(0), VLevel::constant(0))));
  // a variable differs from its successor (valuation 0 separates them)
  CHECK_FALSE(levelEq(VLevel::var(0), lsucL(VLevel::var(0))));
  // suc distributes over max
  CHECK(levelEq(lsucL(lmaxL(VLevel::var(0), VLevel::var(1))),
                lmaxL(lsucL(VLevel::var(0)), lsucL(VLevel::var(1)))));
}

TEST_CASE("level equality agrees with exhaustive valuation semantics") {
  std::mt19937 rng(20240811);
  for (int i = 0; i < 400; ++i) {
    LPtr x = randLExpr(rng, 3), y = randLExpr(rng, 3);
    CHECK(levelEq(toLevel(x), toLevel(y)) == sameMeaning(x, y));
  }
}

TEST_CASE("level normalization is canonical and idempotent") {
  std::mt19937 rng(7);
  for (int i = 0; i < 200; ++i) {
    VLevel l = toLevel(randLExpr(rng, 3));
    CHECK(levelEq(lmaxL(l, l), l));
    CHECK(levelEq(lmaxL(l, VLevel::constant(0)), l));
    // re-normalizing atom by atom reproduces the same form
    VLevel rebuilt = VLevel::constant(l.k);
    for (auto& a : l.atoms) {
      VLevel atom = a.isMeta ? VLevel::meta(a.id, a.off) : VLevel::var(a.id, a.off);
      rebuilt = lmaxL(rebuilt, atom);
    }
    CHECK(levelEq(rebuilt, l));
  }
}

TEST_CASE("level equality is an equivalence relation") {
  std::mt19937 rng(99);
  std::vector<VLevel> ls;
  for (int i = 0; i < 24; ++i) ls.push_back(toLevel(randLExpr(rng, 3)));
  for (auto& a : ls) CHECK(levelEq(a, a));
  for (auto& a : ls)
    for (auto& b : ls) CHECK(levelEq(a, b) == levelEq(b, a));
  for (auto& a : ls)
    for (auto& b : ls) {
      if (!levelEq(a, b)) continue;
      for (auto& c : ls)
        if (levelEq(b, c)) CHECK(levelEq(a, c));
    }
}

// --- substitution ------------------------------------------------------------

namespace {

TermPtr randTerm(std::mt19937& rng, int scope, int depth) {
  switch (rng() % (depth > 0 ? 9u : 3u)) {
    case 0: return mk(Tm::TT);
    case 1: return mk(Tm::TrueC);
    case 2: return scope > 0 ? mkVar(static_cast<int>(rng() % scope)) : mk(Tm::FalseC);
    case 3: return mkLam("x", false, false, randTerm(rng, scope + 1, depth - 1));
    case 4: return mkApp(randTerm(rng, scope, depth - 1), randTerm(rng, scope, depth - 1));
    case 5: return mkPair(randTerm(rng, scope, depth - 1), randTerm(rng, scope, depth - 1));
    case 6:
      return mkPi("p", false, false, randTerm(rng, scope, depth - 1),
                  randTerm(rng, scope + 1, depth - 1));
    case 7: return mkFst(randTerm(rng, scope, depth - 1));
    default:
      return mkId(randTerm(rng, scope, depth - 1), randTerm(rng, scope, depth - 1),
                  randTerm(rng, scope, depth - 1));
  }
}

}  // namespace

TEST_CASE("substitution: directed examples") {
  // Var 0 under [0 := tt]
  CHECK(alphaEq(instantiate(mkVar(0), 0, mk(Tm::TT)), mk(Tm::TT)));
  // under a binder the substituted index is offset by one
  TermPtr lam = mkLam("x", false, false, mkVar(1));
  CHECK(alphaEq(instantiate(lam, 0, mk(Tm::TT)), mkLam("x", false, false, mk(Tm::TT))));
  // a bound variable is untouched
  TermPtr id = mkLam("x", false, false, mkVar(0));
  CHECK(alphaEq(instantiate(id, 0, mk(Tm::TT)), id));
}

TEST_CASE("substitution composition law on random well-scoped terms") {
  std::mt19937 rng(20240812);
  for (int i = 0; i < 1000; ++i) {
    int j = static_cast<int>(rng() % 3);
    TermPtr t = randTerm(rng, j + 3, 4);
    TermPtr s = randTerm(rng, j + 2, 3);
    TermPtr u = randTerm(rng, j + 1, 3);
    TermPtr lhs = instantiate(instantiate(t, 0, s), j, u);
    TermPtr rhs = instantiate(instantiate(t, j + 1, shiftTerm(u, 1)), 0, instantiate(s, j, u));
    CHECK(alphaEq(lhs, rhs));
  }
}

TEST_CASE("shift then substitute cancels") {
  std::mt19937 rng(4242);
  for (int i = 0; i < 400; ++i) {
    TermPtr t = randTerm(rng, 3, 4);
    TermPtr s = randTerm(rng, 3, 3);
    CHECK(alphaEq(instantiate(shiftTerm(t, 1), 0, s), t));
    CHECK(alphaEq(shiftTerm(t, 0), t));
    CHECK(alphaEq(shiftAbove(shiftAbove(t, 0, 1), 0, 1), shiftAbove(t, 0, 2)));
  }
}

TEST_CASE("alpha equality ignores binder names") {
  CHECK(alphaEq(mkLam("x", false, false, mkVar(0)), mkLam("y", false, false, mkVar(0))));
  CHECK_FALSE(alphaEq(mkLam("x", false, false, mkVar(0)), mkLam("x", false, false, mk(Tm::TT))));
  CHECK(alphaEq(mkPi("A", true, false, mk(Tm::Bool), mkVar(0)),
                mkPi("B", true, false, mk(Tm::Bool), mkVar(0))));
  // flags are significant even when names are not
  CHECK_FALSE(alphaEq(mkPi("A", true, false, mk(Tm::Bool), mkVar(0)),
                      mkPi("A", false, false, mk(Tm::Bool), mkVar(0))));
}

TEST_CASE("usesVar sees through binders") {
  CHECK(usesVar(mkLam("x", false, false, mkVar(1)), 0));
  CHECK_FALSE(usesVar(mkLam("x", false, false, mkVar(0)), 0));
  CHECK(usesVar(mkApp(mkVar(2), mk(Tm::TT)), 2));
}

// --- lexing and parsing ------------------------------------------------------

TEST_CASE("tokenizer: declarations, nested comments, error cases") {
  auto ds = parseFile("def x : Unit := tt", "<t>");
  REQUIRE(ds.size() == 1);
  CHECK(ds[0].k == SDecl::Def);
  CHECK(ds[0].name == "x");

  ds = parseFile("{- {- nested -} -} postulate P : Set lzero", "<t>");
  REQUIRE(ds.size() == 1);
  CHECK(ds[0].k == SDecl::Postulate);
  CHECK(ds[0].name == "P");

  auto glyph = errorOf([] { parseTerm("\xce\xbb x. x", "<t>"); });
  REQUIRE(glyph);
  CHECK(glyph->code == E_LEX_CHAR);
  CHECK(glyph->loc.line == 1);
  CHECK(glyph->loc.col == 1);

  auto comment = errorOf([] { (void)parseFile("{- {- nested -}", "<t>"); });
  REQUIRE(comment);
  CHECK(comment->code == E_LEX_COMMENT);
}

TEST_CASE("parser: structure of binders, arrows, applications") {
  SPtr t = parseTerm("(A : Set lzero) -> A -> A", "<t>");
  REQUIRE(t->tag == St::Pi);
  CHECK(t->name == "A");
  REQUIRE(t->b->tag == St::Pi);
  CHECK(t->b->a->tag == St::Name);
  CHECK(t->b->b->tag == St::Name);

  // a parenthesized function type on the left of an arrow is a domain,
  // not a finished type
  t = parseTerm("(A -> A) -> A", "<t>");
  REQUIRE(t->tag == St::Pi);
  CHECK(t->a->tag == St::Pi);
  CHECK(t->b->tag == St::Name);

  // arrows associate right
  t = parseTerm("Bool -> Unit -> Bool", "<t>");
  REQUIRE(t->tag == St::Pi);
  CHECK(t->a->tag == St::Bool);
  REQUIRE(t->b->tag == St::Pi);

  // application associates left and binds tighter than arrows
  t = parseTerm("f x y", "<t>");
  REQUIRE(t->tag == St::App);
  CHECK(t->b->name == "y");
  REQUIRE(t->a->tag == St::App);
  CHECK(t->a->a->name == "f");
  CHECK(t->a->b->name == "x");

  t = parseTerm("F x -> G y", "<t>");
  REQUIRE(t->tag == St::Pi);
  CHECK(t->a->tag == St::App);
  CHECK(t->b->tag == St::App);

  // named and positional implicit arguments
  t = parseTerm("f {B := Bool} true", "<t>");
  REQUIRE(t->tag == St::App);
  REQUIRE(t->a->tag == St::App);
  CHECK(t->a->implicit_);
  CHECK(t->a->name == "B");
  t = parseTerm("f {Bool}", "<t>");
  REQUIRE(t->tag == St::App);
  CHECK(t->implicit_);
  CHECK(t->name.empty());

  // crisp implicit binder
  t = parseTerm("{@flat l : Level} -> Set l", "<t>");
  REQUIRE(t->tag == St::Pi);
  CHECK(t->implicit_);
  CHECK(t->crisp);

  // dependent pair type sugar
  t = parseTerm("(x : Bool) * Bool", "<t>");
  REQUIRE(t->tag == St::Sigma);
  CHECK(t->name == "x");
}

TEST_CASE("parser: every error carries an in-bounds location") {
  const char* bad[] = {"", "def : Bool := true", "f )", "(x : Bool", "\\. x", "postulate"};
  for (const char* src : bad) {
    auto e = errorOf([&] {
      if (std::string(src).rfind("def", 0) == 0 || std::string(src).rfind("post", 0) == 0)
        (void)parseFile(src, "<t>");
      else
        (void)parseTerm(src, "<t>");
    });
    REQUIRE(e);
    CHECK(e->code == E_PARSE);
    CHECK(e->loc.line >= 1);
    CHECK(e->loc.col >= 1);
  }
}

// --- printing round trips ----------------------------------------------------

TEST_CASE("printed definitions reparse and re-elaborate to the same print") {
  const Signature& sig = testutil::corpusSig();
  int n = 0;
  for (const Decl& d : sig.decls) {
    if (d.kind != Decl::Def) continue;
    std::string sty = printTerm(d.type);
    std::string sb = printTerm(d.body);
    std::string nm = "__rt_" + std::to_string(n++);
    Signature sig2 = sig;
    checkSource(sig2, "def " + nm + " : " + sty + " := " + sb);
    const Decl* nd = sig2.find(nm);
    REQUIRE(nd != nullptr);
    CHECK(printTerm(nd->type) == sty);
    CHECK(printTerm(nd->body) == sb);
  }
  CHECK(n >= 40);
}

TEST_CASE("printed postulate types reparse and re-elaborate to the same print") {
  const Signature& sig = testutil::corpusSig();
  int n = 0;
  for (const Decl& d : sig.decls) {
    if (d.kind != Decl::Postulate) continue;
    std::string sty = printTerm(d.type);
    std::string nm = "__rp_" + std::to_string(n++);
    Signature sig2 = sig;
    checkSource(sig2, "postulate " + nm + " : " + sty);
    const Decl* nd = sig2.find(nm);
    REQUIRE(nd != nullptr);
    CHECK(printTerm(nd->type) == sty);
  }
  CHECK(n >= 35);
}
