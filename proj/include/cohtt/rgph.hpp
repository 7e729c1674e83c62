#pragma once

// Finite reflexive graphs and the discrete/codiscrete/points/components
// functors, with brute-force hom enumeration. Used to verify, at small finite
// scale, the adjunction string (components -| discrete -| points -| codiscrete)
// and the interval axioms (strict bipointedness, weak connectedness).

#include <string>
#include <vector>

#include "cohtt/errors.hpp"

namespace cohtt {

struct FinRGph {
  int n = 0;
  std::vector<std::vector<bool>> adj;  // n x n; diagonal always true (reflexive)

  static FinRGph make(int n);
  void addEdge(int u, int v);
  bool edge(int u, int v) const { return adj[u][v]; }
};

// Discrete graph: only self-loops.
FinRGph delta(int n);
// Codiscrete graph: every ordered pair is an edge.
FinRGph nabla(int n);
// Two vertices 0,1 and a single non-loop directed edge 0 -> 1.
FinRGph walkingEdge();
FinRGph disjointUnion(const FinRGph& a, const FinRGph& b);

// Vertex count (the points functor).
int gamma(const FinRGph& g);
// Weakly connected components (union-find over symmetrized edges).
int pi0(const FinRGph& g);
// Component label per vertex, numbered by first appearance (0..pi0-1).
std::vector<int> componentLabels(const FinRGph& g);

using VertexMap = std::vector<int>;  // image vertex per source vertex

constexpr long long kHomGuard = 10'000'000;

// All edge-preserving vertex maps G -> H, lexicographic in the vertex images.
// Throws when |H|^|G| exceeds the guard.
std::vector<VertexMap> enumerateHoms(const FinRGph& g, const FinRGph& h);
long long homCount(const FinRGph& g, const FinRGph& h);

struct CheckResult {
  bool ok = true;
  std::string detail;  // first counterexample, or a summary when ok
};

// discrete -| points: graph maps delta(s) -> G are exactly vertex maps s -> gamma(G).
CheckResult checkDeltaGammaAdj(int s, const FinRGph& g);
// points -| codiscrete: graph maps G -> nabla(s) are exactly vertex maps gamma(G) -> s.
CheckResult checkGammaNablaAdj(const FinRGph& g, int s);
// components -| discrete: graph maps G -> delta(s) are exactly maps pi0(G) -> s.
CheckResult checkPiDeltaAdj(const FinRGph& g, int s);

// Exhaustive sweep: every reflexive graph with up to maxVertices vertices
// against every set size up to maxSet, all three adjunctions, bijectivity of
// the canonical maps included. Also reports how many graphs were tried.
CheckResult checkAdjunctions(int maxVertices, int maxSet);

// Strict bipointedness (p0 != p1) and weak connectedness in its reformulated
// form: every hom into a discrete graph (each size in `sizes`) is constant.
CheckResult checkIntervalAxioms(const FinRGph& g, int p0, int p1, const std::vector<int>& sizes);

// All reflexive graphs on exactly n vertices (every subset of non-loop arcs).
std::vector<FinRGph> allGraphs(int n);

// Text format: first line `n`, then one `u v` line per non-loop edge.
FinRGph parseGraphFile(const std::string& text, const std::string& fileName);
std::string describeGraph(const FinRGph& g);

}  // namespace cohtt
