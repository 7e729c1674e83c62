#include "cohtt/rgph.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace cohtt {

FinRGph FinRGph::make(int n) {
  FinRGph g;
  g.n = n;
  g.adj.assign(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; i++) g.adj[i][i] = true;
  return g;
}

void FinRGph::addEdge(int u, int v) { adj[u][v] = true; }

FinRGph delta(int n) { return FinRGph::make(n); }

FinRGph nabla(int n) {
  FinRGph g = FinRGph::make(n);
  for (int i = 0; i < n; i++)
    for (int j = 0; j < n; j++) g.adj[i][j] = true;
  return g;
}

FinRGph walkingEdge() {
  FinRGph g = FinRGph::make(2);
  g.addEdge(0, 1);
  return g;
}

FinRGph disjointUnion(const FinRGph& a, const FinRGph& b) {
  FinRGph g = FinRGph::make(a.n + b.n);
  for (int i = 0; i < a.n; i++)
    for (int j = 0; j < a.n; j++)
      if (a.adj[i][j]) g.adj[i][j] = true;
  for (int i = 0; i < b.n; i++)
    for (int j = 0; j < b.n; j++)
      if (b.adj[i][j]) g.adj[a.n + i][a.n + j] = true;
  return g;
}

int gamma(const FinRGph& g) { return g.n; }

std::vector<int> componentLabels(const FinRGph& g) {
  std::vector<int> parent(g.n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (int u = 0; u < g.n; u++)
    for (int v = 0; v < g.n; v++)
      if (g.adj[u][v] || g.adj[v][u]) {
        int ru = find(u), rv = find(v);
        if (ru != rv) parent[std::max(ru, rv)] = std::min(ru, rv);
      }
  std::vector<int> label(g.n, -1);
  int next = 0;
  for (int v = 0; v < g.n; v++) {
    int r = find(v);
    if (label[r] < 0) label[r] = next++;
    label[v] = label[r];
  }
  return label;
}

int pi0(const FinRGph& g) {
  std::vector<int> label = componentLabels(g);
  return label.empty() ? 0 : 1 + *std::max_element(label.begin(), label.end());
}

namespace {

// All vertex maps [0,dom) -> [0,cod), lexicographic in the image sequence.
std::vector<VertexMap> allMaps(int dom, int cod) {
  std::vector<VertexMap> out;
  if (dom == 0) {
    out.push_back({});
    return out;
  }
  if (cod == 0) return out;
  VertexMap f(dom, 0);
  for (;;) {
    out.push_back(f);
    int i = dom - 1;
    while (i >= 0 && f[i] == cod - 1) f[i--] = 0;
    if (i < 0) break;
    f[i]++;
  }
  return out;
}

long long ipow(long long b, long long e, long long cap) {
  long long r = 1;
  for (long long i = 0; i < e; i++) {
    if (b != 0 && r > cap / b) return cap + 1;
    r *= b;
  }
  return r;
}

bool isHom(const FinRGph& g, const FinRGph& h, const VertexMap& f) {
  for (int u = 0; u < g.n; u++)
    for (int v = 0; v < g.n; v++)
      if (g.adj[u][v] && !h.adj[f[u]][f[v]]) return false;
  return true;
}

std::string showMap(const VertexMap& f) {
  std::string s = "[";
  for (size_t i = 0; i < f.size(); i++) {
    if (i) s += " ";
    s += std::to_string(f[i]);
  }
  return s + "]";
}

}  // namespace

std::vector<VertexMap> enumerateHoms(const FinRGph& g, const FinRGph& h) {
  long long space = ipow(h.n, g.n, kHomGuard);
  if (space > kHomGuard)
    fail(E_BUDGET, {},
         "hom enumeration space " + std::to_string(h.n) + "^" + std::to_string(g.n) +
             " exceeds the guard of " + std::to_string(kHomGuard) + " candidates");
  std::vector<VertexMap> out;
  for (VertexMap& f : allMaps(g.n, h.n))
    if (isHom(g, h, f)) out.push_back(std::move(f));
  return out;
}

long long homCount(const FinRGph& g, const FinRGph& h) {
  return static_cast<long long>(enumerateHoms(g, h).size());
}

CheckResult checkDeltaGammaAdj(int s, const FinRGph& g) {
  // A graph map delta(s) -> G is its own underlying vertex map, so the
  // adjunction holds exactly when the two lexicographic enumerations agree.
  std::vector<VertexMap> homs = enumerateHoms(delta(s), g);
  std::vector<VertexMap> maps = allMaps(s, gamma(g));
  if (homs != maps)
    return {false, "discrete -| points failed at set size " + std::to_string(s) + ", graph " +
                       describeGraph(g) + ": " + std::to_string(homs.size()) + " graph maps vs " +
                       std::to_string(maps.size()) + " vertex maps"};
  return {true, "discrete -| points: " + std::to_string(homs.size()) + " maps agree"};
}

CheckResult checkGammaNablaAdj(const FinRGph& g, int s) {
  std::vector<VertexMap> homs = enumerateHoms(g, nabla(s));
  std::vector<VertexMap> maps = allMaps(gamma(g), s);
  if (homs != maps)
    return {false, "points -| codiscrete failed at graph " + describeGraph(g) + ", set size " +
                       std::to_string(s) + ": " + std::to_string(homs.size()) + " graph maps vs " +
                       std::to_string(maps.size()) + " vertex maps"};
  return {true, "points -| codiscrete: " + std::to_string(homs.size()) + " maps agree"};
}

CheckResult checkPiDeltaAdj(const FinRGph& g, int s) {
  std::vector<int> label = componentLabels(g);
  int comps = pi0(g);
  std::vector<VertexMap> homs = enumerateHoms(g, delta(s));
  std::vector<VertexMap> induced;
  for (const VertexMap& f : homs) {
    VertexMap c(comps, -1);
    for (int v = 0; v < g.n; v++) {
      if (c[label[v]] >= 0 && c[label[v]] != f[v])
        return {false, "components -| discrete failed: map " + showMap(f) + " from " +
                           describeGraph(g) + " to the discrete graph on " + std::to_string(s) +
                           " is not constant on a component"};
      c[label[v]] = f[v];
    }
    induced.push_back(std::move(c));
  }
  std::vector<VertexMap> maps = allMaps(comps, s);
  std::vector<VertexMap> sortedInduced = induced;
  std::sort(sortedInduced.begin(), sortedInduced.end());
  if (std::adjacent_find(sortedInduced.begin(), sortedInduced.end()) != sortedInduced.end())
    return {false, "components -| discrete failed: two graph maps from " + describeGraph(g) +
                       " induce the same component map (size " + std::to_string(s) + ")"};
  std::sort(maps.begin(), maps.end());
  if (sortedInduced != maps)
    return {false, "components -| discrete failed at graph " + describeGraph(g) + ", set size " +
                       std::to_string(s) + ": " + std::to_string(sortedInduced.size()) +
                       " induced maps vs " + std::to_string(maps.size()) + " component maps"};
  return {true, "components -| discrete: " + std::to_string(maps.size()) + " maps agree"};
}

std::vector<FinRGph> allGraphs(int n) {
  std::vector<std::pair<int, int>> arcs;
  for (int u = 0; u < n; u++)
    for (int v = 0; v < n; v++)
      if (u != v) arcs.push_back({u, v});
  std::vector<FinRGph> out;
  long long total = 1LL << arcs.size();
  for (long long mask = 0; mask < total; mask++) {
    FinRGph g = FinRGph::make(n);
    for (size_t i = 0; i < arcs.size(); i++)
      if (mask >> i & 1) g.addEdge(arcs[i].first, arcs[i].second);
    out.push_back(std::move(g));
  }
  return out;
}

CheckResult checkAdjunctions(int maxVertices, int maxSet) {
  long long graphs = 0;
  for (int n = 0; n <= maxVertices; n++) {
    for (const FinRGph& g : allGraphs(n)) {
      graphs++;
      for (int s = 0; s <= maxSet; s++) {
        for (CheckResult r : {checkDeltaGammaAdj(s, g), checkGammaNablaAdj(g, s),
                              checkPiDeltaAdj(g, s)}) {
          if (!r.ok) return r;
        }
      }
    }
  }
  return {true, "all three adjunctions hold on " + std::to_string(graphs) +
                    " graphs (up to " + std::to_string(maxVertices) + " vertices) x set sizes 0.." +
                    std::to_string(maxSet)};
}

CheckResult checkIntervalAxioms(const FinRGph& g, int p0, int p1, const std::vector<int>& sizes) {
  if (p0 < 0 || p0 >= g.n || p1 < 0 || p1 >= g.n)
    return {false, "point out of range for " + describeGraph(g)};
  if (p0 == p1)
    return {false, "strict bipointedness fails: the two points coincide (vertex " +
                       std::to_string(p0) + ")"};
  for (int s : sizes) {
    for (const VertexMap& f : enumerateHoms(g, delta(s))) {
      for (int v = 1; v < g.n; v++)
        if (f[v] != f[0])
          return {false, "weak connectedness fails: map " + showMap(f) + " from " +
                             describeGraph(g) + " to the discrete graph on " + std::to_string(s) +
                             " is not constant"};
    }
  }
  return {true, "strictly bipointed (" + std::to_string(p0) + " != " + std::to_string(p1) +
                    ") and weakly connected against discrete sizes checked"};
}

FinRGph parseGraphFile(const std::string& text, const std::string& fileName) {
  std::istringstream in(text);
  std::string line;
  int lineNo = 0;
  int n = -1;
  FinRGph g;
  while (std::getline(in, line)) {
    lineNo++;
    std::string trimmed = line;
    size_t hash = trimmed.find('#');
    if (hash != std::string::npos) trimmed.erase(hash);
    std::istringstream ls(trimmed);
    if (n < 0) {
      int m;
      if (!(ls >> m)) continue;  // blank or comment line before the count
      if (m < 0) fail(E_IO, {fileName, lineNo, 1}, "expected a vertex count on the first line");
      n = m;
      g = FinRGph::make(n);
      continue;
    }
    int u, v;
    if (!(ls >> u)) continue;  // blank line
    if (!(ls >> v) || u < 0 || v < 0 || u >= n || v >= n)
      fail(E_IO, {fileName, lineNo, 1},
           "expected an edge 'u v' with both endpoints below " + std::to_string(n));
    g.addEdge(u, v);
  }
  if (n < 0) fail(E_IO, {fileName, 1, 1}, "empty graph file; expected a vertex count");
  return g;
}

std::string describeGraph(const FinRGph& g) {
  std::string s = "{n=" + std::to_string(g.n) + "; edges:";
  bool any = false;
  for (int u = 0; u < g.n; u++)
    for (int v = 0; v < g.n; v++)
      if (g.adj[u][v] && u != v) {
        s += " " + std::to_string(u) + "->" + std::to_string(v);
        any = true;
      }
  if (!any) s += " (loops only)";
  return s + "}";
}

}  // namespace cohtt
