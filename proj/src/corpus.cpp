#include "cohtt/corpus.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cohtt/printer.hpp"
#include "cohtt/surface.hpp"

namespace cohtt {

std::string corpusDir() {
  if (const char* env = std::getenv("COHTT_CORPUS_DIR"); env && *env) return env;
#ifdef COHTT_CORPUS_DIR
  return COHTT_CORPUS_DIR;
#else
  return "corpus";
#endif
}

std::vector<std::string> corpusFiles() {
  static const char* names[] = {
      "00-prelude.cohtt", "01-flat.cohtt", "02-interval.cohtt",
      "03-path.cohtt",    "04-graph.cohtt", "05-polyid.cohtt",
      "06-bool.cohtt",    "07-nat.cohtt",   "08-circle.cohtt",
  };
  std::vector<std::string> out;
  std::string dir = corpusDir();
  for (const char* n : names) out.push_back(dir + "/" + n);
  return out;
}

std::string readFileOrFail(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(E_IO, {path, 0, 0}, "cannot read file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string declLabel(const SDecl& d) {
  if (d.k != SDecl::Rewrite) return d.name;
  std::string s = "rewrite";
  for (const std::string& r : d.ruleNames) s += " " + r;
  return s;
}

}  // namespace

namespace {

ElabOptions elabOptionsFrom(const CorpusOptions& opt) {
  ElabOptions eopt;
  eopt.budget = opt.budget;
  eopt.matchCheck = opt.matchCheck;
  eopt.kernelRecheck = opt.kernelRecheck;
  return eopt;
}

void processDecls(Elaborator& el, std::vector<SDecl>& decls, const CorpusOptions& opt,
                  CorpusReport& rep) {
  for (SDecl& d : decls) {
    if (d.k == SDecl::Rewrite && !opt.skipRules.empty()) {
      std::vector<std::string> keep;
      for (const std::string& r : d.ruleNames)
        if (!opt.skipRules.count(r)) keep.push_back(r);
      if (keep.empty()) continue;
      d.ruleNames = std::move(keep);
    }
    try {
      el.processDecl(d);
    } catch (const Error& e) {
      throw Error(e.code, e.loc, "in declaration '" + declLabel(d) + "': " + e.msg);
    }
    rep.decls++;
    if (d.k == SDecl::Rewrite) rep.rules += static_cast<int>(d.ruleNames.size());
  }
}

}  // namespace

CorpusReport checkFiles(Signature& sig, const std::vector<std::string>& paths,
                        const CorpusOptions& opt) {
  Elaborator el(sig, elabOptionsFrom(opt));
  CorpusReport rep;
  for (const std::string& path : paths) {
    std::string src = readFileOrFail(path);
    std::vector<SDecl> decls = parseFile(src, path);
    rep.files++;
    processDecls(el, decls, opt, rep);
  }
  rep.matchLog = std::move(el.matchLog);
  return rep;
}

CorpusReport checkCorpus(Signature& sig, const CorpusOptions& opt) {
  return checkFiles(sig, corpusFiles(), opt);
}

CorpusReport checkSource(Signature& sig, const std::string& src, const std::string& fileName,
                         const CorpusOptions& opt) {
  Elaborator el(sig, elabOptionsFrom(opt));
  CorpusReport rep;
  std::vector<SDecl> decls = parseFile(src, fileName);
  rep.files++;
  processDecls(el, decls, opt, rep);
  rep.matchLog = std::move(el.matchLog);
  return rep;
}

std::string normalFormString(Signature& sig, const std::string& name, long long budget) {
  const Decl* d = sig.find(name);
  if (!d) fail(E_UNBOUND, {}, "unknown constant '" + name + "'");
  ECtx E;
  E.sig = &sig;
  E.budget = budget;
  return printTerm(normalizeClosed(E, mkConst(name)));
}

std::string dumpSignature(const Signature& sig) {
  std::ostringstream out;
  for (const Decl& d : sig.decls) {
    switch (d.kind) {
      case Decl::Def:
        out << "def " << d.name << " : " << printTerm(d.type) << " := " << printTerm(d.body)
            << "\n";
        break;
      case Decl::Postulate:
        out << "postulate " << d.name << " : " << printTerm(d.type) << "\n";
        break;
      case Decl::Rewrite: {
        const RewriteRule& r = sig.rules[d.rule];
        out << "rewrite " << r.name << " : head " << r.head << "/" << r.args.size() << ", "
            << r.nvars << " pattern vars, rhs " << printTerm(r.rhs) << "\n";
        break;
      }
    }
  }
  return out.str();
}

std::vector<GoldenEntry> loadGolden(const std::string& path) {
  std::string src = readFileOrFail(path);
  std::vector<GoldenEntry> out;
  std::istringstream in(src);
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    lineNo++;
    if (line.empty() || line[0] == '#') continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
      fail(E_IO, {path, lineNo, 1}, "golden entries are 'name<TAB>normal form'");
    out.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return out;
}

}  // namespace cohtt
