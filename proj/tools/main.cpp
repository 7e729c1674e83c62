// cohtt — command-line driver.
//
//   cohtt check <files...>            type-check files in order
//   cohtt normalize <files...> --term name [--json] [--budget N]
//   cohtt model interval <file.g> <p0> <p1> [--sizes 1,2,3]
//   cohtt model adjunctions [--max-vertices V] [--max-set S]
//
// Exit codes: 0 success, 1 type error / counterexample / budget, 2 I/O or
// syntax error.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cohtt/corpus.hpp"
#include "cohtt/errors.hpp"
#include "cohtt/eval.hpp"
#include "cohtt/printer.hpp"
#include "cohtt/rewrite.hpp"
#include "cohtt/rgph.hpp"
#include "cohtt/signature.hpp"
#include "cohtt/term.hpp"

namespace {

int exitCodeFor(const cohtt::Error& e) {
  switch (e.code) {
    case cohtt::E_IO:
    case cohtt::E_LEX_CHAR:
    case cohtt::E_LEX_COMMENT:
    case cohtt::E_PARSE:
      return 2;
    default:
      return 1;
  }
}

long long envBudget() {
  if (const char* env = std::getenv("COHTT_BUDGET"); env && *env) {
    try {
      return std::stoll(env);
    } catch (...) {
      std::cerr << "cohtt: ignoring unparsable COHTT_BUDGET value '" << env << "'\n";
    }
  }
  return cohtt::kDefaultBudget;
}

std::vector<int> parseSizes(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stoi(item));
  }
  return out;
}

void printOverlaps(const cohtt::Signature& sig) {
  for (const std::string& line : cohtt::overlapReport(sig)) std::cout << line << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cohtt — a small dependent type checker with a flat modality and rewrite rules"};
  app.require_subcommand(1);
  bool checkOverlaps = false;
  app.add_flag("--check-overlaps", checkOverlaps,
               "print the pairwise overlap report for registered rewrite rules");

  // --- check ---------------------------------------------------------------
  auto* cmdCheck = app.add_subcommand("check", "type-check files in order");
  std::vector<std::string> checkPaths;
  bool matchCheck = false;
  long long checkBudget = envBudget();
  cmdCheck->add_option("files", checkPaths, "input files")->required()->expected(-1);
  cmdCheck->add_flag("--match-check", matchCheck,
                     "re-verify every rewrite match by conversion and report violations");
  cmdCheck->add_option("--budget", checkBudget, "rewrite firing budget per declaration");

  // --- normalize -------------------------------------------------------------
  auto* cmdNorm = app.add_subcommand("normalize", "normalize a checked constant");
  std::vector<std::string> normPaths;
  std::string normTerm;
  bool normJson = false;
  long long normBudget = envBudget();
  cmdNorm->add_option("files", normPaths, "input files")->required()->expected(-1);
  cmdNorm->add_option("--term", normTerm, "constant to normalize")->required();
  cmdNorm->add_flag("--json", normJson, "print the normal form as JSON");
  cmdNorm->add_option("--budget", normBudget, "rewrite firing budget");

  // --- model -----------------------------------------------------------------
  auto* cmdModel = app.add_subcommand("model", "finite reflexive-graph checks");
  cmdModel->require_subcommand(1);

  auto* cmdInterval = cmdModel->add_subcommand(
      "interval", "check strict bipointedness and weak connectedness of a graph");
  std::string graphPath;
  int p0 = 0, p1 = 0;
  std::string sizesArg = "1,2,3";
  cmdInterval->add_option("graph", graphPath, "graph description file")->required();
  cmdInterval->add_option("p0", p0, "first distinguished vertex")->required();
  cmdInterval->add_option("p1", p1, "second distinguished vertex")->required();
  cmdInterval->add_option("--sizes", sizesArg, "comma-separated discrete sizes to test");

  auto* cmdAdj = cmdModel->add_subcommand(
      "adjunctions", "sweep the three adjunction checks over small graphs");
  int maxVertices = 4, maxSet = 3;
  cmdAdj->add_option("--max-vertices", maxVertices, "largest graph size to test");
  cmdAdj->add_option("--max-set", maxSet, "largest discrete set size to test");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmdCheck) {
      cohtt::Signature sig;
      cohtt::CorpusOptions opt;
      opt.budget = checkBudget;
      opt.matchCheck = matchCheck;
      cohtt::CorpusReport rep = cohtt::checkFiles(sig, checkPaths, opt);
      if (checkOverlaps) printOverlaps(sig);
      if (matchCheck) {
        for (const std::string& v : rep.matchLog) std::cout << "match-check: " << v << "\n";
        if (!rep.matchLog.empty()) {
          std::cout << "match-check: " << rep.matchLog.size() << " violation(s)\n";
          return 1;
        }
      }
      std::cout << "ok: " << rep.decls << " declarations, " << rep.rules << " rewrite rules, "
                << rep.files << " file(s)\n";
      return 0;
    }

    if (*cmdNorm) {
      cohtt::Signature sig;
      cohtt::CorpusOptions opt;
      opt.budget = normBudget;
      cohtt::checkFiles(sig, normPaths, opt);
      if (checkOverlaps) printOverlaps(sig);
      if (!sig.find(normTerm))
        cohtt::fail(cohtt::E_UNBOUND, {}, "unknown constant '" + normTerm + "'");
      cohtt::ECtx E;
      E.sig = &sig;
      E.budget = normBudget;
      cohtt::TermPtr nf = cohtt::normalizeClosed(E, cohtt::mkConst(normTerm));
      if (normJson)
        std::cout << cohtt::termJsonString(nf) << "\n";
      else
        std::cout << cohtt::printTerm(nf) << "\n";
      return 0;
    }

    if (*cmdInterval) {
      std::string text = cohtt::readFileOrFail(graphPath);
      cohtt::FinRGph g = cohtt::parseGraphFile(text, graphPath);
      std::vector<int> sizes = parseSizes(sizesArg);
      cohtt::CheckResult res = cohtt::checkIntervalAxioms(g, p0, p1, sizes);
      std::cout << res.detail << "\n";
      return res.ok ? 0 : 1;
    }

    if (*cmdAdj) {
      cohtt::CheckResult res = cohtt::checkAdjunctions(maxVertices, maxSet);
      std::cout << res.detail << "\n";
      return res.ok ? 0 : 1;
    }
  } catch (const cohtt::Error& e) {
    std::cerr << e.what() << "\n";
    return exitCodeFor(e);
  }
  return 0;
}
