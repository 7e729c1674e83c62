#pragma once

// Loading and checking .cohtt files: drives the parser and checker over a
// list of files, collects per-declaration errors with the declaration name
// attached, and provides the fixed example-corpus file list plus golden
// normal-form comparison helpers.

#include <set>
#include <string>
#include <vector>

#include "cohtt/elab.hpp"
#include "cohtt/signature.hpp"

namespace cohtt {

struct CorpusOptions {
  long long budget = kDefaultBudget;
  bool matchCheck = false;    // log every rewrite firing for later re-validation
  bool kernelRecheck = true;  // re-derive every accepted declaration independently
  std::set<std::string> skipRules;  // rewrite registrations to drop (robustness tests)
};

struct CorpusReport {
  int files = 0;
  int decls = 0;
  int rules = 0;
  std::vector<std::string> matchLog;  // soundness violations seen when matchCheck is on
};

// Directory holding the bundled corpus: $COHTT_CORPUS_DIR if set, else the
// build-time default.
std::string corpusDir();
// The bundled corpus in check order (full paths under corpusDir()).
std::vector<std::string> corpusFiles();

std::string readFileOrFail(const std::string& path);

// Parse and check the given files into sig, in order. Errors are rethrown
// with "in declaration 'name': " prefixed to the message (same code and
// location).
CorpusReport checkFiles(Signature& sig, const std::vector<std::string>& paths,
                        const CorpusOptions& opt = {});
// checkFiles over the bundled corpus.
CorpusReport checkCorpus(Signature& sig, const CorpusOptions& opt = {});

// Parse and check declarations given directly as source text, extending sig.
CorpusReport checkSource(Signature& sig, const std::string& src,
                         const std::string& fileName = "<source>",
                         const CorpusOptions& opt = {});

// Normal form of a checked constant, rendered with the standard printer.
std::string normalFormString(Signature& sig, const std::string& name,
                             long long budget = kDefaultBudget);

// One line per declaration (kind, name, type, body/rule); two runs over the
// same input must produce byte-identical dumps.
std::string dumpSignature(const Signature& sig);

struct GoldenEntry {
  std::string name;
  std::string normalForm;
};

// Golden file format: one entry per line, name TAB expected-normal-form.
std::vector<GoldenEntry> loadGolden(const std::string& path);

}  // namespace cohtt
