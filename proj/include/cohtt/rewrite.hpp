#pragma once

// User rewrite rules: compilation of a checked identity type into a
// first-order pattern, matching against constant-headed neutrals, and the
// pairwise overlap report.

#include "cohtt/eval.hpp"
#include "cohtt/signature.hpp"

namespace cohtt {

// Offered each time a constant-headed neutral gains an argument (and once at
// head creation for zero-argument rules). Returns the replacement value (rule
// right side in the matched environment, applied to any leftover spine
// entries) or null when no rule matches. Counts firings against E.budget.
Vp tryRewrite(ECtx& E, const std::string& head, const std::vector<Elim>& spine);

// Compile the (checked, zonked) type of declaration `declName` into a rule.
// The type must be an iterated Pi over an identity type whose left side is a
// constant-headed application of pattern variables, constructors-like
// constants, literals, lambdas over such, and closed terms.
RewriteRule compileRule(ECtx& E, const std::string& declName, const TermPtr& declType,
                        const SrcLoc& loc);

// Pairwise critical-pair report: one line "lhs1 ~ lhs2 @ head" per pair of
// registered rules whose left sides can match a common instance.
std::vector<std::string> overlapReport(const Signature& sig);

}  // namespace cohtt
