#pragma once

// Pretty-printing of core terms in surface syntax (the output reparses), and
// a JSON rendering of the term tree.

#include <string>
#include <vector>

#include "cohtt/eval.hpp"
#include "cohtt/term.hpp"

namespace cohtt {

// `names`: enclosing binder names, outermost first (index 0 refers to the
// last entry).
std::string printTerm(const TermPtr& t, std::vector<std::string> names = {});

// Readback then print (used in error messages).
std::string printValue(ECtx& E, const Vp& v, int depth, std::vector<std::string> names = {});

// JSON tree; each node carries its tag and children, binders carry names.
std::string termJsonString(const TermPtr& t, std::vector<std::string> names = {}, int indent = 2);

}  // namespace cohtt
