#pragma once

// Shared test helpers: a cached check of the bundled corpus (it is immutable
// once built, so suites copy it when they need to extend it) and a wrapper
// that captures thrown checker errors for code assertions.

#include <optional>
#include <utility>

#include "cohtt/corpus.hpp"
#include "cohtt/errors.hpp"

namespace testutil {

inline const cohtt::Signature& corpusSig() {
  static cohtt::Signature sig = [] {
    cohtt::Signature s;
    cohtt::checkCorpus(s);
    return s;
  }();
  return sig;
}

template <class F>
std::optional<cohtt::Error> errorOf(F&& f) {
  try {
    std::forward<F>(f)();
    return std::nullopt;
  } catch (const cohtt::Error& e) {
    return e;
  }
}

}  // namespace testutil
