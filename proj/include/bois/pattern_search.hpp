#pragma once

#include "bois/common.hpp"

#include <functional>

namespace bois {

// Coordinate pattern search (compass search with step halving) on a box.
// Derivative free and deterministic; the one local optimizer used for both
// acquisition refinement and hyperparameter likelihood search.

enum class NonFiniteAction {
  abort,          // stop this search and report it aborted
  treat_as_inf,   // skip the probe and keep going
};

struct PatternSearchOptions {
  int max_evals = 200;
  double tol_rel = 1e-4;  // stop when every step < tol_rel * (upper - lower)
  NonFiniteAction on_non_finite = NonFiniteAction::abort;
  double initial_step_rel = 0.25;
};

struct PatternSearchResult {
  Vec x;
  double value = 0.0;
  int evals = 0;
  bool aborted = false;
};

PatternSearchResult pattern_search(const std::function<double(const Vec&)>& fn,
                                   const BoxDomain& box, const Vec& start,
                                   const PatternSearchOptions& opts);

}  // namespace bois
