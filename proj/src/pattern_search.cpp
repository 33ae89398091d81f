#include "bois/pattern_search.hpp"

#include <cmath>
#include <limits>

namespace bois {

PatternSearchResult pattern_search(const std::function<double(const Vec&)>& fn,
                                   const BoxDomain& box, const Vec& start,
                                   const PatternSearchOptions& opts) {
  const int d = box.dim();
  require(start.size() == d, "pattern_search: start dimension does not match box");

  PatternSearchResult res;
  res.x = box.clamp(start);
  res.value = fn(res.x);
  res.evals = 1;
  if (!std::isfinite(res.value)) {
    if (opts.on_non_finite == NonFiniteAction::abort) {
      res.aborted = true;
      return res;
    }
    res.value = std::numeric_limits<double>::infinity();
  }

  const Vec range = box.range();
  Vec step = opts.initial_step_rel * range;

  auto converged = [&] {
    for (int i = 0; i < d; ++i)
      if (step[i] >= opts.tol_rel * range[i]) return false;
    return true;
  };

  while (!converged() && res.evals < opts.max_evals) {
    bool improved = false;
    for (int i = 0; i < d && res.evals < opts.max_evals; ++i) {
      for (double sign : {+1.0, -1.0}) {
        if (res.evals >= opts.max_evals) break;
        Vec probe = res.x;
        probe[i] = std::min(box.upper[i], std::max(box.lower[i], probe[i] + sign * step[i]));
        if (probe[i] == res.x[i]) continue;  // clamped onto the current point
        const double v = fn(probe);
        ++res.evals;
        if (!std::isfinite(v)) {
          if (opts.on_non_finite == NonFiniteAction::abort) {
            res.aborted = true;
            return res;
          }
          continue;
        }
        if (v < res.value) {
          res.value = v;
          res.x = probe;
          improved = true;
          break;  // move on to the next coordinate from the new point
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return res;
}

}  // namespace bois
