#include "bois/acquisition.hpp"

#include "bois/pattern_search.hpp"
#include "bois/rng.hpp"

#include <cmath>
#include <limits>

namespace bois {

double lcb(double mean, double std, const AcquisitionSpec& spec, int iteration) {
  require(std >= 0.0, "lcb: std must be >= 0");
  require(spec.kappa >= 0.0, "lcb: kappa must be >= 0");
  return mean - spec.kappa_at(iteration) * std;
}

SearchResult minimize_acquisition(const std::function<double(const Vec&)>& af,
                                  const BoxDomain& domain, const SearchBudget& budget) {
  require(budget.restarts >= 1, "minimize_acquisition: restarts must be >= 1");
  require(budget.tolerance > 0.0, "minimize_acquisition: tolerance must be > 0");

  PatternSearchOptions opts;
  opts.max_evals = budget.max_evals_per_restart;
  opts.tol_rel = budget.tolerance;
  opts.on_non_finite = NonFiniteAction::abort;

  Rng rng(derive_seed(budget.seed, 0xacf));
  SearchResult best;
  best.value = std::numeric_limits<double>::infinity();
  bool found = false;
  for (int r = 0; r < budget.restarts; ++r) {
    const Vec start = rng.uniform_in(domain);
    const PatternSearchResult res = pattern_search(af, domain, start, opts);
    best.evals += res.evals;
    if (res.aborted) {
      ++best.aborted_restarts;
      continue;
    }
    if (!found || res.value < best.value) {
      found = true;
      best.value = res.value;
      best.x = res.x;
    }
  }
  if (!found)
    throw EvaluationError("minimize_acquisition: every restart hit a non-finite value");
  return best;
}

}  // namespace bois
