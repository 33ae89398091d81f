#pragma once

#include "bois/common.hpp"

#include <cstdint>
#include <functional>

namespace bois {

// Lower confidence bound mean - kappa * std, minimized.
struct AcquisitionSpec {
  enum class Schedule { constant, decaying };
  double kappa = 2.0;      // >= 0
  Schedule schedule = Schedule::constant;
  double decay_rate = 0.0;  // kappa_eff = kappa / (1 + rate * iteration)

  double kappa_at(int iteration) const {
    if (schedule == Schedule::constant) return kappa;
    return kappa / (1.0 + decay_rate * static_cast<double>(iteration));
  }
};

double lcb(double mean, double std, const AcquisitionSpec& spec, int iteration = 0);

struct SearchBudget {
  int restarts = 32;
  int max_evals_per_restart = 200;
  double tolerance = 1e-4;  // relative to box range
  std::uint64_t seed = 0;
};

struct SearchResult {
  Vec x;
  double value = 0.0;
  int evals = 0;
  int aborted_restarts = 0;
};

// Multi-start minimization over the box: seeded uniform start points, each
// refined by coordinate pattern search with step halving. Restart start
// points are drawn sequentially from one stream, so a longer restart budget
// extends (never replaces) a shorter one. Ties resolve to the lowest restart
// index. A restart whose objective goes non-finite is dropped; only if every
// restart aborts is an EvaluationError raised.
SearchResult minimize_acquisition(const std::function<double(const Vec&)>& af,
                                  const BoxDomain& domain, const SearchBudget& budget);

}  // namespace bois
