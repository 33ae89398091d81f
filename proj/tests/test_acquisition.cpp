#include "bois/acquisition.hpp"

#include "bois/pattern_search.hpp"
#include "bois/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace bois;

TEST_SUITE_BEGIN("acquisition");

namespace {

BoxDomain unit_box(int d) { return BoxDomain(Vec::Zero(d), Vec::Ones(d)); }

}  // namespace

TEST_CASE("lcb arithmetic") {
  AcquisitionSpec spec;
  spec.kappa = 2.0;
  CHECK(lcb(1.0, 0.5, spec) == doctest::Approx(0.0).epsilon(1e-15));

  spec.kappa = 0.0;
  CHECK(lcb(1.0, 0.5, spec) == 1.0);  // pure exploitation

  spec.kappa = 5.0;
  CHECK(lcb(1.0, 0.0, spec) == 1.0);  // no uncertainty
}

TEST_CASE("lcb decaying schedule shrinks the exploration weight") {
  AcquisitionSpec spec;
  spec.kappa = 2.0;
  spec.schedule = AcquisitionSpec::Schedule::decaying;
  spec.decay_rate = 0.1;
  CHECK(spec.kappa_at(0) == 2.0);
  CHECK(spec.kappa_at(10) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(lcb(1.0, 1.0, spec, 10) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("negative std is rejected") {
  CHECK_THROWS_AS(lcb(0.0, -0.1, AcquisitionSpec{}), ShapeError);
}

TEST_CASE("convex quadratic minimum is located to tolerance") {
  const auto af = [](const Vec& x) { return (x[0] - 0.3) * (x[0] - 0.3); };
  SearchBudget budget;
  budget.seed = 5;
  const SearchResult res = minimize_acquisition(af, unit_box(1), budget);
  CHECK(std::abs(res.x[0] - 0.3) <= 1e-3);
}

TEST_CASE("monotone objective clamps to the boundary") {
  const auto af = [](const Vec& x) { return 3.0 * x[0] + 1.0; };
  SearchBudget budget;
  budget.seed = 9;
  const SearchResult res = minimize_acquisition(af, unit_box(1), budget);
  CHECK(res.x[0] == 0.0);
}

TEST_CASE("search is deterministic given the seed") {
  const auto af = [](const Vec& x) { return std::sin(5.0 * x[0]) + x[1] * x[1]; };
  SearchBudget budget;
  budget.seed = 31;
  const SearchResult a = minimize_acquisition(af, unit_box(2), budget);
  const SearchResult b = minimize_acquisition(af, unit_box(2), budget);
  CHECK(a.x == b.x);
  CHECK(a.value == b.value);
}

TEST_CASE("result stays inside the box and improves on every start point") {
  Rng scenario_rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 1 + trial % 3;
    const Vec c = scenario_rng.normal_vec(d);
    const auto af = [c](const Vec& x) {
      double v = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i)
        v += std::cos(3.0 * x[i] + c[i]) + 0.5 * (x[i] - c[i]) * (x[i] - c[i]);
      return v;
    };
    SearchBudget budget;
    budget.restarts = 8;
    budget.seed = 1000 + trial;
    const BoxDomain box = unit_box(d);
    const SearchResult res = minimize_acquisition(af, box, budget);
    CHECK(box.contains(res.x));

    // start points are drawn sequentially from the budget-seeded stream
    Rng starts(derive_seed(budget.seed, 0xacf));
    for (int r = 0; r < budget.restarts; ++r)
      CHECK(res.value <= af(starts.uniform_in(box)) + 1e-14);
  }
}

TEST_CASE("more restarts never worsen the result") {
  const auto af = [](const Vec& x) {
    return std::sin(7.0 * x[0]) * std::cos(5.0 * x[1]) + 0.3 * x[0];
  };
  SearchBudget small;
  small.restarts = 4;
  small.seed = 2;
  SearchBudget large = small;
  large.restarts = 16;
  const double v_small = minimize_acquisition(af, unit_box(2), small).value;
  const double v_large = minimize_acquisition(af, unit_box(2), large).value;
  CHECK(v_large <= v_small + 1e-14);
}

TEST_CASE("non-finite restarts are dropped; all-aborted is an error") {
  const auto poisoned = [](const Vec& x) {
    return x[0] < 0.05 ? std::numeric_limits<double>::quiet_NaN()
                       : (x[0] - 0.9) * (x[0] - 0.9);
  };
  SearchBudget budget;
  budget.restarts = 16;
  budget.seed = 4;
  const SearchResult res = minimize_acquisition(poisoned, unit_box(1), budget);
  CHECK(std::abs(res.x[0] - 0.9) < 0.05);

  const auto always_nan = [](const Vec&) { return std::numeric_limits<double>::quiet_NaN(); };
  CHECK_THROWS_AS(minimize_acquisition(always_nan, unit_box(1), budget), EvaluationError);
}

TEST_CASE("pattern search honors the evaluation budget") {
  int evals = 0;
  const auto af = [&evals](const Vec& x) {
    ++evals;
    return x.squaredNorm();
  };
  PatternSearchOptions opts;
  opts.max_evals = 37;
  opts.tol_rel = 1e-12;  // budget binds before the step tolerance
  pattern_search(af, unit_box(3), Vec::Constant(3, 0.7), opts);
  CHECK(evals <= 37);
}

TEST_SUITE_END();
