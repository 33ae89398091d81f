#include "bois/flowsheet.hpp"

#include "bois/benchmarks.hpp"
#include "bois/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace bois;

TEST_SUITE_BEGIN("flowsheet");

namespace {

// Independent reference: plain (undamped) sequential substitution through the
// units, written against the model equations rather than the solver code.
StreamVector reference_flowsheet(const ProcessInputs& in, const FlowsheetParams& p) {
  auto logistic = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  const double chi =
      p.conversion_base +
      p.conversion_span * logistic((in.reactor_temp - p.conversion_temp_mid) /
                                   p.conversion_temp_scale) *
          (0.5 + 0.5 * logistic((in.reactor_pressure - p.conversion_pressure_mid) /
                                p.conversion_pressure_scale));
  double eta[3];
  for (int i = 0; i < 3; ++i)
    eta[i] = logistic(p.recovery_bias[i] +
                      p.recovery_temp_gain * (p.recovery_temp_ref - in.separator_temp) /
                          p.recovery_temp_scale +
                      p.recovery_pressure_gain *
                          (in.separator_pressure - p.recovery_pressure_ref) /
                          p.recovery_pressure_scale);
  const double mass[3] = {1.0, 1.0, 2.0};
  const double r = in.recycle_fraction;

  double R[3] = {0.0, 0.0, 0.0};
  double out[3] = {0.0, 0.0, 0.0}, vap[3] = {0.0, 0.0, 0.0}, extent = 0.0;
  for (int it = 0; it < 200000; ++it) {
    const double na = p.feed_a + R[0], nb = p.feed_b + R[1], nc = R[2];
    extent = chi * na * nb / (na + nb);
    out[0] = na - extent;
    out[1] = nb - extent;
    out[2] = nc + extent;
    double delta = 0.0, scale = 1.0;
    for (int i = 0; i < 3; ++i) {
      vap[i] = (1.0 - eta[i]) * out[i];
      const double next = r * vap[i];
      delta = std::max(delta, std::abs(next - R[i]));
      scale = std::max(scale, std::abs(R[i]));
      R[i] = next;
    }
    if (delta < 1e-13 * scale) break;
  }

  StreamVector y;
  double pm[3], um[3], fp = 0.0, fo = 0.0;
  for (int i = 0; i < 3; ++i) {
    pm[i] = mass[i] * eta[i] * out[i];
    um[i] = mass[i] * (1.0 - r) * vap[i];
    fp += pm[i];
    fo += um[i];
  }
  y.product_flow = fp;
  y.purge_flow = fo;
  for (int i = 0; i < 3; ++i) {
    y.product_frac[i] = pm[i] / fp;
    y.purge_frac[i] = um[i] / fo;
  }
  const double feed_mass = p.feed_a + p.feed_b;
  double rec_mass = 0.0, eff_mass = 0.0;
  for (int i = 0; i < 3; ++i) {
    rec_mass += mass[i] * R[i];
    eff_mass += mass[i] * out[i];
  }
  y.heat_duty[0] = p.heat_feed_coeff * feed_mass * (in.reactor_temp - p.feed_temp) / 100.0;
  y.heat_duty[1] = p.heat_recycle_coeff * rec_mass *
                   (in.reactor_temp - in.separator_temp) / 100.0;
  y.heat_duty[2] = p.heat_reactor_coeff * extent * (1.0 + (in.reactor_temp - 673.0) / 300.0);
  y.heat_duty[3] = p.heat_condenser_coeff * eff_mass *
                   (in.reactor_temp - in.separator_temp) / 100.0;
  y.heat_duty[4] = p.heat_product_coeff * fp * (1.0 + (338.0 - in.separator_temp) / 50.0);
  y.power_duty[0] =
      p.power_feed_coeff * feed_mass * std::log(in.reactor_pressure / p.feed_pressure);
  y.power_duty[1] = p.power_recycle_coeff * rec_mass *
                    std::log(in.reactor_pressure / in.separator_pressure);
  y.power_duty[2] = p.power_product_coeff * fp *
                    (in.reactor_pressure - in.separator_pressure) / 300.0;
  return y;
}

ProcessInputs midpoint() { return {823.0, 350.0, 313.0, 155.0, 0.7}; }

}  // namespace

TEST_CASE("golden vector at the box midpoint") {
  // frozen once from the reference implementation above
  const double golden[StreamVector::dim] = {
      1.67534438159069,   0.11823993738728,   0.295336591634465, 0.586423470978255,
      0.824655618409287,  0.365604182808196,  0.612133898691977, 0.0222619184998271,
      6.5375,             4.90670092953521,   0.750614762627839, 9.02536074362817,
      0.753904971715812,  1.87914445274305,   0.940364081183583, 0.326692154410185};

  const FlowsheetParams params;
  const Vec simulated = simulate_flowsheet(midpoint(), params).to_vec();
  const Vec reference = reference_flowsheet(midpoint(), params).to_vec();
  for (int i = 0; i < StreamVector::dim; ++i) {
    CHECK(simulated[i] == doctest::Approx(golden[i]).epsilon(1e-9));
    CHECK(reference[i] == doctest::Approx(golden[i]).epsilon(1e-9));
  }
}

TEST_CASE("independent route agrees across the box") {
  Rng rng(6);
  const BoxDomain box = flowsheet_domain();
  const FlowsheetParams params;
  for (int trial = 0; trial < 25; ++trial) {
    const Vec x = rng.uniform_in(box);
    const Vec a = simulate_flowsheet(ProcessInputs::from_vec(x), params).to_vec();
    const Vec b = reference_flowsheet(ProcessInputs::from_vec(x), params).to_vec();
    for (int i = 0; i < StreamVector::dim; ++i)
      CHECK(std::abs(a[i] - b[i]) <= 1e-7 * std::max(1.0, std::abs(b[i])));
  }
}

TEST_CASE("purge flow strictly decreases with the recycle fraction") {
  const FlowsheetParams params;
  const double combos[][4] = {{673, 250, 288, 140},
                              {973, 450, 338, 170},
                              {823, 350, 313, 155},
                              {700, 420, 300, 145},
                              {950, 260, 330, 165}};
  for (const auto& c : combos) {
    double previous = std::numeric_limits<double>::infinity();
    for (double r = 0.5; r <= 0.9 + 1e-12; r += 0.05) {
      const StreamVector y =
          simulate_flowsheet({c[0], c[1], c[2], c[3], r}, params);
      CHECK(y.purge_flow < previous);
      previous = y.purge_flow;
    }
  }
}

TEST_CASE("mass balance and composition simplex hold at random inputs") {
  Rng rng(8);
  const BoxDomain box = flowsheet_domain();
  const FlowsheetParams params;
  const double feed_mass = params.feed_a + params.feed_b;
  for (int trial = 0; trial < 100; ++trial) {
    const StreamVector y =
        simulate_flowsheet(ProcessInputs::from_vec(rng.uniform_in(box)), params);
    CHECK(std::abs(y.product_flow + y.purge_flow - feed_mass) <= 1e-8 * feed_mass);
    CHECK(std::abs(y.product_frac[0] + y.product_frac[1] + y.product_frac[2] - 1.0) <= 1e-9);
    CHECK(std::abs(y.purge_frac[0] + y.purge_frac[1] + y.purge_frac[2] - 1.0) <= 1e-9);
    CHECK(y.product_flow >= 0.0);
    CHECK(y.purge_flow >= 0.0);
    for (double q : y.heat_duty) CHECK(q >= 0.0);
    for (double w : y.power_duty) CHECK(w >= 0.0);
  }
}

TEST_CASE("flowsheet output is continuous in the inputs") {
  Rng rng(12);
  const BoxDomain box = flowsheet_domain();
  const FlowsheetParams params;
  const Vec range = box.range();
  for (int trial = 0; trial < 100; ++trial) {
    Vec x = rng.uniform_in(box);
    Vec step = rng.normal_vec(5);
    step.normalize();
    Vec xp = box.clamp(x + 1e-4 * range.cwiseProduct(step));
    const Vec ya = simulate_flowsheet(ProcessInputs::from_vec(x), params).to_vec();
    const Vec yb = simulate_flowsheet(ProcessInputs::from_vec(xp), params).to_vec();
    // normalized sensitivity stays far from solver-jump magnitudes
    const double dist = ((xp - x).cwiseQuotient(range)).norm();
    if (dist > 0)
      CHECK((ya - yb).norm() / dist <= 100.0);
  }
}

TEST_CASE("conversion and recoveries stay strictly inside (0, 1) over the box") {
  const FlowsheetParams params;
  const BoxDomain box = flowsheet_domain();
  Rng rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec x = trial < 32 ? Vec() : rng.uniform_in(box);
    Vec probe(5);
    if (trial < 32) {  // all corners first
      for (int j = 0; j < 5; ++j)
        probe[j] = (trial >> j) & 1 ? box.upper[j] : box.lower[j];
    } else {
      probe = x;
    }
    const double chi = params.conversion(probe[0], probe[1]);
    CHECK(chi > 0.0);
    CHECK(chi < 1.0);
    for (double eta : params.recovery(probe[2], probe[3])) {
      CHECK(eta > 0.0);
      CHECK(eta < 1.0);
    }
  }
}

TEST_CASE("non-convergence carries the residual history") {
  FlowsheetParams params;
  params.max_iterations = 2;
  try {
    simulate_flowsheet(midpoint(), params);
    FAIL("expected a simulation error");
  } catch (const SimulationError& e) {
    CHECK(e.residual_history.size() == 2);
  }
}

TEST_CASE("inputs outside the box are rejected") {
  const FlowsheetParams params;
  CHECK_THROWS_AS(simulate_flowsheet({500.0, 350.0, 313.0, 155.0, 0.7}, params), ShapeError);
}

TEST_CASE("cost: penalty vanishes exactly on target") {
  CostWeights w;
  w.feed_rate = {0.0, 0.0};
  StreamVector y;
  y.product_flow = w.target_rate / 0.5;
  y.product_frac = {0.25, 0.25, 0.5};
  y.purge_flow = 0.0;
  y.purge_frac = {1.0, 0.0, 0.0};
  const CostBreakdown c = process_cost(y, w);
  // remaining f1 content is the product-stream value term only
  const double product_term =
      y.product_flow * (w.product_value[0] * 0.25 + w.product_value[1] * 0.25 +
                        w.product_value[2] * 0.5);
  CHECK(c.f1 == doctest::Approx(product_term).epsilon(1e-12));
}

TEST_CASE("cost: homogeneous terms vanish at zero flows and duties") {
  // the reagent feed term and the flow-target penalty are not flow-homogeneous,
  // so they are zeroed through the weights here
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    CostWeights w;
    w.feed_rate = {0.0, 0.0};
    w.penalty_weight = 0.0;
    w.product_value = {rng.normal(), rng.normal(), rng.normal()};
    w.purge_value = {rng.normal(), rng.normal(), rng.normal()};
    w.heat_price = {rng.normal(), rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    w.power_price = rng.normal();
    StreamVector y;
    y.product_frac = {0.0, 0.0, 1.0};
    y.purge_frac = {1.0, 0.0, 0.0};
    const CostBreakdown c = process_cost(y, w);
    CHECK(c.f1 == 0.0);
    CHECK(c.f2 == 0.0);
    CHECK(c.f == 0.0);
  }
}

TEST_CASE("cost: hand-computed reference case") {
  // computed by hand before coding:
  // f1 = (2 + 2) + 1*(-5) + 1*(0.1) + 10*((1 - 2)/2)^2 = 1.6, f2 = 0
  CostWeights w;
  w.reagent_price = {2.0, 2.0};
  w.feed_rate = {1.0, 1.0};
  w.product_value = {0.0, 0.0, -5.0};
  w.purge_value = {0.1, 0.1, 0.0};
  w.penalty_weight = 10.0;
  w.target_rate = 2.0;
  StreamVector y;
  y.product_flow = 1.0;
  y.product_frac = {0.0, 0.0, 1.0};
  y.purge_flow = 1.0;
  y.purge_frac = {0.5, 0.5, 0.0};
  const CostBreakdown c = process_cost(y, w);
  CHECK(c.f1 == doctest::Approx(1.6).epsilon(1e-12));
  CHECK(c.f2 == 0.0);
  CHECK(c.f == doctest::Approx(1.6).epsilon(1e-12));
}

TEST_CASE("cost: zero target rate is a config error") {
  CostWeights w;
  w.target_rate = 0.0;
  CHECK_THROWS_AS(process_cost(StreamVector{}, w), ConfigError);
}

TEST_CASE("registry: known optima and domains") {
  const Benchmark sphere = get_benchmark("sphere-composite");
  CHECK(sphere.domain.dim() == 3);
  CHECK(*sphere.optimum_value == 0.0);
  CHECK(sphere.evaluate(Vec::Zero(3)).second == 0.0);

  const Benchmark pq = get_benchmark("penalty-quadratic");
  CHECK(pq.evaluate(Vec::Constant(2, 1.0)).second == doctest::Approx(0.0).epsilon(1e-14));
  Rng rng(44);
  for (int i = 0; i < 50; ++i) {
    const Vec x = rng.uniform_in(pq.domain);
    CHECK(pq.evaluate(x).second >= -1e-12);
  }

  const Benchmark ec = get_benchmark("exp-composite");
  CHECK(ec.evaluate(Vec::Constant(2, -1.0)).second ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  for (int i = 0; i < 50; ++i) {
    const Vec x = rng.uniform_in(ec.domain);
    CHECK(ec.evaluate(x).second >= std::exp(-1.0) - 1e-12);
  }

  const Benchmark fs = get_benchmark("flowsheet");
  CHECK(fs.output_dim == 16);
  CHECK(fs.domain.lower[0] == 673.0);
  CHECK(fs.domain.lower[1] == 250.0);
  CHECK(fs.domain.lower[2] == 288.0);
  CHECK(fs.domain.lower[3] == 140.0);
  CHECK(fs.domain.lower[4] == 0.5);
  CHECK(fs.domain.upper[0] == 973.0);
  CHECK(fs.domain.upper[1] == 450.0);
  CHECK(fs.domain.upper[2] == 338.0);
  CHECK(fs.domain.upper[3] == 170.0);
  CHECK(fs.domain.upper[4] == 0.9);

  CHECK_THROWS_AS(get_benchmark("nope"), ConfigError);
}

TEST_CASE("benchmark oracle values equal g(x) + h(x, y)") {
  Rng rng(21);
  for (const std::string& name : benchmark_names()) {
    const Benchmark b = get_benchmark(name);
    for (int i = 0; i < 10; ++i) {
      const Vec x = rng.uniform_in(b.domain);
      const auto [y, f] = b.evaluate(x);
      CHECK(std::abs(f - b.objective.value(x, y)) <= 1e-12 * std::max(1.0, std::abs(f)));
    }
  }
}

TEST_SUITE_END();
