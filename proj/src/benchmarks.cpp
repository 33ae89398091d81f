#include "bois/benchmarks.hpp"

#include <cmath>

namespace bois {

Benchmark make_flowsheet_benchmark(const FlowsheetParams& params, const CostWeights& weights) {
  Benchmark b{.name = "flowsheet",
              .domain = flowsheet_domain(),
              .output_dim = StreamVector::dim,
              .objective = {},
              .evaluate = {},
              .optimum_value = std::nullopt,
              .description = "reactor-separator-recycle flowsheet, operating-cost objective"};
  b.objective.output_dim = StreamVector::dim;
  b.objective.g = [](const Vec&) { return 0.0; };
  b.objective.h = [weights](const Vec&, const Vec& y) {
    return process_cost(StreamVector::from_vec(y), weights).f;
  };
  b.evaluate = [params, obj = b.objective](const Vec& x) {
    const Vec y = simulate_flowsheet(ProcessInputs::from_vec(x), params).to_vec();
    return std::make_pair(y, obj.value(x, y));
  };
  return b;
}

namespace {

Benchmark make_sphere_composite() {
  Vec lo = Vec::Constant(3, -1.0), hi = Vec::Constant(3, 1.0);
  Benchmark b{.name = "sphere-composite",
              .domain = BoxDomain(lo, hi),
              .output_dim = 3,
              .objective = {},
              .evaluate = {},
              .optimum_value = 0.0,
              .description = "y_i = x_i^2, f = sum y_i; optimum 0 at the origin"};
  b.objective.output_dim = 3;
  b.objective.g = [](const Vec&) { return 0.0; };
  b.objective.h = [](const Vec&, const Vec& y) { return y.sum(); };
  b.objective.grad_h_y = [](const Vec&, const Vec& y) { return Vec::Ones(y.size()); };
  b.evaluate = [obj = b.objective](const Vec& x) {
    const Vec y = x.array().square();
    return std::make_pair(y, obj.value(x, y));
  };
  return b;
}

Benchmark make_penalty_quadratic() {
  // y = (x1 + x2, (x1 - x2)^2), f = w ((y1 - c)/c)^2 + y2 with w = 50, c = 2.
  // Both terms vanish only at x1 = x2 = 1, so the optimum value is 0.
  constexpr double w = 50.0, c = 2.0;
  Vec lo = Vec::Constant(2, 0.0), hi = Vec::Constant(2, 2.0);
  Benchmark b{.name = "penalty-quadratic",
              .domain = BoxDomain(lo, hi),
              .output_dim = 2,
              .objective = {},
              .evaluate = {},
              .optimum_value = 0.0,
              .description = "flow-target penalty toy; optimum 0 at (1, 1)"};
  b.objective.output_dim = 2;
  b.objective.g = [](const Vec&) { return 0.0; };
  b.objective.h = [](const Vec&, const Vec& y) {
    const double miss = (y[0] - c) / c;
    return w * miss * miss + y[1];
  };
  b.objective.grad_h_y = [](const Vec&, const Vec& y) {
    Vec j(2);
    j[0] = 2.0 * w * (y[0] - c) / (c * c);
    j[1] = 1.0;
    return j;
  };
  b.evaluate = [obj = b.objective](const Vec& x) {
    Vec y(2);
    y[0] = x[0] + x[1];
    y[1] = (x[0] - x[1]) * (x[0] - x[1]);
    return std::make_pair(y, obj.value(x, y));
  };
  return b;
}

Benchmark make_exp_composite() {
  // y = (x1 + x2, x1 - x2), f = exp(a^T y) = exp(0.75 x1 + 0.25 x2);
  // minimized at (-1, -1) with value exp(-1).
  Vec a(2);
  a << 0.5, 0.25;
  Vec lo = Vec::Constant(2, -1.0), hi = Vec::Constant(2, 1.0);
  Benchmark b{.name = "exp-composite",
              .domain = BoxDomain(lo, hi),
              .output_dim = 2,
              .objective = {},
              .evaluate = {},
              .optimum_value = std::exp(-1.0),
              .description = "f = exp(a^T y), smooth nonlinearity; optimum exp(-1)"};
  b.objective.output_dim = 2;
  b.objective.g = [](const Vec&) { return 0.0; };
  b.objective.h = [a](const Vec&, const Vec& y) { return std::exp(a.dot(y)); };
  b.objective.grad_h_y = [a](const Vec&, const Vec& y) { return Vec(a * std::exp(a.dot(y))); };
  b.evaluate = [obj = b.objective](const Vec& x) {
    Vec y(2);
    y[0] = x[0] + x[1];
    y[1] = x[0] - x[1];
    return std::make_pair(y, obj.value(x, y));
  };
  return b;
}

}  // namespace

std::vector<std::string> benchmark_names() {
  return {"flowsheet", "sphere-composite", "penalty-quadratic", "exp-composite"};
}

Benchmark get_benchmark(const std::string& name) {
  if (name == "flowsheet") return make_flowsheet_benchmark(FlowsheetParams{}, CostWeights{});
  if (name == "sphere-composite") return make_sphere_composite();
  if (name == "penalty-quadratic") return make_penalty_quadratic();
  if (name == "exp-composite") return make_exp_composite();
  throw ConfigError("unknown benchmark: " + name);
}

}  // namespace bois
