#pragma once

#include "bois/flowsheet.hpp"
#include "bois/moments.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bois {

// A closed benchmark: system evaluation (y, f), the known outer objective,
// the search box, and the optimum value when it is known in closed form.
struct Benchmark {
  std::string name;
  BoxDomain domain;
  int output_dim = 0;
  CompositeObjective objective;
  std::function<std::pair<Vec, double>(const Vec&)> evaluate;
  std::optional<double> optimum_value;
  std::string description;
};

// Registry: flowsheet, sphere-composite, penalty-quadratic, exp-composite.
// Throws ConfigError for unknown names.
Benchmark get_benchmark(const std::string& name);

std::vector<std::string> benchmark_names();

// Flowsheet benchmark with explicit parameters (defaults otherwise).
Benchmark make_flowsheet_benchmark(const FlowsheetParams& params, const CostWeights& weights);

}  // namespace bois
