#pragma once

#include "bois/common.hpp"
#include "bois/gp_bank.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace bois {

// Known outer objective split as f(x, y) = g(x) + h(x, y), where g collects
// the y-independent terms. An analytic gradient of h with respect to y is
// optional; central finite differences are used when it is absent.
struct CompositeObjective {
  std::function<double(const Vec& x)> g;
  std::function<double(const Vec& x, const Vec& y)> h;
  std::function<Vec(const Vec& x, const Vec& y)> grad_h_y;  // optional
  int output_dim = 0;  // d_y

  double value(const Vec& x, const Vec& y) const { return g(x) + h(x, y); }
};

// f = a^T y + b, exactly.
struct LinearObjective {
  Vec coeff;      // a
  double offset;  // b
};

CompositeObjective as_composite(const LinearObjective& lin);

enum class Engine { exact_linear, monte_carlo, bois };

std::string to_string(Engine e);
Engine engine_from_string(const std::string& name);

struct MomentEstimate {
  double mean = 0.0;
  double std = 0.0;  // >= 0
  Engine engine = Engine::exact_linear;
  long samples = 0;              // Monte Carlo only
  std::optional<Vec> reference;  // linearization point, bois only
};

// How the linearization point y0 is chosen from the posterior mean.
struct ReferencePolicy {
  enum class Mode { at_mean, relative_offset };
  Mode mode = Mode::at_mean;
  double delta = 1e-3;  // relative_offset: y0 = y_hat * (1 - delta), componentwise

  Vec resolve(const Vec& y_hat) const {
    if (mode == Mode::at_mean) return y_hat;
    require(std::isfinite(delta), "ReferencePolicy: delta must be finite");
    return y_hat * (1.0 - delta);
  }
};

// mean = a^T m + b, std = sqrt(a^T S a). Quadratic forms below -1e-12 (scaled)
// raise ConditioningError; tiny negatives clamp to zero.
MomentEstimate exact_linear_moments(const LinearObjective& lin, const Vec& mean_y,
                                    const Mat& cov_y);

// Sample estimate: S draws from the posterior of y pushed through f, sample
// mean and unbiased sample standard deviation. Deterministic given seed.
MomentEstimate mc_moments(const CompositeObjective& obj, const Vec& x, const GaussianVector& post,
                          long sample_count, std::uint64_t seed);

// Gradient of h with respect to y at y0. Analytic when supplied, otherwise
// central differences with step eps * max(|y0_i|, 1), eps = 1e-6.
Vec jacobian_y(const CompositeObjective& obj, const Vec& x, const Vec& y0);

// Closed-form moments of the linearization of f around y0 (one h evaluation
// and one Jacobian per call):
//   mean = J^T y_hat + g(x) + h(x, y0) - J^T y0
//   std  = sqrt(J^T diag(var) J)
MomentEstimate bois_moments(const CompositeObjective& obj, const Vec& x,
                            const GaussianVector& post, const ReferencePolicy& policy = {});

struct EngineConfig {
  Engine engine = Engine::bois;
  long mc_samples = 1000;
  std::uint64_t seed = 0;  // Monte Carlo base seed; per-point streams derived from it
  ReferencePolicy policy{};
  std::optional<LinearObjective> linear;  // required for exact_linear
};

using MomentEvaluator = std::function<MomentEstimate(const Vec& x, const GaussianVector& post)>;

// Uniform engine interface: returns a pure evaluator (safe for concurrent
// calls at different x; Monte Carlo streams are keyed on the query point).
MomentEvaluator make_engine(const CompositeObjective& obj, const EngineConfig& config);

}  // namespace bois
