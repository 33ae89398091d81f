#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace bois {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Bad argument shapes/values detected before any numerics run.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A matrix that should be factorizable is not, even after jitter escalation.
struct ConditioningError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A user-supplied function produced a non-finite value.
struct EvaluationError : std::runtime_error {
  EvaluationError(const std::string& msg, Vec where = Vec())
      : std::runtime_error(msg), offending_input(std::move(where)) {}
  Vec offending_input;
};

// Invalid configuration (unknown engine/benchmark, bad config file, ...).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fixed-point solve did not converge; carries the residual history.
struct SimulationError : std::runtime_error {
  SimulationError(const std::string& msg, std::vector<double> residuals)
      : std::runtime_error(msg), residual_history(std::move(residuals)) {}
  std::vector<double> residual_history;
};

// Axis-aligned box search space, lower[i] < upper[i].
struct BoxDomain {
  Vec lower;
  Vec upper;

  BoxDomain(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() == 0 || lower.size() != upper.size())
      throw ShapeError("BoxDomain: bounds must be non-empty and equally sized");
    for (Eigen::Index i = 0; i < lower.size(); ++i)
      if (!(lower[i] < upper[i]))
        throw ShapeError("BoxDomain: lower[" + std::to_string(i) + "] must be < upper[" +
                         std::to_string(i) + "]");
  }

  int dim() const { return static_cast<int>(lower.size()); }
  Vec range() const { return upper - lower; }

  bool contains(const Vec& x, double tol = 0.0) const {
    if (x.size() != lower.size()) return false;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
    return true;
  }

  Vec clamp(const Vec& x) const {
    return x.cwiseMax(lower).cwiseMin(upper);
  }
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ShapeError(msg);
}

}  // namespace bois
