#pragma once

#include "bois/gp.hpp"

#include <vector>

namespace bois {

// Gaussian over a vector y at a single input: mean and *diagonal* covariance.
// Outputs are modeled by independent GPs, so cross-output covariance is zero.
struct GaussianVector {
  Vec mean;  // d_y
  Vec var;   // d_y, each >= 0
};

// Posterior of the bank at n query points: per-output joint covariances.
struct BankPosterior {
  Mat mean;               // n x d_y
  std::vector<Mat> cov;   // d_y entries, each n x n
};

class GpBank {
 public:
  GpBank() = default;
  explicit GpBank(std::vector<GPModel> models) : models_(std::move(models)) {}

  int output_dim() const { return static_cast<int>(models_.size()); }
  const GPModel& output(int j) const { return models_.at(j); }
  const std::vector<GPModel>& models() const { return models_; }

  // Mean vector and diagonal variance of y at one point.
  GaussianVector at(const Vec& x) const;

  BankPosterior posterior(const Mat& queries) const;

 private:
  std::vector<GPModel> models_;
};

// One independent single-output fit per output column. Per-output failures
// are rethrown tagged with the output index. Fits may run in parallel;
// results do not depend on scheduling.
GpBank fit_bank(const Dataset& data, KernelFamily family, const FitOptions& opts = {},
                int parallelism = 1);

// Draws count x d_y samples y_s = m + sqrt(var) ∘ z_s. Deterministic given seed.
Mat sample_gaussian(const GaussianVector& g, int count, std::uint64_t seed);

}  // namespace bois
