#pragma once

#include "bois/common.hpp"
#include "bois/kernel.hpp"

#include <cstdint>
#include <optional>

namespace bois {

// Training data. `inputs` is l x d_x (rows are points), `outputs` is l x d_y
// (d_y = 1 for a single-output model).
struct Dataset {
  Mat inputs;
  Mat outputs;

  Eigen::Index size() const { return inputs.rows(); }
  int input_dim() const { return static_cast<int>(inputs.cols()); }
  int output_dim() const { return static_cast<int>(outputs.cols()); }
};

// Gaussian posterior of a single-output model at n query points.
struct PosteriorGaussian {
  Vec mean;  // n
  Mat cov;   // n x n, symmetric, PSD up to jitter
};

struct FitOptions {
  int restarts = 8;
  std::uint64_t seed = 0;
  int max_evals_per_restart = 400;
  // log10 bounds for the likelihood search, on normalized inputs and
  // standardized outputs. Lengthscales and signal std live in
  // [10^scale_lo, 10^scale_hi].
  double log10_scale_lo = -3.0;
  double log10_scale_hi = 3.0;
  bool learn_noise = true;
  double fixed_noise_variance = 0.0;  // used when learn_noise is false
  double log10_noise_lo = -12.0;      // noise variance bounds when learned
  double log10_noise_hi = 0.0;
  // Optional warm start (log10 of lengthscales..., signal_variance[, noise]),
  // used as the first restart. Refits inside a BO loop pass the previous fit.
  std::optional<Vec> warm_start;
};

struct ConditionOptions {
  bool standardize_outputs = false;
  bool normalize_inputs = false;
  // Escalates x10 until the factorization succeeds. The low start matters:
  // likelihood-optimal hyperparameters for noise-free data sit on a ridge of
  // large signal variance where a 1e-10 relative floor already costs ~1e-4 of
  // interpolation accuracy.
  double jitter_start_rel = 1e-13;  // relative to signal_variance
  double jitter_max_rel = 1e-4;
  // Explicit frames (deserialization) take precedence over the flags above.
  std::optional<Vec> input_offset;
  std::optional<Vec> input_scale;
  std::optional<double> output_mean;
  std::optional<double> output_std;
};

// An immutable conditioned GP. Prediction and sampling are const and safe to
// call concurrently.
class GPModel {
 public:
  GPModel() = default;

  const KernelSpec& kernel() const { return spec_; }
  int input_dim() const { return static_cast<int>(train_inputs_.cols()); }
  Eigen::Index train_count() const { return train_inputs_.rows(); }
  const Mat& train_inputs() const { return train_inputs_; }
  const Vec& train_outputs() const { return train_outputs_; }
  const Vec& input_offset() const { return in_offset_; }
  const Vec& input_scale() const { return in_scale_; }
  double output_mean() const { return out_mean_; }
  double output_std() const { return out_std_; }
  double jitter() const { return jitter_; }
  double log_marginal_likelihood() const { return lml_; }
  const Mat& cholesky_factor() const { return chol_L_; }

  // Posterior mean/covariance at query points (rows), in original output
  // units. Uses the cached factorization; no explicit inverse is formed.
  PosteriorGaussian posterior(const Mat& queries) const;

  // Marginal mean/variance only; cheaper when covariances are not needed.
  void predict(const Mat& queries, Vec& mean, Vec& var) const;

  friend GPModel condition(const Mat&, const Vec&, const KernelSpec&, const ConditionOptions&);

 private:
  KernelSpec spec_;     // lengthscales in normalized input units
  Mat train_inputs_;    // raw
  Vec train_outputs_;   // raw
  Mat norm_inputs_;     // (x - offset) / scale, cached
  Vec in_offset_, in_scale_;
  double out_mean_ = 0.0, out_std_ = 1.0;
  Mat chol_L_;          // lower factor of K + (noise + jitter) I
  Vec alpha_;           // (LL^T)^{-1} y_standardized
  double jitter_ = 0.0;
  double lml_ = 0.0;
};

// Conditions a GP with the given hyperparameters (no likelihood search).
GPModel condition(const Mat& inputs, const Vec& outputs, const KernelSpec& spec,
                  const ConditionOptions& opts = {});

// Maximum log marginal likelihood fit via multi-start pattern search in
// log10 hyperparameter space. Outputs are standardized and inputs normalized
// per dimension internally; the returned model predicts in original units.
// Deterministic for a given seed. Requires l >= 2.
GPModel fit(const Dataset& data, KernelFamily family, const FitOptions& opts = {});

// Draws `count` joint samples m + A z from the posterior, where A is a
// Cholesky factor of the covariance (jitter-escalated when needed; an exactly
// zero covariance yields the mean). Returns count x n. Deterministic given seed.
Mat sample_posterior(const PosteriorGaussian& post, int count, std::uint64_t seed);

// Lower-triangular factor of a PSD-up-to-jitter covariance. Escalates jitter
// from jitter_rel to jitter_max_rel (relative to the largest diagonal entry)
// before giving up.
Mat cholesky_with_jitter(const Mat& cov, double jitter_rel = 1e-10, double jitter_max_rel = 1e-4,
                         double* jitter_used = nullptr);

// Log marginal likelihood of (inputs, outputs) under the given spec; used by
// fit() and exposed for tests.
double log_marginal_likelihood(const Mat& inputs, const Vec& outputs, const KernelSpec& spec,
                               double jitter_rel = 1e-10);

}  // namespace bois
