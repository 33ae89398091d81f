#include "bois/gp.hpp"

#include "bois/pattern_search.hpp"
#include "bois/rng.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace bois {

Mat cholesky_with_jitter(const Mat& cov, double jitter_rel, double jitter_max_rel,
                         double* jitter_used) {
  const Eigen::Index n = cov.rows();
  require(cov.cols() == n, "cholesky_with_jitter: matrix must be square");
  const double scale = n > 0 ? cov.diagonal().cwiseAbs().maxCoeff() : 0.0;
  if (jitter_used) *jitter_used = 0.0;
  if (scale <= 0.0) return Mat::Zero(n, n);  // degenerate (zero) covariance

  double rel = jitter_rel;
  while (true) {
    Mat K = cov;
    K.diagonal().array() += rel * scale;
    Eigen::LLT<Mat> llt(K);
    if (llt.info() == Eigen::Success) {
      if (jitter_used) *jitter_used = rel * scale;
      return llt.matrixL();
    }
    if (rel >= jitter_max_rel)
      throw ConditioningError("cholesky_with_jitter: factorization failed at max jitter");
    rel = std::min(jitter_max_rel, std::max(rel * 10.0, 1e-12));
  }
}

namespace {

struct Factorization {
  Mat L;
  Vec alpha;
  double jitter = 0.0;
  double lml = 0.0;
};

// Factorizes K(X,X) + (noise + jitter) I and computes the log marginal
// likelihood of y. Throws ConditioningError if jitter escalation fails.
Factorization factorize(const Mat& X, const Vec& y, const KernelSpec& spec, double jitter_rel,
                        double jitter_max_rel) {
  const Eigen::Index n = X.rows();
  Mat K = gram(spec, X);
  K.diagonal().array() += spec.noise_variance;

  Factorization fac;
  double rel = jitter_rel;
  while (true) {
    Mat Kj = K;
    Kj.diagonal().array() += rel * spec.signal_variance;
    Eigen::LLT<Mat> llt(Kj);
    if (llt.info() == Eigen::Success) {
      fac.L = llt.matrixL();
      fac.jitter = rel * spec.signal_variance;
      fac.alpha = llt.solve(y);
      double log_det = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(fac.L(i, i));
      fac.lml = -0.5 * y.dot(fac.alpha) - log_det - 0.5 * n * std::log(2.0 * M_PI);
      return fac;
    }
    if (rel >= jitter_max_rel) throw ConditioningError("GP factorization failed even at max jitter");
    rel = std::min(jitter_max_rel, std::max(rel * 10.0, 1e-12));
  }
}

void check_duplicate_rows(const Mat& X, double noise_variance) {
  if (noise_variance > 0.0) return;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = i + 1; j < X.rows(); ++j)
      if ((X.row(i) - X.row(j)).cwiseAbs().maxCoeff() == 0.0)
        throw ShapeError("dataset has identical input rows " + std::to_string(i) + " and " +
                         std::to_string(j) + " with zero noise");
}

}  // namespace

double log_marginal_likelihood(const Mat& inputs, const Vec& outputs, const KernelSpec& spec,
                               double jitter_rel) {
  return factorize(inputs, outputs, spec, jitter_rel, 1e-4).lml;
}

GPModel condition(const Mat& inputs, const Vec& outputs, const KernelSpec& spec,
                  const ConditionOptions& opts) {
  require(inputs.rows() >= 1, "condition: need at least one training point");
  require(inputs.rows() == outputs.size(), "condition: inputs/outputs row mismatch");
  require(inputs.cols() == spec.lengthscales.size(),
          "condition: input dimension does not match kernel lengthscales");
  spec.validate();
  check_duplicate_rows(inputs, spec.noise_variance);

  GPModel m;
  m.spec_ = spec;
  m.train_inputs_ = inputs;
  m.train_outputs_ = outputs;

  const int d = static_cast<int>(inputs.cols());
  m.in_offset_ = Vec::Zero(d);
  m.in_scale_ = Vec::Ones(d);
  if (opts.input_offset && opts.input_scale) {
    require(opts.input_offset->size() == d && opts.input_scale->size() == d,
            "condition: explicit input frame dimension mismatch");
    m.in_offset_ = *opts.input_offset;
    m.in_scale_ = *opts.input_scale;
  } else if (opts.normalize_inputs) {
    for (int j = 0; j < d; ++j) {
      const double lo = inputs.col(j).minCoeff(), hi = inputs.col(j).maxCoeff();
      m.in_offset_[j] = lo;
      m.in_scale_[j] = (hi - lo) > 1e-300 ? (hi - lo) : 1.0;
    }
  }
  m.out_mean_ = 0.0;
  m.out_std_ = 1.0;
  if (opts.output_mean && opts.output_std) {
    m.out_mean_ = *opts.output_mean;
    m.out_std_ = *opts.output_std;
  } else if (opts.standardize_outputs) {
    m.out_mean_ = outputs.mean();
    if (outputs.size() > 1) {
      const double var =
          (outputs.array() - m.out_mean_).square().sum() / double(outputs.size() - 1);
      m.out_std_ = var > 1e-300 ? std::sqrt(var) : 1.0;
    }
  }

  m.norm_inputs_ = inputs;
  for (int j = 0; j < d; ++j)
    m.norm_inputs_.col(j) = (inputs.col(j).array() - m.in_offset_[j]) / m.in_scale_[j];
  const Vec y_std = (outputs.array() - m.out_mean_) / m.out_std_;

  Factorization fac =
      factorize(m.norm_inputs_, y_std, m.spec_, opts.jitter_start_rel, opts.jitter_max_rel);
  m.chol_L_ = std::move(fac.L);
  m.alpha_ = std::move(fac.alpha);
  m.jitter_ = fac.jitter;
  m.lml_ = fac.lml;
  return m;
}

PosteriorGaussian GPModel::posterior(const Mat& queries) const {
  require(train_inputs_.rows() >= 1, "posterior: model is not conditioned");
  require(queries.cols() == input_dim(), "posterior: query dimension mismatch");

  Mat Qn = queries;
  for (int j = 0; j < input_dim(); ++j)
    Qn.col(j) = (queries.col(j).array() - in_offset_[j]) / in_scale_[j];

  const Mat Ks = cross_gram(spec_, norm_inputs_, Qn);  // l x n
  PosteriorGaussian post;
  post.mean = out_mean_ + out_std_ * (Ks.transpose() * alpha_).array();

  const Mat V = chol_L_.triangularView<Eigen::Lower>().solve(Ks);  // l x n
  Mat cov = gram(spec_, Qn) - V.transpose() * V;
  cov = 0.5 * (cov + cov.transpose());  // symmetrize roundoff
  post.cov = (out_std_ * out_std_) * cov;
  return post;
}

void GPModel::predict(const Mat& queries, Vec& mean, Vec& var) const {
  require(train_inputs_.rows() >= 1, "predict: model is not conditioned");
  require(queries.cols() == input_dim(), "predict: query dimension mismatch");

  const Eigen::Index n = queries.rows();
  Mat Qn = queries;
  for (int j = 0; j < input_dim(); ++j)
    Qn.col(j) = (queries.col(j).array() - in_offset_[j]) / in_scale_[j];

  const Mat Ks = cross_gram(spec_, norm_inputs_, Qn);
  mean = out_mean_ + out_std_ * (Ks.transpose() * alpha_).array();
  const Mat V = chol_L_.triangularView<Eigen::Lower>().solve(Ks);
  var.resize(n);
  const double s2 = out_std_ * out_std_;
  for (Eigen::Index i = 0; i < n; ++i)
    var[i] = s2 * std::max(0.0, spec_.signal_variance - V.col(i).squaredNorm());
}

namespace {

KernelSpec spec_from_log10(const Vec& theta, KernelFamily family, int d, bool learn_noise,
                           double fixed_noise) {
  KernelSpec s;
  s.family = family;
  s.lengthscales = Vec(d);
  for (int i = 0; i < d; ++i) s.lengthscales[i] = std::pow(10.0, theta[i]);
  s.signal_variance = std::pow(10.0, theta[d]);
  s.noise_variance = learn_noise ? std::pow(10.0, theta[d + 1]) : fixed_noise;
  return s;
}

}  // namespace

GPModel fit(const Dataset& data, KernelFamily family, const FitOptions& opts) {
  require(data.size() >= 2, "fit: need at least 2 training points");
  require(data.output_dim() == 1, "fit: single-output fit expects one output column");
  const int d = data.input_dim();
  const Vec y = data.outputs.col(0);

  // Standardize/normalize once; the likelihood search runs in this frame.
  Vec in_offset(d), in_scale(d);
  for (int j = 0; j < d; ++j) {
    const double lo = data.inputs.col(j).minCoeff(), hi = data.inputs.col(j).maxCoeff();
    in_offset[j] = lo;
    in_scale[j] = (hi - lo) > 1e-300 ? (hi - lo) : 1.0;
  }
  Mat Xn = data.inputs;
  for (int j = 0; j < d; ++j) Xn.col(j) = (Xn.col(j).array() - in_offset[j]) / in_scale[j];
  const double out_mean = y.mean();
  double out_var = (y.array() - out_mean).square().sum() / double(y.size() - 1);
  const double out_std = out_var > 1e-300 ? std::sqrt(out_var) : 1.0;
  const Vec y_std = (y.array() - out_mean) / out_std;

  const int n_params = d + 1 + (opts.learn_noise ? 1 : 0);
  Vec lo(n_params), hi(n_params);
  for (int i = 0; i < d; ++i) {
    lo[i] = opts.log10_scale_lo;
    hi[i] = opts.log10_scale_hi;
  }
  lo[d] = 2.0 * opts.log10_scale_lo;  // variance = std^2
  hi[d] = 2.0 * opts.log10_scale_hi;
  if (opts.learn_noise) {
    lo[d + 1] = opts.log10_noise_lo;
    hi[d + 1] = opts.log10_noise_hi;
  }
  const BoxDomain box(lo, hi);

  auto neg_lml = [&](const Vec& theta) -> double {
    const KernelSpec s =
        spec_from_log10(theta, family, d, opts.learn_noise, opts.fixed_noise_variance);
    try {
      return -factorize(Xn, y_std, s, 1e-10, 1e-4).lml;
    } catch (const ConditioningError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  PatternSearchOptions ps;
  ps.max_evals = opts.max_evals_per_restart;
  ps.tol_rel = 1e-3;
  ps.on_non_finite = NonFiniteAction::treat_as_inf;

  Rng rng(derive_seed(opts.seed, 0xf17));
  Vec best_theta;
  double best_value = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    Vec start(n_params);
    if (r == 0 && opts.warm_start && opts.warm_start->size() == n_params) {
      start = box.clamp(*opts.warm_start);
    } else if (r == 0) {
      // conventional start: moderate lengthscales, unit signal, small noise
      for (int i = 0; i < d; ++i) start[i] = std::log10(0.3);
      start[d] = 0.0;
      if (opts.learn_noise) start[d + 1] = -6.0;
    } else {
      // informative random starts; the search may still wander to the bounds
      for (int i = 0; i < d; ++i) start[i] = rng.uniform(-1.5, 1.0);
      start[d] = rng.uniform(-2.0, 2.0);
      if (opts.learn_noise) start[d + 1] = rng.uniform(-9.0, -1.0);
    }
    const PatternSearchResult res = pattern_search(neg_lml, box, start, ps);
    if (!res.aborted && res.value < best_value) {
      best_value = res.value;
      best_theta = res.x;
    }
  }
  if (!best_theta.size())
    throw ConditioningError("fit: likelihood search failed at every restart");

  const KernelSpec best =
      spec_from_log10(best_theta, family, d, opts.learn_noise, opts.fixed_noise_variance);

  ConditionOptions co;
  co.input_offset = in_offset;
  co.input_scale = in_scale;
  co.output_mean = out_mean;
  co.output_std = out_std;
  return condition(data.inputs, y, best, co);
}

Mat sample_posterior(const PosteriorGaussian& post, int count, std::uint64_t seed) {
  require(count >= 1, "sample_posterior: count must be >= 1");
  require(post.cov.rows() == post.mean.size() && post.cov.cols() == post.mean.size(),
          "sample_posterior: covariance/mean size mismatch");
  const Eigen::Index n = post.mean.size();
  const Mat A = cholesky_with_jitter(post.cov);
  Rng rng(derive_seed(seed, 0x5a3));
  Mat draws(count, n);
  for (int s = 0; s < count; ++s)
    draws.row(s) = (post.mean + A * rng.normal_vec(n)).transpose();
  return draws;
}

}  // namespace bois
