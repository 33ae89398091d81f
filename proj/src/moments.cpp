#include "bois/moments.hpp"

#include "bois/rng.hpp"

#include <cmath>
#include <sstream>

namespace bois {

std::string to_string(Engine e) {
  switch (e) {
    case Engine::exact_linear: return "exact-linear";
    case Engine::monte_carlo: return "monte-carlo";
    case Engine::bois: return "bois";
  }
  return "?";
}

Engine engine_from_string(const std::string& name) {
  if (name == "exact-linear") return Engine::exact_linear;
  if (name == "monte-carlo") return Engine::monte_carlo;
  if (name == "bois") return Engine::bois;
  throw ConfigError("unknown engine: " + name);
}

CompositeObjective as_composite(const LinearObjective& lin) {
  CompositeObjective obj;
  const Vec a = lin.coeff;
  const double b = lin.offset;
  obj.g = [b](const Vec&) { return b; };
  obj.h = [a](const Vec&, const Vec& y) { return a.dot(y); };
  obj.grad_h_y = [a](const Vec&, const Vec&) { return a; };
  obj.output_dim = static_cast<int>(a.size());
  return obj;
}

namespace {

double quadratic_form_std(double q, double scale) {
  const double tol = 1e-12 * std::max(1.0, scale);
  if (q < -tol)
    throw ConditioningError("negative variance quadratic form: " + std::to_string(q));
  return std::sqrt(std::max(0.0, q));
}

}  // namespace

MomentEstimate exact_linear_moments(const LinearObjective& lin, const Vec& mean_y,
                                    const Mat& cov_y) {
  require(lin.coeff.size() == mean_y.size(), "exact_linear_moments: coeff/mean size mismatch");
  require(cov_y.rows() == mean_y.size() && cov_y.cols() == mean_y.size(),
          "exact_linear_moments: covariance size mismatch");
  MomentEstimate est;
  est.engine = Engine::exact_linear;
  est.mean = lin.coeff.dot(mean_y) + lin.offset;
  const double q = lin.coeff.dot(cov_y * lin.coeff);
  const double scale =
      lin.coeff.squaredNorm() * (cov_y.size() ? cov_y.diagonal().cwiseAbs().maxCoeff() : 0.0);
  est.std = quadratic_form_std(q, scale);
  return est;
}

MomentEstimate mc_moments(const CompositeObjective& obj, const Vec& x, const GaussianVector& post,
                          long sample_count, std::uint64_t seed) {
  require(sample_count >= 2, "mc_moments: need at least 2 samples");
  require(post.mean.size() == post.var.size(), "mc_moments: posterior mean/var size mismatch");

  const Eigen::Index d = post.mean.size();
  Vec sd(d);
  for (Eigen::Index i = 0; i < d; ++i) sd[i] = post.var[i] > 0.0 ? std::sqrt(post.var[i]) : 0.0;

  const double gx = obj.g(x);
  Rng rng(derive_seed(seed, 0x5a3));
  Vec y(d);
  // Welford accumulation; storing 1e6 samples for a two-pass estimate is wasteful
  double m = 0.0, m2 = 0.0;
  for (long s = 0; s < sample_count; ++s) {
    for (Eigen::Index i = 0; i < d; ++i) y[i] = post.mean[i] + sd[i] * rng.normal();
    const double f = gx + obj.h(x, y);
    if (!std::isfinite(f))
      throw EvaluationError("mc_moments: objective returned non-finite value at sample " +
                                std::to_string(s),
                            y);
    const double delta = f - m;
    m += delta / double(s + 1);
    m2 += delta * (f - m);
  }

  MomentEstimate est;
  est.engine = Engine::monte_carlo;
  est.samples = sample_count;
  est.mean = m;
  est.std = std::sqrt(std::max(0.0, m2 / double(sample_count - 1)));
  return est;
}

Vec jacobian_y(const CompositeObjective& obj, const Vec& x, const Vec& y0) {
  require(obj.output_dim == y0.size(), "jacobian_y: y0 dimension mismatch");
  if (obj.grad_h_y) {
    Vec j = obj.grad_h_y(x, y0);
    require(j.size() == y0.size(), "jacobian_y: analytic gradient has wrong dimension");
    return j;
  }
  constexpr double eps = 1e-6;
  Vec j(y0.size());
  Vec y = y0;
  for (Eigen::Index i = 0; i < y0.size(); ++i) {
    const double step = eps * std::max(std::abs(y0[i]), 1.0);
    y[i] = y0[i] + step;
    const double hp = obj.h(x, y);
    y[i] = y0[i] - step;
    const double hm = obj.h(x, y);
    y[i] = y0[i];
    if (!std::isfinite(hp) || !std::isfinite(hm))
      throw EvaluationError("jacobian_y: non-finite probe at component " + std::to_string(i), y);
    j[i] = (hp - hm) / (2.0 * step);
  }
  return j;
}

MomentEstimate bois_moments(const CompositeObjective& obj, const Vec& x,
                            const GaussianVector& post, const ReferencePolicy& policy) {
  require(post.mean.size() == obj.output_dim, "bois_moments: posterior dimension mismatch");
  const Vec& y_hat = post.mean;
  const Vec y0 = policy.resolve(y_hat);

  const Vec j = jacobian_y(obj, x, y0);
  const double h0 = obj.h(x, y0);
  if (!std::isfinite(h0)) throw EvaluationError("bois_moments: h(x, y0) is non-finite", y0);

  MomentEstimate est;
  est.engine = Engine::bois;
  est.reference = y0;
  // grouping the two dot products first lets them cancel exactly when y0 = y_hat
  est.mean = (j.dot(y_hat) - j.dot(y0)) + obj.g(x) + h0;
  double q = 0.0, scale = 0.0;
  for (Eigen::Index i = 0; i < j.size(); ++i) {
    q += j[i] * j[i] * post.var[i];
    scale = std::max(scale, j[i] * j[i] * std::abs(post.var[i]));
  }
  est.std = quadratic_form_std(q, scale);
  return est;
}

MomentEvaluator make_engine(const CompositeObjective& obj, const EngineConfig& config) {
  switch (config.engine) {
    case Engine::exact_linear: {
      if (!config.linear)
        throw ConfigError("exact-linear engine requires a LinearObjective");
      const LinearObjective lin = *config.linear;
      return [lin](const Vec&, const GaussianVector& post) {
        return exact_linear_moments(lin, post.mean, Mat(post.var.asDiagonal()));
      };
    }
    case Engine::monte_carlo: {
      const long samples = config.mc_samples;
      const std::uint64_t base = config.seed;
      if (samples < 2) throw ConfigError("monte-carlo engine requires mc_samples >= 2");
      return [obj, samples, base](const Vec& x, const GaussianVector& post) {
        return mc_moments(obj, x, post, samples, hash_point(base, x));
      };
    }
    case Engine::bois: {
      const ReferencePolicy policy = config.policy;
      return [obj, policy](const Vec& x, const GaussianVector& post) {
        return bois_moments(obj, x, post, policy);
      };
    }
  }
  throw ConfigError("unknown engine tag");
}

}  // namespace bois
