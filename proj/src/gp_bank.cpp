#include "bois/gp_bank.hpp"

#include "bois/rng.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

namespace bois {

GaussianVector GpBank::at(const Vec& x) const {
  require(!models_.empty(), "GpBank::at: empty bank");
  GaussianVector g;
  g.mean.resize(output_dim());
  g.var.resize(output_dim());
  Mat q(1, x.size());
  q.row(0) = x.transpose();
  for (int j = 0; j < output_dim(); ++j) {
    Vec m, v;
    models_[j].predict(q, m, v);
    g.mean[j] = m[0];
    g.var[j] = v[0];
  }
  return g;
}

BankPosterior GpBank::posterior(const Mat& queries) const {
  require(!models_.empty(), "GpBank::posterior: empty bank");
  BankPosterior post;
  post.mean.resize(queries.rows(), output_dim());
  post.cov.reserve(output_dim());
  for (int j = 0; j < output_dim(); ++j) {
    PosteriorGaussian p = models_[j].posterior(queries);
    post.mean.col(j) = p.mean;
    post.cov.push_back(std::move(p.cov));
  }
  return post;
}

GpBank fit_bank(const Dataset& data, KernelFamily family, const FitOptions& opts,
                int parallelism) {
  require(data.output_dim() >= 1, "fit_bank: need at least one output");
  const int d_y = data.output_dim();
  std::vector<GPModel> models(d_y);
  std::vector<std::exception_ptr> errors(d_y);

  auto fit_one = [&](int j) {
    Dataset single{data.inputs, data.outputs.col(j)};
    FitOptions o = opts;
    o.seed = derive_seed(opts.seed, static_cast<std::uint64_t>(j));
    try {
      models[j] = fit(single, family, o);
    } catch (...) {
      errors[j] = std::current_exception();
    }
  };

  if (parallelism <= 1 || d_y == 1) {
    for (int j = 0; j < d_y; ++j) fit_one(j);
  } else {
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int j = next.fetch_add(1); j < d_y; j = next.fetch_add(1)) fit_one(j);
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min(parallelism, d_y);
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (int j = 0; j < d_y; ++j) {
    if (errors[j]) {
      try {
        std::rethrow_exception(errors[j]);
      } catch (const std::exception& e) {
        throw ConditioningError("fit_bank: output " + std::to_string(j) + ": " + e.what());
      }
    }
  }
  return GpBank(std::move(models));
}

Mat sample_gaussian(const GaussianVector& g, int count, std::uint64_t seed) {
  require(count >= 1, "sample_gaussian: count must be >= 1");
  require(g.mean.size() == g.var.size(), "sample_gaussian: mean/var size mismatch");
  const Eigen::Index d = g.mean.size();
  Vec sd(d);
  for (Eigen::Index i = 0; i < d; ++i) sd[i] = g.var[i] > 0.0 ? std::sqrt(g.var[i]) : 0.0;
  Rng rng(derive_seed(seed, 0x5a3));
  Mat draws(count, d);
  for (int s = 0; s < count; ++s)
    for (Eigen::Index i = 0; i < d; ++i) draws(s, i) = g.mean[i] + sd[i] * rng.normal();
  return draws;
}

}  // namespace bois
