#include "bois/moments.hpp"

#include "bois/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace bois;

TEST_SUITE_BEGIN("moments");

namespace {

CompositeObjective scalar_objective(std::function<double(double)> fn, double g_const = 0.0) {
  CompositeObjective obj;
  obj.output_dim = 1;
  obj.g = [g_const](const Vec&) { return g_const; };
  obj.h = [fn](const Vec&, const Vec& y) { return fn(y[0]); };
  return obj;
}

GaussianVector gaussian1(double mean, double var) {
  GaussianVector g;
  g.mean = Vec::Constant(1, mean);
  g.var = Vec::Constant(1, var);
  return g;
}

const Vec kOrigin = Vec::Zero(1);

}  // namespace

TEST_CASE("exact linear: constant function") {
  LinearObjective lin{Vec::Zero(3), 7.0};
  const MomentEstimate est =
      exact_linear_moments(lin, Vec::Ones(3), Mat::Identity(3, 3) * 5.0);
  CHECK(est.mean == 7.0);
  CHECK(est.std == 0.0);
}

TEST_CASE("exact linear: unit covariance arithmetic") {
  Vec a(2);
  a << 1.0, 2.0;
  LinearObjective lin{a, 1.0};
  const MomentEstimate est = exact_linear_moments(lin, Vec::Ones(2), Mat::Identity(2, 2));
  CHECK(est.mean == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(est.std == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
}

TEST_CASE("exact linear agrees with a large Monte Carlo run") {
  Rng rng(314);
  const int d = 4;
  Vec a = rng.normal_vec(d);
  const double b = rng.normal();
  Vec mean = rng.normal_vec(d);
  // diagonal covariance so the sampling route matches the bank structure
  Vec var(d);
  for (int i = 0; i < d; ++i) var[i] = 0.3 + rng.uniform(0.0, 2.0);

  const MomentEstimate exact = exact_linear_moments({a, b}, mean, Mat(var.asDiagonal()));
  const MomentEstimate mc =
      mc_moments(as_composite({a, b}), kOrigin, GaussianVector{mean, var}, 1000000, 5150);
  const double se_mean = exact.std / std::sqrt(1e6);
  CHECK(std::abs(mc.mean - exact.mean) <= 4.0 * se_mean);
  CHECK(std::abs(mc.std - exact.std) <= 0.02 * exact.std);
}

TEST_CASE("negative variance forms are rejected, tiny negatives clamp") {
  Vec a(1);
  a << 1.0;
  Mat bad = Mat::Constant(1, 1, -1.0);
  CHECK_THROWS_AS(exact_linear_moments({a, 0.0}, Vec::Zero(1), bad), ConditioningError);
  Mat tiny = Mat::Constant(1, 1, -1e-18);
  const MomentEstimate est = exact_linear_moments({a, 0.0}, Vec::Zero(1), tiny);
  CHECK(est.std == 0.0);
}

TEST_CASE("mc: h constant in y is exact for any sample count") {
  CompositeObjective obj = scalar_objective([](double) { return 2.5; }, 1.0);
  const MomentEstimate est = mc_moments(obj, kOrigin, gaussian1(0.0, 3.0), 17, 1);
  CHECK(est.mean == 3.5);
  CHECK(est.std == 0.0);
}

TEST_CASE("mc: chi-square moments of y^2 under a standard normal") {
  CompositeObjective obj = scalar_objective([](double y) { return y * y; });
  const long S = 100000;
  const MomentEstimate est = mc_moments(obj, kOrigin, gaussian1(0.0, 1.0), S, 77);
  CHECK(std::abs(est.mean - 1.0) <= 3.0 * std::sqrt(2.0 / double(S)));
  CHECK(std::abs(est.std - std::sqrt(2.0)) <= 0.03 * std::sqrt(2.0));
}

TEST_CASE("mc: lognormal closed forms for exp(y)") {
  CompositeObjective obj = scalar_objective([](double y) { return std::exp(y); });
  const long S = 100000;
  const MomentEstimate est = mc_moments(obj, kOrigin, gaussian1(0.0, 0.25), S, 99);
  // closed forms: mean e^{1/8}, var (e^{1/4}-1) e^{1/4}
  const double mean_ref = 1.13314845306683;
  const double std_ref = 0.603900533210881;
  const double se_mean = std_ref / std::sqrt(double(S));
  // std error of the sample std from the lognormal fourth central moment
  const double m4 = 1.183564;
  const double se_std = std::sqrt((m4 - std_ref * std_ref * std_ref * std_ref) / double(S)) /
                        (2.0 * std_ref);
  CHECK(std::abs(est.mean - mean_ref) <= 3.0 * se_mean);
  CHECK(std::abs(est.std - std_ref) <= 3.0 * se_std);
}

TEST_CASE("mc: non-finite objective values carry the offending draw") {
  CompositeObjective obj = scalar_objective([](double y) { return std::log(y); });
  try {
    mc_moments(obj, kOrigin, gaussian1(0.0, 1.0), 100, 5);
    FAIL("expected an evaluation error");
  } catch (const EvaluationError& e) {
    CHECK(e.offending_input.size() == 1);
  }
}

TEST_CASE("mc requires at least two samples") {
  CompositeObjective obj = scalar_objective([](double y) { return y; });
  CHECK_THROWS_AS(mc_moments(obj, kOrigin, gaussian1(0.0, 1.0), 1, 0), ShapeError);
}

TEST_CASE("jacobian: linear map returns the coefficients") {
  Vec a(3);
  a << 1.5, -2.0, 0.25;
  CompositeObjective with_grad = as_composite({a, 0.0});
  CHECK((jacobian_y(with_grad, kOrigin, Vec::Ones(3)) - a).cwiseAbs().maxCoeff() == 0.0);

  CompositeObjective fd = with_grad;
  fd.grad_h_y = nullptr;  // force the finite-difference path
  CHECK((jacobian_y(fd, kOrigin, Vec::Ones(3)) - a).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("jacobian: quadratic slope at y0 = 2") {
  CompositeObjective obj = scalar_objective([](double y) { return y * y; });
  const Vec j = jacobian_y(obj, kOrigin, Vec::Constant(1, 2.0));
  CHECK(j[0] == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("jacobian: finite differences track analytic gradients of polynomials") {
  Rng rng(2025);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + static_cast<int>(rng.uniform(0, 4));
    Vec c1 = rng.normal_vec(d), c2 = rng.normal_vec(d), c3 = rng.normal_vec(d);
    CompositeObjective obj;
    obj.output_dim = d;
    obj.g = [](const Vec&) { return 0.0; };
    obj.h = [c1, c2, c3](const Vec&, const Vec& y) {
      double v = 0.0;
      for (Eigen::Index i = 0; i < y.size(); ++i)
        v += c1[i] * y[i] + c2[i] * y[i] * y[i] + c3[i] * y[i] * y[i] * y[i];
      return v;
    };
    CompositeObjective with_grad = obj;
    with_grad.grad_h_y = [c1, c2, c3](const Vec&, const Vec& y) {
      Vec g(y.size());
      for (Eigen::Index i = 0; i < y.size(); ++i)
        g[i] = c1[i] + 2.0 * c2[i] * y[i] + 3.0 * c3[i] * y[i] * y[i];
      return g;
    };
    const Vec y0 = rng.normal_vec(d);
    const Vec fd = jacobian_y(obj, kOrigin, y0);
    const Vec an = jacobian_y(with_grad, kOrigin, y0);
    for (int i = 0; i < d; ++i)
      CHECK(std::abs(fd[i] - an[i]) <= 1e-5 * std::max(1.0, std::abs(an[i])));
  }
}

TEST_CASE("bois at the mean reproduces f(x, y_hat) exactly") {
  CompositeObjective obj = scalar_objective([](double y) { return std::cos(y) + y * y; }, 0.7);
  const GaussianVector post = gaussian1(1.3, 0.4);
  const MomentEstimate est = bois_moments(obj, kOrigin, post);
  CHECK(est.mean == obj.value(kOrigin, post.mean));
}

TEST_CASE("bois on a linear objective equals the exact route") {
  Rng rng(88);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 1 + static_cast<int>(rng.uniform(0, 6));
    Vec a = rng.normal_vec(d);
    const double b = rng.normal();
    GaussianVector post;
    post.mean = rng.normal_vec(d);
    post.var = Vec(d);
    for (int i = 0; i < d; ++i) post.var[i] = rng.uniform(0.01, 2.0);

    const MomentEstimate exact = exact_linear_moments({a, b}, post.mean, Mat(post.var.asDiagonal()));
    ReferencePolicy offset;
    offset.mode = ReferencePolicy::Mode::relative_offset;
    offset.delta = 1e-3;
    for (const ReferencePolicy& policy : {ReferencePolicy{}, offset}) {
      const MomentEstimate lin = bois_moments(as_composite({a, b}), kOrigin, post, policy);
      CHECK(std::abs(lin.mean - exact.mean) <= 1e-12 * std::max(1.0, std::abs(exact.mean)));
      CHECK(std::abs(lin.std - exact.std) <= 1e-12 * std::max(1.0, exact.std));
    }
  }
}

TEST_CASE("all three engines agree on random linear objectives") {
  Rng rng(606);
  const long S = 100000;
  for (int trial = 0; trial < 5; ++trial) {
    const int d = 1 + static_cast<int>(rng.uniform(0, 5));
    Vec a = rng.normal_vec(d);
    const double b = rng.normal();
    GaussianVector post;
    post.mean = rng.normal_vec(d);
    post.var = Vec(d);
    for (int i = 0; i < d; ++i) post.var[i] = rng.uniform(0.05, 1.5);

    const MomentEstimate exact =
        exact_linear_moments({a, b}, post.mean, Mat(post.var.asDiagonal()));
    const MomentEstimate lin = bois_moments(as_composite({a, b}), kOrigin, post);
    CHECK(std::abs(lin.mean - exact.mean) <= 1e-12 * std::max(1.0, std::abs(exact.mean)));
    CHECK(std::abs(lin.std - exact.std) <= 1e-12 * exact.std);

    // linear of Gaussian is Gaussian: SE of the sample std is s / sqrt(2S)
    const MomentEstimate mc =
        mc_moments(as_composite({a, b}), kOrigin, post, S, derive_seed(42, trial));
    CHECK(std::abs(mc.mean - exact.mean) <= 3.0 * exact.std / std::sqrt(double(S)));
    CHECK(std::abs(mc.std - exact.std) <= 3.0 * exact.std / std::sqrt(2.0 * double(S)));
  }
}

TEST_CASE("bois small-variance exp case against the lognormal closed form") {
  CompositeObjective obj = scalar_objective([](double y) { return std::exp(y); });
  const MomentEstimate est = bois_moments(obj, kOrigin, gaussian1(0.0, 0.01));
  CHECK(est.mean == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(est.std == doctest::Approx(0.1).epsilon(1e-6));
  // true lognormal std at sigma^2 = 0.01
  const double std_ref = 0.100753029446204;
  CHECK(std::abs(est.std - std_ref) / std_ref < 0.01);
}

TEST_CASE("bois scaling: c*h multiplies the std by |c|") {
  Rng rng(19);
  CompositeObjective base;
  base.output_dim = 2;
  base.g = [](const Vec&) { return 0.0; };
  base.h = [](const Vec&, const Vec& y) { return std::sin(y[0]) + y[1] * y[1]; };
  GaussianVector post;
  post.mean = rng.normal_vec(2);
  post.var = Vec(2);
  post.var << 0.2, 0.7;

  const MomentEstimate ref = bois_moments(base, kOrigin, post);
  for (double c : {2.0, -4.0, 0.5, -0.25}) {  // powers of two keep scaling exact
    CompositeObjective scaled = base;
    scaled.h = [c, &base](const Vec& x, const Vec& y) { return c * base.h(x, y); };
    const MomentEstimate est = bois_moments(scaled, kOrigin, post);
    CHECK(est.std == std::abs(c) * ref.std);
  }
  for (double c : {1.7, -0.3}) {
    CompositeObjective scaled = base;
    scaled.h = [c, &base](const Vec& x, const Vec& y) { return c * base.h(x, y); };
    const MomentEstimate est = bois_moments(scaled, kOrigin, post);
    CHECK(est.std == doctest::Approx(std::abs(c) * ref.std).epsilon(1e-9));
  }
}

TEST_CASE("bois spends exactly one h evaluation plus the jacobian probes") {
  int h_calls = 0;
  CompositeObjective obj;
  obj.output_dim = 2;
  obj.g = [](const Vec&) { return 0.0; };
  obj.h = [&h_calls](const Vec&, const Vec& y) {
    ++h_calls;
    return y[0] * y[0] + std::exp(y[1]);
  };
  GaussianVector post;
  post.mean = Vec::Ones(2);
  post.var = Vec::Constant(2, 0.1);
  bois_moments(obj, kOrigin, post);
  CHECK(h_calls == 1 + 2 * 2);  // one direct evaluation + central differences

  h_calls = 0;
  obj.grad_h_y = [](const Vec&, const Vec& y) {
    Vec g(2);
    g << 2.0 * y[0], std::exp(y[1]);
    return g;
  };
  bois_moments(obj, kOrigin, post);
  CHECK(h_calls == 1);  // analytic gradient: one h evaluation only
}

TEST_CASE("degenerate posterior: all engines agree with zero spread") {
  CompositeObjective obj = scalar_objective([](double y) { return std::exp(y) + 1.0; }, 0.5);
  GaussianVector post = gaussian1(0.8, 0.0);
  const double f_at_mean = obj.value(kOrigin, post.mean);

  const MomentEstimate b = bois_moments(obj, kOrigin, post);
  CHECK(b.mean == doctest::Approx(f_at_mean).epsilon(1e-14));
  CHECK(b.std == 0.0);

  const MomentEstimate m = mc_moments(obj, kOrigin, post, 50, 3);
  CHECK(m.mean == doctest::Approx(f_at_mean).epsilon(1e-14));
  CHECK(m.std == 0.0);

  Vec a(1);
  a << 2.0;
  const MomentEstimate e =
      exact_linear_moments({a, 0.0}, post.mean, Mat::Zero(1, 1));
  CHECK(e.std == 0.0);
}

TEST_CASE("stationary point: first-order std collapses while sampling does not") {
  // f = y^2 at y_hat = 0 has zero slope, so the linearized spread is zero
  // even though the pushed-forward distribution has positive spread.
  CompositeObjective obj = scalar_objective([](double y) { return y * y; });
  const GaussianVector post = gaussian1(0.0, 1.0);
  const MomentEstimate lin = bois_moments(obj, kOrigin, post);
  const MomentEstimate mc = mc_moments(obj, kOrigin, post, 20000, 11);
  CHECK(lin.std == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(mc.std > 1.0);  // true value sqrt(2)
}

TEST_CASE("mc convergence: deviation from a reference shrinks with sample count") {
  CompositeObjective obj = scalar_objective([](double y) { return std::exp(y); });
  const GaussianVector post = gaussian1(0.2, 0.5);
  const MomentEstimate ref = mc_moments(obj, kOrigin, post, 1000000, 424242);

  const long sweep[] = {10, 100, 10000};
  double previous_median = std::numeric_limits<double>::infinity();
  for (long S : sweep) {
    std::vector<double> devs;
    for (std::uint64_t seed = 0; seed < 21; ++seed)
      devs.push_back(std::abs(mc_moments(obj, kOrigin, post, S, derive_seed(7, seed)).mean -
                              ref.mean));
    std::sort(devs.begin(), devs.end());
    const double median = devs[devs.size() / 2];
    CHECK(median < previous_median);
    previous_median = median;
  }
}

TEST_CASE("engine wrapper: bois delegates to the direct call") {
  CompositeObjective obj = scalar_objective([](double y) { return y * y * y; }, 2.0);
  EngineConfig cfg;
  cfg.engine = Engine::bois;
  const MomentEvaluator eval = make_engine(obj, cfg);
  const GaussianVector post = gaussian1(0.5, 0.3);
  const MomentEstimate a = eval(kOrigin, post);
  const MomentEstimate b = bois_moments(obj, kOrigin, post, cfg.policy);
  CHECK(a.mean == b.mean);
  CHECK(a.std == b.std);
}

TEST_CASE("engine wrapper: monte carlo is deterministic per point") {
  CompositeObjective obj = scalar_objective([](double y) { return std::sin(y); });
  EngineConfig cfg;
  cfg.engine = Engine::monte_carlo;
  cfg.mc_samples = 500;
  cfg.seed = 1234;
  const MomentEvaluator eval = make_engine(obj, cfg);
  const GaussianVector post = gaussian1(0.1, 0.9);
  const Vec x = Vec::Constant(1, 0.25);
  const MomentEstimate a = eval(x, post);
  const MomentEstimate b = eval(x, post);
  CHECK(a.mean == b.mean);
  CHECK(a.std == b.std);
  // a different query point draws a different stream
  const MomentEstimate c = eval(Vec::Constant(1, 0.26), post);
  CHECK(c.mean != a.mean);
}

TEST_CASE("engine wrapper: exact-linear without coefficients is a config error") {
  CompositeObjective obj = scalar_objective([](double y) { return y; });
  EngineConfig cfg;
  cfg.engine = Engine::exact_linear;
  CHECK_THROWS_AS(make_engine(obj, cfg), ConfigError);
}

TEST_CASE("reference policy resolves the offset componentwise") {
  ReferencePolicy policy;
  policy.mode = ReferencePolicy::Mode::relative_offset;
  policy.delta = 1e-3;
  Vec y(2);
  y << 2.0, -4.0;
  const Vec y0 = policy.resolve(y);
  CHECK(y0[0] == doctest::Approx(2.0 * (1.0 - 1e-3)).epsilon(1e-15));
  CHECK(y0[1] == doctest::Approx(-4.0 * (1.0 - 1e-3)).epsilon(1e-15));
  // y_hat - y0 = y_hat * delta, the documented offset
  CHECK((y - y0 - y * 1e-3).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_SUITE_END();
