#include "bois/bo.hpp"

#include "bois/rng.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bois {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::sbo: return "sbo";
    case Variant::mcbo: return "mcbo";
    case Variant::bois: return "bois";
  }
  return "?";
}

Variant variant_from_string(const std::string& name) {
  if (name == "sbo") return Variant::sbo;
  if (name == "mcbo") return Variant::mcbo;
  if (name == "bois") return Variant::bois;
  throw ConfigError("unknown variant: " + name);
}

std::pair<Vec, double> Oracle::evaluate(const Vec& x) {
  auto result = fn_(x);
  if (noise_) {
    Rng rng(derive_seed(noise_->seed, static_cast<std::uint64_t>(eval_count_)));
    for (Eigen::Index i = 0; i < result.first.size() && i < noise_->y_std.size(); ++i)
      result.first[i] += noise_->y_std[i] * rng.normal();
    result.second += noise_->f_std * rng.normal();
  }
  ++eval_count_;
  return result;
}

Mat initial_design(const BoxDomain& domain, const InitialDesign& design, std::uint64_t seed) {
  const int d = domain.dim();
  switch (design.mode) {
    case InitialDesign::Mode::single_point: {
      require(design.x0.size() == d, "initial_design: x0 dimension mismatch");
      require(domain.contains(design.x0, 1e-12), "initial_design: x0 outside the domain");
      Mat pts(1, d);
      pts.row(0) = design.x0.transpose();
      return pts;
    }
    case InitialDesign::Mode::random_n: {
      require(design.count >= 1, "initial_design: count must be >= 1");
      Rng rng(derive_seed(seed, 0xd51));
      Mat pts(design.count, d);
      for (int i = 0; i < design.count; ++i) pts.row(i) = rng.uniform_in(domain).transpose();
      return pts;
    }
    case InitialDesign::Mode::grid: {
      require(design.levels >= 2, "initial_design: grid needs >= 2 levels per dimension");
      double total = 1.0;
      for (int j = 0; j < d; ++j) total *= design.levels;
      if (total > 1e5) throw ConfigError("initial_design: grid larger than 1e5 points");
      const int n = static_cast<int>(total);
      Mat pts(n, d);
      for (int i = 0; i < n; ++i) {
        int code = i;
        for (int j = d - 1; j >= 0; --j) {
          const int level = code % design.levels;
          code /= design.levels;
          pts(i, j) = domain.lower[j] +
                      (domain.upper[j] - domain.lower[j]) * level / double(design.levels - 1);
        }
      }
      return pts;
    }
  }
  throw ConfigError("initial_design: unknown mode");
}

namespace {

// Degenerate one-point "model": prior mean pinned at the lone observation,
// unit signal. Enough to drive a pure-exploration second step.
GPModel one_point_model(const Mat& X, double y, KernelFamily family, const BoxDomain& domain) {
  KernelSpec spec;
  spec.family = family;
  spec.lengthscales = 0.3 * domain.range();
  spec.signal_variance = 1.0;
  spec.noise_variance = 0.0;
  ConditionOptions opts;
  opts.standardize_outputs = true;  // centers on the single observation
  opts.jitter_start_rel = 1e-8;
  Vec yv(1);
  yv << y;
  return condition(X, yv, spec, opts);
}

Vec log10_params(const KernelSpec& spec, bool learn_noise) {
  Vec t(spec.dim() + 1 + (learn_noise ? 1 : 0));
  for (int i = 0; i < spec.dim(); ++i) t[i] = std::log10(spec.lengthscales[i]);
  t[spec.dim()] = std::log10(spec.signal_variance);
  if (learn_noise)
    t[spec.dim() + 1] = std::log10(std::max(spec.noise_variance, 1e-300));
  return t;
}

}  // namespace

RunTrace run(Oracle& oracle, const CompositeObjective* objective, const BoxDomain& domain,
             const BOConfig& config) {
  using clock = std::chrono::steady_clock;
  const bool composite = config.variant != Variant::sbo;
  if (composite)
    require(objective != nullptr, "run: mcbo/bois require a composite objective");
  else
    require(objective == nullptr, "run: sbo must not receive a composite objective");
  require(config.iterations >= 0, "run: iteration budget must be >= 0");

  RunTrace trace;
  trace.input_dim = domain.dim();

  Mat X;          // sampled inputs, one row per observation
  Mat Y;          // observed intermediate outputs
  Vec F;          // observed objective values
  double best = std::numeric_limits<double>::infinity();
  Vec best_x;

  auto observe = [&](const Vec& x, int iteration, bool predicted, double m_f, double s_f,
                     double af, clock::time_point t0) {
    auto [y, f] = oracle.evaluate(x);
    if (composite) {
      require(y.size() == objective->output_dim,
              "run: oracle output dimension does not match the objective");
      const double f_obj = objective->value(x, y);
      if (std::abs(f_obj - f) > 1e-9 * std::max(1.0, std::abs(f)))
        throw EvaluationError("oracle objective is inconsistent with g(x) + h(x, y)", x);
    }
    const Eigen::Index n = X.rows();
    X.conservativeResize(n + 1, x.size());
    X.row(n) = x.transpose();
    if (y.size() > 0) {
      Y.conservativeResize(n + 1, y.size());
      Y.row(n) = y.transpose();
    }
    F.conservativeResize(n + 1);
    F[n] = f;
    if (f < best) {
      best = f;
      best_x = x;
    }
    TraceRecord rec;
    rec.iteration = iteration;
    rec.x = x;
    rec.y = y;
    rec.f_obs = f;
    rec.predicted_valid = predicted;
    rec.pred_mean = m_f;
    rec.pred_std = s_f;
    rec.af_value = af;
    rec.best_f = best;
    rec.wallclock_ms = std::max(
        1e-6, std::chrono::duration<double, std::milli>(clock::now() - t0).count());
    trace.records.push_back(std::move(rec));
  };

  const Mat init = initial_design(domain, config.init, derive_seed(config.seed, 0x1d0));
  auto finalize = [&] {
    trace.incumbent_x = best_x;
    trace.incumbent_f = best;
    trace.output_dim = static_cast<int>(Y.cols());
    return trace;
  };
  // A failing oracle truncates the trace instead of losing it.
  for (Eigen::Index i = 0; i < init.rows(); ++i) {
    try {
      observe(Vec(init.row(i).transpose()), 0, false, 0, 0, 0, clock::now());
    } catch (const std::exception& e) {
      trace.error = e.what();
      return finalize();
    }
  }

  std::vector<GPModel> models;  // bank for composite variants, single GP for sbo
  const int d_y = composite ? objective->output_dim : 1;

  for (int iter = 1; iter <= config.iterations; ++iter) {
    const auto t0 = clock::now();
    const Eigen::Index n = X.rows();

    // Refit or recondition the surrogate(s).
    const bool full_refit = models.empty() || iter <= config.refit.every_until ||
                            (iter % std::max(1, config.refit.stride)) == 0;
    if (n == 1) {
      models.clear();
      for (int j = 0; j < d_y; ++j)
        models.push_back(one_point_model(X, composite ? Y(0, j) : F[0], config.kernel, domain));
    } else if (full_refit) {
      std::vector<GPModel> next(d_y);
      for (int j = 0; j < d_y; ++j) {
        FitOptions o = config.fit;
        o.seed = derive_seed(config.seed, 0xf17, static_cast<std::uint64_t>(j));
        if (j < static_cast<int>(models.size()) && models[j].train_count() >= 2)
          o.warm_start = log10_params(models[j].kernel(), o.learn_noise);
        Dataset data{X, composite ? Mat(Y.col(j)) : Mat(F)};
        next[j] = fit(data, config.kernel, o);
      }
      models = std::move(next);
    } else {
      // keep hyperparameters and frames, condition on the grown dataset
      for (int j = 0; j < d_y; ++j) {
        ConditionOptions co;
        co.input_offset = models[j].input_offset();
        co.input_scale = models[j].input_scale();
        co.output_mean = models[j].output_mean();
        co.output_std = models[j].output_std();
        const Vec col = composite ? Vec(Y.col(j)) : F;
        models[j] = condition(X, col, models[j].kernel(), co);
      }
    }

    // Acquisition over the box.
    SearchBudget budget = config.search;
    budget.seed = derive_seed(config.seed, 0xacf, static_cast<std::uint64_t>(iter));
    double pred_mean = 0.0, pred_std = 0.0;
    Vec x_next;
    double af_best = 0.0;

    if (!composite) {
      const GPModel& gp = models[0];
      auto af = [&](const Vec& x) {
        Vec m, v;
        Mat q(1, x.size());
        q.row(0) = x.transpose();
        gp.predict(q, m, v);
        return lcb(m[0], std::sqrt(std::max(0.0, v[0])), config.acquisition, iter);
      };
      const SearchResult res = minimize_acquisition(af, domain, budget);
      x_next = res.x;
      af_best = res.value;
      Vec m, v;
      Mat q(1, x_next.size());
      q.row(0) = x_next.transpose();
      gp.predict(q, m, v);
      pred_mean = m[0];
      pred_std = std::sqrt(std::max(0.0, v[0]));
    } else {
      GpBank bank(models);
      EngineConfig ec;
      ec.engine = config.variant == Variant::mcbo ? Engine::monte_carlo : Engine::bois;
      ec.mc_samples = config.mc_samples;
      ec.seed = derive_seed(config.seed, 0x3c5, static_cast<std::uint64_t>(iter));
      ec.policy = config.policy;
      const MomentEvaluator engine = make_engine(*objective, ec);
      auto af = [&](const Vec& x) {
        const MomentEstimate est = engine(x, bank.at(x));
        return lcb(est.mean, est.std, config.acquisition, iter);
      };
      const SearchResult res = minimize_acquisition(af, domain, budget);
      x_next = res.x;
      af_best = res.value;
      const MomentEstimate est = engine(x_next, bank.at(x_next));
      pred_mean = est.mean;
      pred_std = est.std;
    }

    try {
      observe(x_next, iter, true, pred_mean, pred_std, af_best, t0);
    } catch (const std::exception& e) {
      trace.error = e.what();
      return finalize();
    }
  }
  return finalize();
}

std::vector<std::pair<int, double>> incumbent_curve(const RunTrace& trace) {
  require(!trace.records.empty(), "incumbent_curve: empty trace");
  std::vector<std::pair<int, double>> curve;
  curve.reserve(trace.records.size());
  double best = std::numeric_limits<double>::infinity();
  int idx = 0;
  for (const auto& rec : trace.records) {
    best = std::min(best, rec.f_obs);
    curve.emplace_back(idx++, best);
  }
  return curve;
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_trace_csv(const RunTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_trace_csv: cannot open " + path.string());
  out << "iter";
  for (int j = 0; j < trace.input_dim; ++j) out << ",x_" << (j + 1);
  for (int j = 0; j < trace.output_dim; ++j) out << ",y_" << (j + 1);
  out << ",f_obs,m_f,sigma_f,af,wallclock_ms,best_f\n";
  for (const auto& rec : trace.records) {
    out << rec.iteration;
    for (int j = 0; j < trace.input_dim; ++j) out << ',' << format_double(rec.x[j]);
    for (int j = 0; j < trace.output_dim; ++j)
      out << ',' << (j < rec.y.size() ? format_double(rec.y[j]) : "");
    out << ',' << format_double(rec.f_obs);
    if (rec.predicted_valid)
      out << ',' << format_double(rec.pred_mean) << ',' << format_double(rec.pred_std) << ','
          << format_double(rec.af_value);
    else
      out << ",,,";
    out << ',' << format_double(rec.wallclock_ms) << ',' << format_double(rec.best_f) << '\n';
  }
}

RunTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("read_trace_csv: cannot open " + path.string());
  std::string header;
  if (!std::getline(in, header)) throw ConfigError("read_trace_csv: empty file " + path.string());

  int d_x = 0, d_y = 0;
  {
    std::stringstream ss(header);
    std::string col;
    while (std::getline(ss, col, ',')) {
      if (col.rfind("x_", 0) == 0) ++d_x;
      if (col.rfind("y_", 0) == 0) ++d_y;
    }
  }

  RunTrace trace;
  trace.input_dim = d_x;
  trace.output_dim = d_y;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    cells.resize(1 + d_x + d_y + 6);
    TraceRecord rec;
    int c = 0;
    rec.iteration = std::stoi(cells[c++]);
    rec.x.resize(d_x);
    for (int j = 0; j < d_x; ++j) rec.x[j] = std::stod(cells[c++]);
    rec.y.resize(d_y);
    for (int j = 0; j < d_y; ++j) {
      rec.y[j] = cells[c].empty() ? 0.0 : std::stod(cells[c]);
      ++c;
    }
    rec.f_obs = std::stod(cells[c++]);
    rec.predicted_valid = !cells[c].empty();
    if (rec.predicted_valid) {
      rec.pred_mean = std::stod(cells[c]);
      rec.pred_std = std::stod(cells[c + 1]);
      rec.af_value = std::stod(cells[c + 2]);
    }
    c += 3;
    rec.wallclock_ms = std::stod(cells[c++]);
    rec.best_f = std::stod(cells[c++]);
    trace.records.push_back(std::move(rec));
  }
  if (!trace.records.empty()) {
    trace.incumbent_f = trace.records.back().best_f;
  }
  return trace;
}

}  // namespace bois
