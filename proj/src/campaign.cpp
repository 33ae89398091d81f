#include "bois/campaign.hpp"

#include "bois/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

namespace bois::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void reject(const std::string& key, const std::string& why) {
  throw ConfigError("config key '" + key + "': " + why);
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) reject(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (key == a) {
        known = true;
        break;
      }
    if (!known) reject(path + "." + key, "unknown key");
  }
}

double get_number(const json& j, const std::string& path, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) reject(path + "." + key, "expected a number");
  return j.at(key).get<double>();
}

long get_integer(const json& j, const std::string& path, const char* key, long fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) reject(path + "." + key, "expected an integer");
  return j.at(key).get<long>();
}

std::string get_string(const json& j, const std::string& path, const char* key,
                       const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) reject(path + "." + key, "expected a string");
  return j.at(key).get<std::string>();
}

Vec get_vector(const json& j, const std::string& path, const char* key) {
  if (!j.at(key).is_array()) reject(path + "." + key, "expected an array of numbers");
  const auto& a = j.at(key);
  Vec v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) reject(path + "." + key, "expected an array of numbers");
    v[i] = a[i].get<double>();
  }
  return v;
}

void require_schema_version(const json& j, const std::string& path) {
  if (!j.contains("schema_version")) reject(path + ".schema_version", "missing");
  if (!j.at("schema_version").is_number_integer() || j.at("schema_version").get<int>() != 1)
    reject(path + ".schema_version", "unsupported version (expected 1)");
}

AcquisitionSpec parse_acquisition(const json& j, const std::string& path) {
  check_keys(j, path, {"kappa", "schedule", "decay_rate"});
  AcquisitionSpec spec;
  spec.kappa = get_number(j, path, "kappa", spec.kappa);
  if (spec.kappa < 0) reject(path + ".kappa", "must be >= 0");
  const std::string schedule = get_string(j, path, "schedule", "constant");
  if (schedule == "constant")
    spec.schedule = AcquisitionSpec::Schedule::constant;
  else if (schedule == "decaying")
    spec.schedule = AcquisitionSpec::Schedule::decaying;
  else
    reject(path + ".schedule", "must be 'constant' or 'decaying'");
  spec.decay_rate = get_number(j, path, "decay_rate", spec.decay_rate);
  if (spec.decay_rate < 0) reject(path + ".decay_rate", "must be >= 0");
  return spec;
}

ReferencePolicy parse_policy(const json& j, const std::string& path) {
  check_keys(j, path, {"mode", "delta"});
  ReferencePolicy policy;
  const std::string mode = get_string(j, path, "mode", "at-mean");
  if (mode == "at-mean")
    policy.mode = ReferencePolicy::Mode::at_mean;
  else if (mode == "relative-offset")
    policy.mode = ReferencePolicy::Mode::relative_offset;
  else
    reject(path + ".mode", "must be 'at-mean' or 'relative-offset'");
  policy.delta = get_number(j, path, "delta", policy.delta);
  if (!std::isfinite(policy.delta)) reject(path + ".delta", "must be finite");
  return policy;
}

// Fit seeds always derive from the experiment seed, so a "seed" key here is
// rejected rather than silently ignored.
FitOptions parse_fit(const json& j, const std::string& path) {
  check_keys(j, path, {"restarts", "max_evals_per_restart", "learn_noise"});
  FitOptions fit;
  fit.restarts = static_cast<int>(get_integer(j, path, "restarts", fit.restarts));
  if (fit.restarts < 1) reject(path + ".restarts", "must be >= 1");
  fit.max_evals_per_restart =
      static_cast<int>(get_integer(j, path, "max_evals_per_restart", fit.max_evals_per_restart));
  if (fit.max_evals_per_restart < 1) reject(path + ".max_evals_per_restart", "must be >= 1");
  if (j.contains("learn_noise")) {
    if (!j.at("learn_noise").is_boolean()) reject(path + ".learn_noise", "expected a boolean");
    fit.learn_noise = j.at("learn_noise").get<bool>();
  }
  return fit;
}

SearchBudget parse_search(const json& j, const std::string& path) {
  check_keys(j, path, {"restarts", "max_evals_per_restart", "tolerance"});
  SearchBudget search;
  search.restarts = static_cast<int>(get_integer(j, path, "restarts", search.restarts));
  if (search.restarts < 1) reject(path + ".restarts", "must be >= 1");
  search.max_evals_per_restart = static_cast<int>(
      get_integer(j, path, "max_evals_per_restart", search.max_evals_per_restart));
  search.tolerance = get_number(j, path, "tolerance", search.tolerance);
  if (search.tolerance <= 0) reject(path + ".tolerance", "must be > 0");
  return search;
}

std::string environment_stamp() {
  std::ostringstream os;
  os << "compiler=" <<
#if defined(__VERSION__)
      "gcc " << __VERSION__
#else
      "unknown"
#endif
     << " eigen=" << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.'
     << EIGEN_MINOR_VERSION
#ifdef NDEBUG
     << " build=release";
#else
     << " build=debug";
#endif
  return os.str();
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const double idx = p * double(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(idx));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(idx));
  const double w = idx - double(lo);
  return values[lo] * (1.0 - w) + values[hi] * w;
}

int effective_parallelism(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace

nlohmann::json load_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min(e.byte, text.size()); ++i)
      if (text[i] == '\n') ++line;
    throw ConfigError(path.string() + ":" + std::to_string(line) + ": " + e.what());
  }
}

ExperimentConfig parse_experiment_config(const json& j) {
  const std::string path = "config";
  check_keys(j, path,
             {"schema_version", "benchmark", "variants", "iterations", "campaign", "seed",
              "parallel", "acquisition", "mc_samples", "reference_policy", "kernel", "fit",
              "search", "refit", "out_dir"});
  require_schema_version(j, path);

  ExperimentConfig cfg;
  cfg.benchmark = get_string(j, path, "benchmark", cfg.benchmark);
  get_benchmark(cfg.benchmark);  // rejects unknown names early

  if (j.contains("variants")) {
    if (!j.at("variants").is_array() || j.at("variants").empty())
      reject(path + ".variants", "expected a non-empty array of variant names");
    cfg.variants.clear();
    for (const auto& v : j.at("variants")) {
      if (!v.is_string()) reject(path + ".variants", "expected strings");
      try {
        cfg.variants.push_back(variant_from_string(v.get<std::string>()));
      } catch (const ConfigError& e) {
        reject(path + ".variants", e.what());
      }
    }
  }

  cfg.iterations = static_cast<int>(get_integer(j, path, "iterations", cfg.iterations));
  if (cfg.iterations < 0) reject(path + ".iterations", "must be >= 0");

  if (j.contains("campaign")) {
    const json& c = j.at("campaign");
    const std::string cpath = path + ".campaign";
    check_keys(c, cpath, {"mode", "x0", "levels", "count"});
    const std::string mode = get_string(c, cpath, "mode", "random");
    if (mode == "single") {
      cfg.campaign.mode = CampaignSpec::Mode::single;
      if (!c.contains("x0")) reject(cpath + ".x0", "required for mode 'single'");
      cfg.campaign.x0 = get_vector(c, cpath, "x0");
    } else if (mode == "grid") {
      cfg.campaign.mode = CampaignSpec::Mode::grid;
      cfg.campaign.levels = static_cast<int>(get_integer(c, cpath, "levels", 3));
      if (cfg.campaign.levels < 2) reject(cpath + ".levels", "must be >= 2");
    } else if (mode == "random") {
      cfg.campaign.mode = CampaignSpec::Mode::random;
      cfg.campaign.count = static_cast<int>(get_integer(c, cpath, "count", 16));
      if (cfg.campaign.count < 1) reject(cpath + ".count", "must be >= 1");
    } else {
      reject(cpath + ".mode", "must be 'single', 'grid' or 'random'");
    }
  }

  cfg.seed = static_cast<std::uint64_t>(get_integer(j, path, "seed", 0));
  cfg.parallel = static_cast<int>(get_integer(j, path, "parallel", 0));
  if (cfg.parallel < 0) reject(path + ".parallel", "must be >= 0");

  if (j.contains("acquisition"))
    cfg.acquisition = parse_acquisition(j.at("acquisition"), path + ".acquisition");
  cfg.mc_samples = get_integer(j, path, "mc_samples", cfg.mc_samples);
  if (cfg.mc_samples < 2) reject(path + ".mc_samples", "must be >= 2");
  if (j.contains("reference_policy"))
    cfg.policy = parse_policy(j.at("reference_policy"), path + ".reference_policy");
  if (j.contains("kernel")) {
    try {
      cfg.kernel = kernel_family_from_string(get_string(j, path, "kernel", "matern52"));
    } catch (const ConfigError& e) {
      reject(path + ".kernel", e.what());
    }
  }
  if (j.contains("fit")) cfg.fit = parse_fit(j.at("fit"), path + ".fit");
  if (j.contains("search")) cfg.search = parse_search(j.at("search"), path + ".search");
  if (j.contains("refit")) {
    const json& r = j.at("refit");
    check_keys(r, path + ".refit", {"every_until", "stride"});
    cfg.refit.every_until =
        static_cast<int>(get_integer(r, path + ".refit", "every_until", cfg.refit.every_until));
    cfg.refit.stride =
        static_cast<int>(get_integer(r, path + ".refit", "stride", cfg.refit.stride));
    if (cfg.refit.stride < 1) reject(path + ".refit.stride", "must be >= 1");
  }
  cfg.out_dir = get_string(j, path, "out_dir", cfg.out_dir.string());

  // campaign geometry must match the benchmark domain
  const Benchmark bench = get_benchmark(cfg.benchmark);
  if (cfg.campaign.mode == CampaignSpec::Mode::single) {
    if (cfg.campaign.x0.size() != bench.domain.dim())
      reject(path + ".campaign.x0", "dimension does not match benchmark domain");
    if (!bench.domain.contains(cfg.campaign.x0, 1e-12))
      reject(path + ".campaign.x0", "outside the benchmark domain");
  }
  if (cfg.campaign.mode == CampaignSpec::Mode::grid) {
    double total = 1.0;
    for (int i = 0; i < bench.domain.dim(); ++i) total *= cfg.campaign.levels;
    if (total > 1e5) reject(path + ".campaign.levels", "grid larger than 1e5 points");
  }
  return cfg;
}

namespace {

json config_echo(const ExperimentConfig& cfg) {
  json variants = json::array();
  for (Variant v : cfg.variants) variants.push_back(to_string(v));
  json campaign;
  switch (cfg.campaign.mode) {
    case CampaignSpec::Mode::single: {
      json x0 = json::array();
      for (Eigen::Index i = 0; i < cfg.campaign.x0.size(); ++i) x0.push_back(cfg.campaign.x0[i]);
      campaign = {{"mode", "single"}, {"x0", x0}};
      break;
    }
    case CampaignSpec::Mode::grid:
      campaign = {{"mode", "grid"}, {"levels", cfg.campaign.levels}};
      break;
    case CampaignSpec::Mode::random:
      campaign = {{"mode", "random"}, {"count", cfg.campaign.count}};
      break;
  }
  return json{{"schema_version", 1},
              {"benchmark", cfg.benchmark},
              {"variants", variants},
              {"iterations", cfg.iterations},
              {"campaign", campaign},
              {"seed", cfg.seed},
              {"parallel", cfg.parallel},
              {"acquisition",
               {{"kappa", cfg.acquisition.kappa},
                {"schedule",
                 cfg.acquisition.schedule == AcquisitionSpec::Schedule::constant ? "constant"
                                                                                 : "decaying"},
                {"decay_rate", cfg.acquisition.decay_rate}}},
              {"mc_samples", cfg.mc_samples},
              {"reference_policy",
               {{"mode", cfg.policy.mode == ReferencePolicy::Mode::at_mean ? "at-mean"
                                                                           : "relative-offset"},
                {"delta", cfg.policy.delta}}},
              {"kernel", to_string(cfg.kernel)},
              {"fit",
               {{"restarts", cfg.fit.restarts},
                {"max_evals_per_restart", cfg.fit.max_evals_per_restart},
                {"learn_noise", cfg.fit.learn_noise}}},
              {"search",
               {{"restarts", cfg.search.restarts},
                {"max_evals_per_restart", cfg.search.max_evals_per_restart},
                {"tolerance", cfg.search.tolerance}}},
              {"refit", {{"every_until", cfg.refit.every_until}, {"stride", cfg.refit.stride}}}};
}

Mat campaign_starts(const ExperimentConfig& cfg, const BoxDomain& domain) {
  InitialDesign d;
  switch (cfg.campaign.mode) {
    case CampaignSpec::Mode::single:
      d.mode = InitialDesign::Mode::single_point;
      d.x0 = cfg.campaign.x0;
      break;
    case CampaignSpec::Mode::grid:
      d.mode = InitialDesign::Mode::grid;
      d.levels = cfg.campaign.levels;
      break;
    case CampaignSpec::Mode::random:
      d.mode = InitialDesign::Mode::random_n;
      d.count = cfg.campaign.count;
      break;
  }
  return initial_design(domain, d, derive_seed(cfg.seed, 0xca4));
}

}  // namespace

CampaignResult cmd_run(const ExperimentConfig& cfg, std::ostream& log) {
  const Benchmark bench = get_benchmark(cfg.benchmark);
  fs::create_directories(cfg.out_dir);

  const Mat starts = campaign_starts(cfg, bench.domain);
  const int n_starts = static_cast<int>(starts.rows());
  const int n_cells = n_starts * static_cast<int>(cfg.variants.size());

  CampaignResult result;
  result.cells.resize(n_cells);

  std::mutex log_mutex;
  std::atomic<int> next{0};
  std::atomic<int> done{0};

  auto run_cell = [&](int cell) {
    const int vi = cell / n_starts;
    const int si = cell % n_starts;
    const Variant variant = cfg.variants[vi];

    CellStatus& status = result.cells[cell];
    status.variant = variant;
    status.start_index = si;
    // keyed on the variant tag (not list position), so a single-variant rerun
    // reproduces the same per-cell seeds as the full campaign
    status.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(variant),
                              static_cast<std::uint64_t>(si));

    char name[64];
    std::snprintf(name, sizeof(name), "run_%s_%03d", to_string(variant).c_str(), si);
    status.trace_file = std::string(name) + ".csv";
    status.manifest_file = std::string(name) + ".json";

    const auto t0 = std::chrono::steady_clock::now();
    try {
      BOConfig bo;
      bo.variant = variant;
      bo.iterations = cfg.iterations;
      bo.init.mode = InitialDesign::Mode::single_point;
      bo.init.x0 = starts.row(si).transpose();
      bo.acquisition = cfg.acquisition;
      bo.mc_samples = cfg.mc_samples;
      bo.policy = cfg.policy;
      bo.kernel = cfg.kernel;
      bo.seed = status.seed;
      bo.fit = cfg.fit;
      bo.search = cfg.search;
      bo.refit = cfg.refit;

      Oracle oracle(bench.evaluate);
      const CompositeObjective* obj = variant == Variant::sbo ? nullptr : &bench.objective;
      const RunTrace trace = run(oracle, obj, bench.domain, bo);

      // a truncated trace is still written out before the cell is marked failed
      write_trace_csv(trace, cfg.out_dir / status.trace_file);
      json manifest = {{"schema_version", 1},
                       {"benchmark", cfg.benchmark},
                       {"variant", to_string(variant)},
                       {"start_index", si},
                       {"seed", status.seed},
                       {"config", config_echo(cfg)},
                       {"environment", environment_stamp()},
                       {"created", timestamp_utc()},
                       {"oracle_evals", oracle.eval_count()},
                       {"incumbent_f", trace.incumbent_f}};
      json xbest = json::array();
      for (Eigen::Index i = 0; i < trace.incumbent_x.size(); ++i)
        xbest.push_back(trace.incumbent_x[i]);
      manifest["incumbent_x"] = xbest;
      if (trace.error) manifest["error"] = *trace.error;
      save_json(manifest, cfg.out_dir / status.manifest_file);

      status.ok = !trace.error.has_value();
      if (trace.error) status.error = *trace.error;
      status.final_best_f = trace.incumbent_f;
    } catch (const std::exception& e) {
      status.ok = false;
      status.error = e.what();
    }
    status.wallclock_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    const int k = ++done;
    std::lock_guard<std::mutex> lock(log_mutex);
    log << "[" << k << "/" << n_cells << "] " << to_string(variant) << " start " << si
        << (status.ok ? (" best_f=" + format_double(status.final_best_f))
                      : (" FAILED: " + status.error))
        << '\n';
  };

  const int pool_size = std::min(effective_parallelism(cfg.parallel), n_cells);
  if (pool_size <= 1) {
    for (int c = 0; c < n_cells; ++c) run_cell(c);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(pool_size);
    for (int t = 0; t < pool_size; ++t)
      pool.emplace_back([&] {
        for (int c = next.fetch_add(1); c < n_cells; c = next.fetch_add(1)) run_cell(c);
      });
    for (auto& th : pool) th.join();
  }

  json cells = json::array();
  for (const CellStatus& s : result.cells) {
    json cell = {{"variant", to_string(s.variant)},
                 {"start_index", s.start_index},
                 {"seed", s.seed},
                 {"trace", s.trace_file},
                 {"manifest", s.manifest_file},
                 {"status", s.ok ? "ok" : "error"}};
    if (s.ok)
      cell["final_best_f"] = s.final_best_f;
    else
      cell["error"] = s.error;
    cells.push_back(std::move(cell));
    s.ok ? ++result.completed : ++result.failed;
  }
  json index = {{"schema_version", 1},
                {"config", config_echo(cfg)},
                {"environment", environment_stamp()},
                {"created", timestamp_utc()},
                {"cells", std::move(cells)}};
  result.index_path = cfg.out_dir / "campaign_index.json";
  save_json(index, result.index_path);
  return result;
}

ParityConfig parse_parity_config(const json& j) {
  const std::string path = "config";
  check_keys(j, path,
             {"schema_version", "benchmark", "train_samples", "train_trace", "query_points",
              "sample_sweep", "delta", "seed", "kernel", "fit", "parallel", "out_dir"});
  require_schema_version(j, path);

  ParityConfig cfg;
  cfg.benchmark = get_string(j, path, "benchmark", cfg.benchmark);
  get_benchmark(cfg.benchmark);
  cfg.train_samples = static_cast<int>(get_integer(j, path, "train_samples", cfg.train_samples));
  if (cfg.train_samples < 2) reject(path + ".train_samples", "must be >= 2");
  if (j.contains("train_trace"))
    cfg.train_trace = fs::path(get_string(j, path, "train_trace", ""));
  cfg.query_points = static_cast<int>(get_integer(j, path, "query_points", cfg.query_points));
  if (cfg.query_points < 1) reject(path + ".query_points", "must be >= 1");
  if (j.contains("sample_sweep")) {
    if (!j.at("sample_sweep").is_array() || j.at("sample_sweep").empty())
      reject(path + ".sample_sweep", "expected a non-empty array of integers");
    cfg.sample_sweep.clear();
    for (const auto& s : j.at("sample_sweep")) {
      if (!s.is_number_integer() || s.get<long>() < 2)
        reject(path + ".sample_sweep", "entries must be integers >= 2");
      cfg.sample_sweep.push_back(s.get<long>());
    }
  }
  cfg.delta = get_number(j, path, "delta", cfg.delta);
  cfg.seed = static_cast<std::uint64_t>(get_integer(j, path, "seed", 0));
  if (j.contains("kernel"))
    cfg.kernel = kernel_family_from_string(get_string(j, path, "kernel", "matern52"));
  if (j.contains("fit")) cfg.fit = parse_fit(j.at("fit"), path + ".fit");
  cfg.parallel = static_cast<int>(get_integer(j, path, "parallel", 0));
  cfg.out_dir = get_string(j, path, "out_dir", cfg.out_dir.string());
  return cfg;
}

ParityResult cmd_parity(const ParityConfig& cfg, std::ostream& log) {
  const Benchmark bench = get_benchmark(cfg.benchmark);
  fs::create_directories(cfg.out_dir);

  // Assemble the bank training data.
  Mat X, Y;
  if (cfg.train_trace) {
    const RunTrace trace = read_trace_csv(*cfg.train_trace);
    require(!trace.records.empty(), "cmd_parity: training trace is empty");
    require(trace.output_dim == bench.output_dim,
            "cmd_parity: trace output dimension does not match benchmark");
    X.resize(trace.records.size(), trace.input_dim);
    Y.resize(trace.records.size(), trace.output_dim);
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
      X.row(i) = trace.records[i].x.transpose();
      Y.row(i) = trace.records[i].y.transpose();
    }
  } else {
    Rng rng(derive_seed(cfg.seed, 0x7a1));
    X.resize(cfg.train_samples, bench.domain.dim());
    Y.resize(cfg.train_samples, bench.output_dim);
    for (int i = 0; i < cfg.train_samples; ++i) {
      const Vec x = rng.uniform_in(bench.domain);
      X.row(i) = x.transpose();
      Y.row(i) = bench.evaluate(x).first.transpose();
    }
  }
  log << "parity: fitting bank on " << X.rows() << " samples\n";

  FitOptions fit = cfg.fit;
  fit.seed = derive_seed(cfg.seed, 0xf1b);
  const GpBank fitted =
      fit_bank(Dataset{X, Y}, cfg.kernel, fit, effective_parallelism(cfg.parallel));

  // Both engines must consume the identical serialized surrogate.
  const fs::path bank_path = cfg.out_dir / "parity_bank.json";
  save_json(to_json(fitted), bank_path);
  const GpBank bank = bank_from_json(load_json(bank_path));

  Rng qrng(derive_seed(cfg.seed, 0x9e4));
  Mat queries(cfg.query_points, bench.domain.dim());
  for (int i = 0; i < cfg.query_points; ++i) queries.row(i) = qrng.uniform_in(bench.domain).transpose();

  ReferencePolicy policy;
  policy.mode = ReferencePolicy::Mode::relative_offset;
  policy.delta = cfg.delta;

  const int n_levels = static_cast<int>(cfg.sample_sweep.size());
  Mat mc_mean(cfg.query_points, n_levels), mc_std(cfg.query_points, n_levels);
  Mat mc_ms(cfg.query_points, n_levels);
  Vec bois_mean(cfg.query_points), bois_std(cfg.query_points), bois_row_ms(cfg.query_points);
  std::vector<double> level_ms(n_levels, 0.0);
  double bois_ms = 0.0;
  std::vector<bool> in_regime(cfg.query_points, false);

  using clock = std::chrono::steady_clock;
  for (int i = 0; i < cfg.query_points; ++i) {
    const Vec x = queries.row(i).transpose();
    const GaussianVector post = bank.at(x);

    bool regime = true;
    for (Eigen::Index k = 0; k < post.mean.size(); ++k)
      if (std::sqrt(std::max(0.0, post.var[k])) > 0.10 * std::abs(post.mean[k])) {
        regime = false;
        break;
      }
    in_regime[i] = regime;

    auto t0 = clock::now();
    const MomentEstimate be = bois_moments(bench.objective, x, post, policy);
    bois_row_ms[i] = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    bois_ms += bois_row_ms[i];
    bois_mean[i] = be.mean;
    bois_std[i] = be.std;

    for (int s = 0; s < n_levels; ++s) {
      const std::uint64_t seed =
          derive_seed(hash_point(cfg.seed, x), static_cast<std::uint64_t>(s));
      t0 = clock::now();
      const MomentEstimate me = mc_moments(bench.objective, x, post, cfg.sample_sweep[s], seed);
      mc_ms(i, s) = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
      level_ms[s] += mc_ms(i, s);
      mc_mean(i, s) = me.mean;
      mc_std(i, s) = me.std;
    }
  }

  // Row-level report.
  ParityResult result;
  result.total_rows = cfg.query_points;
  result.report_csv = cfg.out_dir / "parity_report.csv";
  {
    std::ofstream out(result.report_csv);
    if (!out) throw ConfigError("cmd_parity: cannot open " + result.report_csv.string());
    out << "point";
    for (int d = 0; d < bench.domain.dim(); ++d) out << ",x_" << (d + 1);
    out << ",local_linear_regime,bois_m,bois_s,bois_ms";
    for (long s : cfg.sample_sweep)
      out << ",mc" << s << "_m,mc" << s << "_s,mc" << s << "_se,mc" << s << "_ms";
    out << '\n';
    for (int i = 0; i < cfg.query_points; ++i) {
      out << i;
      for (int d = 0; d < bench.domain.dim(); ++d) out << ',' << format_double(queries(i, d));
      out << ',' << (in_regime[i] ? 1 : 0) << ',' << format_double(bois_mean[i]) << ','
          << format_double(bois_std[i]) << ',' << format_double(bois_row_ms[i]);
      for (int s = 0; s < n_levels; ++s)
        out << ',' << format_double(mc_mean(i, s)) << ',' << format_double(mc_std(i, s)) << ','
            << format_double(mc_std(i, s) / std::sqrt(double(cfg.sample_sweep[s]))) << ','
            << format_double(mc_ms(i, s));
      out << '\n';
    }
  }

  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-12); };

  json level_summaries = json::array();
  for (int s = 0; s < n_levels; ++s) {
    ParityLevelSummary lvl;
    lvl.samples = cfg.sample_sweep[s];
    std::vector<double> dm, ds, ds_regime;
    for (int i = 0; i < cfg.query_points; ++i) {
      dm.push_back(rel(bois_mean[i], mc_mean(i, s)));
      ds.push_back(rel(bois_std[i], mc_std(i, s)));
      if (in_regime[i]) ds_regime.push_back(rel(bois_std[i], mc_std(i, s)));
    }
    lvl.median_rel_mean = percentile(dm, 0.5);
    lvl.p90_rel_mean = percentile(dm, 0.9);
    lvl.median_rel_std = percentile(ds, 0.5);
    lvl.p90_rel_std = percentile(ds, 0.9);
    lvl.regime_median_rel_std = percentile(ds_regime, 0.5);
    lvl.wallclock_ms = level_ms[s];
    result.levels.push_back(lvl);
    level_summaries.push_back({{"samples", lvl.samples},
                               {"median_rel_mean", lvl.median_rel_mean},
                               {"p90_rel_mean", lvl.p90_rel_mean},
                               {"median_rel_std", lvl.median_rel_std},
                               {"p90_rel_std", lvl.p90_rel_std},
                               {"regime_median_rel_std", lvl.regime_median_rel_std},
                               {"wallclock_ms", lvl.wallclock_ms}});
  }
  result.bois_wallclock_ms = bois_ms;
  result.regime_rows = static_cast<int>(std::count(in_regime.begin(), in_regime.end(), true));

  json summary = {{"schema_version", 1},
                  {"benchmark", cfg.benchmark},
                  {"train_samples", static_cast<long>(X.rows())},
                  {"query_points", cfg.query_points},
                  {"delta", cfg.delta},
                  {"seed", cfg.seed},
                  {"bank", bank_path.filename().string()},
                  {"environment", environment_stamp()},
                  {"created", timestamp_utc()},
                  {"bois_wallclock_ms", bois_ms},
                  {"regime_rows", result.regime_rows},
                  {"levels", std::move(level_summaries)}};
  result.summary_json = cfg.out_dir / "parity_summary.json";
  save_json(summary, result.summary_json);

  log << "parity: " << cfg.query_points << " query points, bois " << bois_ms << " ms";
  for (int s = 0; s < n_levels; ++s)
    log << ", mc" << cfg.sample_sweep[s] << " " << level_ms[s] << " ms";
  log << '\n';
  return result;
}

ReportResult cmd_report(const fs::path& index_path, const fs::path& out_dir, std::ostream& log) {
  const json index = load_json(index_path);
  if (!index.contains("cells") || !index.at("cells").is_array() || index.at("cells").empty())
    throw ConfigError("cmd_report: index has no cells: " + index_path.string());
  fs::create_directories(out_dir);
  const fs::path base = index_path.parent_path();

  struct VariantData {
    std::vector<std::vector<double>> curves;  // per trace: best-so-far by record
    std::vector<double> finals;
  };
  std::map<std::string, VariantData> by_variant;

  ReportResult result;
  for (const auto& cell : index.at("cells")) {
    if (cell.value("status", "error") != std::string("ok")) continue;
    const fs::path trace_path = base / cell.at("trace").get<std::string>();
    if (!fs::exists(trace_path)) {
      result.missing_traces.push_back(trace_path.string());
      continue;
    }
    const RunTrace trace = read_trace_csv(trace_path);
    std::vector<double> curve;
    curve.reserve(trace.records.size());
    for (const auto& [idx, best] : incumbent_curve(trace)) curve.push_back(best);
    auto& vd = by_variant[cell.at("variant").get<std::string>()];
    vd.finals.push_back(curve.back());
    vd.curves.push_back(std::move(curve));
  }
  if (!result.missing_traces.empty()) {
    for (const auto& m : result.missing_traces) log << "missing trace: " << m << '\n';
    return result;
  }
  if (by_variant.empty()) throw ConfigError("cmd_report: no completed traces in the index");

  const fs::path long_path = out_dir / "aggregate_long.csv";
  std::ofstream long_out(long_path);
  long_out << "variant,iteration,stat,value\n";

  json variant_summary = json::object();
  for (auto& [name, vd] : by_variant) {
    std::size_t length = vd.curves.front().size();
    for (const auto& c : vd.curves) length = std::min(length, c.size());
    const fs::path agg_path = out_dir / ("aggregate_" + name + ".csv");
    std::ofstream out(agg_path);
    out << "iteration,mean,median,p10,p90\n";
    for (std::size_t i = 0; i < length; ++i) {
      std::vector<double> at;
      at.reserve(vd.curves.size());
      for (const auto& c : vd.curves) at.push_back(c[i]);
      const double mean =
          std::accumulate(at.begin(), at.end(), 0.0) / static_cast<double>(at.size());
      const double median = percentile(at, 0.5);
      const double p10 = percentile(at, 0.1);
      const double p90 = percentile(at, 0.9);
      out << i << ',' << format_double(mean) << ',' << format_double(median) << ','
          << format_double(p10) << ',' << format_double(p90) << '\n';
      long_out << name << ',' << i << ",mean," << format_double(mean) << '\n'
               << name << ',' << i << ",median," << format_double(median) << '\n'
               << name << ',' << i << ",p10," << format_double(p10) << '\n'
               << name << ',' << i << ",p90," << format_double(p90) << '\n';
    }
    result.aggregate_csvs.push_back(agg_path);

    const double final_mean =
        std::accumulate(vd.finals.begin(), vd.finals.end(), 0.0) / double(vd.finals.size());
    variant_summary[name] = {{"runs", vd.finals.size()},
                             {"final_mean", final_mean},
                             {"final_median", percentile(vd.finals, 0.5)},
                             {"final_p10", percentile(vd.finals, 0.1)},
                             {"final_p90", percentile(vd.finals, 0.9)},
                             {"final_spread", percentile(vd.finals, 0.9) -
                                                  percentile(vd.finals, 0.1)}};
  }
  result.long_csv = long_path;

  json summary = {{"schema_version", 1},
                  {"index", index_path.string()},
                  {"created", timestamp_utc()},
                  {"variants", variant_summary}};

  // Qualitative ordering checks: recorded for human review, not a hard gate.
  if (by_variant.count("sbo") && by_variant.count("mcbo") && by_variant.count("bois")) {
    const auto spread = [&](const std::string& v) {
      return percentile(by_variant[v].finals, 0.9) - percentile(by_variant[v].finals, 0.1);
    };
    const auto mean_of = [&](const std::string& v) {
      const auto& f = by_variant[v].finals;
      return std::accumulate(f.begin(), f.end(), 0.0) / double(f.size());
    };
    result.bois_mean_le_sbo = mean_of("bois") <= mean_of("sbo");
    result.bois_spread_lt_sbo = spread("bois") < spread("sbo");
    result.mcbo_spread_lt_sbo = spread("mcbo") < spread("sbo");
    result.needs_review =
        !(*result.bois_mean_le_sbo && *result.bois_spread_lt_sbo && *result.mcbo_spread_lt_sbo);
    summary["qualitative_checks"] = {{"bois_mean_le_sbo", *result.bois_mean_le_sbo},
                                     {"bois_spread_lt_sbo", *result.bois_spread_lt_sbo},
                                     {"mcbo_spread_lt_sbo", *result.mcbo_spread_lt_sbo},
                                     {"needs_review", result.needs_review}};
    if (result.needs_review)
      log << "NOTE: qualitative ordering checks need review (see report_summary.json)\n";
  }

  result.summary_json = out_dir / "report_summary.json";
  save_json(summary, result.summary_json);
  log << "report: " << by_variant.size() << " variants aggregated\n";
  return result;
}

}  // namespace bois::cli
