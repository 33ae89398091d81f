#include "bois/campaign.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>

namespace bois::cli {

namespace {

bool plain_output() { return std::getenv("NO_COLOR") != nullptr; }

std::string paint(const std::string& text, const char* code) {
  if (plain_output()) return text;
  return std::string("\033[") + code + "m" + text + "\033[0m";
}

std::uint64_t parse_seed(const std::string& text) {
  try {
    std::size_t used = 0;
    const std::uint64_t seed = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return seed;
  } catch (...) {
    throw ConfigError("--seed: cannot parse '" + text + "' as an unsigned integer");
  }
}

Vec parse_point(const std::string& csv) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      values.push_back(std::stod(cell));
    } catch (...) {
      throw ConfigError("--at: cannot parse '" + cell + "' as a number");
    }
  }
  if (values.empty()) throw ConfigError("--at: empty point");
  Vec x(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) x[i] = values[i];
  return x;
}

int do_run(const std::string& config_path, const std::string& out_override,
           const std::string& seed_override, int parallel_override,
           const std::string& variant_override) {
  nlohmann::json j = load_config_file(config_path);
  if (!variant_override.empty()) {
    nlohmann::json variants = nlohmann::json::array();
    std::stringstream ss(variant_override);
    std::string name;
    while (std::getline(ss, name, ',')) variants.push_back(name);
    j["variants"] = variants;
  }
  if (!seed_override.empty()) j["seed"] = parse_seed(seed_override);
  if (parallel_override >= 0) j["parallel"] = parallel_override;
  if (!out_override.empty()) j["out_dir"] = out_override;

  ExperimentConfig cfg = parse_experiment_config(j);
  const CampaignResult result = cmd_run(cfg, std::cout);
  std::cout << (result.failed == 0 ? paint("campaign complete", "32")
                                   : paint("campaign finished with failures", "31"))
            << ": " << result.completed << " ok, " << result.failed << " failed, index "
            << result.index_path.string() << '\n';
  return result.failed == 0 ? 0 : 1;
}

int do_parity(const std::string& config_path, const std::string& out_override,
              const std::string& seed_override) {
  nlohmann::json j = load_config_file(config_path);
  if (!seed_override.empty()) j["seed"] = parse_seed(seed_override);
  if (!out_override.empty()) j["out_dir"] = out_override;
  ParityConfig cfg = parse_parity_config(j);
  const ParityResult result = cmd_parity(cfg, std::cout);
  std::cout << "wrote " << result.report_csv.string() << " and "
            << result.summary_json.string() << '\n';
  return 0;
}

int do_report(const std::string& index_path, const std::string& out_dir) {
  const ReportResult result = cmd_report(index_path, out_dir, std::cout);
  if (!result.missing_traces.empty()) {
    std::cerr << paint("report failed", "31") << ": " << result.missing_traces.size()
              << " missing trace file(s)\n";
    return 1;
  }
  std::cout << "wrote " << result.summary_json.string() << '\n';
  return 0;
}

int do_bench_list() {
  nlohmann::json best;
  const std::filesystem::path best_path = "data/best_known.json";
  if (std::filesystem::exists(best_path)) {
    try {
      best = load_json(best_path);
    } catch (const ConfigError&) {
    }
  }
  for (const std::string& name : benchmark_names()) {
    const Benchmark b = get_benchmark(name);
    std::cout << name << "  (d_x=" << b.domain.dim() << ", d_y=" << b.output_dim << ")  "
              << b.description;
    if (b.optimum_value) std::cout << "  [optimum " << *b.optimum_value << "]";
    if (best.contains("entries") && best["entries"].contains(name))
      std::cout << "  [best known " << best["entries"][name].value("best_known_f", 0.0) << "]";
    std::cout << '\n';
  }
  return 0;
}

int do_bench_eval(const std::string& name, const std::string& at, const std::string& params) {
  Benchmark bench = get_benchmark(name);
  if (!params.empty()) {
    if (name != "flowsheet")
      throw ConfigError("--params is only meaningful for the flowsheet benchmark");
    const nlohmann::json j = load_config_file(params);
    bench = make_flowsheet_benchmark(
        j.contains("flowsheet") ? flowsheet_params_from_json(j.at("flowsheet"))
                                : FlowsheetParams{},
        j.contains("cost") ? cost_weights_from_json(j.at("cost")) : CostWeights{});
  }
  const Vec x = parse_point(at);
  if (x.size() != bench.domain.dim())
    throw ConfigError("--at: expected " + std::to_string(bench.domain.dim()) + " components");
  if (!bench.domain.contains(x, 1e-12)) throw ConfigError("--at: point outside the domain");

  const auto [y, f] = bench.evaluate(x);
  if (name == "flowsheet") {
    const auto& names = StreamVector::names();
    for (int i = 0; i < StreamVector::dim; ++i)
      std::cout << names[i] << " = " << y[i] << '\n';
    const CostBreakdown cost = process_cost(StreamVector::from_vec(y), CostWeights{});
    std::cout << "f1 = " << cost.f1 << "\nf2 = " << cost.f2 << '\n';
  } else {
    for (Eigen::Index i = 0; i < y.size(); ++i)
      std::cout << "y_" << (i + 1) << " = " << y[i] << '\n';
  }
  std::cout << "f = " << f << '\n';
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Composite-objective Bayesian optimization toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, seed, variants, index_path, bench_name, at, params;
  int parallel = -1;

  CLI::App* run_cmd = app.add_subcommand("run", "run a BO experiment campaign");
  run_cmd->add_option("--config", config_path, "experiment config JSON")->required();
  run_cmd->add_option("--out", out_dir, "output directory (overrides config)");
  run_cmd->add_option("--seed", seed, "seed override");
  run_cmd->add_option("--parallel", parallel, "worker count override");
  run_cmd->add_option("--variant", variants, "comma-separated variant override");

  CLI::App* parity_cmd = app.add_subcommand("parity", "engine parity experiment");
  parity_cmd->add_option("--config", config_path, "parity config JSON")->required();
  parity_cmd->add_option("--out", out_dir, "output directory (overrides config)");
  parity_cmd->add_option("--seed", seed, "seed override");

  CLI::App* report_cmd = app.add_subcommand("report", "aggregate campaign traces");
  report_cmd->add_option("index", index_path, "campaign index JSON")->required();
  report_cmd->add_option("--out", out_dir, "output directory")->required();

  CLI::App* bench_cmd = app.add_subcommand("bench", "benchmark registry");
  bench_cmd->require_subcommand(1);
  CLI::App* list_cmd = bench_cmd->add_subcommand("list", "list benchmarks");
  CLI::App* eval_cmd = bench_cmd->add_subcommand("eval", "evaluate a benchmark at a point");
  eval_cmd->add_option("name", bench_name, "benchmark name")->required();
  eval_cmd->add_option("--at", at, "comma-separated input point")->required();
  eval_cmd->add_option("--params", params, "flowsheet/cost parameter JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) return do_run(config_path, out_dir, seed, parallel, variants);
    if (*parity_cmd) return do_parity(config_path, out_dir, seed);
    if (*report_cmd) return do_report(index_path, out_dir);
    if (*list_cmd) return do_bench_list();
    if (*eval_cmd) return do_bench_eval(bench_name, at, params);
  } catch (const ConfigError& e) {
    std::cerr << paint("config error", "31") << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << paint("error", "31") << ": " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace bois::cli
