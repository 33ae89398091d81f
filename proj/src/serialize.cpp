#include "bois/serialize.hpp"

#include <fstream>

namespace bois {

using nlohmann::json;

namespace {

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec vec_from_json(const json& a) {
  Vec v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
  return v;
}

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const json& rows) {
  if (rows.empty()) return Mat(0, 0);
  Mat m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j].get<double>();
  return m;
}

template <std::size_t N>
std::array<double, N> array_from_json(const json& a, const std::string& key) {
  if (!a.is_array() || a.size() != N)
    throw ConfigError("expected an array of " + std::to_string(N) + " numbers for " + key);
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = a[i].get<double>();
  return out;
}

}  // namespace

json to_json(const GPModel& model) {
  json j;
  j["schema_version"] = 1;
  j["kernel"] = {{"family", to_string(model.kernel().family)},
                 {"lengthscales", vec_to_json(model.kernel().lengthscales)},
                 {"signal_variance", model.kernel().signal_variance},
                 {"noise_variance", model.kernel().noise_variance}};
  j["input_offset"] = vec_to_json(model.input_offset());
  j["input_scale"] = vec_to_json(model.input_scale());
  j["output_mean"] = model.output_mean();
  j["output_std"] = model.output_std();
  j["data"] = {{"inputs", mat_to_json(model.train_inputs())},
               {"outputs", vec_to_json(model.train_outputs())}};
  return j;
}

GPModel gp_from_json(const json& j) {
  if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
    throw ConfigError("gp_from_json: unsupported schema_version");
  KernelSpec spec;
  const json& k = j.at("kernel");
  spec.family = kernel_family_from_string(k.at("family").get<std::string>());
  spec.lengthscales = vec_from_json(k.at("lengthscales"));
  spec.signal_variance = k.at("signal_variance").get<double>();
  spec.noise_variance = k.at("noise_variance").get<double>();

  const Mat inputs = mat_from_json(j.at("data").at("inputs"));
  const Vec outputs = vec_from_json(j.at("data").at("outputs"));

  // Only hyperparameters, frames and training data are stored; the
  // factorization is recomputed on load.
  ConditionOptions opts;
  opts.input_offset = vec_from_json(j.at("input_offset"));
  opts.input_scale = vec_from_json(j.at("input_scale"));
  opts.output_mean = j.at("output_mean").get<double>();
  opts.output_std = j.at("output_std").get<double>();
  return condition(inputs, outputs, spec, opts);
}

json to_json(const GpBank& bank) {
  json j;
  j["schema_version"] = 1;
  json outputs = json::array();
  for (int i = 0; i < bank.output_dim(); ++i) outputs.push_back(to_json(bank.output(i)));
  j["outputs"] = std::move(outputs);
  return j;
}

GpBank bank_from_json(const json& j) {
  if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
    throw ConfigError("bank_from_json: unsupported schema_version");
  std::vector<GPModel> models;
  for (const auto& m : j.at("outputs")) models.push_back(gp_from_json(m));
  return GpBank(std::move(models));
}

json to_json(const FlowsheetParams& p) {
  return json{{"feed_a", p.feed_a},
              {"feed_b", p.feed_b},
              {"conversion_base", p.conversion_base},
              {"conversion_span", p.conversion_span},
              {"conversion_temp_mid", p.conversion_temp_mid},
              {"conversion_temp_scale", p.conversion_temp_scale},
              {"conversion_pressure_mid", p.conversion_pressure_mid},
              {"conversion_pressure_scale", p.conversion_pressure_scale},
              {"recovery_bias", p.recovery_bias},
              {"recovery_temp_ref", p.recovery_temp_ref},
              {"recovery_temp_scale", p.recovery_temp_scale},
              {"recovery_temp_gain", p.recovery_temp_gain},
              {"recovery_pressure_ref", p.recovery_pressure_ref},
              {"recovery_pressure_scale", p.recovery_pressure_scale},
              {"recovery_pressure_gain", p.recovery_pressure_gain},
              {"feed_temp", p.feed_temp},
              {"feed_pressure", p.feed_pressure},
              {"heat_feed_coeff", p.heat_feed_coeff},
              {"heat_recycle_coeff", p.heat_recycle_coeff},
              {"heat_reactor_coeff", p.heat_reactor_coeff},
              {"heat_condenser_coeff", p.heat_condenser_coeff},
              {"heat_product_coeff", p.heat_product_coeff},
              {"power_feed_coeff", p.power_feed_coeff},
              {"power_recycle_coeff", p.power_recycle_coeff},
              {"power_product_coeff", p.power_product_coeff},
              {"damping", p.damping},
              {"tolerance", p.tolerance},
              {"max_iterations", p.max_iterations}};
}

json to_json(const CostWeights& w) {
  return json{{"reagent_price", w.reagent_price}, {"feed_rate", w.feed_rate},
              {"product_value", w.product_value}, {"purge_value", w.purge_value},
              {"penalty_weight", w.penalty_weight}, {"target_rate", w.target_rate},
              {"heat_price", w.heat_price},       {"power_price", w.power_price}};
}

FlowsheetParams flowsheet_params_from_json(const json& j) {
  FlowsheetParams p;
  auto get = [&](const char* key, double& field) {
    if (j.contains(key)) field = j.at(key).get<double>();
  };
  get("feed_a", p.feed_a);
  get("feed_b", p.feed_b);
  get("conversion_base", p.conversion_base);
  get("conversion_span", p.conversion_span);
  get("conversion_temp_mid", p.conversion_temp_mid);
  get("conversion_temp_scale", p.conversion_temp_scale);
  get("conversion_pressure_mid", p.conversion_pressure_mid);
  get("conversion_pressure_scale", p.conversion_pressure_scale);
  if (j.contains("recovery_bias"))
    p.recovery_bias = array_from_json<3>(j.at("recovery_bias"), "recovery_bias");
  get("recovery_temp_ref", p.recovery_temp_ref);
  get("recovery_temp_scale", p.recovery_temp_scale);
  get("recovery_temp_gain", p.recovery_temp_gain);
  get("recovery_pressure_ref", p.recovery_pressure_ref);
  get("recovery_pressure_scale", p.recovery_pressure_scale);
  get("recovery_pressure_gain", p.recovery_pressure_gain);
  get("feed_temp", p.feed_temp);
  get("feed_pressure", p.feed_pressure);
  get("heat_feed_coeff", p.heat_feed_coeff);
  get("heat_recycle_coeff", p.heat_recycle_coeff);
  get("heat_reactor_coeff", p.heat_reactor_coeff);
  get("heat_condenser_coeff", p.heat_condenser_coeff);
  get("heat_product_coeff", p.heat_product_coeff);
  get("power_feed_coeff", p.power_feed_coeff);
  get("power_recycle_coeff", p.power_recycle_coeff);
  get("power_product_coeff", p.power_product_coeff);
  get("damping", p.damping);
  get("tolerance", p.tolerance);
  if (j.contains("max_iterations")) p.max_iterations = j.at("max_iterations").get<int>();
  return p;
}

CostWeights cost_weights_from_json(const json& j) {
  CostWeights w;
  if (j.contains("reagent_price"))
    w.reagent_price = array_from_json<2>(j.at("reagent_price"), "reagent_price");
  if (j.contains("feed_rate")) w.feed_rate = array_from_json<2>(j.at("feed_rate"), "feed_rate");
  if (j.contains("product_value"))
    w.product_value = array_from_json<3>(j.at("product_value"), "product_value");
  if (j.contains("purge_value"))
    w.purge_value = array_from_json<3>(j.at("purge_value"), "purge_value");
  if (j.contains("penalty_weight")) w.penalty_weight = j.at("penalty_weight").get<double>();
  if (j.contains("target_rate")) w.target_rate = j.at("target_rate").get<double>();
  if (j.contains("heat_price"))
    w.heat_price = array_from_json<5>(j.at("heat_price"), "heat_price");
  if (j.contains("power_price")) w.power_price = j.at("power_price").get<double>();
  return w;
}

void save_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("save_json: cannot open " + path.string());
  out << j.dump(2) << '\n';
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_json: cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("load_json: " + path.string() + ": " + e.what());
  }
}

}  // namespace bois
