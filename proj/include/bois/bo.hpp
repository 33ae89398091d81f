#pragma once

#include "bois/acquisition.hpp"
#include "bois/gp_bank.hpp"
#include "bois/moments.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bois {

enum class Variant { sbo, mcbo, bois };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

// Optional Gaussian observation noise, per output channel plus the objective.
struct NoiseModel {
  Vec y_std;           // d_y, per-output standard deviation
  double f_std = 0.0;
  std::uint64_t seed = 0;
};

// The system under optimization. Every evaluate() call increments the
// counter; algorithms must spend observations only here.
class Oracle {
 public:
  using EvalFn = std::function<std::pair<Vec, double>(const Vec&)>;

  explicit Oracle(EvalFn fn, std::optional<NoiseModel> noise = std::nullopt)
      : fn_(std::move(fn)), noise_(std::move(noise)) {}

  std::pair<Vec, double> evaluate(const Vec& x);
  long eval_count() const { return eval_count_; }

 private:
  EvalFn fn_;
  std::optional<NoiseModel> noise_;
  long eval_count_ = 0;
};

struct InitialDesign {
  enum class Mode { single_point, random_n, grid };
  Mode mode = Mode::single_point;
  Vec x0;          // single_point
  int count = 1;   // random_n
  int levels = 3;  // grid: levels per dimension
};

// Full factorial lattice (grid), uniform draws (random_n), or the one given
// point. Grid enumerates lower corner first, upper corner last; grids larger
// than 1e5 points are rejected.
Mat initial_design(const BoxDomain& domain, const InitialDesign& design, std::uint64_t seed);

struct RefitPolicy {
  int every_until = 25;  // refit hyperparameters every iteration up to here
  int stride = 5;        // then every stride-th iteration (recondition otherwise)
};

struct BOConfig {
  Variant variant = Variant::bois;
  int iterations = 100;  // L
  InitialDesign init{};
  AcquisitionSpec acquisition{};
  long mc_samples = 1000;        // mcbo
  ReferencePolicy policy{};      // bois
  KernelFamily kernel = KernelFamily::matern52;
  std::uint64_t seed = 0;
  FitOptions fit{};
  SearchBudget search{};
  RefitPolicy refit{};
};

struct TraceRecord {
  int iteration = 0;  // 0 for initial-design rows
  Vec x;
  Vec y;               // observed intermediate outputs (empty for pure black-box)
  double f_obs = 0.0;
  bool predicted_valid = false;  // initial-design rows carry no prediction
  double pred_mean = 0.0;
  double pred_std = 0.0;
  double af_value = 0.0;
  double wallclock_ms = 0.0;
  double best_f = 0.0;  // running minimum including this record
};

struct RunTrace {
  std::vector<TraceRecord> records;
  Vec incumbent_x;
  double incumbent_f = 0.0;
  int input_dim = 0;
  int output_dim = 0;
  // set when the oracle failed mid-run; records hold everything observed
  // before the failure
  std::optional<std::string> error;
};

// One BO run. `objective` is required for mcbo/bois and must be null for sbo.
// sbo fits a GP on observed f; mcbo/bois fit a bank on observed y and score
// candidates through the configured moment engine. Deterministic given the
// config seed (timing fields aside).
RunTrace run(Oracle& oracle, const CompositeObjective* objective, const BoxDomain& domain,
             const BOConfig& config);

// (iteration index, best-so-far f), one entry per record; non-increasing.
std::vector<std::pair<int, double>> incumbent_curve(const RunTrace& trace);

// CSV export with fixed columns:
// iter,x_1..x_dx,y_1..y_dy,f_obs,m_f,sigma_f,af,wallclock_ms,best_f
// Prediction cells are empty on rows that carry no prediction.
void write_trace_csv(const RunTrace& trace, const std::filesystem::path& path);
RunTrace read_trace_csv(const std::filesystem::path& path);

}  // namespace bois
