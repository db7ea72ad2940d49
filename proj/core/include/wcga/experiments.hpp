#pragma once

#include "wcga/analysis.hpp"
#include "wcga/dictionaries.hpp"
#include "wcga/greedy.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wcga {

inline constexpr const char* kVersion = "0.1.0";

/// Malformed experiment configuration. what() names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct AlgorithmSpec {
  std::string name = "wcga";  // wcga | womp | tga
  double t = 1.0;
  double opt_tol_rel = 1e-9;
  double stop_tol_rel = 1e-10;
  int max_inner_iter = 200;
  int max_iter = 0;  // 0: chosen by the experiment
  /// Budget constants c in m' = ceil(c m ln(m + 1)).
  std::vector<double> budget_c{1.0};
  /// Randomized weak selection when t < 1.
  bool weak_random = false;
};

struct TargetSpec {
  std::string kind = "sparse";  // sparse | dense | adversarial
  int K = 3;
  std::string law = "gaussian";  // gaussian | rademacher | power
  double alpha = 1.0;            // power-law exponent
  double small = 0.05;           // adversarial: magnitude of the small coefficients
  double noise = 0.0;            // noise norm relative to ||f||_p
};

struct OracleSpec {
  int m_max = 4;
  std::uint64_t combo_cap = 2'000'000;
  bool capped = false;
  std::size_t beam_width = 64;
};

struct PhaseSpec {
  std::vector<int> sparsities{1, 2, 4};
  std::vector<double> budget_factors{1.0, 2.0, 3.0};
  double success_tol = 1e-8;
};

struct DecaySpec {
  double r = 0.5;
  int D = 0;  // 0: K + max_iter
  std::vector<double> noise_levels{0.0};
  std::vector<double> t_values{1.0};
};

struct RateSpec {
  int fit_lo = 10;
  int fit_hi = 100;
  std::vector<double> t_values{1.0};
};

struct ExperimentConfig {
  std::string experiment = "lebesgue";  // lebesgue | phase | tga_compare | decay | rate
  std::string name = "experiment";
  std::uint64_t seed = 0;
  int trials = 1;
  unsigned threads = 1;
  DictionaryDescriptor dictionary{.type = "trig", .dim = 1, .points_per_axis = 256, .p = 2.0, .max_freq = 7};
  AlgorithmSpec algorithm;
  TargetSpec target;
  OracleSpec oracle;
  PhaseSpec phase;
  DecaySpec decay;
  RateSpec rate;
  /// m values for lebesgue / tga_compare; empty means 1..oracle.m_max.
  std::vector<int> m_values;
  /// phi(m) measurement: smallest k with ||f_k|| <= phi_constant sigma_m.
  double phi_constant = 2.0;
  bool write_traces = false;
};

/// Parses the TOML experiment schema documented in docs/config.md.
ExperimentConfig parse_config(std::string_view toml_text);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// One CSV row: trial, m, m_prime, res_norm, sigma_m, ratio, flag.
struct ReportRow {
  int trial = 0;
  int m = 0;
  int m_prime = 0;
  double res_norm = 0.0;
  double sigma_m = 0.0;
  double ratio = 0.0;
  std::string flag;
};

/// A trace plus the experiment-level quantities the verifiers need.
struct TraceRecord {
  int trial = 0;
  GreedyTrace trace;
  nlohmann::json meta;  // K, r, V, eps, A_eps, support, ...
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ReportRow> rows;
  nlohmann::json summary;
  std::vector<TraceRecord> traces;
};

struct Target {
  SparseElement clean;  // f^eps
  SampledFunction f0;   // f^eps + noise
  double eps = 0.0;     // ||f0 - f^eps||_p
};

/// Random target drawn per TargetSpec from `rng`.
Target make_target(const Dictionary& dict, const TargetSpec& spec, double p, std::mt19937_64& rng);

/// Independent stream for one trial, derived from (seed, trial).
std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial, std::uint64_t stream = 0);

ExperimentReport run_lebesgue(const ExperimentConfig& config);
ExperimentReport run_phase(const ExperimentConfig& config);
ExperimentReport run_tga_compare(const ExperimentConfig& config);
ExperimentReport run_decay(const ExperimentConfig& config);
ExperimentReport run_rate(const ExperimentConfig& config);
/// Dispatches on config.experiment.
ExperimentReport run_experiment(const ExperimentConfig& config);

std::string report_csv(const ExperimentReport& report);
nlohmann::json report_json(const ExperimentReport& report);
nlohmann::json traces_json(const ExperimentReport& report);

/// Writes <name>.csv and <name>.json (and <name>.traces.json when
/// requested) into `dir`. Returns the written paths.
std::vector<std::filesystem::path> write_report(const ExperimentReport& report,
                                                const std::filesystem::path& dir);

/// The built-in seeded showcase run by `wcga demo`.
std::vector<ExperimentConfig> demo_configs();

}  // namespace wcga
