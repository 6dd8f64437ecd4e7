#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "tbp/chain.hpp"
#include "tbp/histogram.hpp"
#include "tbp/models.hpp"
#include "tbp/upsample.hpp"

namespace tbp {

// Parsed run configuration. The JSON schema is versioned and strict: unknown
// keys anywhere are rejected.
struct TestFunctionSpec {
  std::string name;
  std::vector<double> powers;  // tau(theta) = prod_mu theta_mu^p_mu
  double eval(const Vec& theta) const;
};

struct ReferenceChainSpec {
  bool enabled = false;
  long n_samples = 100000;
  long burn_in = 5000;
  long thinning = 3;
};

struct EvaluationConfig {
  int bins_per_dim = 100;
  std::vector<std::vector<int>> marginals;
  std::vector<TestFunctionSpec> test_functions;
  bool error_weights = false;
  bool analytic_reference = true;  // quadrature target (1D examples only)
  ReferenceChainSpec reference_chain;
  std::string reference_hist_path;
  bool export_csv = true;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::string output_dir;
  std::string example_name;
  nlohmann::json example_params = nlohmann::json::object();
  std::string chain_path;  // when set, skip MH and upsample this chain
  long n = 200;
  ChainConfig chain;
  UpsampleConfig upsample_cfg;
  CompactnessConfig compactness_cfg;
  EvaluationConfig evaluation;
};

RunConfig parse_run_config(const nlohmann::json& root);
RunConfig load_run_config(const std::string& path);

// Applies a dotted-path override ("compactness.epsilon=0.7") onto raw JSON.
void apply_override(nlohmann::json& root, const std::string& assignment);

ExampleSetup make_example(const std::string& name, const nlohmann::json& params);

struct RunResult {
  nlohmann::json report;
  std::vector<BaseChainEntry> base;
  std::vector<WeightedSample> samples;
};

// Full pipeline: chain (or external chain) -> decorate -> upsample ->
// evaluate -> persist. Files are removed again if the run fails partway.
RunResult run(const RunConfig& cfg);

// d_H between two persisted histograms (binning must match).
double compare_histograms(const std::string& path_a, const std::string& path_b);

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt);

}  // namespace tbp
