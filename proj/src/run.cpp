#include "tbp/run.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "tbp/diagnostics.hpp"
#include "tbp/errors.hpp"
#include "tbp/io.hpp"
#include "tbp/kernels.hpp"
#include "tbp/rng.hpp"

namespace tbp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

void require_keys(const json& obj, const char* where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* name : allowed)
      if (key == name) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  return obj.at(key).get<T>();
}

struct StageTimer {
  using Clock = std::chrono::steady_clock;
  Clock::time_point t0 = Clock::now();
  double take_ms() {
    const auto t1 = Clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    t0 = t1;
    return ms;
  }
};

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt) {
  std::uint64_t x = master + 0x9E3779B97F4A7C15ULL * (salt + 1);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double TestFunctionSpec::eval(const Vec& theta) const {
  double v = 1.0;
  for (std::size_t k = 0; k < powers.size(); ++k) {
    if (powers[k] == 0) continue;
    v *= std::pow(theta[Eigen::Index(k)], powers[k]);
  }
  return v;
}

ExampleSetup make_example(const std::string& name, const json& params) {
  if (name == "parabola") {
    require_keys(params, "example.params", {});
    return parabola();
  }
  if (name == "klein") {
    require_keys(params, "example.params", {"rotation_seed"});
    return klein(get_or<std::uint64_t>(params, "rotation_seed", 12));
  }
  if (name == "reparabola") {
    require_keys(params, "example.params", {});
    return reparabola();
  }
  if (name == "beta") {
    require_keys(params, "example.params", {"a", "b", "delta"});
    return beta_example(get_or<double>(params, "a", 2.0), get_or<double>(params, "b", 4.0),
                        get_or<double>(params, "delta", 1e-6));
  }
  if (name == "synthetic_highd") {
    require_keys(params, "example.params", {"s", "d", "seed", "amplitude", "n_waves"});
    return synthetic_highd(get_or<Eigen::Index>(params, "s", 2),
                           get_or<Eigen::Index>(params, "d", 170),
                           get_or<std::uint64_t>(params, "seed", 11),
                           get_or<double>(params, "amplitude", 0.3),
                           get_or<int>(params, "n_waves", 6));
  }
  throw ConfigError("unknown example '" + name + "'");
}

RunConfig parse_run_config(const json& root) {
  require_keys(root, "config", {"version", "seed", "output_dir", "example", "chain_path", "n",
                                "chain", "upsample", "compactness", "evaluation"});
  if (get_or<int>(root, "version", 0) != 1) throw ConfigError("config version must be 1");

  RunConfig cfg;
  cfg.seed = get_or<std::uint64_t>(root, "seed", 1);
  cfg.output_dir = get_or<std::string>(root, "output_dir", "out");
  cfg.n = get_or<long>(root, "n", 200);
  if (cfg.n < 1) throw ConfigError("n must be >= 1");
  cfg.chain_path = get_or<std::string>(root, "chain_path", "");

  if (!root.contains("example")) throw ConfigError("config requires an example block");
  const json& ex = root.at("example");
  require_keys(ex, "example", {"name", "params"});
  cfg.example_name = ex.at("name").get<std::string>();
  cfg.example_params = ex.contains("params") ? ex.at("params") : json::object();

  const json chain = root.contains("chain") ? root.at("chain") : json::object();
  require_keys(chain, "chain",
               {"n_steps", "burn_in", "thinning", "proposal_scale", "proposal_kind", "seed"});
  cfg.chain.n_steps = get_or<long>(chain, "n_steps", 22000);
  cfg.chain.burn_in = get_or<long>(chain, "burn_in", 2000);
  cfg.chain.thinning = get_or<long>(chain, "thinning", 1);
  cfg.chain.proposal_kind =
      proposal_kind_from_string(get_or<std::string>(chain, "proposal_kind", "isotropic_gaussian"));
  cfg.chain.seed = chain.contains("seed") ? chain.at("seed").get<std::uint64_t>()
                                          : derive_seed(cfg.seed, 1);
  if (chain.contains("proposal_scale")) {
    const json& ps = chain.at("proposal_scale");
    if (ps.is_number()) {
      cfg.chain.proposal_scale = Vec::Constant(1, ps.get<double>());
    } else if (ps.is_array()) {
      cfg.chain.proposal_scale = Vec(ps.size());
      for (std::size_t k = 0; k < ps.size(); ++k)
        cfg.chain.proposal_scale[Eigen::Index(k)] = ps[k].get<double>();
    } else {
      throw ConfigError("chain.proposal_scale must be a number or array");
    }
  }
  cfg.chain.validate();

  const json up = root.contains("upsample") ? root.at("upsample") : json::object();
  require_keys(up, "upsample",
               {"m", "mini_mode", "boundary_policy", "threads", "keep_beta_perp", "seed"});
  cfg.upsample_cfg.m = get_or<long>(up, "m", 100);
  cfg.upsample_cfg.mini_mode =
      mini_mode_from_string(get_or<std::string>(up, "mini_mode", "ambient_projection"));
  cfg.upsample_cfg.boundary_policy =
      boundary_policy_from_string(get_or<std::string>(up, "boundary_policy", "replace_with_base"));
  cfg.upsample_cfg.threads = get_or<int>(up, "threads", 1);
  cfg.upsample_cfg.keep_beta_perp = get_or<bool>(up, "keep_beta_perp", false);
  cfg.upsample_cfg.seed =
      up.contains("seed") ? up.at("seed").get<std::uint64_t>() : derive_seed(cfg.seed, 2);
  cfg.upsample_cfg.validate();

  const json comp = root.contains("compactness") ? root.at("compactness") : json::object();
  require_keys(comp, "compactness", {"epsilon", "mode", "constant_c"});
  cfg.compactness_cfg.epsilon = get_or<double>(comp, "epsilon", 0.1);
  cfg.compactness_cfg.mode =
      compactness_mode_from_string(get_or<std::string>(comp, "mode", "metric_and_curvature"));
  cfg.compactness_cfg.constant_c = get_or<double>(comp, "constant_c", 1.0);
  cfg.compactness_cfg.validate();

  const json ev = root.contains("evaluation") ? root.at("evaluation") : json::object();
  require_keys(ev, "evaluation",
               {"bins_per_dim", "marginals", "test_functions", "error_weights",
                "analytic_reference", "reference_chain", "reference_hist", "export_csv"});
  cfg.evaluation.bins_per_dim = get_or<int>(ev, "bins_per_dim", 100);
  if (cfg.evaluation.bins_per_dim < 1) throw ConfigError("bins_per_dim must be >= 1");
  if (ev.contains("marginals"))
    cfg.evaluation.marginals = ev.at("marginals").get<std::vector<std::vector<int>>>();
  if (ev.contains("test_functions")) {
    for (const json& tf : ev.at("test_functions")) {
      require_keys(tf, "test_functions[]", {"name", "powers"});
      TestFunctionSpec spec;
      spec.name = tf.at("name").get<std::string>();
      spec.powers = tf.at("powers").get<std::vector<double>>();
      cfg.evaluation.test_functions.push_back(std::move(spec));
    }
  }
  cfg.evaluation.error_weights = get_or<bool>(ev, "error_weights", false);
  cfg.evaluation.analytic_reference = get_or<bool>(ev, "analytic_reference", true);
  cfg.evaluation.export_csv = get_or<bool>(ev, "export_csv", true);
  cfg.evaluation.reference_hist_path = get_or<std::string>(ev, "reference_hist", "");
  if (ev.contains("reference_chain")) {
    const json& rc = ev.at("reference_chain");
    require_keys(rc, "reference_chain", {"n_samples", "burn_in", "thinning"});
    cfg.evaluation.reference_chain.enabled = true;
    cfg.evaluation.reference_chain.n_samples = get_or<long>(rc, "n_samples", 100000);
    cfg.evaluation.reference_chain.burn_in = get_or<long>(rc, "burn_in", 5000);
    cfg.evaluation.reference_chain.thinning = get_or<long>(rc, "thinning", 3);
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in '" + path + "': " + e.what());
  }
  return parse_run_config(root);
}

void apply_override(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override must look like key.path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  json* node = &root;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw ConfigError("bad override path '" + path + "'");
    if (dot == std::string::npos) {
      json parsed;
      try {
        parsed = json::parse(value);
      } catch (const json::exception&) {
        parsed = value;  // plain string
      }
      (*node)[key] = parsed;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

namespace {

struct OutputTracker {
  fs::path dir;
  std::vector<fs::path> written;

  fs::path file(const std::string& name) {
    const fs::path p = dir / name;
    written.push_back(p);
    return p;
  }
  void discard_all() {
    for (const auto& p : written) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }
};

json expectation_block(const std::vector<WeightedSample>& samples,
                       const std::vector<BaseChainEntry>& base, const Vec& beta_star,
                       const TestFunctionSpec& tf, bool with_error_weights, bool hessian_present) {
  auto tau = [&tf](const Vec& th) { return tf.eval(th); };
  const Expectation e = weighted_expectation(samples, tau);
  json out{{"name", tf.name},
           {"value", e.value},
           {"mc_error", e.mc_error},
           {"clustered_mc_error", clustered_mc_error(samples, tau)},
           {"ess", e.ess},
           {"cluster_ess", cluster_ess(samples, tau)}};
  if (with_error_weights && hessian_present) {
    const auto dws = error_weights_for_samples(base, samples, beta_star);
    const auto rep = expectation_error(samples, dws, tau);
    out["delta_e"] = rep.delta_e;
    out["flagged_error_weights"] = rep.flagged;
  }
  return out;
}

}  // namespace

RunResult run(const RunConfig& cfg) {
  ExampleSetup ex = make_example(cfg.example_name, cfg.example_params);
  const WhitenedPair white = whiten(ex.model, ex.gaussian);
  const ManifoldModel& model = white.model;
  const AmbientGaussian& gaussian = white.gaussian;
  const SamplingRegion& region = ex.region;

  OutputTracker out;
  out.dir = cfg.output_dir;
  if (!cfg.output_dir.empty()) fs::create_directories(out.dir);

  RunResult result;
  try {
    StageTimer timer;
    json report{{"version", kVersion},
                {"seed", cfg.seed},
                {"example", cfg.example_name},
                {"n", cfg.n},
                {"m", cfg.upsample_cfg.m},
                {"epsilon", cfg.compactness_cfg.epsilon},
                {"compactness_mode", to_string(cfg.compactness_cfg.mode)},
                {"kernel_isa", kernels::isa_name(kernels::active_isa())}};
    json timings = json::object();

    // Stage 1: base states (fresh MH chain or an external chain file).
    model.counters().reset();
    std::vector<Vec> states;
    if (cfg.chain_path.empty()) {
      TargetDensity target(model, gaussian, region);
      ChainStats stats;
      states = metropolis_hastings(target, cfg.chain, &stats);
      report["chain"] = {{"acceptance_rate", stats.acceptance_rate()},
                         {"stalled_window", stats.stalled_window},
                         {"kept_states", states.size()}};
      if (stats.stalled_window)
        report["chain"]["warning"] = "a full proposal window passed with zero acceptances";
    } else {
      states = io::load_chain_thetas(cfg.chain_path);
      if (states.front().size() != model.s())
        throw NumericError("chain file dimension does not match the configured model");
      for (const Vec& th : states)
        if (!region.contains(th))
          throw NumericError("chain file contains a state outside the sampling region");
      report["chain"] = {{"loaded_from", cfg.chain_path}, {"kept_states", states.size()}};
    }
    const long chain_map_calls = model.counters().map_calls.load();
    timings["chain_ms"] = timer.take_ms();

    // Stage 2: downsample and decorate.
    std::vector<Vec> base_states = downsample(states, std::size_t(cfg.n));
    model.counters().reset();
    result.base = build_base_chain(base_states, model, gaussian, region, cfg.compactness_cfg);
    report["counters"] = {{"chain_target_calls", chain_map_calls},
                          {"upsample_map_calls", model.counters().map_calls.load()},
                          {"upsample_jacobian_calls", model.counters().jacobian_calls.load()},
                          {"upsample_hessian_calls", model.counters().hessian_calls.load()}};
    timings["decorate_ms"] = timer.take_ms();

    // Stage 3: upsample.
    UpsampleReport urep;
    result.samples = upsample(result.base, gaussian, region, cfg.upsample_cfg, &urep);
    report["upsample"] = {{"total_samples", urep.total},
                          {"flagged_entries", urep.flagged_entries},
                          {"boundary_replaced", urep.boundary_replaced},
                          {"replaced_fraction", urep.replaced_fraction()},
                          {"dropped_nonfinite", urep.dropped_nonfinite}};
    timings["upsample_ms"] = timer.take_ms();

    // Stage 4: evaluation.
    const auto& ev = cfg.evaluation;
    std::vector<std::pair<double, double>> ranges;
    for (Eigen::Index k = 0; k < region.dim(); ++k)
      ranges.push_back({region.lower[k], region.upper[k]});
    const auto axes = axes_for(ranges, ev.bins_per_dim);

    HistogramND proj = weighted_histogram(result.samples, axes);
    HistogramND basis = chain_histogram(base_states, axes);
    proj.normalize();
    basis.normalize();

    json dh = json::object();
    HistogramND reference;
    bool have_reference = false;
    std::string reference_kind;
    if (ev.analytic_reference && model.s() == 1 && ex.density_1d) {
      reference = quadrature_histogram_1d(ex.density_1d, region.lower[0], region.upper[0],
                                          ev.bins_per_dim);
      have_reference = true;
      reference_kind = "analytic";
    } else if (!ev.reference_hist_path.empty()) {
      reference = io::load_histogram_csv(ev.reference_hist_path);
      if (!reference.same_binning(proj))
        throw NumericError("reference histogram binning does not match the run");
      reference.normalize();
      have_reference = true;
      reference_kind = "file";
    } else if (ev.reference_chain.enabled) {
      TargetDensity target(model, gaussian, region);
      ChainConfig ref_cfg;
      ref_cfg.n_steps = ev.reference_chain.burn_in +
                        ev.reference_chain.n_samples * ev.reference_chain.thinning;
      ref_cfg.burn_in = ev.reference_chain.burn_in;
      ref_cfg.thinning = ev.reference_chain.thinning;
      ref_cfg.seed = derive_seed(cfg.seed, 3);
      const auto ref_states = metropolis_hastings(target, ref_cfg);
      reference = chain_histogram(ref_states, axes);
      reference.normalize();
      have_reference = true;
      reference_kind = "mh_reference";
    }
    if (have_reference) {
      dh["projected_vs_reference"] = hellinger(proj, reference);
      dh["base_vs_reference"] = hellinger(basis, reference);
      dh["reference_kind"] = reference_kind;
    }
    report["hellinger"] = dh;

    json expectations = json::array();
    for (const auto& tf : ev.test_functions)
      expectations.push_back(expectation_block(result.samples, result.base, gaussian.beta_star,
                                               tf, ev.error_weights, model.has_hessian()));
    report["expectations"] = expectations;
    timings["evaluate_ms"] = timer.take_ms();
    report["timings_ms"] = timings;

    // Stage 5: persist.
    io::save_chain_jsonl(out.file("base_chain.jsonl").string(), result.base);
    io::save_samples_jsonl(out.file("samples.jsonl").string(), result.samples);
    if (ev.export_csv) io::save_samples_csv(out.file("samples.csv").string(), result.samples);
    io::save_histogram_csv(out.file("hist_projected.csv").string(), proj);
    io::save_histogram_csv(out.file("hist_base.csv").string(), basis);
    if (have_reference)
      io::save_histogram_csv(out.file("hist_reference.csv").string(), reference);
    for (const auto& marg : ev.marginals) {
      if (marg.empty()) continue;
      std::string tag = "hist_projected_m";
      for (int k : marg) tag += std::to_string(k);
      HistogramND h = proj.marginalize(marg);
      io::save_histogram_csv(out.file(tag + ".csv").string(), h);
    }
    {
      std::ofstream rep_file(out.file("report.json"));
      rep_file << report.dump(2) << '\n';
    }
    result.report = std::move(report);
    return result;
  } catch (...) {
    out.discard_all();
    throw;
  }
}

double compare_histograms(const std::string& path_a, const std::string& path_b) {
  HistogramND a = io::load_histogram_csv(path_a);
  HistogramND b = io::load_histogram_csv(path_b);
  if (!a.same_binning(b)) throw NumericError("histogram binning metadata does not match");
  a.normalize();
  b.normalize();
  return hellinger(a, b);
}

}  // namespace tbp
