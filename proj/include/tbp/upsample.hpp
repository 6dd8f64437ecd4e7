#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tbp/chain.hpp"
#include "tbp/rng.hpp"

namespace tbp {

struct WeightedSample {
  Vec theta;
  double w = 1.0;
  int base_index = 0;
  bool boundary_replaced = false;
  std::optional<Vec> beta_perp;  // retained only on request, for diagnostics
};

enum class MiniMode { ambient_projection, fisher_pullback };
enum class BoundaryPolicy { replace_with_base, discard_raw };

MiniMode mini_mode_from_string(const std::string& name);
BoundaryPolicy boundary_policy_from_string(const std::string& name);
const char* to_string(MiniMode mode);
const char* to_string(BoundaryPolicy policy);

struct UpsampleConfig {
  long m = 100;
  std::uint64_t seed = 1;
  MiniMode mini_mode = MiniMode::ambient_projection;
  BoundaryPolicy boundary_policy = BoundaryPolicy::replace_with_base;
  int threads = 1;
  bool keep_beta_perp = false;

  void validate() const;
};

// m ambient draws beta_ij = alpha_i + z/sqrt(c), one per column.
Mat draw_mini_ambient(const BaseChainEntry& entry, long m, Rng& rng);

// theta_ij = theta_i + J^+ (beta - alpha_i); flagged entries return theta_i.
Vec project_pullback(const BaseChainEntry& entry, const Vec& beta);

// beta_perp = alpha_i + J (theta_ij - theta_i).
Vec pushforward(const BaseChainEntry& entry, const Vec& theta_ij);

// Closed-form Gaussian importance weight in the whitened frame:
//   w = ((1+c)/c)^{s/2} exp(-v^T P_perp v / (2(1+c))),  v = beta_perp - beta_star,
// with the quadratic form evaluated in tangent coordinates u = J^+ v as
// u^T F_I u, so no d x d matrix is ever formed.
double weight(const BaseChainEntry& entry, const Vec& beta_perp, const Vec& beta_star);

// m parameter-space draws theta_ij ~ N(theta_i, Gamma^{-1}/c), one per column.
Mat draw_mini_fisher(const BaseChainEntry& entry, long m, Rng& rng);

// Replaces every out-of-region sample with a unit-weight copy of its base
// point (or drops it under discard_raw). Count is preserved under replace.
std::vector<WeightedSample> boundary_correct(std::vector<WeightedSample> samples,
                                             const std::vector<BaseChainEntry>& base,
                                             const SamplingRegion& region, BoundaryPolicy policy,
                                             long* replaced = nullptr);

struct UpsampleReport {
  long n = 0;
  long m = 0;
  long flagged_entries = 0;
  long boundary_replaced = 0;
  long dropped_nonfinite = 0;
  std::size_t total = 0;
  double replaced_fraction() const { return n && m ? double(boundary_replaced) / double(n * m) : 0.0; }
};

// Full draw -> project -> pushforward -> weight -> boundary-correct pass.
// Deterministic for fixed (seed, inputs) independent of cfg.threads: every
// entry owns the RNG substream (seed, i) and a fixed output slot.
std::vector<WeightedSample> upsample(const std::vector<BaseChainEntry>& base,
                                     const AmbientGaussian& gaussian, const SamplingRegion& region,
                                     const UpsampleConfig& cfg, UpsampleReport* report = nullptr);

}  // namespace tbp
