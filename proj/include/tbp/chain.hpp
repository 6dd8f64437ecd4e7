#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tbp/compactness.hpp"
#include "tbp/geometry.hpp"
#include "tbp/manifold.hpp"

namespace tbp {

// Unnormalized log target: -1/2 |alpha(theta) - beta_star|^2 (signature
// weighted) inside the region, -inf outside. Assumes a whitened pair unless
// constructed with a general gaussian, in which case it whitens internally.
class TargetDensity {
 public:
  TargetDensity(const ManifoldModel& model, const AmbientGaussian& gaussian,
                SamplingRegion region);

  double log_density(const Vec& theta) const;
  const ManifoldModel& model() const { return model_; }
  const SamplingRegion& region() const { return region_; }
  const Vec& beta_star() const { return beta_star_; }

 private:
  ManifoldModel model_;
  Vec beta_star_;
  SamplingRegion region_;
};

enum class ProposalKind { isotropic_gaussian, fisher };

ProposalKind proposal_kind_from_string(const std::string& name);
const char* to_string(ProposalKind kind);

struct ChainConfig {
  long n_steps = 20000;
  long burn_in = 2000;
  long thinning = 1;
  // Per-coordinate proposal standard deviations; empty selects the default
  // of one twentieth of each region half-length. A single entry broadcasts.
  Vec proposal_scale;
  std::uint64_t seed = 1;
  ProposalKind proposal_kind = ProposalKind::isotropic_gaussian;

  void validate() const;
};

struct ChainStats {
  long proposals = 0;
  long accepted = 0;
  bool stalled_window = false;  // a full window passed with zero acceptances
  double acceptance_rate() const { return proposals ? double(accepted) / double(proposals) : 0.0; }
};

// Random-walk (or Fisher-preconditioned) Metropolis-Hastings over the target.
// Returns the post-burn-in, thinned states in order.
std::vector<Vec> metropolis_hastings(const TargetDensity& target, const ChainConfig& cfg,
                                     ChainStats* stats = nullptr);

// Uniform-stride downsampling to n entries.
std::vector<Vec> downsample(const std::vector<Vec>& chain, std::size_t n);

struct BaseChainEntry {
  Vec theta;
  Vec alpha;
  Mat jacobian;
  std::optional<HessianTensor> hessian;
  GeometryAtPoint geometry;
  double lambda_sq = 0.0;
  double c = 0.0;
  // Set when the singular-metric / degenerate-compactness fallback applies:
  // the entry upsamples to unit-weight copies of itself.
  bool flagged = false;
};

// Decorates chain states with geometry and compactness. Per-entry failures
// are flagged, never thrown.
std::vector<BaseChainEntry> build_base_chain(const std::vector<Vec>& thetas,
                                             const ManifoldModel& model,
                                             const AmbientGaussian& gaussian,
                                             const SamplingRegion& region,
                                             const CompactnessConfig& cfg);

}  // namespace tbp
