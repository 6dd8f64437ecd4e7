#include "tbp/upsample.hpp"

#include <Eigen/Cholesky>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

#include "tbp/errors.hpp"
#include "tbp/kernels.hpp"

namespace tbp {

MiniMode mini_mode_from_string(const std::string& name) {
  if (name == "ambient_projection") return MiniMode::ambient_projection;
  if (name == "fisher_pullback") return MiniMode::fisher_pullback;
  throw ConfigError("unknown mini mode '" + name + "'");
}

BoundaryPolicy boundary_policy_from_string(const std::string& name) {
  if (name == "replace_with_base") return BoundaryPolicy::replace_with_base;
  if (name == "discard_raw") return BoundaryPolicy::discard_raw;
  throw ConfigError("unknown boundary policy '" + name + "'");
}

const char* to_string(MiniMode mode) {
  return mode == MiniMode::fisher_pullback ? "fisher_pullback" : "ambient_projection";
}

const char* to_string(BoundaryPolicy policy) {
  return policy == BoundaryPolicy::discard_raw ? "discard_raw" : "replace_with_base";
}

void UpsampleConfig::validate() const {
  if (m < 1) throw ConfigError("upsample multiplier m must be >= 1");
  if (threads < 1) throw ConfigError("upsample threads must be >= 1");
}

namespace {

inline void draw_one_ambient(const BaseChainEntry& entry, Rng& rng, Vec& z, Vec& beta) {
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = rng.normal();
  kernels::add_scaled(entry.alpha.data(), 1.0 / std::sqrt(entry.c), z.data(), beta.data(),
                      z.size());
}

inline double weight_normalizer(double c, Eigen::Index s) {
  // ((1+c)/c)^{s/2}, written to stay exact for very large c.
  return std::exp(0.5 * double(s) * std::log1p(1.0 / c));
}

}  // namespace

Mat draw_mini_ambient(const BaseChainEntry& entry, long m, Rng& rng) {
  if (!(entry.c > 0)) throw InvalidInput("draw_mini_ambient requires c > 0");
  const Eigen::Index d = entry.alpha.size();
  Mat out(d, m);
  Vec z(d), beta(d);
  for (long j = 0; j < m; ++j) {
    draw_one_ambient(entry, rng, z, beta);
    out.col(j) = beta;
  }
  return out;
}

Vec project_pullback(const BaseChainEntry& entry, const Vec& beta) {
  if (entry.flagged) return entry.theta;
  const Eigen::Index d = entry.alpha.size();
  const Eigen::Index s = entry.theta.size();
  Vec diff = beta - entry.alpha;
  Vec u(s);
  kernels::gemv_cols(entry.geometry.pseudoinverse_t.data(), d, s, diff.data(), u.data());
  return entry.theta + u;
}

Vec pushforward(const BaseChainEntry& entry, const Vec& theta_ij) {
  const Eigen::Index d = entry.alpha.size();
  const Eigen::Index s = entry.theta.size();
  Vec beta_perp = entry.alpha;
  for (Eigen::Index mu = 0; mu < s; ++mu)
    kernels::axpy(theta_ij[mu] - entry.theta[mu], entry.jacobian.col(mu).data(),
                  beta_perp.data(), d);
  return beta_perp;
}

double weight(const BaseChainEntry& entry, const Vec& beta_perp, const Vec& beta_star) {
  const Eigen::Index d = entry.alpha.size();
  const Eigen::Index s = entry.theta.size();
  const double c = entry.c;
  if (!(c > 0)) throw InvalidInput("weight requires c > 0");
  Vec v = beta_perp - beta_star;
  Vec u(s);
  kernels::gemv_cols(entry.geometry.pseudoinverse_t.data(), d, s, v.data(), u.data());
  const double qf = u.dot(entry.geometry.metric * u);
  return weight_normalizer(c, s) * std::exp(-0.5 * qf / (1.0 + c));
}

Mat draw_mini_fisher(const BaseChainEntry& entry, long m, Rng& rng) {
  if (!(entry.c > 0)) throw InvalidInput("draw_mini_fisher requires c > 0");
  const Eigen::Index s = entry.theta.size();
  Mat out(s, m);
  if (entry.flagged) {
    out.colwise() = entry.theta;
    return out;
  }
  Eigen::LLT<Mat> llt(entry.geometry.metric);
  if (llt.info() != Eigen::Success) {
    out.colwise() = entry.theta;
    return out;
  }
  const Mat upper = Mat(llt.matrixL()).transpose();
  const double inv_sqrt_c = 1.0 / std::sqrt(entry.c);
  Vec z(s);
  for (long j = 0; j < m; ++j) {
    for (Eigen::Index k = 0; k < s; ++k) z[k] = rng.normal();
    out.col(j) = entry.theta + inv_sqrt_c * upper.triangularView<Eigen::Upper>().solve(z);
  }
  return out;
}

std::vector<WeightedSample> boundary_correct(std::vector<WeightedSample> samples,
                                             const std::vector<BaseChainEntry>& base,
                                             const SamplingRegion& region, BoundaryPolicy policy,
                                             long* replaced) {
  long count = 0;
  if (policy == BoundaryPolicy::replace_with_base) {
    for (auto& smp : samples) {
      if (region.contains(smp.theta)) continue;
      smp.theta = base.at(smp.base_index).theta;
      smp.w = 1.0;
      smp.boundary_replaced = true;
      smp.beta_perp.reset();
      ++count;
    }
  } else {
    std::vector<WeightedSample> kept;
    kept.reserve(samples.size());
    for (auto& smp : samples) {
      if (region.contains(smp.theta))
        kept.push_back(std::move(smp));
      else
        ++count;
    }
    samples = std::move(kept);
  }
  if (replaced != nullptr) *replaced = count;
  return samples;
}

namespace {

void parallel_over_entries(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const int k = std::min<int>(threads, int(n));
  pool.reserve(k);
  for (int t = 0; t < k; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace

std::vector<WeightedSample> upsample(const std::vector<BaseChainEntry>& base,
                                     const AmbientGaussian& gaussian, const SamplingRegion& region,
                                     const UpsampleConfig& cfg, UpsampleReport* report) {
  cfg.validate();
  if (base.empty()) throw InvalidInput("upsample requires a nonempty base chain");
  if (!gaussian.is_whitened()) throw InvalidInput("upsample expects a whitened gaussian");
  const Eigen::Index d = base.front().alpha.size();
  const Eigen::Index s = base.front().theta.size();
  const long m = cfg.m;

  std::vector<WeightedSample> samples(base.size() * std::size_t(m));
  std::atomic<long> flagged{0};

  parallel_over_entries(base.size(), cfg.threads, [&](std::size_t i) {
    const BaseChainEntry& entry = base[i];
    WeightedSample* slot = samples.data() + i * std::size_t(m);
    if (entry.flagged) {
      flagged.fetch_add(1, std::memory_order_relaxed);
      // High-compactness semantics: m unit-weight copies of the base point.
      for (long j = 0; j < m; ++j) {
        slot[j].theta = entry.theta;
        slot[j].w = 1.0;
        slot[j].base_index = int(i);
      }
      return;
    }
    Rng rng = Rng::substream(cfg.seed, i);
    Vec z(d), beta(d);
    Eigen::LLT<Mat> llt;
    Mat fisher_upper;
    if (cfg.mini_mode == MiniMode::fisher_pullback) {
      llt.compute(entry.geometry.metric);
      if (llt.info() == Eigen::Success) fisher_upper = Mat(llt.matrixL()).transpose();
    }
    const double inv_sqrt_c = 1.0 / std::sqrt(entry.c);
    for (long j = 0; j < m; ++j) {
      Vec theta_ij;
      if (cfg.mini_mode == MiniMode::ambient_projection) {
        draw_one_ambient(entry, rng, z, beta);
        theta_ij = project_pullback(entry, beta);
      } else if (fisher_upper.size() != 0) {
        Vec zs(s);
        for (Eigen::Index k = 0; k < s; ++k) zs[k] = rng.normal();
        theta_ij = entry.theta +
                   inv_sqrt_c * fisher_upper.triangularView<Eigen::Upper>().solve(zs);
      } else {
        theta_ij = entry.theta;
      }
      const Vec beta_perp = pushforward(entry, theta_ij);
      slot[j].theta = std::move(theta_ij);
      slot[j].w = weight(entry, beta_perp, gaussian.beta_star);
      slot[j].base_index = int(i);
      if (cfg.keep_beta_perp) slot[j].beta_perp = beta_perp;
    }
  });

  // Drop any non-finite weights (kept rare by construction); the compaction
  // runs after the parallel section so ordering stays (i, j).
  long dropped = 0;
  {
    std::size_t w_pos = 0;
    for (std::size_t r = 0; r < samples.size(); ++r) {
      if (!std::isfinite(samples[r].w) || !(samples[r].w > 0)) {
        ++dropped;
        continue;
      }
      if (w_pos != r) samples[w_pos] = std::move(samples[r]);
      ++w_pos;
    }
    samples.resize(w_pos);
  }

  long replaced = 0;
  samples = boundary_correct(std::move(samples), base, region, cfg.boundary_policy, &replaced);

  if (report != nullptr) {
    report->n = long(base.size());
    report->m = m;
    report->flagged_entries = flagged.load();
    report->boundary_replaced = replaced;
    report->dropped_nonfinite = dropped;
    report->total = samples.size();
  }
  return samples;
}

}  // namespace tbp
