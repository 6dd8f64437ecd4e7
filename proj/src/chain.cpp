#include "tbp/chain.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

#include "tbp/errors.hpp"
#include "tbp/kernels.hpp"
#include "tbp/rng.hpp"

namespace tbp {

TargetDensity::TargetDensity(const ManifoldModel& model, const AmbientGaussian& gaussian,
                             SamplingRegion region)
    : model_(gaussian.is_whitened() ? model : whiten(model, gaussian).model),
      beta_star_(Vec::Zero(model.d())),
      region_(std::move(region)) {
  if (region_.dim() != model_.s()) throw InvalidInput("region dimension must equal s");
}

double TargetDensity::log_density(const Vec& theta) const {
  if (!region_.contains(theta)) return -std::numeric_limits<double>::infinity();
  const Vec alpha = model_.map(theta);
  double q;
  if (model_.trivial_signature())
    q = kernels::sumsq_diff(alpha.data(), beta_star_.data(), alpha.size());
  else
    q = kernels::signed_sumsq_diff(alpha.data(), beta_star_.data(), model_.signature().data(),
                                   alpha.size());
  return -0.5 * q;
}

ProposalKind proposal_kind_from_string(const std::string& name) {
  if (name == "isotropic_gaussian") return ProposalKind::isotropic_gaussian;
  if (name == "fisher") return ProposalKind::fisher;
  throw ConfigError("unknown proposal kind '" + name + "'");
}

const char* to_string(ProposalKind kind) {
  return kind == ProposalKind::fisher ? "fisher" : "isotropic_gaussian";
}

void ChainConfig::validate() const {
  if (!(n_steps > burn_in) || burn_in < 0) throw ConfigError("chain requires n_steps > burn_in >= 0");
  if (thinning < 1) throw ConfigError("chain thinning must be >= 1");
}

namespace {

struct FisherProposal {
  Mat chol_lower;   // Gamma = L L^T
  double log_det;   // log det Gamma
  bool ok = false;
};

FisherProposal fisher_at(const ManifoldModel& model, const Vec& theta) {
  FisherProposal p;
  const Mat j = model.jacobian(theta);
  const Mat gamma = pullback_metric(j, model.signature());
  Eigen::LLT<Mat> llt(gamma);
  if (llt.info() != Eigen::Success) return p;
  p.chol_lower = llt.matrixL();
  p.log_det = 2.0 * p.chol_lower.diagonal().array().log().sum();
  p.ok = true;
  return p;
}

// log N(x; mean, scale^2 Gamma^{-1}) up to the dimension constant.
double log_fisher_proposal(const FisherProposal& p, const Vec& x, const Vec& mean, double scale) {
  const Vec diff = (x - mean) / scale;
  const Vec y = p.chol_lower.transpose() * diff;
  return 0.5 * p.log_det - 0.5 * y.squaredNorm() - double(x.size()) * std::log(scale);
}

}  // namespace

std::vector<Vec> metropolis_hastings(const TargetDensity& target, const ChainConfig& cfg,
                                     ChainStats* stats) {
  cfg.validate();
  const auto& region = target.region();
  const Eigen::Index s = region.dim();

  Vec scale;
  if (cfg.proposal_scale.size() == 0)
    scale = region.half_lengths() / 20.0;
  else if (cfg.proposal_scale.size() == 1)
    scale = Vec::Constant(s, cfg.proposal_scale[0]);
  else if (cfg.proposal_scale.size() == s)
    scale = cfg.proposal_scale;
  else
    throw ConfigError("proposal_scale must be scalar or length s");
  if (!(scale.array() > 0).all()) throw ConfigError("proposal scales must be positive");

  Rng rng = Rng::substream(cfg.seed, 0);
  Vec x = region.centroid();
  double lp = target.log_density(x);
  if (!std::isfinite(lp))
    throw NumericError("initial chain point has non-finite log density");

  const bool fisher = cfg.proposal_kind == ProposalKind::fisher;
  const double fisher_scale = cfg.proposal_scale.size() == 1 ? cfg.proposal_scale[0] : 1.0;
  FisherProposal prop_x;
  if (fisher) {
    prop_x = fisher_at(target.model(), x);
    if (!prop_x.ok) throw NumericError("fisher proposal is singular at the initial point");
  }

  ChainStats local;
  constexpr long kStallWindow = 1000;
  long since_accept = 0;

  std::vector<Vec> out;
  const long keep = (cfg.n_steps - cfg.burn_in) / cfg.thinning;
  out.reserve(std::max<long>(keep, 0));

  Vec xp(s), z(s);
  for (long step = 0; step < cfg.n_steps; ++step) {
    double log_ratio;
    FisherProposal prop_xp;
    if (!fisher) {
      for (Eigen::Index k = 0; k < s; ++k) xp[k] = x[k] + scale[k] * rng.normal();
      log_ratio = 0.0;
    } else {
      for (Eigen::Index k = 0; k < s; ++k) z[k] = rng.normal();
      xp = x + fisher_scale * prop_x.chol_lower.transpose().triangularView<Eigen::Upper>().solve(z);
      log_ratio = 0.0;
      if (region.contains(xp)) {
        prop_xp = fisher_at(target.model(), xp);
        if (prop_xp.ok)
          log_ratio = log_fisher_proposal(prop_xp, x, xp, fisher_scale) -
                      log_fisher_proposal(prop_x, xp, x, fisher_scale);
        else
          log_ratio = -std::numeric_limits<double>::infinity();
      }
    }

    const double lpp = target.log_density(xp);
    local.proposals++;
    const double log_alpha = lpp - lp + log_ratio;
    if (std::isfinite(lpp) && std::log(rng.uniform()) < log_alpha) {
      x = xp;
      lp = lpp;
      if (fisher) prop_x = prop_xp;
      local.accepted++;
      since_accept = 0;
    } else if (++since_accept >= kStallWindow) {
      local.stalled_window = true;
    }

    if (step >= cfg.burn_in && (step - cfg.burn_in) % cfg.thinning == 0) out.push_back(x);
  }

  if (stats != nullptr) *stats = local;
  return out;
}

std::vector<Vec> downsample(const std::vector<Vec>& chain, std::size_t n) {
  if (n == 0 || chain.empty()) throw InvalidInput("cannot downsample to an empty chain");
  if (n >= chain.size()) return chain;
  const std::size_t stride = chain.size() / n;
  std::vector<Vec> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(chain[k * stride]);
  return out;
}

std::vector<BaseChainEntry> build_base_chain(const std::vector<Vec>& thetas,
                                             const ManifoldModel& model,
                                             const AmbientGaussian& gaussian,
                                             const SamplingRegion& region,
                                             const CompactnessConfig& cfg) {
  cfg.validate();
  if (!gaussian.is_whitened())
    throw InvalidInput("build_base_chain expects a whitened model/gaussian pair");
  std::vector<BaseChainEntry> out;
  out.reserve(thetas.size());
  for (const Vec& theta : thetas) {
    if (!region.contains(theta)) throw InvalidInput("base chain state outside the sampling region");
    BaseChainEntry e;
    e.theta = theta;
    e.alpha = model.map(theta);
    e.jacobian = model.jacobian(theta);
    std::optional<HessianTensor> hess;
    if (model.has_hessian() && cfg.mode == CompactnessMode::metric_and_curvature)
      hess = model.hessian(theta);
    e.geometry = geometry_at(model, theta, e.alpha, e.jacobian, hess ? &*hess : nullptr);
    e.hessian = std::move(hess);
    if (e.geometry.singular) {
      e.flagged = true;
      out.push_back(std::move(e));
      continue;
    }
    e.lambda_sq = region_scale(e.geometry.pseudoinverse, region);
    try {
      e.c = compactness(e.lambda_sq, e.geometry.kappa, cfg);
    } catch (const DegenerateCompactness&) {
      e.flagged = true;
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace tbp
