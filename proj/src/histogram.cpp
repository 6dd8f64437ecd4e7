#include "tbp/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tbp/errors.hpp"

namespace tbp {

HistogramND::HistogramND(std::vector<HistogramAxis> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw InvalidInput("histogram needs at least one axis");
  std::size_t total = 1;
  for (const auto& ax : axes_) {
    if (ax.bins < 1 || !(ax.hi > ax.lo)) throw InvalidInput("bad histogram axis");
    total *= std::size_t(ax.bins);
  }
  counts_.assign(total, 0.0);
  strides_.resize(axes_.size());
  std::size_t stride = 1;
  for (int k = int(axes_.size()) - 1; k >= 0; --k) {
    strides_[k] = stride;
    stride *= std::size_t(axes_[k].bins);
  }
}

void HistogramND::add(const double* coords, double w) {
  std::size_t flat = 0;
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    const auto& ax = axes_[k];
    const double x = coords[k];
    if (x < ax.lo || x > ax.hi) {
      overflow_ += w;
      return;
    }
    int idx = int((x - ax.lo) / (ax.hi - ax.lo) * ax.bins);
    if (idx == ax.bins) idx = ax.bins - 1;  // closed upper edge
    flat += strides_[k] * std::size_t(idx);
  }
  counts_[flat] += w;
  normalized_ = false;
}

void HistogramND::add(const Vec& point, double w) {
  if (point.size() != Eigen::Index(axes_.size())) throw InvalidInput("histogram point dimension mismatch");
  add(point.data(), w);
}

void HistogramND::merge(const HistogramND& other) {
  if (!same_binning(other)) throw InvalidInput("histogram merge needs identical binning");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  overflow_ += other.overflow_;
  normalized_ = false;
}

void HistogramND::normalize() {
  double total = 0.0;
  for (double c : counts_) total += c;
  if (!(total > 0)) throw NumericError("cannot normalize an empty histogram");
  for (double& c : counts_) c /= total;
  normalized_ = true;
}

HistogramND HistogramND::marginalize(const std::vector<int>& keep) const {
  if (keep.empty()) throw InvalidInput("marginalize needs at least one axis");
  std::vector<HistogramAxis> new_axes;
  for (int k : keep) new_axes.push_back(axes_.at(k));
  HistogramND out(new_axes);
  std::vector<int> idx(axes_.size(), 0);
  for (std::size_t flat = 0; flat < counts_.size(); ++flat) {
    std::size_t rem = flat;
    for (std::size_t k = 0; k < axes_.size(); ++k) {
      idx[k] = int(rem / strides_[k]);
      rem %= strides_[k];
    }
    std::size_t out_flat = 0;
    for (std::size_t k = 0; k < keep.size(); ++k)
      out_flat += out.strides_[k] * std::size_t(idx[keep[k]]);
    out.counts_[out_flat] += counts_[flat];
  }
  out.overflow_ = overflow_;
  out.normalized_ = normalized_;
  return out;
}

double HistogramND::bin_center(int axis, int index) const {
  const auto& ax = axes_.at(axis);
  return ax.lo + (index + 0.5) * ax.width();
}

double HistogramND::bin_volume() const {
  double v = 1.0;
  for (const auto& ax : axes_) v *= ax.width();
  return v;
}

std::vector<HistogramAxis> axes_for(const std::vector<std::pair<double, double>>& ranges,
                                    int bins_per_dim) {
  std::vector<HistogramAxis> axes;
  axes.reserve(ranges.size());
  for (const auto& [lo, hi] : ranges) axes.push_back({lo, hi, bins_per_dim});
  return axes;
}

namespace {

template <typename GetPoint, typename GetWeight>
HistogramND accumulate(std::size_t count, const GetPoint& point, const GetWeight& weight,
                       const std::vector<HistogramAxis>& axes, const std::vector<int>& dims) {
  if (count == 0) throw InvalidInput("cannot histogram an empty sample set");
  HistogramND h(axes);
  std::vector<double> coords(axes.size());
  for (std::size_t i = 0; i < count; ++i) {
    const Vec& th = point(i);
    if (dims.empty()) {
      if (th.size() != Eigen::Index(axes.size()))
        throw InvalidInput("histogram axes do not match sample dimension");
      h.add(th.data(), weight(i));
    } else {
      for (std::size_t k = 0; k < dims.size(); ++k) coords[k] = th[dims[k]];
      h.add(coords.data(), weight(i));
    }
  }
  return h;
}

}  // namespace

HistogramND weighted_histogram(const std::vector<WeightedSample>& samples,
                               const std::vector<HistogramAxis>& axes,
                               const std::vector<int>& dims) {
  return accumulate(
      samples.size(), [&](std::size_t i) -> const Vec& { return samples[i].theta; },
      [&](std::size_t i) { return samples[i].w; }, axes, dims);
}

HistogramND chain_histogram(const std::vector<Vec>& chain, const std::vector<HistogramAxis>& axes,
                            const std::vector<int>& dims) {
  return accumulate(
      chain.size(), [&](std::size_t i) -> const Vec& { return chain[i]; },
      [&](std::size_t) { return 1.0; }, axes, dims);
}

double hellinger(const HistogramND& p, const HistogramND& q) {
  if (!p.same_binning(q)) throw InvalidInput("hellinger requires identical binning");
  if (!p.normalized() || !q.normalized()) throw InvalidInput("hellinger requires normalized histograms");
  double acc = 0.0;
  const auto& cp = p.counts();
  const auto& cq = q.counts();
  for (std::size_t i = 0; i < cp.size(); ++i) {
    const double d = std::sqrt(cp[i]) - std::sqrt(cq[i]);
    acc += d * d;
  }
  return std::sqrt(0.5 * acc);
}

namespace {

// 32-point Gauss-Legendre nodes/weights on [-1, 1] (nodes >= 0 half; weights
// symmetric). Abramowitz & Stegun table values.
constexpr int kGL = 16;
constexpr double kGLNode[kGL] = {
    0.0483076656877383162, 0.1444719615827964934, 0.2392873622521370745, 0.3318686022821276498,
    0.4213512761306353454, 0.5068999089322293900, 0.5877157572407623290, 0.6630442669302152010,
    0.7321821187402896804, 0.7944837959679424069, 0.8493676137325699701, 0.8963211557660521240,
    0.9349060759377396892, 0.9647622555875064308, 0.9856115115452683354, 0.9972638618494815635};
constexpr double kGLWeight[kGL] = {
    0.0965400885147278006, 0.0956387200792748594, 0.0938443990808045654, 0.0911738786957638847,
    0.0876520930044038111, 0.0833119242269467552, 0.0781938957870703065, 0.0723457941088485062,
    0.0658222227763618468, 0.0586840934785355471, 0.0509980592623761762, 0.0428358980222266807,
    0.0342738629130214331, 0.0253920653092620595, 0.0162743947309056706, 0.0070186100094700966};

double gl32(const std::function<double(double)>& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (int k = 0; k < kGL; ++k)
    acc += kGLWeight[k] * (f(mid + half * kGLNode[k]) + f(mid - half * kGLNode[k]));
  return half * acc;
}

}  // namespace

HistogramND quadrature_histogram_1d(const std::function<double(double)>& density, double lo,
                                    double hi, int bins) {
  HistogramND h({HistogramAxis{lo, hi, bins}});
  const double w = (hi - lo) / bins;
  Vec x(1);
  for (int i = 0; i < bins; ++i) {
    const double mass = gl32(density, lo + i * w, lo + (i + 1) * w);
    x[0] = lo + (i + 0.5) * w;
    h.add(x, mass);
  }
  h.normalize();
  return h;
}

HistogramND gaussian_blur(const HistogramND& hist, double sigma_bins) {
  if (!(sigma_bins > 0)) return hist;
  const int radius = std::max(1, int(std::ceil(3 * sigma_bins)));
  std::vector<double> kernel(2 * radius + 1);
  double norm = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-0.5 * (k / sigma_bins) * (k / sigma_bins));
    norm += kernel[k + radius];
  }
  for (double& v : kernel) v /= norm;

  HistogramND out = hist;
  // Separable pass along each axis.
  for (int axis = 0; axis < hist.dims(); ++axis) {
    const int nb = hist.axes()[axis].bins;
    std::ptrdiff_t stride = 1;
    for (int k = hist.dims() - 1; k > axis; --k) stride *= hist.axes()[k].bins;
    const std::vector<double> src = out.counts_;
    std::fill(out.counts_.begin(), out.counts_.end(), 0.0);
    for (std::size_t flat = 0; flat < src.size(); ++flat) {
      if (src[flat] == 0.0) continue;
      const int idx = int(std::ptrdiff_t(flat) / stride) % nb;
      for (int k = -radius; k <= radius; ++k) {
        const int j = idx + k;
        if (j < 0 || j >= nb) continue;
        out.counts_[std::size_t(std::ptrdiff_t(flat) + k * stride)] += kernel[k + radius] * src[flat];
      }
    }
  }
  return out;
}

Expectation weighted_expectation(const std::vector<WeightedSample>& samples,
                                 const std::function<double(const Vec&)>& tau) {
  if (samples.empty()) throw InvalidInput("weighted_expectation requires samples");
  double sw = 0.0, sw2 = 0.0, stw = 0.0;
  for (const auto& smp : samples) {
    sw += smp.w;
    sw2 += smp.w * smp.w;
    stw += smp.w * tau(smp.theta);
  }
  if (!(sw > 0)) throw NumericError("total weight must be positive");
  Expectation e;
  e.value = stw / sw;
  e.ess = sw * sw / sw2;
  double var = 0.0;
  for (const auto& smp : samples) {
    const double d = tau(smp.theta) - e.value;
    var += smp.w * d * d;
  }
  var /= sw;
  e.mc_error = std::sqrt(var / e.ess);
  return e;
}

double cluster_ess(const std::vector<WeightedSample>& samples,
                   const std::function<double(const Vec&)>& tau) {
  std::map<int, std::pair<double, double>> acc;  // base -> (sum y, sum y^2)
  std::map<int, long> cnt;
  for (const auto& smp : samples) {
    const double y = tau(smp.theta) * smp.w;
    auto& a = acc[smp.base_index];
    a.first += y;
    a.second += y * y;
    cnt[smp.base_index]++;
  }
  const double n_total = double(samples.size());
  const long n_groups = long(acc.size());
  if (n_groups <= 1) return n_total;
  double mbar = n_total / double(n_groups);

  double grand = 0.0;
  for (auto& [i, a] : acc) grand += a.first;
  grand /= n_total;

  // One-way ANOVA decomposition.
  double ss_between = 0.0, ss_within = 0.0;
  for (auto& [i, a] : acc) {
    const double ni = double(cnt[i]);
    const double mean_i = a.first / ni;
    ss_between += ni * (mean_i - grand) * (mean_i - grand);
    ss_within += a.second - ni * mean_i * mean_i;
  }
  const double ms_between = ss_between / double(n_groups - 1);
  const double denom_df = n_total - double(n_groups);
  const double ms_within = denom_df > 0 ? ss_within / denom_df : 0.0;
  const double icc_denom = ms_between + (mbar - 1.0) * ms_within;
  double rho = icc_denom > 0 ? (ms_between - ms_within) / icc_denom : 0.0;
  rho = std::clamp(rho, 0.0, 1.0);
  return n_total / (1.0 + (mbar - 1.0) * rho);
}

double clustered_mc_error(const std::vector<WeightedSample>& samples,
                          const std::function<double(const Vec&)>& tau) {
  std::map<int, std::pair<double, double>> acc;  // base -> (sum w tau, sum w)
  for (const auto& smp : samples) {
    auto& a = acc[smp.base_index];
    a.first += smp.w * tau(smp.theta);
    a.second += smp.w;
  }
  const long n = long(acc.size());
  if (n <= 1) return 0.0;
  double total_tw = 0.0, total_w = 0.0;
  for (auto& [i, a] : acc) {
    total_tw += a.first;
    total_w += a.second;
  }
  const double est = total_tw / total_w;
  // Ratio-estimator variance over clusters.
  double var = 0.0;
  for (auto& [i, a] : acc) {
    const double resid = a.first - est * a.second;
    var += resid * resid;
  }
  var *= double(n) / double(n - 1) / (total_w * total_w);
  return std::sqrt(var);
}

}  // namespace tbp
