#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tbp/types.hpp"
#include "tbp/upsample.hpp"

namespace tbp {

struct HistogramAxis {
  double lo = 0.0;
  double hi = 1.0;
  int bins = 1;
  double width() const { return (hi - lo) / bins; }
  bool operator==(const HistogramAxis& o) const {
    return lo == o.lo && hi == o.hi && bins == o.bins;
  }
};

// Weight-accumulating N-dimensional histogram with uniform binning per axis.
// Counts are stored row-major with the last axis fastest; out-of-range mass
// goes to an overflow tally rather than being silently dropped.
class HistogramND {
 public:
  HistogramND() = default;
  explicit HistogramND(std::vector<HistogramAxis> axes);

  int dims() const { return int(axes_.size()); }
  const std::vector<HistogramAxis>& axes() const { return axes_; }
  const std::vector<double>& counts() const { return counts_; }
  double overflow() const { return overflow_; }
  bool normalized() const { return normalized_; }
  bool same_binning(const HistogramND& other) const { return axes_ == other.axes_; }

  void add(const double* coords, double w);
  void add(const Vec& point, double w = 1.0);

  // Merge partial histograms (sharded accumulation); binning must match.
  void merge(const HistogramND& other);

  // Scale counts to sum to 1. Throws on zero total mass.
  void normalize();

  // Sum over all axes not listed; `keep` is an ordered list of axis indices.
  HistogramND marginalize(const std::vector<int>& keep) const;

  double bin_center(int axis, int index) const;
  double bin_volume() const;

 private:
  friend HistogramND gaussian_blur(const HistogramND&, double);

  std::vector<HistogramAxis> axes_;
  std::vector<double> counts_;
  std::vector<std::size_t> strides_;
  double overflow_ = 0.0;
  bool normalized_ = false;
};

// Axes spanning the given per-axis ranges.
std::vector<HistogramAxis> axes_for(const std::vector<std::pair<double, double>>& ranges,
                                    int bins_per_dim);

// Histogram of weighted samples over the chosen coordinate subset (all
// coordinates when dims is empty).
HistogramND weighted_histogram(const std::vector<WeightedSample>& samples,
                               const std::vector<HistogramAxis>& axes,
                               const std::vector<int>& dims = {});

// Unit-weight variant for plain chains.
HistogramND chain_histogram(const std::vector<Vec>& chain, const std::vector<HistogramAxis>& axes,
                            const std::vector<int>& dims = {});

// d_H = sqrt(1/2 sum_i (sqrt(p_i) - sqrt(q_i))^2) over identically binned,
// normalized histograms.
double hellinger(const HistogramND& p, const HistogramND& q);

// 1D histogram of an unnormalized density, integrated per bin with 32-point
// Gauss-Legendre quadrature and normalized.
HistogramND quadrature_histogram_1d(const std::function<double(double)>& density, double lo,
                                    double hi, int bins);

// Per-bin Gaussian smoothing for plot exports; never used by the distance
// metrics.
HistogramND gaussian_blur(const HistogramND& hist, double sigma_bins);

struct Expectation {
  double value = 0.0;
  double mc_error = 0.0;
  double ess = 0.0;  // Kish effective sample size (sum w)^2 / sum w^2
};

// Self-normalized weighted expectation of tau with a Kish-ESS Monte Carlo
// error bar.
Expectation weighted_expectation(const std::vector<WeightedSample>& samples,
                                 const std::function<double(const Vec&)>& tau);

// Design-effect effective sample size for cluster-correlated sample sets:
// N / (1 + (m-1) rho), with rho the ANOVA intraclass correlation of tau
// across mini-distributions. Collapses to about n when every
// mini-distribution is glued to its base point.
double cluster_ess(const std::vector<WeightedSample>& samples,
                   const std::function<double(const Vec&)>& tau);

// Clustered (per-base-point) standard error of the self-normalized
// expectation; robust to within-mini-distribution correlation.
double clustered_mc_error(const std::vector<WeightedSample>& samples,
                          const std::function<double(const Vec&)>& tau);

}  // namespace tbp
