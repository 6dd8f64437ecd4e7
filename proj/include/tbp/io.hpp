#pragma once

#include <string>
#include <vector>

#include "tbp/chain.hpp"
#include "tbp/histogram.hpp"
#include "tbp/upsample.hpp"

namespace tbp::io {

// Base chain JSONL: one record per entry with theta, alpha, row-major J,
// optional row-major H (d x s^2), compactness and flag. Reloadable for post
// hoc upsampling.
void save_chain_jsonl(const std::string& path, const std::vector<BaseChainEntry>& entries);
std::vector<BaseChainEntry> load_chain_jsonl(const std::string& path);
// Just the states, for re-decoration under a different configuration.
std::vector<Vec> load_chain_thetas(const std::string& path);

// Weighted samples JSONL: {"i": ..., "j": ..., "theta": [...], "w": ...,
// "replaced": ...}. j is the within-mini-distribution ordinal.
void save_samples_jsonl(const std::string& path, const std::vector<WeightedSample>& samples);
std::vector<WeightedSample> load_samples_jsonl(const std::string& path);

// Samples CSV: one column per coordinate plus weight.
void save_samples_csv(const std::string& path, const std::vector<WeightedSample>& samples);

// Histogram CSV with binning metadata in '#' header lines; ND histograms
// flatten with explicit index columns. Values round-trip bit-exactly.
void save_histogram_csv(const std::string& path, const HistogramND& hist);
HistogramND load_histogram_csv(const std::string& path);

}  // namespace tbp::io
