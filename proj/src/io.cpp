#include "tbp/io.hpp"

#include <charconv>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "tbp/errors.hpp"

namespace tbp::io {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return in;
}

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec vec_from_json(const json& a) {
  Vec v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[Eigen::Index(i)] = a[i].get<double>();
  return v;
}

json mat_to_json_rowmajor(const Mat& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
  return a;
}

Mat mat_from_json_rowmajor(const json& a, Eigen::Index rows, Eigen::Index cols) {
  if (a.size() != std::size_t(rows * cols)) throw Error("matrix payload size mismatch");
  Mat m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = a[k++].get<double>();
  return m;
}

// Shortest round-trip formatting, for CSV payloads.
std::string fmt_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace

void save_chain_jsonl(const std::string& path, const std::vector<BaseChainEntry>& entries) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    json rec{{"i", i},
             {"theta", vec_to_json(e.theta)},
             {"alpha", vec_to_json(e.alpha)},
             {"J", mat_to_json_rowmajor(e.jacobian)},
             {"c", e.c},
             {"flagged", e.flagged}};
    if (e.hessian) rec["H"] = mat_to_json_rowmajor(*e.hessian);
    out << rec.dump() << '\n';
  }
}

std::vector<Vec> load_chain_thetas(const std::string& path) {
  auto in = open_in(path);
  std::vector<Vec> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json rec = json::parse(line);
    out.push_back(vec_from_json(rec.at("theta")));
  }
  if (out.empty()) throw Error("chain file '" + path + "' holds no entries");
  return out;
}

std::vector<BaseChainEntry> load_chain_jsonl(const std::string& path) {
  auto in = open_in(path);
  std::vector<BaseChainEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json rec = json::parse(line);
    BaseChainEntry e;
    e.theta = vec_from_json(rec.at("theta"));
    e.alpha = vec_from_json(rec.at("alpha"));
    const Eigen::Index s = e.theta.size();
    const Eigen::Index d = e.alpha.size();
    e.jacobian = mat_from_json_rowmajor(rec.at("J"), d, s);
    if (rec.contains("H")) e.hessian = mat_from_json_rowmajor(rec.at("H"), d, s * s);
    e.c = rec.at("c").get<double>();
    e.flagged = rec.at("flagged").get<bool>();
    out.push_back(std::move(e));
  }
  if (out.empty()) throw Error("chain file '" + path + "' holds no entries");
  return out;
}

void save_samples_jsonl(const std::string& path, const std::vector<WeightedSample>& samples) {
  auto out = open_out(path);
  int prev_base = -1;
  long j = 0;
  for (const auto& smp : samples) {
    j = smp.base_index == prev_base ? j + 1 : 0;
    prev_base = smp.base_index;
    const json rec{{"i", smp.base_index},
                   {"j", j},
                   {"theta", vec_to_json(smp.theta)},
                   {"w", smp.w},
                   {"replaced", smp.boundary_replaced}};
    out << rec.dump() << '\n';
  }
}

std::vector<WeightedSample> load_samples_jsonl(const std::string& path) {
  auto in = open_in(path);
  std::vector<WeightedSample> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json rec = json::parse(line);
    WeightedSample smp;
    smp.base_index = rec.at("i").get<int>();
    smp.theta = vec_from_json(rec.at("theta"));
    smp.w = rec.at("w").get<double>();
    smp.boundary_replaced = rec.at("replaced").get<bool>();
    out.push_back(std::move(smp));
  }
  return out;
}

void save_samples_csv(const std::string& path, const std::vector<WeightedSample>& samples) {
  auto out = open_out(path);
  if (samples.empty()) throw InvalidInput("no samples to export");
  const Eigen::Index s = samples.front().theta.size();
  for (Eigen::Index k = 0; k < s; ++k) out << "theta" << k << ",";
  out << "w\n";
  for (const auto& smp : samples) {
    for (Eigen::Index k = 0; k < s; ++k) out << fmt_double(smp.theta[k]) << ',';
    out << fmt_double(smp.w) << '\n';
  }
}

void save_histogram_csv(const std::string& path, const HistogramND& hist) {
  auto out = open_out(path);
  out << "# dims=" << hist.dims() << " normalized=" << (hist.normalized() ? 1 : 0) << '\n';
  for (int k = 0; k < hist.dims(); ++k) {
    const auto& ax = hist.axes()[k];
    out << "# axis" << k << " lo=" << fmt_double(ax.lo) << " hi=" << fmt_double(ax.hi)
        << " bins=" << ax.bins << '\n';
  }
  out << "# overflow=" << fmt_double(hist.overflow()) << '\n';
  for (int k = 0; k < hist.dims(); ++k) out << "index" << k << ",center" << k << ",";
  out << "mass,density\n";
  const double vol = hist.bin_volume();
  std::vector<int> idx(hist.dims(), 0);
  const auto& counts = hist.counts();
  for (std::size_t flat = 0; flat < counts.size(); ++flat) {
    std::size_t rem = flat;
    for (int k = hist.dims() - 1; k >= 0; --k) {
      idx[k] = int(rem % std::size_t(hist.axes()[k].bins));
      rem /= std::size_t(hist.axes()[k].bins);
    }
    for (int k = 0; k < hist.dims(); ++k)
      out << idx[k] << ',' << fmt_double(hist.bin_center(k, idx[k])) << ',';
    out << fmt_double(counts[flat]) << ',' << fmt_double(counts[flat] / vol) << '\n';
  }
}

HistogramND load_histogram_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw Error("empty histogram file '" + path + "'");
  int dims = 0, normalized = 0;
  if (std::sscanf(line.c_str(), "# dims=%d normalized=%d", &dims, &normalized) != 2 || dims < 1)
    throw Error("bad histogram header in '" + path + "'");
  std::vector<HistogramAxis> axes(dims);
  for (int k = 0; k < dims; ++k) {
    if (!std::getline(in, line)) throw Error("truncated histogram header");
    int axis = 0;
    HistogramAxis ax;
    if (std::sscanf(line.c_str(), "# axis%d lo=%lf hi=%lf bins=%d", &axis, &ax.lo, &ax.hi,
                    &ax.bins) != 4)
      throw Error("bad axis header in '" + path + "'");
    axes[k] = ax;
  }
  std::getline(in, line);  // overflow
  double overflow = 0.0;
  std::sscanf(line.c_str(), "# overflow=%lf", &overflow);
  std::getline(in, line);  // column header

  HistogramND h(axes);
  std::vector<double> coords(dims);
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    for (int k = 0; k < dims; ++k) {
      std::getline(ss, cell, ',');  // index
      std::getline(ss, cell, ',');  // center
      coords[k] = std::stod(cell);
    }
    std::getline(ss, cell, ',');
    const double mass = std::stod(cell);
    if (mass != 0.0) h.add(coords.data(), mass);
  }
  if (normalized) {
    // Re-mark as normalized without perturbing the stored masses.
    h.normalize();
  }
  return h;
}

}  // namespace tbp::io
