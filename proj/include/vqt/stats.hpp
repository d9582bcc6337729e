#pragma once

// Shared-grid histograms and Jensen-Shannon divergence (base 2).

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "vqt/error.hpp"

namespace vqt {

struct FeatureHistogram {
  std::string feature_name;
  std::vector<double> bin_edges;
  std::vector<double> probabilities;
  std::size_t count = 0;
  std::size_t clipped = 0;  // values outside the grid, folded into the end bins
};

/// n equal-width bins spanning [lo, hi]; a degenerate range is widened by
/// 0.5 on each side (or by 1% of |lo|) so the grid stays strictly increasing.
inline std::vector<double> uniform_edges(double lo, double hi, int bins) {
  require(bins >= 1, Errc::kInvalidArgument, "need at least one bin");
  require(std::isfinite(lo) && std::isfinite(hi) && lo <= hi, Errc::kInvalidArgument,
          "invalid histogram range");
  if (!(hi > lo)) {
    const double pad = lo != 0.0 ? 0.01 * std::abs(lo) : 0.5;
    lo -= pad;
    hi += pad;
  }
  std::vector<double> e(bins + 1);
  for (int i = 0; i <= bins; ++i) e[i] = lo + (hi - lo) * i / bins;
  e.back() = hi;
  return e;
}

/// Grid over the pooled range of several sample sets.
inline std::vector<double> pooled_edges(const std::vector<std::span<const double>>& sets, int bins) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& s : sets)
    for (double v : s)
      if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
  require(std::isfinite(lo), Errc::kEmptyInput, "no finite values to bin");
  return uniform_edges(lo, hi, bins);
}

inline FeatureHistogram build_histogram(std::span<const double> values,
                                        const std::vector<double>& edges,
                                        std::string feature_name = {}) {
  require(edges.size() >= 2, Errc::kInvalidArgument, "need at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i)
    require(edges[i] > edges[i - 1], Errc::kInvalidArgument, "edges must increase strictly");
  FeatureHistogram h;
  h.feature_name = std::move(feature_name);
  h.bin_edges = edges;
  const std::size_t bins = edges.size() - 1;
  std::vector<std::size_t> counts(bins, 0);
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    std::size_t b;
    if (v < edges.front()) {
      b = 0;
      ++h.clipped;
    } else if (v > edges.back()) {
      b = bins - 1;
      ++h.clipped;
    } else {
      b = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), v) -
                                   edges.begin());
      b = std::min(bins, std::max<std::size_t>(b, 1)) - 1;  // last edge is closed
    }
    ++counts[b];
    ++h.count;
  }
  require(h.count > 0, Errc::kEmptyInput, "no finite values to bin");
  h.probabilities.resize(bins);
  for (std::size_t b = 0; b < bins; ++b)
    h.probabilities[b] = static_cast<double>(counts[b]) / static_cast<double>(h.count);
  return h;
}

/// Jensen-Shannon divergence of two probability vectors, in bits.
/// Symmetric by construction: each bin's term is formed from the unordered
/// pair of masses. The sum is divided by the total mass accumulated in the
/// same order, so disjoint supports give exactly 1.
inline double js_divergence(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), Errc::kGridMismatch, "histograms have different bin counts");
  double d = 0.0, mass = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double p = std::min(a[i], b[i]), q = std::max(a[i], b[i]);
    const double m = 0.5 * (p + q);
    if (m <= 0.0) continue;
    if (p > 0.0) d += p * std::log2(p / m);
    d += q * std::log2(q / m);
    mass += p;
    mass += q;
  }
  if (mass <= 0.0) return 0.0;
  return std::clamp(d / mass, 0.0, 1.0);
}

inline double js_divergence(const FeatureHistogram& a, const FeatureHistogram& b) {
  require(a.bin_edges == b.bin_edges, Errc::kGridMismatch, "histograms use different grids");
  return js_divergence(a.probabilities, b.probabilities);
}

inline const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names{"fg_over_f0", "naq", "qoq", "fm_hz"};
  return names;
}

struct LabelPair {
  std::string a, b;
};

struct DivergenceTable {
  std::vector<std::string> features;
  std::vector<LabelPair> pairs;
  std::vector<std::vector<double>> values;  // [pair][feature]
  std::map<std::string, std::map<std::string, FeatureHistogram>> histograms;  // [feature][label]

  double at(const std::string& x, const std::string& y, const std::string& feature) const {
    const auto fi = std::find(features.begin(), features.end(), feature) - features.begin();
    for (std::size_t p = 0; p < pairs.size(); ++p)
      if ((pairs[p].a == x && pairs[p].b == y) || (pairs[p].a == y && pairs[p].b == x))
        return values[p][fi];
    throw Error(Errc::kInvalidArgument, "unknown label pair " + x + "/" + y);
  }
};

struct StatsConfig {
  int bins = 50;
  std::size_t min_samples = 100;
};

/// samples[label][feature] -> values. Label pairs follow the order of
/// `labels` (alphabetical when empty).
inline DivergenceTable build_divergence_table(
    const std::map<std::string, std::map<std::string, std::vector<double>>>& samples,
    std::vector<std::string> labels = {}, const StatsConfig& cfg = {}) {
  if (labels.empty())
    for (const auto& [l, _] : samples) labels.push_back(l);
  require(labels.size() >= 2, Errc::kInsufficientData, "need at least two labels");
  DivergenceTable t;
  t.features = feature_names();
  for (const auto& l : labels) {
    const auto it = samples.find(l);
    require(it != samples.end(), Errc::kInsufficientData, "label " + l + " has no samples");
    for (const auto& f : t.features) {
      const auto fit = it->second.find(f);
      const std::size_t n = fit == it->second.end() ? 0 : fit->second.size();
      require(n >= cfg.min_samples, Errc::kInsufficientData,
              "label " + l + " has " + std::to_string(n) + " " + f + " samples");
    }
  }
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = i + 1; j < labels.size(); ++j) t.pairs.push_back({labels[i], labels[j]});
  t.values.assign(t.pairs.size(), std::vector<double>(t.features.size(), 0.0));
  for (std::size_t fi = 0; fi < t.features.size(); ++fi) {
    const auto& f = t.features[fi];
    std::vector<std::span<const double>> sets;
    for (const auto& l : labels) sets.emplace_back(samples.at(l).at(f));
    const auto edges = pooled_edges(sets, cfg.bins);
    for (const auto& l : labels) t.histograms[f][l] = build_histogram(samples.at(l).at(f), edges, f);
    for (std::size_t p = 0; p < t.pairs.size(); ++p)
      t.values[p][fi] = js_divergence(t.histograms[f][t.pairs[p].a], t.histograms[f][t.pairs[p].b]);
  }
  return t;
}

/// Column titles of the divergence CSV, one per entry of feature_names().
inline const std::vector<std::string>& divergence_columns() {
  static const std::vector<std::string> cols{"Fg", "NAQ", "QOQ", "Fm"};
  return cols;
}

/// label_a,label_b,Fg,NAQ,QOQ,Fm; one row per label pair.
inline void write_divergence_csv(std::ostream& os, const DivergenceTable& t) {
  os << "label_a,label_b";
  for (const auto& c : divergence_columns()) os << ',' << c;
  os << '\n' << std::setprecision(17);
  for (std::size_t p = 0; p < t.pairs.size(); ++p) {
    os << t.pairs[p].a << ',' << t.pairs[p].b;
    for (double v : t.values[p]) os << ',' << v;
    os << '\n';
  }
}

/// bin_lo,bin_hi,probability
inline void write_histogram_csv(std::ostream& os, const FeatureHistogram& h) {
  os << "bin_lo,bin_hi,probability\n" << std::setprecision(17);
  for (std::size_t b = 0; b < h.probabilities.size(); ++b)
    os << h.bin_edges[b] << ',' << h.bin_edges[b + 1] << ',' << h.probabilities[b] << '\n';
}

}  // namespace vqt
