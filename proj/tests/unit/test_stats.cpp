#include <gtest/gtest.h>

#include <random>

#include "vqt/stats.hpp"

namespace {

std::vector<double> gaussian(std::size_t n, double mu, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(mu, sigma);
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

// 0.5 KL(p||m) + 0.5 KL(q||m), base 2
double js_oracle(const std::vector<double>& p, const std::vector<double>& q) {
  long double d = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const long double m = 0.5L * (p[i] + q[i]);
    if (p[i] > 0) d += 0.5L * p[i] * std::log2(p[i] / m);
    if (q[i] > 0) d += 0.5L * q[i] * std::log2(q[i] / m);
  }
  return static_cast<double>(d);
}

std::map<std::string, std::vector<double>> features(double shift, std::uint64_t seed) {
  std::map<std::string, std::vector<double>> f;
  f["fg_over_f0"] = gaussian(2000, 1.5 + 0.3 * shift, 0.3, seed);
  f["naq"] = gaussian(2000, 0.12 + 0.03 * shift, 0.03, seed + 1);
  f["qoq"] = gaussian(2000, 0.5 + 0.1 * shift, 0.1, seed + 2);
  f["fm_hz"] = gaussian(2000, 3500 + 300 * shift, 300, seed + 3);
  return f;
}

}  // namespace

TEST(Histogram, PointMassFillsOneBin) {
  const std::vector<double> x(500, 0.37);
  const auto h = vqt::build_histogram(x, vqt::uniform_edges(0, 1, 10));
  EXPECT_EQ(h.probabilities[3], 1.0);
  EXPECT_EQ(h.count, 500u);
}

TEST(Histogram, UniformSamplesSpreadEvenly) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(1000000);
  for (auto& v : x) v = u(rng);
  const auto h = vqt::build_histogram(x, vqt::uniform_edges(0, 1, 10));
  double sum = 0;
  for (double p : h.probabilities) {
    EXPECT_NEAR(p, 0.1, 0.1 * 0.01);
    sum += p;
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Histogram, OutOfRangeFoldsIntoEndBins) {
  const std::vector<double> x{-5, 0.5, 5};
  const auto h = vqt::build_histogram(x, vqt::uniform_edges(0, 1, 4));
  EXPECT_EQ(h.clipped, 2u);
  EXPECT_NEAR(h.probabilities.front(), 1.0 / 3, 1e-15);
  EXPECT_NEAR(h.probabilities.back(), 1.0 / 3, 1e-15);
}

TEST(Histogram, DegenerateRangeStillIncreasing) {
  const auto e = vqt::uniform_edges(2.0, 2.0, 5);
  for (std::size_t i = 1; i < e.size(); ++i) EXPECT_GT(e[i], e[i - 1]);
}

TEST(JsDivergence, BoundsAndOracle) {
  const std::vector<double> a{0.5, 0.5, 0, 0}, b{0, 0, 0.25, 0.75};
  EXPECT_EQ(vqt::js_divergence(a, a), 0.0);
  EXPECT_NEAR(vqt::js_divergence(a, b), 1.0, 1e-15);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(30), q(30);
    double sp = 0, sq = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = u(rng) < 0.2 ? 0.0 : u(rng);
      q[i] = u(rng) < 0.2 ? 0.0 : u(rng);
      sp += p[i];
      sq += q[i];
    }
    for (auto& v : p) v /= sp;
    for (auto& v : q) v /= sq;
    const double d = vqt::js_divergence(p, q);
    EXPECT_NEAR(d, js_oracle(p, q), 1e-12);
    EXPECT_EQ(d, vqt::js_divergence(q, p));
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0);
  }
}

TEST(JsDivergence, GridMismatch) {
  const auto x = gaussian(100, 0, 1, 1);
  const auto h1 = vqt::build_histogram(x, vqt::uniform_edges(-3, 3, 10));
  const auto h2 = vqt::build_histogram(x, vqt::uniform_edges(-3, 3, 12));
  EXPECT_THROW(vqt::js_divergence(h1, h2), vqt::Error);
}

TEST(DivergenceTable, IdenticalSetsAreZero) {
  const auto f = features(0, 1);
  const auto t = vqt::build_divergence_table({{"a", f}, {"b", f}});
  ASSERT_EQ(t.pairs.size(), 1u);
  for (double v : t.values[0]) EXPECT_EQ(v, 0.0);
}

TEST(DivergenceTable, FartherShiftScoresHigher) {
  const auto t = vqt::build_divergence_table(
      {{"base", features(0, 1)}, {"same", features(0, 100)}, {"far", features(3, 200)}},
      {"base", "same", "far"});
  for (const auto& f : vqt::feature_names()) {
    EXPECT_GT(t.at("base", "far", f), t.at("base", "same", f)) << f;
    EXPECT_EQ(t.at("base", "far", f), t.at("far", "base", f));
    EXPECT_LT(t.at("base", "same", f), 0.1) << f;
    EXPECT_GT(t.at("base", "far", f), 0.6) << f;
  }
}

TEST(DivergenceTable, StableUnderBinRefinement) {
  std::map<std::string, std::map<std::string, std::vector<double>>> s;
  s["x"] = features(0, 1);
  s["y"] = features(1, 50);
  for (auto& [_, v] : s["x"]) v.resize(2000);
  const auto coarse = vqt::build_divergence_table(s, {}, {50, 100});
  const auto fine = vqt::build_divergence_table(s, {}, {100, 100});
  for (std::size_t f = 0; f < coarse.features.size(); ++f)
    EXPECT_LT(std::abs(coarse.values[0][f] - fine.values[0][f]), 0.02) << coarse.features[f];
}

TEST(DivergenceTable, InsufficientData) {
  auto small = features(0, 1);
  small["naq"].resize(50);
  try {
    vqt::build_divergence_table({{"a", features(0, 2)}, {"b", small}});
    FAIL();
  } catch (const vqt::Error& e) {
    EXPECT_EQ(e.code(), vqt::Errc::kInsufficientData);
  }
  EXPECT_THROW(vqt::build_divergence_table({{"a", features(0, 2)}}), vqt::Error);
}

TEST(DivergenceTable, CsvLayout) {
  const auto t = vqt::build_divergence_table({{"a", features(0, 1)}, {"b", features(1, 9)}});
  std::ostringstream os;
  vqt::write_divergence_csv(os, t);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "label_a,label_b,Fg,NAQ,QOQ,Fm");
  std::getline(is, line);
  EXPECT_EQ(line.substr(0, 4), "a,b,");
  EXPECT_FALSE(std::getline(is, line));
}
