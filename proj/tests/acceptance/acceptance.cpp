// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vqt/synthetic.hpp"
#include "vqt/vqt.hpp"

using namespace vqt;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int g_failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = dt < budget_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++g_failures;
  std::printf("%s [%d] %s: %s; runtime %.2f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", id, name,
              o.detail.c_str(), dt, budget_s, in_time ? "" : " EXCEEDED");
  std::fflush(stdout);
}

double median_of(std::vector<double> v) { return v.empty() ? NAN : dsp::median(std::move(v)); }

// ---------------------------------------------------------------------------
// 1. Jensen-Shannon

// Textbook form 0.5 KL(P||M) + 0.5 KL(Q||M) in long double.
long double js_oracle(const std::vector<double>& p, const std::vector<double>& q) {
  long double kp = 0, kq = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const long double m = 0.5L * (static_cast<long double>(p[i]) + q[i]);
    if (p[i] > 0) kp += p[i] * std::log2(static_cast<long double>(p[i]) / m);
    if (q[i] > 0) kq += q[i] * std::log2(static_cast<long double>(q[i]) / m);
  }
  return 0.5L * kp + 0.5L * kq;
}

std::vector<double> random_histogram(std::mt19937_64& rng, int bins, double zero_share) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> h(bins);
  double s = 0;
  for (auto& v : h) s += (v = u(rng) < zero_share ? 0.0 : -std::log(u(rng)));
  if (s == 0) h[0] = s = 1.0;
  for (auto& v : h) v /= s;
  return h;
}

Outcome js_suite() {
  std::mt19937_64 rng(20240601);
  int self_bad = 0, disjoint_bad = 0;
  for (int t = 0; t < 200; ++t) {
    const auto a = random_histogram(rng, 50, 0.3);
    if (js_divergence(a, a) != 0.0) ++self_bad;
    // Split the support between two histograms.
    std::vector<double> x(50, 0.0), y(50, 0.0);
    double sx = 0, sy = 0;
    for (int i = 0; i < 50; ++i) (i % 2 == t % 2 ? (sx += x[i] = a[i] + 1e-3) : (sy += y[i] = a[i] + 1e-3));
    for (auto& v : x) v /= sx;
    for (auto& v : y) v /= sy;
    if (js_divergence(x, y) != 1.0) ++disjoint_bad;
  }
  double worst_oracle = 0, worst_sym = 0;
  for (int t = 0; t < 1000; ++t) {
    const int bins = 10 + static_cast<int>(rng() % 91);
    const auto a = random_histogram(rng, bins, 0.2);
    const auto b = random_histogram(rng, bins, 0.2);
    const double d = js_divergence(a, b);
    worst_oracle = std::max(worst_oracle, static_cast<double>(std::fabs(d - js_oracle(a, b))));
    worst_sym = std::max(worst_sym, std::abs(d - js_divergence(b, a)));
  }
  const bool pass = self_bad == 0 && disjoint_bad == 0 && worst_oracle <= 1e-12 && worst_sym <= 1e-15;
  return {pass, fmt("D(A,A)!=0 in %d/200, disjoint!=1 in %d/200, max |D-oracle| %.2e (tol 1e-12), "
                    "max asymmetry %.2e (tol 1e-15)",
                    self_bad, disjoint_bad, worst_oracle, worst_sym)};
}

// ---------------------------------------------------------------------------
// 2. Mixed-phase decomposition

Outcome mixed_phase() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int frames = 200;
  int corr_ok = 0, recon_ok = 0;
  double worst_corr = 1.0;
  for (int t = 0; t < frames; ++t) {
    const double r = 0.5 + 0.4 * u(rng);                 // anticausal decay per sample
    const double rho = 0.6 + 0.35 * u(rng);              // AR(2) pole radius
    const double th = 0.1 + 2.9 * u(rng);                // pole angle
    const double gain = (u(rng) < 0.5 ? -1.0 : 1.0) * (0.1 + 2.0 * u(rng));
    const int M = 100 + static_cast<int>(u(rng) * 80);  // anticausal support
    const int N = 300 + static_cast<int>(u(rng) * 100);
    const int L = M + 1 + N;
    std::vector<double> xmax(M + 1), h(N + 1);
    for (int k = 0; k <= M; ++k) xmax[k] = std::pow(r, M - k);  // index k is time k - M
    h[0] = 1.0;
    h[1] = 2.0 * rho * std::cos(th);
    for (int n = 2; n <= N; ++n) h[n] = 2.0 * rho * std::cos(th) * h[n - 1] - rho * rho * h[n - 2];
    std::vector<double> y(L, 0.0);
    for (int i = 0; i <= M; ++i)
      for (int j = 0; j <= N && i + j < L; ++j) y[i + j] += gain * xmax[i] * h[j];

    const auto dec = mixed_phase_decompose(y);
    std::vector<double> em(M + 1), eh(N + 1);
    for (int k = 0; k <= M; ++k) em[k] = dec.max_at(k - M);
    for (int n = 0; n <= N; ++n) eh[n] = dec.min_at(n);
    const double cm = std::abs(dsp::correlation(em, xmax));
    const double ch = std::abs(dsp::correlation(eh, h));
    worst_corr = std::min({worst_corr, cm, ch});
    corr_ok += cm > 0.99 && ch > 0.99;
    recon_ok += dsp::relative_error_db(reconstruct(dec, L), y) <= -30.0;
  }
  const bool pass = corr_ok == frames && recon_ok >= 0.95 * frames;
  return {pass, fmt("both components corr > 0.99 on %d/%d frames (worst %.5f), reconstruction <= -30 dB "
                    "on %d/%d (need >= 95%%)",
                    corr_ok, frames, worst_corr, recon_ok, frames)};
}

// ---------------------------------------------------------------------------
// 3. Glottal parameters

struct PulseTruth {
  double naq, qoq, fg;
};

// One period sampled 100x; Fg by dense direct DFT of the derivative.
PulseTruth pulse_truth(double f0, const synth::RosenbergShape& s, int fs) {
  const int over = 100;
  const double t0 = 1.0 / f0, dfs = static_cast<double>(fs) * over;
  const int L = static_cast<int>(std::lround(t0 * dfs));
  std::vector<double> flow(L), d(L);
  for (int i = 0; i < L; ++i) {
    const double t = i / dfs;
    flow[i] = synth::rosenberg_flow(t, t0, s);
    d[i] = synth::rosenberg_derivative(t, t0, s);
  }
  const auto [lo, hi] = std::minmax_element(flow.begin(), flow.end());
  const double p2p = *hi - *lo;
  PulseTruth o{};
  o.naq = p2p / (-*std::min_element(d.begin(), d.end()) * t0);
  int above = 0;
  for (double v : flow) above += v - *lo > 0.5 * p2p;
  o.qoq = static_cast<double>(above) / L;
  double best = -1;
  for (double f = 1.0; f <= 4.0 * f0; f += 0.25) {
    std::complex<double> acc = 0;
    for (int i = 0; i < L; ++i) acc += d[i] * std::polar(1.0, -2.0 * dsp::kPi * f * i / dfs);
    if (std::abs(acc) > best) best = std::abs(acc), o.fg = f;
  }
  return o;
}

Outcome glottal_grid() {
  const int fs = 16000;
  std::vector<double> en, eq, ef;
  double worst_cell_naq = 0, worst_cell_fg = 0, worst_cell_qoq = 0;
  std::string worst_where;
  for (double f0 : {100.0, 150.0, 220.0}) {
    for (double oq : {0.4, 0.5, 0.6, 0.7}) {
      const synth::RosenbergShape shape{oq, 2.5};
      auto tr = synth::rosenberg_vowel(f0, shape, 1.0, fs);
      double pk = 0;
      for (double v : tr.samples) pk = std::max(pk, std::abs(v));
      for (auto& v : tr.samples) v *= 0.5 / pk;
      const AudioBuffer buf{tr.samples, fs};
      const auto sa = analyze_signal(buf);
      const auto ga = analyze_glottal_cycles(buf, sa.track);
      const auto truth = pulse_truth(f0, shape, fs);
      std::vector<double> cn, cq, cf;
      for (const auto& c : ga.cycles) {
        cn.push_back(std::abs(c.naq / truth.naq - 1.0));
        cq.push_back(std::abs(c.qoq - truth.qoq));
        cf.push_back(std::abs(c.fg / truth.fg - 1.0));
      }
      en.insert(en.end(), cn.begin(), cn.end());
      eq.insert(eq.end(), cq.begin(), cq.end());
      ef.insert(ef.end(), cf.begin(), cf.end());
      if (cn.empty()) return {false, fmt("no cycles analysed at f0 %.0f oq %.1f", f0, oq)};
      const double mn = median_of(cn), mf = median_of(cf), mq = median_of(cq);
      if (std::max(mn, mf) > std::max(worst_cell_naq, worst_cell_fg))
        worst_where = fmt("f0 %.0f oq %.1f", f0, oq);
      worst_cell_naq = std::max(worst_cell_naq, mn);
      worst_cell_fg = std::max(worst_cell_fg, mf);
      worst_cell_qoq = std::max(worst_cell_qoq, mq);
    }
  }
  const double mn = median_of(en), mq = median_of(eq), mf = median_of(ef);
  const bool pass = mn < 0.10 && mf < 0.10 && mq < 0.10;
  return {pass, fmt("median over %zu cycles of 12 stimuli: NAQ rel err %.3f, Fg rel err %.3f (tol 0.10), "
                    "QOQ abs err %.3f of T0 (tol 0.10); worst single stimulus %s: NAQ %.3f Fg %.3f, "
                    "worst QOQ %.3f",
                    en.size(), mn, mf, mq, worst_where.c_str(), worst_cell_naq, worst_cell_fg,
                    worst_cell_qoq)};
}

// ---------------------------------------------------------------------------
// 4. Fm estimator

AnalysisTrack constant_track(double f0, std::size_t samples, int fs) {
  AnalysisTrack tr;
  tr.sample_rate = fs;
  tr.frame_hop = 0.01;
  const std::size_t frames = samples / static_cast<std::size_t>(tr.frame_hop * fs) + 1;
  tr.f0.assign(frames, f0);
  tr.voiced.assign(frames, true);
  tr.periodicity.assign(frames, 1.0);
  tr.update_mean_t0();
  return tr;
}

Outcome fm_estimator() {
  const int fs = 16000;
  std::vector<double> got;
  bool within = true;
  std::string detail;
  for (double cutoff : {2000.0, 3000.0, 4000.0}) {
    std::vector<double> per_f0;
    for (double f0 : {110.0, 180.0}) {
      const auto x = synth::harmonic_plus_noise(f0, cutoff, 1.0, fs, 20.0, 11);
      double pk = 0;
      for (double v : x) pk = std::max(pk, std::abs(v));
      AudioBuffer buf{x, fs};
      for (auto& v : buf.samples) v *= 0.5 / pk;
      const auto m = max_voiced_track(buf, constant_track(f0, buf.size(), fs));
      per_f0.push_back(m.mean);
      within = within && std::abs(m.mean - cutoff) <= 200.0;
      detail += fmt("%s%.0f->%.0f", detail.empty() ? "" : ", ", cutoff, m.mean);
    }
    got.push_back(dsp::mean(per_f0));
  }
  const bool monotone = got[0] < got[1] && got[1] < got[2];
  return {within && monotone,
          fmt("true->estimated at f0 110/180 Hz: %s (tol 200 Hz); monotone %s", detail.c_str(),
              monotone ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 5. Eigen-basis

Outcome eigen_basis() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  const int n = 200;

  // Random frames, several components.
  std::vector<std::vector<double>> frames(400, std::vector<double>(n));
  for (auto& f : frames) {
    for (int i = 0; i < n; ++i) f[i] = g(rng) * (1.0 + 3.0 * std::exp(-0.05 * i));
  }
  EigenConfig ec;
  ec.components = 12;
  const auto b = compute_eigen_basis(frames, ec);
  double ortho = 0;
  for (int i = 0; i < ec.components; ++i)
    for (int j = 0; j < ec.components; ++j) {
      double dot = 0;
      for (int k = 0; k < n; ++k) dot += b.eigenvectors[i][k] * b.eigenvectors[j][k];
      ortho = std::max(ortho, std::abs(dot - (i == j ? 1.0 : 0.0)));
    }

  // Rank-1 corpus: scaled copies of a prototype plus 1% noise.
  std::vector<double> proto(n);
  for (int i = 0; i < n; ++i) {
    const double t = (i - n / 2.0) / 12.0;
    proto[i] = -t * std::exp(-0.5 * t * t) + 0.2 * std::sin(0.3 * i) * std::exp(-0.02 * std::abs(i - n / 2.0));
  }
  const double pn = std::sqrt(dsp::energy(proto));
  std::uniform_real_distribution<double> amp(0.5, 2.0);
  std::vector<std::vector<double>> rank1(300, std::vector<double>(n));
  for (auto& f : rank1) {
    const double a = amp(rng);
    for (int i = 0; i < n; ++i) f[i] = a * proto[i] + 0.01 * pn / std::sqrt(n) * g(rng);
  }
  const auto r1 = compute_eigen_basis(rank1);
  const double corr = std::abs(dsp::correlation(r1.eigenresidual(), proto));

  // Variance along the first eigenvector against random unit directions, on
  // the frames the basis was computed from (after alignment).
  const auto aligned = align_frames(frames, EigenConfig{}.max_shift);
  const auto b1 = compute_eigen_basis(frames);
  const std::vector<double> origin(n, 0.0);
  const double v1 = explained_variance(aligned, b1.eigenresidual(), origin);
  int beaten = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> d(n);
    for (auto& v : d) v = g(rng);
    const double s = std::sqrt(dsp::energy(d));
    for (auto& v : d) v /= s;
    beaten += explained_variance(aligned, d, origin) > v1;
  }
  const bool pass = ortho <= 1e-10 && corr > 0.999 && beaten == 0;
  return {pass, fmt("max |V'V - I| %.2e (tol 1e-10), rank-1 prototype corr %.6f (need > 0.999), "
                    "random directions with more variance %d/1000",
                    ortho, corr, beaten)};
}

// ---------------------------------------------------------------------------
// 6. Tilt filter

Outcome tilt_filter() {
  const int fs = 16000;
  // Two averaged spectra from sentences of different quality.
  auto frames_for = [&](const synth::VoiceQuality& q, std::uint64_t seed) {
    const auto s = synth::make_sentence(q, seed);
    const auto sa = analyze_signal(s.audio);
    return extract_gci_frames(s.audio, sa.track, SourceKind::kSpeech);
  };
  const auto fa = frames_for(synth::loud_quality(), 3);
  const auto fb = frames_for(synth::soft_quality(), 4);
  const TiltConfig tc;
  const auto A = stabilize(fit_ar_to_spectrum(averaged_spectrum(fa), tc.order), tc.max_pole_radius);
  const auto B = stabilize(fit_ar_to_spectrum(averaged_spectrum(fb), tc.order), tc.max_pole_radius);
  const auto id = build_tilt_filter(A, A);
  const auto ab = build_tilt_filter(A, B);
  const auto ba = build_tilt_filter(B, A);
  double worst_id = -400, worst_rt = -400;
  for (const auto& f : fa.frames) {
    worst_id = std::max(worst_id, dsp::relative_error_db(apply_tilt(f, id), f));
    worst_rt = std::max(worst_rt, dsp::relative_error_db(apply_tilt(apply_tilt(f, ab), ba), f));
  }

  // Exact AR(2) power spectra on the frame grid.
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_coef = 0;
  for (int t = 0; t < 50; ++t) {
    const double rho = 0.3 + 0.65 * u(rng), th = 0.05 + 3.0 * u(rng), gain = 0.1 + u(rng);
    const std::vector<double> a{1.0, -2.0 * rho * std::cos(th), rho * rho};
    AveragedSpectrum spec;
    spec.frame_length = 200;
    spec.frame_count = 1;
    spec.bins.resize(101);
    for (int k = 0; k <= 100; ++k) {
      const std::complex<double> z = std::polar(1.0, -2.0 * dsp::kPi * k / 200.0);
      const auto A2 = a[0] + a[1] * z + a[2] * z * z;
      spec.bins[k] = gain / std::abs(A2);
    }
    const auto m = fit_ar_to_spectrum(spec, 2);
    for (int i = 0; i < 3; ++i) worst_coef = std::max(worst_coef, std::abs(m.a[i] - a[i]));
  }
  const bool pass = worst_id <= -60 && worst_rt <= -40 && worst_coef <= 1e-3;
  return {pass, fmt("identity change %.1f dB (limit -60), A->B->A %.1f dB (limit -40) over %zu frames, "
                    "AR(2) max coefficient error %.2e (tol 1e-3)",
                    worst_id, worst_rt, fa.size(), worst_coef)};
}

// ---------------------------------------------------------------------------
// Shared corpus for 7 and 8

const VoiceQualityPreset& modal_preset() {
  static const VoiceQualityPreset p = [] {
    std::vector<AudioBuffer> corpus;
    for (int s = 1; s <= 10; ++s) corpus.push_back(synth::make_sentence(synth::modal_quality(), s).audio);
    return build_preset(corpus, "modal");
  }();
  return p;
}

// ---------------------------------------------------------------------------
// 7. Fm enforcement

Outcome fm_enforcement() {
  const auto& modal = modal_preset();
  synth::SentenceConfig sc;
  sc.f0_start = sc.f0_end = 120.0;
  sc.jitter = 0.0;
  sc.voiced_segments = 1;
  sc.voiced_s = 1.0;
  auto vq = synth::modal_quality();
  vq.oq_drift = 0.0;
  vq.oq_spread = 0.0;
  bool pass = true;
  std::string detail;
  for (std::uint64_t seed : {0, 1, 2}) {
    const auto in = synth::make_sentence(vq, seed, sc).audio;
    // The input is constant-F0 by construction; its own analysis track is
    // the measuring grid for the output.
    const auto sa = analyze_signal(in);
    detail += fmt("%sinput %llu:", detail.empty() ? "" : "; ", static_cast<unsigned long long>(seed));
    for (double fm : {4600.0, 3990.0, 2460.0}) {
      auto target = modal;
      target.fm_hz = fm;
      TransformConfig tc;
      tc.seed = seed;
      const auto r = transform_voice_quality(in, modal, target, tc);
      const double got = max_voiced_track(r.output, sa.track).mean;
      pass = pass && std::abs(got - fm) <= 300.0;
      detail += fmt(" %.0f->%.0f", fm, got);
    }
  }
  return {pass, detail + " (tol 300 Hz)"};
}

// ---------------------------------------------------------------------------
// 8. Vocoder floor

Outcome vocoder_floor() {
  const auto& modal = modal_preset();
  std::vector<double> lsd, lsd_tracker;
  bool deterministic = true;
  for (int s = 0; s < 10; ++s) {
    const auto S = synth::make_sentence(synth::modal_quality(), 100 + s);
    TransformConfig tc;
    tc.seed = 42;
    const auto r = transform_voice_quality(S.audio, modal, modal, tc);
    if (s < 2) deterministic = deterministic &&
                               transform_voice_quality(S.audio, modal, modal, tc).output.samples ==
                                   r.output.samples;
    // Voiced frames: the whole LPC analysis window lies in a synthesized vowel.
    AnalysisTrack mask = constant_track(100.0, S.audio.size(), S.audio.sample_rate);
    const long ctx = std::lround(0.5 * LsdConfig{}.window_s * S.audio.sample_rate);
    for (std::size_t i = 0; i < mask.frame_count(); ++i) {
      const long c = std::lround(mask.frame_time(i) * S.audio.sample_rate);
      bool in = false;
      for (const auto& [b, e] : S.voiced_spans) in = in || (c - ctx >= b && c + ctx <= e);
      mask.voiced[i] = in;
    }
    const auto d = lsd_frames(S.audio, r.output, mask);
    lsd.insert(lsd.end(), d.begin(), d.end());
    const auto dt = lsd_frames(S.audio, r.output, estimate_pitch(S.audio));
    lsd_tracker.insert(lsd_tracker.end(), dt.begin(), dt.end());
  }
  const double mean = dsp::mean(lsd);
  return {mean < 1.5 && deterministic,
          fmt("mean LSD %.3f dB over %zu voiced frames (limit 1.5; median %.3f; %.3f dB on all "
              "tracker-voiced frames), bit-identical rerun %s",
              mean, lsd.size(), median_of(lsd), dsp::mean(lsd_tracker), deterministic ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 9. Divergence ordering

Outcome divergence_ordering() {
  const std::vector<std::string> labels{"loud", "modal", "soft"};
  // Loud and soft sit at the ends of each feature range, modal between.
  const std::vector<synth::VoiceQuality> qualities{
      {"loud", 0.40, 3.0, 0.06, 0.01, 4800.0, 0.0, 800.0},
      {"modal", 0.52, 2.6, 0.06, 0.01, 3600.0, 0.0, 800.0},
      {"soft", 0.76, 1.5, 0.06, 0.01, 2400.0, 0.0, 800.0}};
  std::map<std::string, std::map<std::string, std::vector<double>>> samples;
  synth::SentenceConfig sc;
  sc.jitter = 0.001;
  for (std::size_t l = 0; l < labels.size(); ++l) {
    for (int s = 0; s < 10; ++s) {
      const auto S = synth::make_sentence(qualities[l], 1000 * l + s, sc);
      const auto ua = analyze_utterance(S.audio);
      auto& m = samples[labels[l]];
      for (const auto& c : ua.glottal.cycles) {
        m["fg_over_f0"].push_back(c.fg_over_f0);
        m["naq"].push_back(c.naq);
        m["qoq"].push_back(c.qoq);
      }
      m["fm_hz"].insert(m["fm_hz"].end(), ua.fm.fm.begin(), ua.fm.fm.end());
    }
  }
  const auto table = build_divergence_table(samples, labels);
  std::ostringstream csv;
  write_divergence_csv(csv, table);

  // Read the emitted table back.
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  std::map<std::string, std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::stringstream ls(line);
    std::string a, b, cell;
    std::getline(ls, a, ',');
    std::getline(ls, b, ',');
    auto& row = rows[a + "/" + b];
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
  }
  bool pass = rows.size() == 3;
  std::string detail;
  for (std::size_t f = 0; f < divergence_columns().size() && pass; ++f) {
    const double ls = rows["loud/soft"].at(f), ms = rows["modal/soft"].at(f), lm = rows["loud/modal"].at(f);
    const bool ok = ls > ms && ls > lm;
    pass = pass && ok;
    detail += fmt("%s%s L-S %.3f M-S %.3f L-M %.3f%s", detail.empty() ? "" : "; ",
                  divergence_columns()[f].c_str(), ls, ms, lm, ok ? "" : " (order violated)");
  }
  return {pass, detail};
}

}  // namespace

int main() {
  criterion(1, "Jensen-Shannon suite", 5, js_suite);
  criterion(2, "mixed-phase decomposition", 30, mixed_phase);
  criterion(3, "glottal parameters on Rosenberg grid", 120, glottal_grid);
  criterion(4, "maximum voiced frequency estimator", 30, fm_estimator);
  criterion(5, "eigen-basis", 30, eigen_basis);
  criterion(6, "tilt filter", 10, tilt_filter);
  // The modal preset shared by 7 and 8 is built inside 7's timed region.
  criterion(7, "transform Fm enforcement", 60, fm_enforcement);
  criterion(8, "vocoder floor", 60, vocoder_floor);
  criterion(9, "divergence ordering on 3-label corpus", 120, divergence_ordering);
  std::printf("%d of 9 criteria failed\n", g_failures);
  return g_failures;
}
