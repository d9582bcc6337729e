// vqt: corpus front end for voice-quality analysis and transformation.

#include <CLI11.hpp>
#include <json.hpp>

#include <glob.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "vqt/vqt.hpp"

#ifndef VQT_PRESET_DIR
#define VQT_PRESET_DIR "presets"
#endif

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

// Exit codes.
enum : int { kOk = 0, kInternal = 1, kConfigError = 2, kNoAudio = 3, kInsufficient = 4, kSchema = 5 };

struct CliError : std::runtime_error {
  int code;
  CliError(int c, const std::string& what) : std::runtime_error(what), code(c) {}
};

bool g_verbose = false;

void info(const std::string& s) {
  if (g_verbose) std::cerr << s << '\n';
}
void warn(const std::string& s) { std::cerr << "warning: " << s << '\n'; }

// ---------------------------------------------------------------------------
// Configuration

struct RunConfig {
  std::vector<std::string> inputs;
  std::map<std::string, std::string> labels;  // path or directory -> label
  double f0_min = 60.0;
  double f0_max = 400.0;
  int frame_length = 200;
  int lpc_order = -1;
  int bins = 50;
  int tilt_order = 20;
  int min_utterances = 10;
  int min_samples = 100;
  std::string out = "out";
  std::string preset_dir = VQT_PRESET_DIR;
  std::uint64_t seed = 0;
  int threads = 1;
  bool float32 = false;
};

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> k{"inputs",     "labels",     "f0_min",         "f0_max",
                                          "frame_length", "lpc_order", "bins",          "tilt_order",
                                          "min_utterances", "min_samples", "out",       "preset_dir",
                                          "seed",       "threads",    "float32"};
  return k;
}

template <class T>
T config_value(const nlohmann::json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw CliError(kConfigError, "config key '" + key + "' has the wrong type");
  }
}

void merge_config(RunConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw CliError(kConfigError, "config must be a JSON object");
  const auto& known = config_keys();
  for (const auto& [k, _] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw CliError(kConfigError, "unknown config key '" + k + "'");
  if (j.contains("inputs")) c.inputs = config_value<std::vector<std::string>>(j, "inputs");
  if (j.contains("labels")) c.labels = config_value<std::map<std::string, std::string>>(j, "labels");
  if (j.contains("f0_min")) c.f0_min = config_value<double>(j, "f0_min");
  if (j.contains("f0_max")) c.f0_max = config_value<double>(j, "f0_max");
  if (j.contains("frame_length")) c.frame_length = config_value<int>(j, "frame_length");
  if (j.contains("lpc_order")) c.lpc_order = config_value<int>(j, "lpc_order");
  if (j.contains("bins")) c.bins = config_value<int>(j, "bins");
  if (j.contains("tilt_order")) c.tilt_order = config_value<int>(j, "tilt_order");
  if (j.contains("min_utterances")) c.min_utterances = config_value<int>(j, "min_utterances");
  if (j.contains("min_samples")) c.min_samples = config_value<int>(j, "min_samples");
  if (j.contains("out")) c.out = config_value<std::string>(j, "out");
  if (j.contains("preset_dir")) c.preset_dir = config_value<std::string>(j, "preset_dir");
  if (j.contains("seed")) c.seed = config_value<std::uint64_t>(j, "seed");
  if (j.contains("threads")) c.threads = config_value<int>(j, "threads");
  if (j.contains("float32")) c.float32 = config_value<bool>(j, "float32");
}

void check_config(const RunConfig& c) {
  auto bad = [](const std::string& what) { throw CliError(kConfigError, "config: " + what); };
  if (!(c.f0_min >= 50.0)) bad("f0_min must be >= 50");
  if (!(c.f0_max > c.f0_min && c.f0_max <= 1000.0)) bad("f0_max must be in (f0_min, 1000]");
  if (c.frame_length < 32 || c.frame_length % 2 || c.frame_length > 4096)
    bad("frame_length must be even and in [32, 4096]");
  if (c.lpc_order != -1 && (c.lpc_order < 1 || c.lpc_order > 100)) bad("lpc_order must be -1 or in [1, 100]");
  if (c.bins < 1 || c.bins > 10000) bad("bins must be in [1, 10000]");
  if (c.tilt_order < 2 || c.tilt_order >= c.frame_length / 2) bad("tilt_order must be in [2, frame_length/2)");
  if (c.min_utterances < 1) bad("min_utterances must be >= 1");
  if (c.min_samples < 1) bad("min_samples must be >= 1");
  if (c.threads < 1 || c.threads > 256) bad("threads must be in [1, 256]");
  if (c.out.empty()) bad("out must not be empty");
}

ojson config_json(const RunConfig& c) {
  ojson j;
  j["inputs"] = c.inputs;
  j["labels"] = c.labels;
  j["f0_min"] = c.f0_min;
  j["f0_max"] = c.f0_max;
  j["frame_length"] = c.frame_length;
  j["lpc_order"] = c.lpc_order;
  j["bins"] = c.bins;
  j["tilt_order"] = c.tilt_order;
  j["min_utterances"] = c.min_utterances;
  j["min_samples"] = c.min_samples;
  j["out"] = c.out;
  j["preset_dir"] = c.preset_dir;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["float32"] = c.float32;
  return j;
}

vqt::AnalysisConfig analysis_config(const RunConfig& c) {
  vqt::AnalysisConfig a;
  a.pitch.f_min = c.f0_min;
  a.pitch.f_max = c.f0_max;
  a.lpc.order = c.lpc_order;
  return a;
}

// ---------------------------------------------------------------------------
// Files

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw CliError(kInternal, "cannot write " + p.string());
  f << text;
}

std::string read_text(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw CliError(kInternal, "cannot read " + p.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void echo_config(const RunConfig& c, const std::string& command) {
  ojson j;
  j["command"] = command;
  j["config"] = config_json(c);
  write_text(fs::path(c.out) / "config.json", j.dump(2) + "\n");
}

bool has_wildcard(const std::string& s) { return s.find_first_of("*?[") != std::string::npos; }

bool is_wav(const fs::path& p) {
  auto e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return e == ".wav";
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& specs) {
  std::set<std::string> out;
  for (const auto& s : specs) {
    if (has_wildcard(s)) {
      glob_t g{};
      if (::glob(s.c_str(), 0, nullptr, &g) == 0)
        for (std::size_t i = 0; i < g.gl_pathc; ++i) out.insert(g.gl_pathv[i]);
      ::globfree(&g);
    } else if (fs::is_directory(s)) {
      for (const auto& e : fs::recursive_directory_iterator(s))
        if (e.is_regular_file() && is_wav(e.path())) out.insert(e.path().lexically_normal().string());
    } else {
      out.insert(fs::path(s).lexically_normal().string());
    }
  }
  return {out.begin(), out.end()};
}

std::string label_for(const fs::path& p, const RunConfig& c, const std::string& forced) {
  if (!forced.empty()) return forced;
  const std::string s = p.lexically_normal().generic_string();
  std::size_t best = 0;
  std::string label;
  for (const auto& [k, v] : c.labels) {
    const std::string key = fs::path(k).lexically_normal().generic_string();
    const bool match = s == key || (s.size() > key.size() && s.compare(0, key.size(), key) == 0 &&
                                    (key.back() == '/' || s[key.size()] == '/'));
    if (match && key.size() >= best) best = key.size(), label = v;
  }
  if (!label.empty()) return label;
  const auto parent = p.parent_path().filename().string();
  return parent.empty() ? "unlabeled" : parent;
}

// Shortest round-trip decimal.
std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') cur += '"', ++i;
      else if (ch == '"') quoted = false;
      else cur += ch;
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const fs::path& p) {
  std::istringstream in(read_text(p));
  CsvTable t;
  std::string line;
  if (std::getline(in, line)) t.header = csv_split(line);
  while (std::getline(in, line))
    if (!line.empty()) t.rows.push_back(csv_split(line));
  return t;
}

std::optional<double> parse_number(const std::string& s) {
  double v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// ---------------------------------------------------------------------------
// Worker pool: item i always lands in slot i, so output order does not
// depend on scheduling.

template <class R, class F>
std::vector<R> parallel_map(std::size_t n, int threads, F fn) {
  std::vector<R> out(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) out[i] = fn(i);
  };
  std::vector<std::jthread> pool;
  const std::size_t extra = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  for (std::size_t t = 1; t < extra; ++t) pool.emplace_back(work);
  work();
  return out;
}

// ---------------------------------------------------------------------------
// Presets

struct PresetRef {
  vqt::VoiceQualityPreset preset;
  std::string path;
  bool bundled = false;
};

PresetRef resolve_preset(const std::string& name, const RunConfig& c) {
  PresetRef r;
  fs::path p = name;
  const bool bare = name.find('/') == std::string::npos && p.extension() != ".json";
  if (bare) {
    p = fs::path(c.preset_dir) / (name + ".json");
    r.bundled = true;
  }
  if (!fs::is_regular_file(p)) throw CliError(kConfigError, "preset not found: " + p.string());
  try {
    r.preset = vqt::load_preset(p);
  } catch (const vqt::Error& e) {
    throw CliError(kConfigError, std::string("invalid preset: ") + e.what());
  }
  r.path = p.string();
  return r;
}

ojson preset_ref_json(const PresetRef& r) {
  return {{"label", r.preset.label}, {"path", r.path}, {"bundled", r.bundled}, {"fm_hz", r.preset.fm_hz}};
}

int exit_for(const vqt::Error& e) {
  switch (e.code()) {
    case vqt::Errc::kInsufficientData:
    case vqt::Errc::kTooFewFrames: return kInsufficient;
    case vqt::Errc::kMissingFile:
    case vqt::Errc::kCorruptHeader:
    case vqt::Errc::kUnsupportedFormat:
    case vqt::Errc::kNoVoicedRegion:
    case vqt::Errc::kSignalTooShort: return kNoAudio;
    case vqt::Errc::kInvalidPreset: return kConfigError;
    default: return kInternal;
  }
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeOptions {
  std::vector<std::string> inputs;
  std::string label;
  bool export_tracks = false;
};

struct FileAnalysis {
  std::string id, label;
  bool ok = false;
  std::string error;
  vqt::UtteranceAnalysis ua;
  std::string f0_csv, lpc_csv, gci_csv;
};

std::string track_csv(const vqt::AnalysisTrack& tr) {
  std::ostringstream os;
  os << "time_s,f0_hz,voiced\n";
  for (std::size_t i = 0; i < tr.frame_count(); ++i)
    os << num(tr.frame_time(i)) << ',' << num(tr.voiced[i] ? tr.f0[i] : 0.0) << ',' << (tr.voiced[i] ? 1 : 0)
       << '\n';
  return os.str();
}

std::string gci_csv(const vqt::AnalysisTrack& tr) {
  std::ostringstream os;
  os << "sample_index,time_s\n";
  for (long g : tr.gci) os << g << ',' << num(static_cast<double>(g) / tr.sample_rate) << '\n';
  return os.str();
}

std::string lpc_csv(const vqt::LpcEnvelope& env, double hop_s) {
  std::ostringstream os;
  os << "time_s,gain";
  for (int k = 1; k <= env.order; ++k) os << ",a" << k;
  os << '\n';
  for (std::size_t f = 0; f < env.frame_count(); ++f) {
    os << num(f * hop_s) << ',' << num(env.gains[f]);
    for (int k = 1; k <= env.order; ++k) os << ',' << num(env.coeffs[f][k]);
    os << '\n';
  }
  return os.str();
}

std::string safe_name(std::string s) {
  for (auto& ch : s)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_' && ch != '.') ch = '_';
  return s;
}

int cmd_analyze(const RunConfig& c, const AnalyzeOptions& o) {
  const auto files = expand_inputs(o.inputs.empty() ? c.inputs : o.inputs);
  if (files.empty()) throw CliError(kNoAudio, "no input files matched");
  const auto acfg = analysis_config(c);
  auto results = parallel_map<FileAnalysis>(files.size(), c.threads, [&](std::size_t i) {
    FileAnalysis r;
    r.id = files[i].generic_string();
    r.label = label_for(files[i], c, o.label);
    try {
      const auto buf = vqt::load_audio(files[i]);
      r.ua = vqt::analyze_utterance(buf, acfg);
      if (r.ua.signal.no_voiced_region) {
        r.error = "no voiced region";
        return r;
      }
      if (o.export_tracks) {
        const auto& tr = r.ua.signal.track;
        vqt::LpcConfig lc = acfg.lpc;
        lc.hop_s = tr.frame_hop;
        r.f0_csv = track_csv(tr);
        r.gci_csv = gci_csv(tr);
        r.lpc_csv = lpc_csv(vqt::lpc_analyze(buf, lc), tr.frame_hop);
      }
      r.ok = true;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    return r;
  });

  std::ostringstream cycles, fm;
  cycles << "utterance_id,label,gci_time_s,f0_hz,fg_hz,fg_over_f0,naq,qoq\n";
  fm << "utterance_id,label,time_s,fm_hz\n";
  ojson drops = ojson::object(), files_json = ojson::array();
  int usable = 0, failed = 0;
  for (const auto& r : results) {
    ojson fj{{"utterance_id", r.id}, {"label", r.label}, {"status", r.ok ? "ok" : "skipped"}};
    if (!r.ok) {
      ++failed;
      warn(r.id + ": " + r.error);
      fj["error"] = r.error;
      files_json.push_back(fj);
      continue;
    }
    ++usable;
    info("analyzed " + r.id);
    for (const auto& cy : r.ua.glottal.cycles)
      cycles << csv_field(r.id) << ',' << csv_field(r.label) << ',' << num(cy.time_s) << ',' << num(cy.f0)
             << ',' << num(cy.fg) << ',' << num(cy.fg_over_f0) << ',' << num(cy.naq) << ',' << num(cy.qoq)
             << '\n';
    for (std::size_t k = 0; k < r.ua.fm.fm.size(); ++k)
      fm << csv_field(r.id) << ',' << csv_field(r.label) << ',' << num(r.ua.fm.time_s[k]) << ','
         << num(r.ua.fm.fm[k]) << '\n';
    drops[r.id] = r.ua.glottal.drops.by_reason;
    fj["cycles"] = r.ua.glottal.cycles.size();
    fj["fm_frames"] = r.ua.fm.fm.size();
    fj["voiced_frames"] = r.ua.signal.track.voiced_count();
    files_json.push_back(fj);
    if (o.export_tracks) {
      const auto stem = safe_name(fs::path(r.id).replace_extension().generic_string());
      write_text(fs::path(c.out) / "tracks" / (stem + ".f0.csv"), r.f0_csv);
      write_text(fs::path(c.out) / "tracks" / (stem + ".lpc.csv"), r.lpc_csv);
      write_text(fs::path(c.out) / "tracks" / (stem + ".gci.csv"), r.gci_csv);
    }
  }
  if (usable == 0) throw CliError(kNoAudio, "no usable audio among " + std::to_string(files.size()) + " files");
  const fs::path out = c.out;
  write_text(out / "cycles.csv", cycles.str());
  write_text(out / "fm.csv", fm.str());
  write_text(out / "drops.json", drops.dump(2) + "\n");
  ojson summary{{"kind", "analyze"}, {"usable", usable}, {"skipped", failed}, {"files", files_json}};
  write_text(out / "summary.json", summary.dump(2) + "\n");
  echo_config(c, "analyze");
  if (failed) warn(std::to_string(failed) + " of " + std::to_string(files.size()) + " files skipped");
  return kOk;
}

// ---------------------------------------------------------------------------
// stats

const char* kPalette[] = {"#1b6ca8", "#d1495b", "#edae49", "#00798c", "#66a182", "#8d96a3", "#2e4057"};

std::string svg_panel(const std::string& feature, const std::map<std::string, vqt::FeatureHistogram>& hs,
                      double x0, double y0, double w, double h) {
  std::ostringstream os;
  const double l = x0 + 50, r = x0 + w - 10, t = y0 + 28, b = y0 + h - 36;
  double pmax = 0;
  std::vector<double> edges;
  for (const auto& [_, hist] : hs) {
    edges = hist.bin_edges;
    for (double p : hist.probabilities) pmax = std::max(pmax, p);
  }
  if (edges.size() < 2 || pmax <= 0) pmax = 1;
  const double lo = edges.empty() ? 0 : edges.front(), hi = edges.empty() ? 1 : edges.back();
  auto X = [&](double v) { return l + (r - l) * (v - lo) / (hi - lo); };
  auto Y = [&](double p) { return b - (b - t) * p / (pmax * 1.05); };
  os << "<text x=\"" << num(x0 + w / 2) << "\" y=\"" << num(y0 + 18)
     << "\" text-anchor=\"middle\" font-size=\"14\">" << feature << "</text>\n";
  os << "<line x1=\"" << num(l) << "\" y1=\"" << num(b) << "\" x2=\"" << num(r) << "\" y2=\"" << num(b)
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << num(l) << "\" y1=\"" << num(b) << "\" x2=\"" << num(l) << "\" y2=\"" << num(t)
     << "\" stroke=\"black\"/>\n";
  char tick[64];
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * i / 4.0;
    std::snprintf(tick, sizeof tick, "%.4g", v);
    os << "<text x=\"" << num(X(v)) << "\" y=\"" << num(b + 14) << "\" text-anchor=\"middle\" font-size=\"10\">"
       << tick << "</text>\n";
  }
  std::snprintf(tick, sizeof tick, "%.3g", pmax);
  os << "<text x=\"" << num(l - 4) << "\" y=\"" << num(Y(pmax) + 4) << "\" text-anchor=\"end\" font-size=\"10\">"
     << tick << "</text>\n";
  int ci = 0;
  for (const auto& [label, hist] : hs) {
    const char* col = kPalette[ci % (sizeof kPalette / sizeof *kPalette)];
    os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < hist.probabilities.size(); ++k) {
      const double p = hist.probabilities[k];
      os << num(X(hist.bin_edges[k])) << ',' << num(Y(p)) << ' ' << num(X(hist.bin_edges[k + 1])) << ','
         << num(Y(p)) << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"" << num(r - 4) << "\" y=\"" << num(t + 12 + 13 * ci) << "\" text-anchor=\"end\" fill=\""
       << col << "\" font-size=\"11\">" << label << " (n=" << hist.count << ")</text>\n";
    ++ci;
  }
  return os.str();
}

std::string svg_document(double w, double h, const std::string& body) {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
     << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\" font-family=\"sans-serif\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << body << "</svg>\n";
  return os.str();
}

int cmd_stats(const RunConfig& c, const std::string& analysis_dir) {
  const fs::path dir = analysis_dir.empty() ? fs::path(c.out) : fs::path(analysis_dir);
  const auto cycles_path = dir / "cycles.csv", fm_path = dir / "fm.csv";
  if (!fs::is_regular_file(cycles_path) || !fs::is_regular_file(fm_path))
    throw CliError(kInsufficient, "missing analyze output in " + dir.string());
  std::map<std::string, std::map<std::string, std::vector<double>>> samples;
  auto load = [&](const fs::path& p, const std::vector<std::pair<std::string, std::string>>& cols) {
    const auto t = read_csv(p);
    std::map<std::string, std::size_t> at;
    for (std::size_t i = 0; i < t.header.size(); ++i) at[t.header[i]] = i;
    if (!at.count("label")) throw CliError(kInsufficient, p.string() + ": no label column");
    for (const auto& [col, _] : cols)
      if (!at.count(col)) throw CliError(kInsufficient, p.string() + ": no " + col + " column");
    for (const auto& row : t.rows) {
      if (row.size() != t.header.size()) throw CliError(kInsufficient, p.string() + ": ragged row");
      auto& m = samples[row[at["label"]]];
      for (const auto& [col, feature] : cols) {
        const auto v = parse_number(row[at[col]]);
        if (!v) throw CliError(kInsufficient, p.string() + ": bad number '" + row[at[col]] + "'");
        m[feature].push_back(*v);
      }
    }
  };
  load(cycles_path, {{"fg_over_f0", "fg_over_f0"}, {"naq", "naq"}, {"qoq", "qoq"}});
  load(fm_path, {{"fm_hz", "fm_hz"}});
  if (samples.size() < 2)
    throw CliError(kInsufficient, "need at least two labels, found " + std::to_string(samples.size()));

  vqt::StatsConfig sc;
  sc.bins = c.bins;
  sc.min_samples = static_cast<std::size_t>(c.min_samples);
  const auto table = vqt::build_divergence_table(samples, {}, sc);
  const fs::path out = c.out;
  std::ostringstream csv;
  vqt::write_divergence_csv(csv, table);
  write_text(out / "divergence.csv", csv.str());

  std::string panels;
  const double pw = 480, ph = 300;
  for (std::size_t f = 0; f < table.features.size(); ++f) {
    const auto& feature = table.features[f];
    const auto& hs = table.histograms.at(feature);
    for (const auto& [label, h] : hs) {
      std::ostringstream hcsv;
      vqt::write_histogram_csv(hcsv, h);
      write_text(out / "histograms" / (feature + "_" + safe_name(label) + ".csv"), hcsv.str());
      if (h.clipped) warn(feature + "/" + label + ": " + std::to_string(h.clipped) + " values clipped");
    }
    write_text(out / "plots" / (feature + ".svg"), svg_document(pw, ph, svg_panel(feature, hs, 0, 0, pw, ph)));
    panels += svg_panel(feature, hs, (f % 2) * pw, (f / 2) * ph, pw, ph);
  }
  write_text(out / "plots" / "histograms.svg", svg_document(2 * pw, 2 * ph, panels));
  echo_config(c, "stats");
  return kOk;
}

// ---------------------------------------------------------------------------
// build-preset

int cmd_build_preset(const RunConfig& c, const std::vector<std::string>& inputs, const std::string& label) {
  std::vector<fs::path> files;
  for (const auto& f : expand_inputs(inputs.empty() ? c.inputs : inputs))
    if (!inputs.empty() || label_for(f, c, "") == label) files.push_back(f);
  if (files.empty()) throw CliError(kNoAudio, "no input files for label " + label);
  auto loaded = parallel_map<std::optional<vqt::AudioBuffer>>(files.size(), c.threads, [&](std::size_t i) {
    try {
      return std::optional<vqt::AudioBuffer>(vqt::load_audio(files[i]));
    } catch (const std::exception& e) {
      warn(files[i].string() + ": " + e.what());
      return std::optional<vqt::AudioBuffer>();
    }
  });
  std::vector<vqt::AudioBuffer> corpus;
  for (auto& b : loaded)
    if (b) corpus.push_back(std::move(*b));
  if (corpus.empty()) throw CliError(kNoAudio, "no readable audio for label " + label);
  if (corpus.size() < files.size())
    warn(std::to_string(files.size() - corpus.size()) + " of " + std::to_string(files.size()) + " files skipped");

  vqt::PresetConfig pc;
  pc.analysis = analysis_config(c);
  pc.framing.normalized_length = c.frame_length;
  pc.tilt.order = c.tilt_order;
  pc.min_utterances = c.min_utterances;
  vqt::PresetReport rep;
  const auto preset = vqt::build_preset(corpus, label, pc, &rep);
  const fs::path out = c.out;
  fs::create_directories(out);
  vqt::save_preset(out / (safe_name(label) + ".json"), preset);
  ojson report{{"kind", "build-preset"},
               {"label", label},
               {"files", files.size()},
               {"unreadable", files.size() - corpus.size()},
               {"utterances_used", rep.utterances_used},
               {"utterances_skipped", rep.utterances_skipped},
               {"residual_frames", rep.residual_frames},
               {"speech_frames", rep.speech_frames},
               {"fm_frames", rep.fm_frames}};
  write_text(out / (safe_name(label) + ".report.json"), report.dump(2) + "\n");
  echo_config(c, "build-preset");
  info("preset " + label + ": fm " + num(preset.fm_hz) + " Hz from " + std::to_string(rep.utterances_used) +
       " utterances");
  return kOk;
}

// ---------------------------------------------------------------------------
// transform

struct TransformOptions {
  std::string input, source, target, output;
  bool no_tilt = false;
};

void write_wav(const fs::path& p, const vqt::AudioBuffer& b, const RunConfig& c) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  vqt::save_wav(p, b, c.float32 ? vqt::WavEncoding::kFloat32 : vqt::WavEncoding::kPcm16, c.seed);
}

int cmd_transform(const RunConfig& c, const TransformOptions& o) {
  const bool default_source = o.source.empty();
  const auto source = resolve_preset(default_source ? "modal" : o.source, c);
  const auto target = resolve_preset(o.target, c);
  vqt::AudioBuffer in;
  try {
    in = vqt::load_audio(o.input);
  } catch (const vqt::Error& e) {
    throw CliError(kNoAudio, e.what());
  }
  vqt::TransformConfig tc;
  tc.analysis = analysis_config(c);
  tc.seed = c.seed;
  tc.apply_tilt = !o.no_tilt;
  const auto r = vqt::transform_voice_quality(in, source.preset, target.preset, tc);
  for (const auto& w : r.warnings) warn(w);
  const fs::path out_wav = o.output.empty()
                               ? fs::path(c.out) / (fs::path(o.input).stem().string() + "." +
                                                    safe_name(target.preset.label) + ".wav")
                               : fs::path(o.output);
  write_wav(out_wav, r.output, c);
  auto src = preset_ref_json(source);
  src["default"] = default_source;
  ojson meta{{"kind", "transform"},
             {"input", o.input},
             {"output", out_wav.string()},
             {"source_preset", src},
             {"target_preset", preset_ref_json(target)},
             {"tilt", !o.no_tilt},
             {"seed", c.seed},
             {"sample_rate", r.output.sample_rate},
             {"encoding", c.float32 ? "float32" : "pcm16"},
             {"pulses", r.pulses},
             {"clipped_samples", r.clipped_samples},
             {"lpc_repaired_frames", r.lpc_repaired},
             {"warnings", r.warnings}};
  auto meta_path = out_wav;
  meta_path.replace_extension(".json");
  write_text(meta_path, meta.dump(2) + "\n");
  echo_config(c, "transform");
  return kOk;
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
  std::string tracks, lpc, preset, output;
  int sample_rate = 16000;
};

std::string track_stem(const fs::path& p) {
  auto name = p.filename().string();
  for (const std::string suffix : {".f0.csv", ".csv"})
    if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
      return name.substr(0, name.size() - suffix.size());
  return name;
}

int cmd_synth(const RunConfig& c, const SynthOptions& o) {
  const auto preset = resolve_preset(o.preset, c);
  auto need = [](const fs::path& p) {
    if (!fs::is_regular_file(p)) throw CliError(kConfigError, "missing file " + p.string());
    return read_csv(p);
  };
  const auto tr = need(o.tracks);
  const auto lp = need(o.lpc);
  if (tr.header != std::vector<std::string>{"time_s", "f0_hz", "voiced"})
    throw CliError(kConfigError, o.tracks + ": header must be time_s,f0_hz,voiced");
  if (lp.header.size() < 3 || lp.header[0] != "time_s" || lp.header[1] != "gain")
    throw CliError(kConfigError, o.lpc + ": header must be time_s,gain,a1..ap");
  if (tr.rows.size() < 2 || tr.rows.size() != lp.rows.size())
    throw CliError(kConfigError, "track and LPC files must have the same number (>= 2) of frames");
  auto number = [](const std::string& s, const std::string& where) {
    const auto v = parse_number(s);
    if (!v || !std::isfinite(*v)) throw CliError(kConfigError, where + ": bad number '" + s + "'");
    return *v;
  };
  const std::size_t frames = tr.rows.size();
  const double hop = number(tr.rows[1][0], o.tracks) - number(tr.rows[0][0], o.tracks);
  if (!(hop > 0)) throw CliError(kConfigError, o.tracks + ": time_s must increase");

  vqt::SynthesisParams params;
  params.sample_rate = o.sample_rate;
  params.frame_hop = hop;
  params.noise_seed = c.seed;
  vqt::LpcEnvelope env;
  env.order = static_cast<int>(lp.header.size()) - 2;
  env.sample_rate = o.sample_rate;
  env.hop = static_cast<int>(std::lround(hop * o.sample_rate));
  env.window = env.hop;
  for (std::size_t i = 0; i < frames; ++i) {
    const auto& t = tr.rows[i];
    const auto& l = lp.rows[i];
    if (t.size() != 3 || l.size() != lp.header.size()) throw CliError(kConfigError, "ragged row in tracks or LPC");
    const double time = number(t[0], o.tracks);
    if (std::abs(time - i * hop) > 1e-6 || std::abs(number(l[0], o.lpc) - time) > 1e-6)
      throw CliError(kConfigError, "frame times must be uniform and match between files");
    const bool voiced = number(t[2], o.tracks) != 0.0;
    const double f0 = number(t[1], o.tracks);
    if (voiced && !(f0 > 0)) throw CliError(kConfigError, "voiced frame with f0 <= 0 at " + t[0]);
    params.f0.push_back(voiced ? f0 : 0.0);
    params.energy.push_back(number(l[1], o.lpc));
    std::vector<double> a{1.0};
    for (std::size_t k = 2; k < l.size(); ++k) a.push_back(number(l[k], o.lpc));
    if (!vqt::is_minimum_phase(a)) vqt::repair_stability(a), ++env.repaired;
    env.coeffs.push_back(std::move(a));
    env.gains.push_back(params.energy.back());
  }
  params.length = static_cast<std::size_t>(std::lround(frames * hop * o.sample_rate));
  const auto y = vqt::synthesize_speech(params, env, preset.preset);
  const fs::path out_wav = o.output.empty()
                               ? fs::path(c.out) / (track_stem(o.tracks) + ".synth.wav")
                               : fs::path(o.output);
  write_wav(out_wav, y, c);
  auto meta_path = out_wav;
  meta_path.replace_extension(".json");
  ojson meta{{"kind", "synth"},
             {"tracks", o.tracks},
             {"lpc", o.lpc},
             {"output", out_wav.string()},
             {"preset", preset_ref_json(preset)},
             {"seed", c.seed},
             {"sample_rate", o.sample_rate},
             {"encoding", c.float32 ? "float32" : "pcm16"},
             {"frames", frames},
             {"lpc_repaired_frames", env.repaired}};
  write_text(meta_path, meta.dump(2) + "\n");
  echo_config(c, "synth");
  return kOk;
}

// ---------------------------------------------------------------------------
// validate: schema checks on emitted files

using Problems = std::vector<std::string>;

void check_csv(const fs::path& p, const std::vector<std::string>& header, std::size_t text_cols,
               Problems& pr, const std::function<void(const std::vector<double>&, std::size_t)>& row_check = {}) {
  const auto t = read_csv(p);
  if (t.header != header) {
    pr.push_back(p.string() + ": unexpected header");
    return;
  }
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r].size() != header.size()) {
      pr.push_back(p.string() + ": row " + std::to_string(r + 2) + " has the wrong field count");
      return;
    }
    std::vector<double> v;
    for (std::size_t k = text_cols; k < header.size(); ++k) {
      const auto x = parse_number(t.rows[r][k]);
      if (!x || !std::isfinite(*x)) {
        pr.push_back(p.string() + ": row " + std::to_string(r + 2) + " column " + header[k] + " not a finite number");
        return;
      }
      v.push_back(*x);
    }
    if (row_check) row_check(v, r + 2);
  }
}

void validate_file(const fs::path& p, Problems& pr, int& checked) {
  const auto name = p.filename().string();
  auto fail = [&](const std::string& what) { pr.push_back(p.string() + ": " + what); };
  auto ends_with = [&](const std::string& suffix) {
    return name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (name == "cycles.csv") {
    check_csv(p, {"utterance_id", "label", "gci_time_s", "f0_hz", "fg_hz", "fg_over_f0", "naq", "qoq"}, 2, pr,
              [&](const std::vector<double>& v, std::size_t row) {
                if (!(v[0] >= 0 && v[1] > 0 && v[2] > 0 && v[3] > 0 && v[4] > 0 && v[4] < 1 && v[5] > 0 && v[5] <= 1))
                  fail("row " + std::to_string(row) + " outside the feature ranges");
              });
  } else if (name == "fm.csv") {
    check_csv(p, {"utterance_id", "label", "time_s", "fm_hz"}, 2, pr,
              [&](const std::vector<double>& v, std::size_t row) {
                if (!(v[0] >= 0 && v[1] > 0)) fail("row " + std::to_string(row) + " outside the feature ranges");
              });
  } else if (name == "divergence.csv") {
    check_csv(p, {"label_a", "label_b", "Fg", "NAQ", "QOQ", "Fm"}, 2, pr,
              [&](const std::vector<double>& v, std::size_t row) {
                for (double d : v)
                  if (!(d >= 0 && d <= 1)) fail("row " + std::to_string(row) + " divergence outside [0, 1]");
              });
  } else if (p.parent_path().filename() == "histograms" && p.extension() == ".csv") {
    double total = 0, last_hi = -INFINITY;
    check_csv(p, {"bin_lo", "bin_hi", "probability"}, 0, pr, [&](const std::vector<double>& v, std::size_t row) {
      if (!(v[0] < v[1]) || v[0] < last_hi - 1e-12 || v[2] < 0) fail("bad bin at row " + std::to_string(row));
      last_hi = v[1];
      total += v[2];
    });
    if (std::abs(total - 1.0) > 1e-9) fail("probabilities sum to " + num(total));
  } else if (ends_with(".f0.csv")) {
    check_csv(p, {"time_s", "f0_hz", "voiced"}, 0, pr, [&](const std::vector<double>& v, std::size_t row) {
      if (!((v[2] == 0 && v[1] == 0) || (v[2] == 1 && v[1] > 0))) fail("inconsistent voicing at row " + std::to_string(row));
    });
  } else if (ends_with(".gci.csv")) {
    double last = -1;
    check_csv(p, {"sample_index", "time_s"}, 0, pr, [&](const std::vector<double>& v, std::size_t row) {
      if (!(v[0] > last && v[0] == std::floor(v[0]) && v[1] >= 0)) fail("bad GCI at row " + std::to_string(row));
      last = v[0];
    });
  } else if (ends_with(".lpc.csv")) {
    const auto t = read_csv(p);
    if (t.header.size() < 3 || t.header[0] != "time_s" || t.header[1] != "gain") fail("unexpected header");
    else {
      std::vector<std::string> h{"time_s", "gain"};
      for (std::size_t k = 1; k + 2 <= t.header.size() - 0 && h.size() < t.header.size(); ++k) h.push_back("a" + std::to_string(k));
      check_csv(p, h, 0, pr, [&](const std::vector<double>& v, std::size_t row) {
        if (!(v[1] >= 0)) fail("negative gain at row " + std::to_string(row));
      });
    }
  } else if (p.extension() == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text(p));
    } catch (const nlohmann::json::exception& e) {
      fail(std::string("not JSON: ") + e.what());
      ++checked;
      return;
    }
    if (j.is_object() && j.contains("format_version")) {
      try {
        vqt::preset_from_json(j);
      } catch (const vqt::Error& e) {
        fail(e.what());
      }
    } else if (name == "config.json") {
      if (!j.is_object() || !j.contains("command") || !j.contains("config")) fail("config echo without command/config");
      else {
        try {
          RunConfig c;
          merge_config(c, j["config"]);
          check_config(c);
        } catch (const CliError& e) {
          fail(e.what());
        }
      }
    } else if (name == "drops.json") {
      if (!j.is_object()) fail("expected an object");
      else
        for (const auto& [id, m] : j.items())
          for (const auto& [reason, n] : m.items())
            if (!n.is_number_integer() || n.get<long>() < 0) fail(id + "/" + reason + ": bad count");
    } else if (j.is_object() && j.contains("kind")) {
      const auto kind = j["kind"].get<std::string>();
      static const std::map<std::string, std::vector<std::string>> required{
          {"analyze", {"usable", "skipped", "files"}},
          {"build-preset", {"label", "utterances_used", "residual_frames"}},
          {"transform", {"input", "output", "source_preset", "target_preset", "seed", "warnings"}},
          {"synth", {"tracks", "lpc", "output", "preset", "seed"}}};
      const auto it = required.find(kind);
      if (it == required.end()) fail("unknown kind " + kind);
      else
        for (const auto& k : it->second)
          if (!j.contains(k)) fail("missing key " + k);
    } else {
      fail("unrecognized JSON document");
    }
  } else if (p.extension() == ".svg") {
    const auto text = read_text(p);
    if (text.rfind("<svg", 0) != 0 || text.find("</svg>") == std::string::npos) fail("not an SVG document");
  } else {
    info("skipped " + p.string());
    return;
  }
  ++checked;
}

int cmd_validate(const std::vector<std::string>& paths) {
  Problems pr;
  int checked = 0;
  std::vector<fs::path> files;
  for (const auto& s : paths) {
    if (fs::is_directory(s)) {
      for (const auto& e : fs::recursive_directory_iterator(s))
        if (e.is_regular_file()) files.push_back(e.path());
    } else if (fs::is_regular_file(s)) {
      files.push_back(s);
    } else {
      throw CliError(kConfigError, "no such file or directory: " + s);
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) validate_file(f, pr, checked);
  for (const auto& p : pr) std::cerr << "invalid: " << p << '\n';
  std::cout << checked << " files checked, " << pr.size() << " problems\n";
  return pr.empty() ? kOk : kSchema;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Voice-quality analysis and transformation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int threads = 1;
  auto* o_config = app.add_option("--config", config_path, "JSON run configuration");
  auto* o_out = app.add_option("--out", out_dir, "output directory");
  auto* o_seed = app.add_option("--seed", seed, "noise / dither seed");
  auto* o_threads = app.add_option("--threads", threads, "worker threads");
  app.add_flag("--verbose", g_verbose, "progress on stderr");
  bool float32 = false;
  auto* o_float = app.add_flag("--float32", float32, "write float32 WAV instead of dithered PCM16");

  AnalyzeOptions ao;
  auto* analyze = app.add_subcommand("analyze", "per-cycle glottal features and Fm tracks");
  analyze->add_option("inputs", ao.inputs, "WAV files, directories or globs");
  analyze->add_option("--label", ao.label, "label for every input (default: labels map, then parent directory)");
  analyze->add_flag("--export-tracks", ao.export_tracks, "also write f0, GCI and LPC track CSVs per file");

  std::string analysis_dir;
  auto* stats = app.add_subcommand("stats", "histograms and Jensen-Shannon divergence table");
  stats->add_option("--analysis", analysis_dir, "directory with analyze output (default: --out)");

  std::vector<std::string> preset_inputs;
  std::string preset_label;
  auto* build = app.add_subcommand("build-preset", "voice-quality preset from a labelled corpus");
  build->add_option("--label", preset_label, "preset label")->required();
  build->add_option("inputs", preset_inputs, "WAV files, directories or globs (default: config inputs with this label)");

  TransformOptions to;
  auto* transform = app.add_subcommand("transform", "resynthesize speech with a target voice quality");
  transform->add_option("--input", to.input, "input WAV")->required();
  transform->add_option("--target", to.target, "target preset: file or bundled name")->required();
  transform->add_option("--source", to.source, "source preset (default: bundled modal)");
  transform->add_option("--output", to.output, "output WAV (default: OUT/<stem>.<label>.wav)");
  transform->add_flag("--no-tilt", to.no_tilt, "skip the spectral tilt filter");

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "speech from external f0 / LPC tracks");
  synth->add_option("--tracks", so.tracks, "CSV time_s,f0_hz,voiced")->required();
  synth->add_option("--lpc", so.lpc, "CSV time_s,gain,a1..ap on the same frames")->required();
  synth->add_option("--preset", so.preset, "preset: file or bundled name")->required();
  synth->add_option("--sample-rate", so.sample_rate, "output sample rate")->check(CLI::Range(8000, 192000));
  synth->add_option("--output", so.output, "output WAV");

  std::vector<std::string> validate_paths;
  auto* validate = app.add_subcommand("validate", "schema-check emitted CSV / JSON / SVG files");
  validate->add_option("paths", validate_paths, "files or directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    RunConfig c;
    if (!config_path.empty()) {
      if (!fs::is_regular_file(config_path)) throw CliError(kConfigError, "config file not found: " + config_path);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(read_text(config_path));
      } catch (const nlohmann::json::parse_error& e) {
        throw CliError(kConfigError, std::string("config is not valid JSON: ") + e.what());
      }
      merge_config(c, j);
    }
    (void)o_config;
    if (o_out->count()) c.out = out_dir;
    if (o_seed->count()) c.seed = seed;
    if (o_threads->count()) c.threads = threads;
    if (o_float->count()) c.float32 = float32;
    check_config(c);

    if (*analyze) return cmd_analyze(c, ao);
    if (*stats) return cmd_stats(c, analysis_dir);
    if (*build) return cmd_build_preset(c, preset_inputs, preset_label);
    if (*transform) return cmd_transform(c, to);
    if (*synth) return cmd_synth(c, so);
    if (*validate) return cmd_validate(validate_paths);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code;
  } catch (const vqt::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}
