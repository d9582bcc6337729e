#pragma once

// Preset JSON serialization. Doubles are written with 17 significant
// digits so files round-trip exactly.

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "vqt/dsm.hpp"
#include "vqt/error.hpp"

namespace vqt {

inline nlohmann::ordered_json preset_to_json(const VoiceQualityPreset& p) {
  nlohmann::ordered_json j;
  j["format_version"] = p.format_version;
  j["label"] = p.label;
  j["fm_hz"] = p.fm_hz;
  j["reference_mean_f0"] = p.reference_mean_f0;
  j["eigenresidual"] = {{"frame_length", p.frame_length},
                        {"samples", p.eigenresidual},
                        {"mean_frame", p.mean_frame},
                        {"eigenvalue_share", p.eigenvalue_share}};
  if (!p.equalizer.empty()) j["eigenresidual"]["equalizer"] = p.equalizer;
  j["tilt"] = {{"order", p.tilt.order()},
               {"source_free", true},
               {"ar_coefficients", p.tilt.a},
               {"gain", p.tilt.gain}};
  j["averaged_spectrum"] = {
      {"frame_length", p.spectrum.frame_length},
      {"frame_count", p.spectrum.frame_count},
      {"bin_hz", "bin_index * reference_mean_f0 / 2"},
      {"bins", p.spectrum.bins}};
  return j;
}

namespace detail {

template <class T>
T required(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw Error(Errc::kInvalidPreset, std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kInvalidPreset, std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline VoiceQualityPreset preset_from_json(const nlohmann::json& j) {
  using detail::required;
  VoiceQualityPreset p;
  p.format_version = required<int>(j, "format_version");
  p.label = required<std::string>(j, "label");
  p.fm_hz = required<double>(j, "fm_hz");
  p.reference_mean_f0 = required<double>(j, "reference_mean_f0");
  const auto er = required<nlohmann::json>(j, "eigenresidual");
  p.frame_length = required<int>(er, "frame_length");
  p.eigenresidual = required<std::vector<double>>(er, "samples");
  if (er.contains("mean_frame")) p.mean_frame = required<std::vector<double>>(er, "mean_frame");
  if (er.contains("eigenvalue_share")) p.eigenvalue_share = required<double>(er, "eigenvalue_share");
  if (er.contains("equalizer")) p.equalizer = required<std::vector<double>>(er, "equalizer");
  const auto tl = required<nlohmann::json>(j, "tilt");
  p.tilt.a = required<std::vector<double>>(tl, "ar_coefficients");
  p.tilt.gain = required<double>(tl, "gain");
  if (required<int>(tl, "order") != p.tilt.order())
    throw Error(Errc::kInvalidPreset, "tilt order does not match the coefficient count");
  const auto sp = required<nlohmann::json>(j, "averaged_spectrum");
  p.spectrum.bins = required<std::vector<double>>(sp, "bins");
  p.spectrum.frame_length = sp.contains("frame_length") ? required<int>(sp, "frame_length")
                                                        : p.frame_length;
  p.spectrum.frame_count = sp.contains("frame_count") ? required<int>(sp, "frame_count") : 1;
  validate(p);
  return p;
}

inline std::string dump_json(const nlohmann::ordered_json& j) {
  // nlohmann prints doubles with max_digits10, which round-trips exactly.
  return j.dump(2) + "\n";
}

inline void save_preset(const std::filesystem::path& path, const VoiceQualityPreset& p) {
  validate(p);
  const auto text = dump_json(preset_to_json(p));
  // Schema check on what is actually written.
  preset_from_json(nlohmann::json::parse(text));
  std::ofstream f(path, std::ios::binary);
  require(f.good(), Errc::kMissingFile, "cannot write " + path.string());
  f << text;
}

inline VoiceQualityPreset load_preset(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good() && std::filesystem::is_regular_file(path), Errc::kMissingFile, path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::kInvalidPreset, path.string() + ": " + e.what());
  }
  return preset_from_json(j);
}

}  // namespace vqt
