// Builds modal / soft / loud presets from synthetic sentences.
//   make_presets --out presets [--utterances 12] [--wav-dir corpus]

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "vqt/synthetic.hpp"
#include "vqt/vqt.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Synthetic voice-quality presets"};
  std::string out = "presets", wav_dir;
  int utterances = 12;
  std::uint64_t seed = 1;
  app.add_option("--out", out, "preset directory");
  app.add_option("--utterances", utterances, "sentences per quality")->check(CLI::Range(1, 1000));
  app.add_option("--seed", seed, "first sentence seed");
  app.add_option("--wav-dir", wav_dir, "also write the sentences as <dir>/<label>/<n>.wav");
  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(out);
    for (const auto& vq : {vqt::synth::modal_quality(), vqt::synth::soft_quality(), vqt::synth::loud_quality()}) {
      std::vector<vqt::AudioBuffer> corpus;
      for (int i = 0; i < utterances; ++i) {
        corpus.push_back(vqt::synth::make_sentence(vq, seed + i).audio);
        if (!wav_dir.empty()) {
          const fs::path dir = fs::path(wav_dir) / vq.label;
          fs::create_directories(dir);
          vqt::save_wav(dir / (std::to_string(i) + ".wav"), corpus.back(), vqt::WavEncoding::kFloat32);
        }
      }
      vqt::PresetReport rep;
      const auto p = vqt::build_preset(corpus, vq.label, {}, &rep);
      vqt::save_preset(fs::path(out) / (vq.label + ".json"), p);
      std::cout << vq.label << ": fm " << p.fm_hz << " Hz, " << rep.utterances_used << " utterances, "
                << rep.residual_frames << " residual frames\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
