#pragma once

// Mono RIFF/WAVE ingestion (PCM16, IEEE float32) and output.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "vqt/dsp.hpp"
#include "vqt/error.hpp"

namespace vqt {

struct AudioBuffer {
  std::vector<double> samples;  // normalized to [-1, 1]
  int sample_rate = 0;          // Hz

  std::size_t size() const { return samples.size(); }
  double duration() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

inline constexpr int kMinSampleRate = 8000;

/// Throws kInvalidArgument if the buffer breaks the AudioBuffer invariants.
inline void validate(const AudioBuffer& buf) {
  require(buf.sample_rate >= kMinSampleRate, Errc::kInvalidArgument,
          "sample rate below 8000 Hz");
  for (double s : buf.samples)
    require(std::isfinite(s) && std::abs(s) <= 1.0, Errc::kInvalidArgument,
            "sample not finite or outside [-1, 1]");
}

namespace detail {

inline std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}
inline void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

}  // namespace detail

inline AudioBuffer load_audio(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good() && std::filesystem::is_regular_file(path), Errc::kMissingFile,
          path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  require(bytes.size() >= 12 && std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
              std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
          Errc::kCorruptHeader, path.string() + ": not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;
  bool have_fmt = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t len = detail::read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      require(len >= 16 && body + len <= bytes.size(), Errc::kCorruptHeader,
              path.string() + ": truncated fmt chunk");
      format = detail::read_u16(bytes.data() + body);
      channels = detail::read_u16(bytes.data() + body + 2);
      rate = detail::read_u32(bytes.data() + body + 4);
      bits = detail::read_u16(bytes.data() + body + 14);
      if (format == 0xFFFE && len >= 40) {
        // WAVE_FORMAT_EXTENSIBLE: the subformat GUID starts with the codec tag.
        format = detail::read_u16(bytes.data() + body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = std::min<std::size_t>(len, bytes.size() - std::min(body, bytes.size()));
    }
    pos = body + len + (len & 1u);
  }
  require(have_fmt && data != nullptr, Errc::kCorruptHeader,
          path.string() + ": missing fmt or data chunk");
  require(channels == 1, Errc::kUnsupportedFormat,
          path.string() + ": " + std::to_string(channels) + " channels (mono only)");
  require(rate >= static_cast<std::uint32_t>(kMinSampleRate), Errc::kUnsupportedFormat,
          path.string() + ": sample rate below 8000 Hz");

  AudioBuffer buf;
  buf.sample_rate = static_cast<int>(rate);
  if (format == 1 && bits == 16) {
    const std::size_t n = data_len / 2;
    buf.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = static_cast<std::int16_t>(detail::read_u16(data + 2 * i));
      buf.samples[i] = v / 32768.0;
    }
  } else if (format == 3 && bits == 32) {
    const std::size_t n = data_len / 4;
    buf.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      float f;
      std::memcpy(&f, data + 4 * i, 4);
      require(std::isfinite(f), Errc::kUnsupportedFormat,
              path.string() + ": non-finite float sample");
      buf.samples[i] = std::clamp(static_cast<double>(f), -1.0, 1.0);
    }
  } else {
    throw Error(Errc::kUnsupportedFormat,
                path.string() + ": codec " + std::to_string(format) + " / " +
                    std::to_string(bits) + " bit");
  }
  return buf;
}

enum class WavEncoding { kPcm16, kFloat32 };

/// Writes a mono WAV file. PCM16 output uses TPDF dither keyed by dither_seed.
inline void save_wav(const std::filesystem::path& path, const AudioBuffer& buf,
                     WavEncoding enc = WavEncoding::kPcm16, std::uint64_t dither_seed = 0) {
  const bool is_float = enc == WavEncoding::kFloat32;
  const std::uint16_t bits = is_float ? 32 : 16;
  const std::uint32_t data_len = static_cast<std::uint32_t>(buf.samples.size() * (bits / 8));

  std::vector<unsigned char> out;
  out.reserve(44 + data_len);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  detail::put_u32(out, 36 + data_len);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  detail::put_u32(out, 16);
  detail::put_u16(out, is_float ? 3 : 1);
  detail::put_u16(out, 1);
  detail::put_u32(out, static_cast<std::uint32_t>(buf.sample_rate));
  detail::put_u32(out, static_cast<std::uint32_t>(buf.sample_rate) * (bits / 8));
  detail::put_u16(out, bits / 8);
  detail::put_u16(out, bits);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  detail::put_u32(out, data_len);

  for (std::size_t i = 0; i < buf.samples.size(); ++i) {
    const double s = std::clamp(buf.samples[i], -1.0, 1.0);
    if (is_float) {
      const float f = static_cast<float>(s);
      unsigned char b[4];
      std::memcpy(b, &f, 4);
      out.insert(out.end(), b, b + 4);
    } else {
      const double tpdf = dsp::counter_uniform(dither_seed, 2 * i) -
                          dsp::counter_uniform(dither_seed, 2 * i + 1);
      const double q = std::round(s * 32768.0 + tpdf);
      detail::put_u16(out, static_cast<std::uint16_t>(
                               static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0))));
    }
  }
  std::ofstream f(path, std::ios::binary);
  require(f.good(), Errc::kMissingFile, "cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

}  // namespace vqt
