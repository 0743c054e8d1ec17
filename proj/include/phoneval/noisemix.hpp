// phoneval/noisemix.hpp
//
// Copyright 2026  The phoneval authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "phoneval/error.hpp"

namespace phoneval {

/// Mono 16-bit PCM audio.
struct AudioBuffer {
  std::uint32_t sample_rate = 0;
  std::vector<std::int16_t> samples;
};

/// Target signal-to-noise ratio and the seed that makes the mix
/// reproducible: a fixed (seed, input, level) triple fully determines the
/// output bytes.
struct SnrSpec {
  double target_db = 0.0;
  std::uint64_t seed = 0;
};

inline double measure_rms(const AudioBuffer& buf) {
  if (buf.samples.empty()) throw ValidationError("measure_rms: empty buffer");
  double sum_sq = 0.0;
  for (std::int16_t s : buf.samples) {
    const double v = static_cast<double>(s);
    sum_sq += v * v;
  }
  return std::sqrt(sum_sq / static_cast<double>(buf.samples.size()));
}

/// Seeded standard-normal stream pinned to a concrete algorithm:
/// mt19937_64 raw draws mapped to doubles, Box-Muller pairs.
/// std::normal_distribution is implementation-defined and does not
/// reproduce across toolchains, so it must not be substituted here.
class GaussianGenerator {
 public:
  explicit GaussianGenerator(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = static_cast<double>((rng_() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;        // [0, 1)
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct MixResult {
  AudioBuffer audio;
  double achieved_snr_db = 0.0;     // measured pre-clipping
  std::uint64_t clipped_samples = 0;
};

/// Adds seeded Gaussian white noise at the target SNR. The noise block is
/// scaled to the exact gain RMS(signal) * 10^(-target/20), the mixture is
/// rounded half away from zero and saturated to int16, and the achieved
/// SNR is measured on the real-valued noise before clipping. A +inf
/// target returns the input unchanged.
inline MixResult mix_white_noise(const AudioBuffer& signal, const SnrSpec& spec) {
  if (std::isnan(spec.target_db)) throw ValidationError("mix_white_noise: NaN target SNR");
  if (spec.target_db == -std::numeric_limits<double>::infinity()) {
    throw ValidationError("mix_white_noise: target SNR must be finite or +inf");
  }
  const double signal_rms = measure_rms(signal);
  if (signal_rms == 0.0) {
    throw ValidationError("mix_white_noise: silent signal (SNR undefined)");
  }

  MixResult result;
  result.audio.sample_rate = signal.sample_rate;
  if (spec.target_db == std::numeric_limits<double>::infinity()) {
    result.audio.samples = signal.samples;
    result.achieved_snr_db = std::numeric_limits<double>::infinity();
    return result;
  }

  const std::size_t n = signal.samples.size();
  GaussianGenerator gen(spec.seed);
  std::vector<double> noise(n);
  double sum_sq = 0.0;
  for (double& v : noise) {
    v = gen.next();
    sum_sq += v * v;
  }
  const double block_rms = std::sqrt(sum_sq / static_cast<double>(n));
  if (block_rms == 0.0) throw ValidationError("mix_white_noise: degenerate noise block");

  // Normalizing the block to unit RMS makes the pre-clipping noise power
  // hit the target gain exactly, independent of the draw.
  const double gain = signal_rms * std::pow(10.0, -spec.target_db / 20.0);
  const double scale = gain / block_rms;

  result.audio.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mixed = static_cast<double>(signal.samples[i]) + scale * noise[i];
    long long q = std::llround(mixed);
    if (q > 32767) {
      q = 32767;
      ++result.clipped_samples;
    } else if (q < -32768) {
      q = -32768;
      ++result.clipped_samples;
    }
    result.audio.samples[i] = static_cast<std::int16_t>(q);
  }
  result.achieved_snr_db = 20.0 * std::log10(signal_rms / gain);
  return result;
}

// ---------------------------------------------------------------------------
// RIFF/WAVE I/O (PCM, mono, 16-bit only)
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint32_t read_le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void write_le32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                         static_cast<char>((v >> 16) & 0xFF),
                         static_cast<char>((v >> 24) & 0xFF)};
  out.write(bytes, 4);
}

inline void write_le16(std::ostream& out, std::uint16_t v) {
  const char bytes[2] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF)};
  out.write(bytes, 2);
}

}  // namespace detail

inline AudioBuffer parse_wav(std::istream& in, const std::string& source_name) {
  const std::istream::pos_type start = in.tellg();
  in.seekg(0, std::ios::end);
  const std::istream::pos_type end = in.tellg();
  in.seekg(start);
  const std::uint64_t stream_bytes =
      (start >= 0 && end >= start) ? static_cast<std::uint64_t>(end - start) : 0;

  unsigned char header[12];
  if (!in.read(reinterpret_cast<char*>(header), 12) || std::memcmp(header, "RIFF", 4) != 0 ||
      std::memcmp(header + 8, "WAVE", 4) != 0) {
    throw ParseError(source_name + ": not a RIFF/WAVE file");
  }

  bool fmt_seen = false;
  std::uint32_t sample_rate = 0;
  std::vector<std::int16_t> samples;
  bool data_seen = false;

  unsigned char chunk[8];
  while (in.read(reinterpret_cast<char*>(chunk), 8)) {
    const std::uint32_t size = detail::read_le32(chunk + 4);
    // A declared size beyond the stream is corruption; catch it before
    // trusting it for an allocation.
    if (stream_bytes > 0 && size > stream_bytes) {
      throw ParseError(source_name + ": chunk size exceeds file size");
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw ParseError(source_name + ": truncated fmt chunk");
      std::vector<unsigned char> fmt(size);
      if (!in.read(reinterpret_cast<char*>(fmt.data()), size)) {
        throw ParseError(source_name + ": truncated fmt chunk");
      }
      const std::uint16_t audio_format = detail::read_le16(fmt.data());
      const std::uint16_t channels = detail::read_le16(fmt.data() + 2);
      sample_rate = detail::read_le32(fmt.data() + 4);
      const std::uint16_t bits = detail::read_le16(fmt.data() + 14);
      if (audio_format != 1) throw ParseError(source_name + ": not PCM (format tag " +
                                              std::to_string(audio_format) + ")");
      if (channels != 1) throw ParseError(source_name + ": expected mono, got " +
                                          std::to_string(channels) + " channels");
      if (bits != 16) throw ParseError(source_name + ": expected 16-bit samples, got " +
                                       std::to_string(bits) + "-bit");
      if (sample_rate == 0) throw ParseError(source_name + ": zero sample rate");
      fmt_seen = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!fmt_seen) throw ParseError(source_name + ": data chunk before fmt chunk");
      if (size % 2 != 0) throw ParseError(source_name + ": odd data chunk size");
      samples.resize(size / 2);
      std::vector<unsigned char> raw(size);
      if (!in.read(reinterpret_cast<char*>(raw.data()), size)) {
        throw ParseError(source_name + ": truncated data chunk");
      }
      for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i] = static_cast<std::int16_t>(detail::read_le16(raw.data() + 2 * i));
      }
      data_seen = true;
    } else {
      std::vector<char> skipped(size);
      if (size > 0 && !in.read(skipped.data(), size)) {
        throw ParseError(source_name + ": truncated chunk");
      }
    }
    // Chunks are word-aligned: an odd payload is followed by a pad byte.
    if (size % 2 != 0) {
      char pad = 0;
      if (!in.read(&pad, 1)) break;
    }
  }
  if (!fmt_seen || !data_seen) {
    throw ParseError(source_name + ": missing fmt or data chunk");
  }
  AudioBuffer buf;
  buf.sample_rate = sample_rate;
  buf.samples = std::move(samples);
  return buf;
}

inline AudioBuffer load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open WAV '" + path + "'");
  return parse_wav(in, path);
}

inline void write_wav(const AudioBuffer& buf, std::ostream& out) {
  if (buf.sample_rate == 0) throw ValidationError("write_wav: zero sample rate");
  const std::uint32_t data_size = static_cast<std::uint32_t>(buf.samples.size() * 2);
  out.write("RIFF", 4);
  detail::write_le32(out, 36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  detail::write_le32(out, 16);
  detail::write_le16(out, 1);  // PCM
  detail::write_le16(out, 1);  // mono
  detail::write_le32(out, buf.sample_rate);
  detail::write_le32(out, buf.sample_rate * 2);  // byte rate
  detail::write_le16(out, 2);                    // block align
  detail::write_le16(out, 16);                   // bits per sample
  out.write("data", 4);
  detail::write_le32(out, data_size);
  for (std::int16_t s : buf.samples) {
    detail::write_le16(out, static_cast<std::uint16_t>(s));
  }
}

inline void save_wav(const AudioBuffer& buf, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write WAV '" + path + "'");
  write_wav(buf, out);
}

// ---------------------------------------------------------------------------
// Batch mixing
// ---------------------------------------------------------------------------

/// Canonical text form of a dB level, used in output names, manifest rows,
/// and per-file seed derivation.
inline std::string format_level(double level) {
  if (std::isfinite(level) && level == std::floor(level) && std::abs(level) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(level));
    return buf;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", level);
  return buf;
}

namespace detail {

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97f4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Per-(file, level) seed: a scrambled hash of the master seed, the input
/// stem, and the canonical level string.
inline std::uint64_t derive_seed(std::uint64_t master_seed, const std::string& stem,
                                 double level) {
  return detail::splitmix64(master_seed ^ detail::fnv1a64(stem + "\x1f" + format_level(level)));
}

struct BatchEntry {
  std::string file;         // input file name
  std::string level_label;  // canonical level string
  std::optional<double> achieved_db;
  std::optional<std::uint64_t> clipped_samples;
  std::string status;  // "ok" or "error: ..."
};

inline bool batch_ok(const std::vector<BatchEntry>& entries) {
  return std::all_of(entries.begin(), entries.end(),
                     [](const BatchEntry& e) { return e.status == "ok"; });
}

/// Mixes every readable mono/16-bit WAV in `input_dir` at every level,
/// writing `<stem>_snr<level>.wav` files. Inputs are processed in sorted
/// name order; a file that cannot be read or mixed yields one failed
/// manifest row per requested level and processing continues.
inline std::vector<BatchEntry> batch_mix(const std::filesystem::path& input_dir,
                                         const std::filesystem::path& output_dir,
                                         const std::vector<double>& levels,
                                         std::uint64_t seed) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(input_dir)) {
    throw ValidationError("batch_mix: input directory '" + input_dir.string() + "' not found");
  }
  std::vector<fs::path> inputs;
  for (const auto& entry : fs::directory_iterator(input_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav") {
      inputs.push_back(entry.path());
    }
  }
  std::sort(inputs.begin(), inputs.end());

  std::vector<BatchEntry> manifest;
  if (levels.empty()) return manifest;
  fs::create_directories(output_dir);

  for (const auto& input : inputs) {
    const std::string name = input.filename().string();
    const std::string stem = input.stem().string();
    std::optional<AudioBuffer> audio;
    std::string read_error;
    try {
      audio = load_wav(input.string());
    } catch (const std::exception& e) {
      read_error = e.what();
    }
    for (double level : levels) {
      BatchEntry entry;
      entry.file = name;
      entry.level_label = format_level(level);
      if (!audio) {
        entry.status = "error: " + read_error;
        manifest.push_back(std::move(entry));
        continue;
      }
      try {
        const SnrSpec spec{level, derive_seed(seed, stem, level)};
        MixResult mixed = mix_white_noise(*audio, spec);
        const fs::path out_path = output_dir / (stem + "_snr" + entry.level_label + ".wav");
        save_wav(mixed.audio, out_path.string());
        entry.achieved_db = mixed.achieved_snr_db;
        entry.clipped_samples = mixed.clipped_samples;
        entry.status = "ok";
      } catch (const std::exception& e) {
        entry.status = std::string("error: ") + e.what();
      }
      manifest.push_back(std::move(entry));
    }
  }
  return manifest;
}

inline void write_manifest_csv(const std::vector<BatchEntry>& entries, std::ostream& out) {
  out << "file,level_db,achieved_db,clipped_samples,status\n";
  for (const auto& e : entries) {
    char achieved[64] = "";
    if (e.achieved_db) std::snprintf(achieved, sizeof(achieved), "%.6f", *e.achieved_db);
    out << e.file << ',' << e.level_label << ',' << achieved << ',';
    if (e.clipped_samples) out << *e.clipped_samples;
    std::string status = e.status;
    for (char& c : status) {
      if (c == ',' || c == '\n') c = ';';
    }
    out << ',' << status << '\n';
  }
}

}  // namespace phoneval
