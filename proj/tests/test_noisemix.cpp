// tests/test_noisemix.cpp
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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "phoneval/noisemix.hpp"

using namespace phoneval;
namespace fs = std::filesystem;

namespace {

AudioBuffer tone(std::uint32_t rate, double seconds, double amplitude) {
  AudioBuffer buf;
  buf.sample_rate = rate;
  const std::size_t n = static_cast<std::size_t>(rate * seconds);
  buf.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    // A few partials with a slow envelope, so the file is not a bare sine.
    const double v = amplitude * (0.6 * std::sin(2 * std::numbers::pi * 220 * t) +
                                  0.3 * std::sin(2 * std::numbers::pi * 870 * t) +
                                  0.1 * std::sin(2 * std::numbers::pi * 2500 * t)) *
                     (0.7 + 0.3 * std::sin(2 * std::numbers::pi * 3 * t));
    buf.samples[i] = static_cast<std::int16_t>(std::llround(v));
  }
  return buf;
}

// Reconstructs the additive noise from the mixed output; rounding adds at
// most 0.5 per sample and clipping is assumed absent for these fixtures.
double reconstructed_noise_rms(const AudioBuffer& in, const AudioBuffer& out) {
  REQUIRE(in.samples.size() == out.samples.size());
  double sum_sq = 0;
  for (std::size_t i = 0; i < in.samples.size(); ++i) {
    const double d = static_cast<double>(out.samples[i]) - in.samples[i];
    sum_sq += d * d;
  }
  return std::sqrt(sum_sq / static_cast<double>(in.samples.size()));
}

fs::path fresh_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("measure_rms closed forms") {
  AudioBuffer zeros;
  zeros.sample_rate = 16000;
  zeros.samples.assign(100, 0);
  REQUIRE(measure_rms(zeros) == 0.0);

  AudioBuffer constant;
  constant.sample_rate = 16000;
  constant.samples.assign(64, -1234);
  REQUIRE(measure_rms(constant) == 1234.0);

  AudioBuffer square;
  square.sample_rate = 16000;
  for (int i = 0; i < 256; ++i) square.samples.push_back(i % 2 ? 16384 : -16384);
  REQUIRE(measure_rms(square) == 16384.0);

  AudioBuffer empty;
  empty.sample_rate = 16000;
  REQUIRE_THROWS_AS(measure_rms(empty), ValidationError);
}

TEST_CASE("mix_white_noise hits the target SNR") {
  const AudioBuffer signal = tone(16000, 1.0, 6000.0);
  const double signal_rms = measure_rms(signal);

  SECTION("0 dB puts the noise at the signal RMS") {
    const MixResult r = mix_white_noise(signal, {0.0, 99});
    REQUIRE(r.clipped_samples == 0);
    REQUIRE(r.achieved_snr_db == Catch::Approx(0.0).margin(1e-9));
    const double noise_rms = reconstructed_noise_rms(signal, r.audio);
    REQUIRE(noise_rms == Catch::Approx(signal_rms).epsilon(1e-3));
  }
  SECTION("-6 dB measured post hoc lands within the calibration band") {
    const MixResult r = mix_white_noise(signal, {-6.0, 99});
    const double noise_rms = reconstructed_noise_rms(signal, r.audio);
    const double achieved = 20.0 * std::log10(signal_rms / noise_rms);
    REQUIRE(achieved > -6.1);
    REQUIRE(achieved < -5.9);
    REQUIRE(r.achieved_snr_db == Catch::Approx(-6.0).margin(1e-9));
  }
  SECTION("each 10 dB drop scales the noise by sqrt(10)") {
    const AudioBuffer quiet = tone(16000, 1.0, 1500.0);
    const MixResult at20 = mix_white_noise(quiet, {20.0, 7});
    const MixResult at10 = mix_white_noise(quiet, {10.0, 7});
    const double ratio = reconstructed_noise_rms(quiet, at10.audio) /
                         reconstructed_noise_rms(quiet, at20.audio);
    REQUIRE(ratio == Catch::Approx(std::sqrt(10.0)).epsilon(1e-2));
    REQUIRE(ratio == Catch::Approx(3.16228).epsilon(1e-2));
  }
}

TEST_CASE("mixing is deterministic in (seed, input, level)") {
  const AudioBuffer signal = tone(16000, 0.25, 5000.0);
  const MixResult a = mix_white_noise(signal, {5.0, 42});
  const MixResult b = mix_white_noise(signal, {5.0, 42});
  REQUIRE(a.audio.samples == b.audio.samples);
  REQUIRE(a.clipped_samples == b.clipped_samples);

  const MixResult c = mix_white_noise(signal, {5.0, 43});
  REQUIRE(a.audio.samples != c.audio.samples);
}

TEST_CASE("infinite target returns the input untouched") {
  const AudioBuffer signal = tone(16000, 0.1, 3000.0);
  const MixResult r =
      mix_white_noise(signal, {std::numeric_limits<double>::infinity(), 1});
  REQUIRE(r.audio.samples == signal.samples);
  REQUIRE(r.clipped_samples == 0);
}

TEST_CASE("mix rejects degenerate inputs") {
  AudioBuffer silent;
  silent.sample_rate = 16000;
  silent.samples.assign(1000, 0);
  REQUIRE_THROWS_AS(mix_white_noise(silent, {0.0, 1}), ValidationError);

  const AudioBuffer signal = tone(16000, 0.1, 3000.0);
  REQUIRE_THROWS_AS(mix_white_noise(signal, {std::nan(""), 1}), ValidationError);
  REQUIRE_THROWS_AS(mix_white_noise(signal, {-std::numeric_limits<double>::infinity(), 1}),
                    ValidationError);

  AudioBuffer empty;
  empty.sample_rate = 16000;
  REQUIRE_THROWS_AS(mix_white_noise(empty, {0.0, 1}), ValidationError);
}

TEST_CASE("clipped-sample count matches an independent recount") {
  // Constant near-full-scale signal at a low SNR forces saturation.
  AudioBuffer loud;
  loud.sample_rate = 16000;
  loud.samples.assign(16000, 30000);
  const std::uint64_t seed = 2024;
  const double target = 10.0;
  const MixResult r = mix_white_noise(loud, {target, seed});
  REQUIRE(r.clipped_samples > 0);

  // Re-derive the pinned noise algorithm from scratch: mt19937_64 raw
  // draws mapped to (0,1]/[0,1) doubles, Box-Muller, block normalized to
  // unit RMS, scaled by rms * 10^(-target/20).
  std::mt19937_64 rng(seed);
  std::vector<double> noise(loud.samples.size());
  bool spare = false;
  double spare_value = 0;
  for (double& v : noise) {
    if (spare) {
      v = spare_value;
      spare = false;
      continue;
    }
    const double u1 = static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_value = radius * std::sin(angle);
    spare = true;
    v = radius * std::cos(angle);
  }
  double sum_sq = 0;
  for (double v : noise) sum_sq += v * v;
  const double block_rms = std::sqrt(sum_sq / static_cast<double>(noise.size()));
  const double gain = 30000.0 * std::pow(10.0, -target / 20.0);
  std::uint64_t clipped = 0;
  for (std::size_t i = 0; i < noise.size(); ++i) {
    const long long q = std::llround(30000.0 + (gain / block_rms) * noise[i]);
    if (q > 32767 || q < -32768) ++clipped;
  }
  REQUIRE(clipped == r.clipped_samples);
}

TEST_CASE("WAV round trip and rejects") {
  const AudioBuffer original = tone(8000, 0.05, 9000.0);
  std::stringstream bytes;
  write_wav(original, bytes);

  std::stringstream again(bytes.str());
  const AudioBuffer parsed = parse_wav(again, "buffer");
  REQUIRE(parsed.sample_rate == original.sample_rate);
  REQUIRE(parsed.samples == original.samples);

  SECTION("header layout") {
    const std::string s = bytes.str();
    REQUIRE(s.substr(0, 4) == "RIFF");
    REQUIRE(s.substr(8, 4) == "WAVE");
    REQUIRE(s.substr(12, 4) == "fmt ");
    REQUIRE(s.substr(36, 4) == "data");
    REQUIRE(s.size() == 44 + original.samples.size() * 2);
  }
  SECTION("stereo rejected") {
    std::string s = bytes.str();
    s[22] = 2;  // channel count inside the fmt chunk
    std::stringstream in(s);
    REQUIRE_THROWS_AS(parse_wav(in, "stereo"), ParseError);
  }
  SECTION("24-bit rejected") {
    std::string s = bytes.str();
    s[34] = 24;
    std::stringstream in(s);
    REQUIRE_THROWS_AS(parse_wav(in, "deep"), ParseError);
  }
  SECTION("garbage rejected") {
    std::stringstream in(std::string("not a wav at all"));
    REQUIRE_THROWS_AS(parse_wav(in, "junk"), ParseError);
  }
}

TEST_CASE("format_level is canonical") {
  REQUIRE(format_level(40.0) == "40");
  REQUIRE(format_level(-10.0) == "-10");
  REQUIRE(format_level(0.0) == "0");
  REQUIRE(format_level(2.5) == "2.5");
}

TEST_CASE("batch_mix writes one output per (file, level)") {
  const fs::path in_dir = fresh_dir("phoneval_batch_in");
  const fs::path out_dir = fresh_dir("phoneval_batch_out");
  save_wav(tone(16000, 0.2, 4000.0), (in_dir / "aa_b_aa.wav").string());
  save_wav(tone(16000, 0.2, 7000.0), (in_dir / "aa_s_aa.wav").string());

  const std::vector<double> levels = {20.0, 0.0, -10.0};
  const auto manifest = batch_mix(in_dir, out_dir, levels, 11);
  REQUIRE(manifest.size() == 6);
  REQUIRE(batch_ok(manifest));
  for (const auto& entry : manifest) {
    REQUIRE(entry.status == "ok");
    REQUIRE(entry.achieved_db.has_value());
  }
  for (const char* name : {"aa_b_aa_snr20.wav", "aa_b_aa_snr0.wav", "aa_b_aa_snr-10.wav",
                           "aa_s_aa_snr20.wav", "aa_s_aa_snr0.wav", "aa_s_aa_snr-10.wav"}) {
    REQUIRE(fs::exists(out_dir / name));
  }

  SECTION("reruns are byte identical") {
    const std::string before = slurp(out_dir / "aa_b_aa_snr-10.wav");
    const fs::path out2 = fresh_dir("phoneval_batch_out2");
    batch_mix(in_dir, out2, levels, 11);
    REQUIRE(slurp(out2 / "aa_b_aa_snr-10.wav") == before);
  }
  SECTION("a different seed changes the bytes") {
    const fs::path out3 = fresh_dir("phoneval_batch_out3");
    batch_mix(in_dir, out3, levels, 12);
    REQUIRE(slurp(out3 / "aa_b_aa_snr0.wav") != slurp(out_dir / "aa_b_aa_snr0.wav"));
  }
  SECTION("empty level list yields an empty manifest") {
    REQUIRE(batch_mix(in_dir, out_dir, {}, 11).empty());
  }
}

TEST_CASE("batch_mix isolates corrupt inputs") {
  const fs::path in_dir = fresh_dir("phoneval_batch_bad_in");
  const fs::path out_dir = fresh_dir("phoneval_batch_bad_out");
  save_wav(tone(16000, 0.1, 4000.0), (in_dir / "good.wav").string());
  {
    std::ofstream bad(in_dir / "broken.wav", std::ios::binary);
    bad << "RIFFgarbage";
  }

  const auto manifest = batch_mix(in_dir, out_dir, {0.0, -10.0}, 5);
  REQUIRE(manifest.size() == 4);
  REQUIRE_FALSE(batch_ok(manifest));

  std::size_t failures = 0;
  for (const auto& entry : manifest) {
    if (entry.file == "broken.wav") {
      REQUIRE(entry.status.rfind("error", 0) == 0);
      REQUIRE_FALSE(entry.achieved_db.has_value());
      ++failures;
    } else {
      REQUIRE(entry.status == "ok");
    }
  }
  REQUIRE(failures == 2);
  REQUIRE(fs::exists(out_dir / "good_snr0.wav"));
  REQUIRE(fs::exists(out_dir / "good_snr-10.wav"));

  std::stringstream csv;
  write_manifest_csv(manifest, csv);
  const std::string text = csv.str();
  REQUIRE(text.rfind("file,level_db,achieved_db,clipped_samples,status\n", 0) == 0);
  REQUIRE(text.find("broken.wav,0,,,error") != std::string::npos);
}
