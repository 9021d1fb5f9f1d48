#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lwpt/rng.hpp"

namespace lwpt {

struct Signal {
  std::vector<double> samples;
  double sample_rate = 1.0;  // Hz

  std::size_t size() const { return samples.size(); }
};

// Linear chirp sweeping 0 -> sample_rate/2 over the full duration.
struct ChirpSpec {
  double duration_s = 10.0;
  double sample_rate = 8192.0;
  double noise_level = 0.0;  // beta, std-dev multiplier of additive N(0,1)
  std::uint64_t seed = 0;
};

struct CosineCorpusSpec {
  std::size_t count = 1;
  std::size_t length = 256;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
};

// Frequency-swept cosine with phase pi * (fs / (2T)) * t^2, so the
// instantaneous frequency rises linearly from 0 to fs/2.
Signal gen_fsc(const ChirpSpec& spec);

// cos(2*pi*nu*n) + noise_std * N(0,1); nu in cycles per sample.
Signal cosine_signal(double nu, std::size_t length, double noise_std, Rng& rng);

// Corpus of noisy cosines, nu_j uniform in [0, 0.5). Signal j is generated
// from Rng::stream(seed, j), so parallel generation matches serial exactly.
std::vector<Signal> gen_cosine_corpus(const CosineCorpusSpec& spec, int threads = 1);

// 16-bit PCM WAV. channel = -1 mixes all channels down to their mean.
Signal read_wav(const std::string& path, int channel = 0);
void write_wav(const std::string& path, const Signal& signal);

// All complete frames; trailing remainder dropped.
std::vector<Signal> segment(const Signal& signal, std::size_t frame_len, std::size_t hop);

// Corpus container: "LWPTSIG1" magic, count u64, length u64, then
// count*length little-endian f64 samples.
void save_corpus(const std::string& path, const std::vector<Signal>& signals);
std::vector<Signal> load_corpus(const std::string& path);

}  // namespace lwpt
