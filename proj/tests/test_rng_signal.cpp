#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "lwpt/rng.hpp"
#include "lwpt/signal.hpp"

using namespace lwpt;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("splitmix stream is reproducible and splittable") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng c = Rng::stream(42, 7);
  Rng d(42 ^ 7);
  CHECK(c.next_u64() == d.next_u64());
}

TEST_CASE("normal draws have sane moments") {
  Rng rng(3);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double v = rng.normal();
    sum += v;
    sum2 += v * v;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("fsc: first sample is cos(0) = 1 and count matches spec") {
  Signal s = gen_fsc({10.0, 8192.0, 0.0, 0});
  CHECK(s.size() == 81920);
  CHECK(s.samples[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.sample_rate == 8192.0);
}

TEST_CASE("fsc: dominant frequency at t=5s is ~2048 Hz by zero-crossing rate") {
  Signal s = gen_fsc({10.0, 8192.0, 0.0, 0});
  const std::size_t start = 8192 * 5 - 410;  // ~0.1 s window centred on t=5
  const std::size_t len = 819;
  int crossings = 0;
  for (std::size_t n = start + 1; n < start + len; ++n) {
    if ((s.samples[n - 1] < 0) != (s.samples[n] < 0)) ++crossings;
  }
  double window_s = static_cast<double>(len) / 8192.0;
  double freq = crossings / (2.0 * window_s);
  CHECK(freq == doctest::Approx(2048.0).epsilon(0.02));
}

TEST_CASE("fsc: instantaneous frequency at the final sample of a 1 s / 64 Hz chirp") {
  Signal s = gen_fsc({1.0, 64.0, 0.0, 0});
  CHECK(s.size() == 64);
  // f(t) = (fs / 2T) t evaluated at the last sample time
  double t_last = 63.0 / 64.0;
  double freq = (64.0 / 2.0) * t_last;
  CHECK(freq == doctest::Approx(32.0).epsilon(0.02));
  // and the sampled phase matches the analytic phase law
  double expected = std::cos(std::numbers::pi * (64.0 / 2.0) * t_last * t_last);
  CHECK(s.samples[63] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("fsc: beta=0 is deterministic and seed-independent") {
  Signal a = gen_fsc({1.0, 512.0, 0.0, 1});
  Signal b = gen_fsc({1.0, 512.0, 0.0, 99});
  CHECK(a.samples == b.samples);
}

TEST_CASE("fsc: noise stays within 8 sigma of the clean chirp") {
  double beta = 0.25;
  Signal noisy = gen_fsc({1.0, 4096.0, beta, 5});
  Signal clean = gen_fsc({1.0, 4096.0, 0.0, 5});
  for (std::size_t n = 0; n < noisy.size(); ++n) {
    CHECK(std::abs(noisy.samples[n] - clean.samples[n]) <= beta * 8.0);
  }
}

TEST_CASE("fsc: non-integer sample count is rejected") {
  CHECK_THROWS_AS(gen_fsc({0.1003, 8192.0, 0.0, 0}), std::invalid_argument);
}

TEST_CASE("cosine corpus: nu=0 gives constant ones, nu=0.25 cycles") {
  Rng rng(0);
  Signal ones = cosine_signal(0.0, 16, 0.0, rng);
  for (double v : ones.samples) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));

  Signal quarter = cosine_signal(0.25, 8, 0.0, rng);
  const double expected[8] = {1, 0, -1, 0, 1, 0, -1, 0};
  for (int n = 0; n < 8; ++n) {
    CHECK(quarter.samples[n] == doctest::Approx(expected[n]).epsilon(1e-12));
  }
}

TEST_CASE("cosine corpus: amplitude bounded by 1 without noise") {
  auto corpus = gen_cosine_corpus({10, 64, 0.0, 123});
  for (const auto& s : corpus) {
    for (double v : s.samples) CHECK(std::abs(v) <= 1.0 + 1e-15);
  }
}

TEST_CASE("cosine corpus: variance ~ cos power 0.5 + noise power 1") {
  auto corpus = gen_cosine_corpus({3, 256, 1.0, 7});
  for (const auto& s : corpus) {
    double mean = 0.0;
    for (double v : s.samples) mean += v;
    mean /= static_cast<double>(s.size());
    double var = 0.0;
    for (double v : s.samples) var += (v - mean) * (v - mean);
    var /= static_cast<double>(s.size());
    CHECK(var == doctest::Approx(1.5).epsilon(0.2));
  }
}

TEST_CASE("cosine corpus: parallel generation equals serial") {
  CosineCorpusSpec spec{32, 128, 0.5, 11};
  auto serial = gen_cosine_corpus(spec, 1);
  auto parallel = gen_cosine_corpus(spec, 8);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t j = 0; j < serial.size(); ++j) {
    CHECK(serial[j].samples == parallel[j].samples);
  }
}

TEST_CASE("segment: frame and hop combinations") {
  Signal s;
  s.samples = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};

  CHECK(segment(s, 4, 4).size() == 2);
  CHECK(segment(s, 4, 2).size() == 4);

  Signal tiny;
  tiny.samples = {1, 2, 3};
  CHECK(segment(tiny, 4, 4).empty());
}

TEST_CASE("segment then concatenate with hop=frame reproduces the prefix") {
  Rng rng(4);
  Signal s;
  s.samples.resize(37);
  for (double& v : s.samples) v = rng.normal();

  auto frames = segment(s, 8, 8);
  REQUIRE(frames.size() == 4);
  std::size_t idx = 0;
  for (const auto& f : frames) {
    for (double v : f.samples) {
      CHECK(v == s.samples[idx]);
      ++idx;
    }
  }
  CHECK(idx == 32);
}

TEST_CASE("corpus file round trip is bit-exact") {
  auto corpus = gen_cosine_corpus({5, 64, 1.0, 77});
  std::string path = temp_path("lwpt_corpus_test.sig");
  save_corpus(path, corpus);
  auto loaded = load_corpus(path);
  REQUIRE(loaded.size() == corpus.size());
  for (std::size_t j = 0; j < corpus.size(); ++j) {
    CHECK(loaded[j].samples == corpus[j].samples);
  }
  std::filesystem::remove(path);
}

TEST_CASE("corpus loader rejects bad magic") {
  std::string path = temp_path("lwpt_badmagic.sig");
  {
    std::ofstream os(path, std::ios::binary);
    os << "NOTALWPTxxxxxxxxxxxxxxxxxxx";
  }
  CHECK_THROWS_AS(load_corpus(path), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("wav: fixed scaling of known samples") {
  // hand-build a mono 16-bit wav holding [0, 16384, -32768]
  Signal s;
  s.sample_rate = 8000;
  s.samples = {0.0, 0.5, -1.0};
  std::string path = temp_path("lwpt_scale.wav");
  write_wav(path, s);
  Signal r = read_wav(path);
  REQUIRE(r.size() == 3);
  CHECK(r.samples[0] == 0.0);
  CHECK(r.samples[1] == 0.5);
  CHECK(r.samples[2] == -1.0);
  CHECK(r.sample_rate == 8000.0);
  std::filesystem::remove(path);
}

TEST_CASE("wav: stereo channel select") {
  // two channels with distinct constants
  std::string path = temp_path("lwpt_stereo.wav");
  {
    std::ofstream os(path, std::ios::binary);
    auto put_u32 = [&](std::uint32_t v) { os.write(reinterpret_cast<char*>(&v), 4); };
    auto put_u16 = [&](std::uint16_t v) { os.write(reinterpret_cast<char*>(&v), 2); };
    const std::uint32_t frames = 4, data_bytes = frames * 2 * 2;
    os.write("RIFF", 4);
    put_u32(36 + data_bytes);
    os.write("WAVE", 4);
    os.write("fmt ", 4);
    put_u32(16);
    put_u16(1);
    put_u16(2);  // stereo
    put_u32(16000);
    put_u32(16000 * 4);
    put_u16(4);
    put_u16(16);
    os.write("data", 4);
    put_u32(data_bytes);
    for (std::uint32_t n = 0; n < frames; ++n) {
      put_u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(8192)));    // ch 0: 0.25
      put_u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(-16384)));  // ch 1: -0.5
    }
  }
  Signal ch0 = read_wav(path, 0);
  Signal ch1 = read_wav(path, 1);
  Signal mix = read_wav(path, -1);
  for (double v : ch0.samples) CHECK(v == 0.25);
  for (double v : ch1.samples) CHECK(v == -0.5);
  for (double v : mix.samples) CHECK(v == doctest::Approx(-0.125).epsilon(1e-12));
  CHECK_THROWS_AS(read_wav(path, 2), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("wav: non-16-bit and non-PCM encodings are named in the error") {
  std::string path = temp_path("lwpt_8bit.wav");
  {
    std::ofstream os(path, std::ios::binary);
    auto put_u32 = [&](std::uint32_t v) { os.write(reinterpret_cast<char*>(&v), 4); };
    auto put_u16 = [&](std::uint16_t v) { os.write(reinterpret_cast<char*>(&v), 2); };
    os.write("RIFF", 4);
    put_u32(36 + 4);
    os.write("WAVE", 4);
    os.write("fmt ", 4);
    put_u32(16);
    put_u16(1);
    put_u16(1);
    put_u32(8000);
    put_u32(8000);
    put_u16(1);
    put_u16(8);  // 8-bit
    os.write("data", 4);
    put_u32(4);
    put_u32(0);
  }
  try {
    read_wav(path);
    FAIL("expected an unsupported-encoding error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("bits per sample") != std::string::npos);
  }
  std::filesystem::remove(path);

  CHECK_THROWS_AS(read_wav(temp_path("lwpt_missing.wav")), std::runtime_error);
}
