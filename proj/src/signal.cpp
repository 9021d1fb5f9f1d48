#include "lwpt/signal.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "lwpt/parallel.hpp"

namespace lwpt {

namespace {

constexpr char kCorpusMagic[8] = {'L', 'W', 'P', 'T', 'S', 'I', 'G', '1'};

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(os, bits);
}

double get_f64(std::istream& is) {
  std::uint64_t bits = get_u64(is);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

Signal gen_fsc(const ChirpSpec& spec) {
  double n_samples_real = spec.duration_s * spec.sample_rate;
  auto n_samples = static_cast<std::size_t>(std::llround(n_samples_real));
  if (spec.duration_s <= 0 || spec.sample_rate <= 0 ||
      std::abs(n_samples_real - static_cast<double>(n_samples)) > 1e-9) {
    throw std::invalid_argument("gen_fsc: duration * sample_rate must be a positive integer");
  }
  if (spec.noise_level < 0) {
    throw std::invalid_argument("gen_fsc: noise_level must be >= 0");
  }

  Signal out;
  out.sample_rate = spec.sample_rate;
  out.samples.resize(n_samples);
  const double sweep = spec.sample_rate / (2.0 * spec.duration_s);  // Hz per second
  Rng rng(spec.seed);
  for (std::size_t n = 0; n < n_samples; ++n) {
    double t = static_cast<double>(n) / spec.sample_rate;
    double phase = std::numbers::pi * sweep * t * t;
    double v = std::cos(phase);
    if (spec.noise_level > 0) v += spec.noise_level * rng.normal();
    out.samples[n] = v;
  }
  return out;
}

Signal cosine_signal(double nu, std::size_t length, double noise_std, Rng& rng) {
  Signal out;
  out.sample_rate = 1.0;
  out.samples.resize(length);
  for (std::size_t n = 0; n < length; ++n) {
    double v = std::cos(2.0 * std::numbers::pi * nu * static_cast<double>(n));
    if (noise_std > 0) v += noise_std * rng.normal();
    out.samples[n] = v;
  }
  return out;
}

std::vector<Signal> gen_cosine_corpus(const CosineCorpusSpec& spec, int threads) {
  if (spec.count < 1) throw std::invalid_argument("gen_cosine_corpus: count must be >= 1");
  if (spec.length < 1) throw std::invalid_argument("gen_cosine_corpus: length must be >= 1");
  if (spec.noise_std < 0) throw std::invalid_argument("gen_cosine_corpus: noise_std must be >= 0");

  std::vector<Signal> corpus(spec.count);
  parallel_for(spec.count, threads, [&](std::size_t j) {
    Rng rng = Rng::stream(spec.seed, j);
    double nu = 0.5 * rng.uniform();
    corpus[j] = cosine_signal(nu, spec.length, spec.noise_std, rng);
  });
  return corpus;
}

std::vector<Signal> segment(const Signal& signal, std::size_t frame_len, std::size_t hop) {
  if (frame_len == 0) throw std::invalid_argument("segment: frame_len must be >= 1");
  if (hop == 0) throw std::invalid_argument("segment: hop must be >= 1");
  std::vector<Signal> frames;
  for (std::size_t start = 0; start + frame_len <= signal.size(); start += hop) {
    Signal f;
    f.sample_rate = signal.sample_rate;
    f.samples.assign(signal.samples.begin() + static_cast<std::ptrdiff_t>(start),
                     signal.samples.begin() + static_cast<std::ptrdiff_t>(start + frame_len));
    frames.push_back(std::move(f));
  }
  return frames;
}

void save_corpus(const std::string& path, const std::vector<Signal>& signals) {
  if (signals.empty()) throw std::invalid_argument("save_corpus: empty corpus");
  std::size_t length = signals.front().size();
  for (const auto& s : signals) {
    if (s.size() != length) throw std::invalid_argument("save_corpus: signals differ in length");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_corpus: cannot open " + path);
  os.write(kCorpusMagic, 8);
  put_u64(os, signals.size());
  put_u64(os, length);
  for (const auto& s : signals) {
    for (double v : s.samples) put_f64(os, v);
  }
  if (!os) throw std::runtime_error("save_corpus: write failed for " + path);
}

std::vector<Signal> load_corpus(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_corpus: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kCorpusMagic, 8) != 0) {
    throw std::runtime_error("load_corpus: bad magic in " + path);
  }
  std::uint64_t count = get_u64(is);
  std::uint64_t length = get_u64(is);
  std::vector<Signal> out(count);
  for (auto& s : out) {
    s.sample_rate = 1.0;
    s.samples.resize(length);
    for (auto& v : s.samples) v = get_f64(is);
  }
  if (!is) throw std::runtime_error("load_corpus: truncated file " + path);
  return out;
}

// ---------------------------------------------------------------------------
// WAV (16-bit PCM)

namespace {

std::uint32_t get_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t get_u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

Signal read_wav(const std::string& path, int channel) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_wav: cannot open " + path);
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  if (data.size() < 44 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
      std::memcmp(data.data() + 8, "WAVE", 4) != 0) {
    throw std::runtime_error("read_wav: not a RIFF/WAVE file: " + path);
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* pcm = nullptr;
  std::size_t pcm_bytes = 0;

  std::size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const unsigned char* chunk = data.data() + pos;
    std::uint32_t size = get_u32le(chunk + 4);
    if (pos + 8 + size > data.size()) throw std::runtime_error("read_wav: truncated chunk in " + path);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw std::runtime_error("read_wav: fmt chunk too short in " + path);
      format = get_u16le(chunk + 8);
      channels = get_u16le(chunk + 10);
      rate = get_u32le(chunk + 12);
      bits = get_u16le(chunk + 22);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      pcm = chunk + 8;
      pcm_bytes = size;
    }
    pos += 8 + size + (size & 1);  // chunks are word-aligned
  }

  if (format == 0 || pcm == nullptr) throw std::runtime_error("read_wav: missing fmt or data chunk in " + path);
  if (format != 1) throw std::runtime_error("read_wav: unsupported encoding (format tag " + std::to_string(format) + ", want PCM=1) in " + path);
  if (bits != 16) throw std::runtime_error("read_wav: unsupported encoding (bits per sample " + std::to_string(bits) + ", want 16) in " + path);
  if (channels == 0) throw std::runtime_error("read_wav: zero channels in " + path);
  if (channel >= static_cast<int>(channels)) {
    throw std::runtime_error("read_wav: channel " + std::to_string(channel) + " out of range (" +
                             std::to_string(channels) + " channels) in " + path);
  }

  std::size_t n_frames = pcm_bytes / (2 * channels);
  Signal out;
  out.sample_rate = static_cast<double>(rate);
  out.samples.resize(n_frames);
  for (std::size_t n = 0; n < n_frames; ++n) {
    if (channel < 0) {
      double acc = 0;
      for (std::uint16_t c = 0; c < channels; ++c) {
        auto v = static_cast<std::int16_t>(get_u16le(pcm + 2 * (n * channels + c)));
        acc += static_cast<double>(v);
      }
      out.samples[n] = acc / (32768.0 * channels);
    } else {
      auto v = static_cast<std::int16_t>(get_u16le(pcm + 2 * (n * channels + channel)));
      out.samples[n] = static_cast<double>(v) / 32768.0;
    }
  }
  return out;
}

void write_wav(const std::string& path, const Signal& signal) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_wav: cannot open " + path);
  auto rate = static_cast<std::uint32_t>(std::llround(signal.sample_rate));
  auto n = static_cast<std::uint32_t>(signal.size());
  std::uint32_t data_bytes = n * 2;

  auto put_u32 = [&](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<char*>(b), 4);
  };
  auto put_u16 = [&](std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    os.write(reinterpret_cast<char*>(b), 2);
  };

  os.write("RIFF", 4);
  put_u32(36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  put_u32(16);
  put_u16(1);  // PCM
  put_u16(1);  // mono
  put_u32(rate);
  put_u32(rate * 2);
  put_u16(2);
  put_u16(16);
  os.write("data", 4);
  put_u32(data_bytes);
  for (double v : signal.samples) {
    double clamped = std::max(-1.0, std::min(32767.0 / 32768.0, v));
    auto q = static_cast<std::int16_t>(std::lrint(clamped * 32768.0));
    put_u16(static_cast<std::uint16_t>(q));
  }
  if (!os) throw std::runtime_error("write_wav: write failed for " + path);
}

}  // namespace lwpt
