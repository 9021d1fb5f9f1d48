#include "lwpt/leakage.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "lwpt/parallel.hpp"

namespace lwpt {

SpectrogramGrid ideal_grid(const IdealGridSpec& spec) {
  if (spec.levels < 1) throw std::invalid_argument("ideal_grid: levels must be >= 1");
  const double n_real = spec.duration_s * spec.sample_rate;
  const auto n_samples = static_cast<std::size_t>(std::llround(n_real));
  const std::size_t block = std::size_t{1} << spec.levels;
  if (n_samples == 0 || std::abs(n_real - static_cast<double>(n_samples)) > 1e-9 ||
      n_samples % block != 0) {
    throw std::invalid_argument("ideal_grid: sample count must be a positive multiple of 2^levels");
  }

  const std::size_t rows = block;
  const std::size_t frames = n_samples / block;
  SpectrogramGrid grid(rows, frames);

  // instantaneous frequency at the frame center, in units of one band width:
  // f(t) / (fs / 2^{L+1}) = 2^L * t / T; a frame spans 2^L samples
  for (std::size_t j = 0; j < frames; ++j) {
    double t_center = (static_cast<double>(j) + 0.5) * static_cast<double>(block) / spec.sample_rate;
    double x = static_cast<double>(block) * t_center / spec.duration_s;
    double floor_x = std::floor(x);
    std::size_t band;
    if (x == floor_x && x > 0.0) {
      band = static_cast<std::size_t>(floor_x) - 1;  // edge belongs to the lower band
    } else {
      band = static_cast<std::size_t>(floor_x);
    }
    if (band >= rows) band = rows - 1;
    grid.at(band, j) = 1.0;
  }
  return grid;
}

double rss(const SpectrogramGrid& est, const SpectrogramGrid& ideal) {
  if (est.rows != ideal.rows || est.cols != ideal.cols) {
    throw std::invalid_argument("rss: grid shape mismatch");
  }
  double est_norm2 = 0.0, ideal_norm2 = 0.0;
  for (double v : est.values) est_norm2 += v * v;
  for (double v : ideal.values) ideal_norm2 += v * v;
  if (est_norm2 == 0.0) throw std::invalid_argument("rss: zero-norm estimate cannot be normalized");
  if (ideal_norm2 == 0.0) throw std::invalid_argument("rss: zero-norm ideal cannot be normalized");

  const double est_norm = std::sqrt(est_norm2);
  const double ideal_norm = std::sqrt(ideal_norm2);
  double acc = 0.0;
  for (std::size_t i = 0; i < est.values.size(); ++i) {
    double d = est.values[i] / est_norm - ideal.values[i] / ideal_norm;
    acc += d * d;
  }
  return std::sqrt(acc);
}

RssReport run_leakage_sweep(const GridTransform& transform, const std::string& label,
                            const IdealGridSpec& spec, const std::vector<double>& betas,
                            int trials, std::uint64_t seed, int threads) {
  if (trials < 1) throw std::invalid_argument("run_leakage_sweep: trials must be >= 1");
  const SpectrogramGrid ideal = ideal_grid(spec);

  RssReport report;
  report.method = label;
  report.betas = betas;
  report.trials = trials;
  report.seed = seed;
  report.mean_rss.resize(betas.size(), 0.0);

  for (std::size_t b = 0; b < betas.size(); ++b) {
    std::vector<double> scores(static_cast<std::size_t>(trials), 0.0);
    parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
      ChirpSpec chirp;
      chirp.duration_s = spec.duration_s;
      chirp.sample_rate = spec.sample_rate;
      chirp.noise_level = betas[b];
      chirp.seed = seed ^ ((static_cast<std::uint64_t>(b) << 32) + t);
      scores[t] = rss(transform(gen_fsc(chirp)), ideal);
    });
    double total = 0.0;
    for (double v : scores) total += v;  // fixed order
    report.mean_rss[b] = total / static_cast<double>(trials);
  }
  return report;
}

RssReport run_leakage_sweep(const Kernel& h, const IdealGridSpec& spec,
                            const std::vector<double>& betas, int trials, std::uint64_t seed,
                            int threads) {
  auto transform = [&h, levels = spec.levels](const Signal& s) {
    return spectrogram(wpt_analyze(s, h, levels));
  };
  return run_leakage_sweep(transform, "wpt", spec, betas, trials, seed, threads);
}

RssReport run_leakage_sweep(const ModelParams& p, const IdealGridSpec& spec,
                            const std::vector<double>& betas, int trials, std::uint64_t seed,
                            int threads) {
  if (p.levels != spec.levels) {
    throw std::invalid_argument("run_leakage_sweep: model levels do not match grid spec");
  }
  auto transform = [&p](const Signal& s) { return spectrogram(lwpt_forward(s, p)); };
  return run_leakage_sweep(transform, "lwpt", spec, betas, trials, seed, threads);
}

void export_heatmap(const SpectrogramGrid& grid, const std::string& path, HeatmapMode mode) {
  if (grid.rows == 0 || grid.cols == 0) throw std::invalid_argument("export_heatmap: empty grid");
  if (mode == HeatmapMode::linear) {
    export_grid_csv(grid, path);
    return;
  }
  double peak = 0.0;
  for (double v : grid.values) peak = std::max(peak, v);
  SpectrogramGrid db(grid.rows, grid.cols);
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    double v = grid.values[i];
    double val = -80.0;
    if (peak > 0.0 && v > 0.0) {
      val = std::max(-80.0, 20.0 * std::log10(v / peak));
    }
    db.values[i] = val;
  }
  export_grid_csv(db, path);
}

void export_rss_report(const RssReport& report, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("export_rss_report: cannot open " + path);
  os << "method,beta,mean_rss,trials,seed\n";
  char buf[160];
  for (std::size_t b = 0; b < report.betas.size(); ++b) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%d,%llu\n", report.method.c_str(),
                  report.betas[b], report.mean_rss[b], report.trials,
                  static_cast<unsigned long long>(report.seed));
    os << buf;
  }
  if (!os) throw std::runtime_error("export_rss_report: write failed for " + path);
}

}  // namespace lwpt
