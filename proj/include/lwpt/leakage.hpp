#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lwpt/filterbank.hpp"
#include "lwpt/model.hpp"
#include "lwpt/signal.hpp"

namespace lwpt {

struct IdealGridSpec {
  int levels = 5;
  double duration_s = 10.0;
  double sample_rate = 8192.0;
};

// Brick-wall reference representation of the linear chirp: row r is 1 on
// exactly the frames where the instantaneous frequency lies in band r.
// Frequencies landing on a band edge belong to the lower band.
SpectrogramGrid ideal_grid(const IdealGridSpec& spec);

// Normalize both grids to unit Frobenius norm, return the l2 distance.
double rss(const SpectrogramGrid& est, const SpectrogramGrid& ideal);

struct RssReport {
  std::string method;
  std::vector<double> betas;
  std::vector<double> mean_rss;
  int trials = 0;
  std::uint64_t seed = 0;
};

using GridTransform = std::function<SpectrogramGrid(const Signal&)>;

// Mean RSS over seeded chirp realizations per noise level. Trial t of beta
// index b uses the chirp seed stream (b << 32) + t.
RssReport run_leakage_sweep(const GridTransform& transform, const std::string& label,
                            const IdealGridSpec& spec, const std::vector<double>& betas,
                            int trials, std::uint64_t seed, int threads = 1);
RssReport run_leakage_sweep(const Kernel& h, const IdealGridSpec& spec,
                            const std::vector<double>& betas, int trials,
                            std::uint64_t seed, int threads = 1);
RssReport run_leakage_sweep(const ModelParams& p, const IdealGridSpec& spec,
                            const std::vector<double>& betas, int trials,
                            std::uint64_t seed, int threads = 1);

enum class HeatmapMode { linear, db_percent };

// db_percent: 20*log10(value / grid max), clamped at -80 dB.
void export_heatmap(const SpectrogramGrid& grid, const std::string& path, HeatmapMode mode);

void export_rss_report(const RssReport& report, const std::string& path);

}  // namespace lwpt
