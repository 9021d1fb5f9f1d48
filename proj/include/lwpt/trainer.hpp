#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lwpt/model.hpp"
#include "lwpt/signal.hpp"

namespace lwpt {

struct Gradients {
  std::vector<std::vector<double>> filters;  // mirrors ModelParams::filters
  std::vector<double> biases;                // mirrors ModelParams::biases

  static Gradients zeros_like(const ModelParams& p);
  void accumulate(const Gradients& other, double scale);
  void scale(double factor);
};

struct AdamState {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  Gradients m;  // first moments
  Gradients v;  // second moments

  static AdamState init(const ModelParams& p, double lr = 0.001);
};

struct TrainConfig {
  int epochs = 100;
  std::size_t batch_size = 64;
  double alpha = 1.0;
  std::uint64_t seed = 0;
  std::string init_wavelet = "db4";
  double init_bias = 0.3;
  int levels = 5;
  double lr = 0.001;
  int threads = 1;
};

struct BackwardResult {
  double loss = 0.0;
  double recon_term = 0.0;
  double sparsity_term = 0.0;
  Gradients grads;
};

// Exact reverse-mode derivative of the auto-encoder loss with respect to
// every filter coefficient and bias. `record` must come from
// lwpt_forward(s, p, &record).
BackwardResult lwpt_backward(const Signal& s, const ModelParams& p,
                             const ActivationRecord& record, double alpha);

// Bias-corrected Adam update; biases projected to >= 0 afterwards.
void adam_step(ModelParams& p, const Gradients& g, AdamState& st);

struct EpochStats {
  double mean_loss = 0.0;
  double recon_term = 0.0;
  double sparsity_term = 0.0;
};

struct TrainResult {
  ModelParams params;
  AdamState opt;                    // final optimizer state, for checkpointing
  std::vector<EpochStats> history;  // one entry per epoch
};

// Mini-batch training; batch gradient is the mean of per-signal gradients,
// accumulated in index order so any thread count matches serial bit-for-bit.
TrainResult train(const std::vector<Signal>& corpus, const TrainConfig& cfg);

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::size_t params_checked = 0;
};

// Central finite differences vs analytic gradients, away from L1 kinks.
GradCheckReport grad_check(const ModelParams& p, const Signal& s, double alpha,
                           double step = 1e-6, double tol = 1e-5);

void export_loss_csv(const std::string& path, const std::vector<EpochStats>& history);
void save_adam_state(const std::string& path, const AdamState& st);
AdamState load_adam_state(const std::string& path, const ModelParams& p);

}  // namespace lwpt
