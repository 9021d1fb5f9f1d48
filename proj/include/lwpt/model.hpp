#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lwpt/filterbank.hpp"
#include "lwpt/kernel.hpp"
#include "lwpt/signal.hpp"

namespace lwpt {

// Learnable packet transform: one kernel theta_l^i per internal node
// (l in 0..L-1), one threshold gamma_l^i per non-root node (l in 1..L).
struct ModelParams {
  int levels = 0;
  std::vector<Kernel> filters;  // 2^L - 1, indexed by filter_index(l, i)
  std::vector<double> biases;   // 2^{L+1} - 2, indexed by bias_index(l, i)

  static ModelParams init(int levels, const Kernel& h, double bias0);

  std::size_t filter_len() const { return filters.empty() ? 0 : filters[0].size(); }

  static std::size_t filter_index(int l, std::size_t i) { return (std::size_t{1} << l) - 1 + i; }
  static std::size_t bias_index(int l, std::size_t i) { return (std::size_t{1} << l) - 2 + i; }

  void clamp_biases();
};

// Hard-threshold gate HT[x; g] = x * (sigmoid(-10(x+g)) + sigmoid(10(x-g))).
// At g == 0 the two sigmoids sum to one and the gate is the identity.
double ht(double x, double gamma);
double ht_dx(double x, double gamma);      // d HT / d x
double ht_dgamma(double x, double gamma);  // d HT / d gamma

// Forward tape: post[l][i] are node outputs (post[0][0] is the input),
// pre[l][i] the pre-activation convolutions feeding them (l >= 1).
struct ActivationRecord {
  std::vector<std::vector<std::vector<double>>> post;
  std::vector<std::vector<std::vector<double>>> pre;
};

// Analysis pass; leaves in natural order. Pass a record to retain the tape.
WptCoeffs lwpt_forward(const Signal& s, const ModelParams& p, ActivationRecord* record = nullptr);

// Synthesis pass (no activation). With orthonormal shared kernels and zero
// biases this inverts lwpt_forward exactly.
Signal lwpt_inverse(const WptCoeffs& leaves, const ModelParams& p);

// All synthesis intermediates, level L (= thresholded leaves) down to 0.
std::vector<std::vector<std::vector<double>>> lwpt_synthesis_tree(
    const WptCoeffs& leaves, const ModelParams& p);

// |Y_L| with rows in frequency order.
SpectrogramGrid spectrogram(const WptCoeffs& leaves);

// sum |s - s_hat| + alpha * sum |Y_L|
double lwpt_loss(const Signal& s, const Signal& s_hat, const WptCoeffs& leaves, double alpha);

struct ParamCount {
  std::size_t filter_params = 0;
  std::size_t bias_params = 0;
};
ParamCount param_count(const ModelParams& p);

// Versioned text format, 17 significant digits; round-trips bit-exactly.
void save_model(const std::string& path, const ModelParams& p);
ModelParams load_model(const std::string& path);

}  // namespace lwpt
