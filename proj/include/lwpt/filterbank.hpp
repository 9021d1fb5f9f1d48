#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lwpt/kernel.hpp"
#include "lwpt/signal.hpp"

namespace lwpt {

enum class NodeOrder { natural, frequency };

// One layer of a 2^L-node packet decomposition.
struct WptCoeffs {
  int level = 0;
  NodeOrder order = NodeOrder::natural;
  double sample_rate = 1.0;
  std::vector<std::vector<double>> nodes;  // 2^level vectors of equal length
};

// Nonnegative nodes-by-frames matrix, rows ordered low frequency to high.
struct SpectrogramGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major

  SpectrogramGrid() = default;
  SpectrogramGrid(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

// Circular stride-2 convolution: out[n] = sum_k h_k y[(2n - k) mod N].
// Shared by the fixed and learned transforms so both take identical paths.
std::vector<double> convolve_down(const std::vector<double>& y, const Kernel& h);

// Inverse bloc: paraconjugate filters on zero-upsampled children, then a
// circular advance of K samples to cancel the synthesis delay.
std::vector<double> synthesis_bloc(const std::vector<double>& child_lp,
                                   const std::vector<double>& child_hp,
                                   const Kernel& h);

// L recursive applications of the analysis bloc; natural (tree) node order.
WptCoeffs wpt_analyze(const Signal& s, const Kernel& h, int levels);

// Perfect-reconstruction inverse for orthonormal kernels.
Signal wpt_synthesize(const WptCoeffs& coeffs, const Kernel& h);

// Sequency reordering: natural node n sits at row igray(n), i.e. row r is
// natural node gray(r), so row r spans [r, r+1] * fs / 2^{L+1}.
std::size_t gray_code(std::size_t n);
std::size_t gray_code_inverse(std::size_t g);
WptCoeffs frequency_order(const WptCoeffs& coeffs);
WptCoeffs natural_order(const WptCoeffs& coeffs);

// CSV grid, one row per line.
void export_grid_csv(const SpectrogramGrid& grid, const std::string& path);

}  // namespace lwpt
