#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace lwpt {

// Even-length FIR filter, coefficients h_0 .. h_K with K odd.
struct Kernel {
  std::vector<double> coeffs;

  Kernel() = default;
  explicit Kernel(std::vector<double> c);

  std::size_t size() const { return coeffs.size(); }
  int order() const { return static_cast<int>(coeffs.size()) - 1; }  // K
};

// flip[h]_k = (-1)^k h_{K-k}; the high-pass mirror of a low-pass kernel.
Kernel alternating_flip(const Kernel& h);

// h̄_k = h_{K-k}; synthesis-side reversal satisfying anti-cancellation.
Kernel paraconjugate(const Kernel& h);

struct KernelPropertyReport {
  double unit_norm_err = 0.0;
  double max_shift_orthogonality_err = 0.0;
  double power_complementarity_err = 0.0;

  bool within(double tol) const {
    return unit_norm_err < tol && max_shift_orthogonality_err < tol &&
           power_complementarity_err < tol;
  }
};

// Residuals of the orthonormal two-channel conditions: |sum h^2 - 1|,
// max_m |sum_k h_k h_{k+2m}| over m != 0, and the deviation of
// |H_lp|^2 + |H_hp|^2 from constancy on a frequency grid.
KernelPropertyReport check_kernel_property(const Kernel& h, std::size_t grid_points = 512);

// Embedded orthonormal scaling filters: haar (2 taps), db4 (8), db23 (46).
Kernel wavelet_constants(const std::string& name);

}  // namespace lwpt
