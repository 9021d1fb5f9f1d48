#include "lwpt/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace lwpt {

Kernel::Kernel(std::vector<double> c) : coeffs(std::move(c)) {
  if (coeffs.size() < 2 || coeffs.size() % 2 != 0) {
    throw std::invalid_argument("Kernel: length must be even and >= 2");
  }
  for (double v : coeffs) {
    if (!std::isfinite(v)) throw std::invalid_argument("Kernel: non-finite coefficient");
  }
}

Kernel alternating_flip(const Kernel& h) {
  const int K = h.order();
  std::vector<double> out(h.size());
  for (int k = 0; k <= K; ++k) {
    out[k] = (k % 2 == 0 ? 1.0 : -1.0) * h.coeffs[K - k];
  }
  return Kernel(std::move(out));
}

Kernel paraconjugate(const Kernel& h) {
  std::vector<double> out(h.coeffs.rbegin(), h.coeffs.rend());
  return Kernel(std::move(out));
}

KernelPropertyReport check_kernel_property(const Kernel& h, std::size_t grid_points) {
  KernelPropertyReport report;
  const auto& c = h.coeffs;
  const std::size_t n = c.size();

  double norm2 = 0.0;
  for (double v : c) norm2 += v * v;
  report.unit_norm_err = std::abs(norm2 - 1.0);

  for (std::size_t m = 1; 2 * m < n; ++m) {
    double dot = 0.0;
    for (std::size_t k = 0; k + 2 * m < n; ++k) dot += c[k] * c[k + 2 * m];
    report.max_shift_orthogonality_err = std::max(report.max_shift_orthogonality_err, std::abs(dot));
  }

  const Kernel hp = alternating_flip(h);
  std::vector<double> power(grid_points);
  for (std::size_t j = 0; j < grid_points; ++j) {
    double w = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(grid_points);
    std::complex<double> lp_resp = 0.0, hp_resp = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      std::complex<double> e = std::polar(1.0, -w * static_cast<double>(k));
      lp_resp += c[k] * e;
      hp_resp += hp.coeffs[k] * e;
    }
    power[j] = std::norm(lp_resp) + std::norm(hp_resp);
  }
  std::vector<double> sorted = power;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(grid_points / 2), sorted.end());
  double median = sorted[grid_points / 2];
  for (double p : power) {
    report.power_complementarity_err = std::max(report.power_complementarity_err, std::abs(p - median));
  }
  return report;
}

}  // namespace lwpt
