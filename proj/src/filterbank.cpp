#include "lwpt/filterbank.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace lwpt {

std::vector<double> convolve_down(const std::vector<double>& y, const Kernel& h) {
  const std::size_t n = y.size();
  if (n % 2 != 0) throw std::invalid_argument("convolve_down: odd input length");
  const auto& c = h.coeffs;
  const std::size_t f = c.size();
  std::vector<double> out(n / 2);
  for (std::size_t m = 0; m < n / 2; ++m) {
    double acc = 0.0;
    std::size_t idx = 2 * m;  // (2m - k) mod n, walking k upward
    for (std::size_t k = 0; k < f; ++k) {
      acc += c[k] * y[idx];
      idx = (idx == 0) ? n - 1 : idx - 1;
    }
    out[m] = acc;
  }
  return out;
}

namespace {

// out[m] = sum_k f_k u[(m - k) mod n]
std::vector<double> convolve_circular(const std::vector<double>& u, const std::vector<double>& f) {
  const std::size_t n = u.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    double acc = 0.0;
    std::size_t idx = m;
    for (std::size_t k = 0; k < f.size(); ++k) {
      acc += f[k] * u[idx];
      idx = (idx == 0) ? n - 1 : idx - 1;
    }
    out[m] = acc;
  }
  return out;
}

}  // namespace

std::vector<double> synthesis_bloc(const std::vector<double>& child_lp,
                                   const std::vector<double>& child_hp,
                                   const Kernel& h) {
  if (child_lp.size() != child_hp.size()) {
    throw std::invalid_argument("synthesis_bloc: child length mismatch");
  }
  const std::size_t n = 2 * child_lp.size();
  const auto K = static_cast<std::size_t>(h.order());
  const Kernel lp_synth = paraconjugate(h);
  const Kernel hp_synth = paraconjugate(alternating_flip(h));

  std::vector<double> up_lp(n, 0.0), up_hp(n, 0.0);
  for (std::size_t i = 0; i < child_lp.size(); ++i) {
    up_lp[2 * i] = child_lp[i];
    up_hp[2 * i] = child_hp[i];
  }
  std::vector<double> lo = convolve_circular(up_lp, lp_synth.coeffs);
  std::vector<double> hi = convolve_circular(up_hp, hp_synth.coeffs);

  // the paraconjugate pair reconstructs with a K-sample circular delay;
  // advance by K so the bloc inverts the analysis bloc exactly
  std::vector<double> out(n);
  for (std::size_t m = 0; m < n; ++m) {
    std::size_t src = (m + K) % n;
    out[m] = lo[src] + hi[src];
  }
  return out;
}

WptCoeffs wpt_analyze(const Signal& s, const Kernel& h, int levels) {
  if (levels < 1) throw std::invalid_argument("wpt_analyze: levels must be >= 1");
  const std::size_t block = std::size_t{1} << levels;
  if (s.size() == 0 || s.size() % block != 0) {
    throw std::invalid_argument("wpt_analyze: signal length must be a positive multiple of 2^levels");
  }
  const Kernel hp = alternating_flip(h);

  WptCoeffs out;
  out.level = levels;
  out.order = NodeOrder::natural;
  out.sample_rate = s.sample_rate;
  out.nodes = {s.samples};
  for (int l = 0; l < levels; ++l) {
    std::vector<std::vector<double>> next;
    next.reserve(out.nodes.size() * 2);
    for (const auto& node : out.nodes) {
      next.push_back(convolve_down(node, h));
      next.push_back(convolve_down(node, hp));
    }
    out.nodes = std::move(next);
  }
  return out;
}

Signal wpt_synthesize(const WptCoeffs& coeffs, const Kernel& h) {
  if (coeffs.order != NodeOrder::natural) {
    throw std::invalid_argument("wpt_synthesize: coefficients must be in natural order");
  }
  const std::size_t expected = std::size_t{1} << coeffs.level;
  if (coeffs.nodes.size() != expected) {
    throw std::invalid_argument("wpt_synthesize: node count does not match level");
  }
  for (const auto& node : coeffs.nodes) {
    if (node.size() != coeffs.nodes.front().size()) {
      throw std::invalid_argument("wpt_synthesize: node length mismatch");
    }
  }

  std::vector<std::vector<double>> nodes = coeffs.nodes;
  while (nodes.size() > 1) {
    std::vector<std::vector<double>> parents;
    parents.reserve(nodes.size() / 2);
    for (std::size_t i = 0; i + 1 < nodes.size(); i += 2) {
      parents.push_back(synthesis_bloc(nodes[i], nodes[i + 1], h));
    }
    nodes = std::move(parents);
  }
  Signal out;
  out.sample_rate = coeffs.sample_rate;
  out.samples = std::move(nodes.front());
  return out;
}

std::size_t gray_code(std::size_t n) { return n ^ (n >> 1); }

std::size_t gray_code_inverse(std::size_t g) {
  std::size_t n = 0;
  while (g != 0) {
    n ^= g;
    g >>= 1;
  }
  return n;
}

WptCoeffs frequency_order(const WptCoeffs& coeffs) {
  if (coeffs.order != NodeOrder::natural) {
    throw std::invalid_argument("frequency_order: input must be in natural order");
  }
  WptCoeffs out;
  out.level = coeffs.level;
  out.order = NodeOrder::frequency;
  out.sample_rate = coeffs.sample_rate;
  out.nodes.resize(coeffs.nodes.size());
  for (std::size_t r = 0; r < coeffs.nodes.size(); ++r) {
    out.nodes[r] = coeffs.nodes[gray_code(r)];
  }
  return out;
}

WptCoeffs natural_order(const WptCoeffs& coeffs) {
  if (coeffs.order != NodeOrder::frequency) {
    throw std::invalid_argument("natural_order: input must be in frequency order");
  }
  WptCoeffs out;
  out.level = coeffs.level;
  out.order = NodeOrder::natural;
  out.sample_rate = coeffs.sample_rate;
  out.nodes.resize(coeffs.nodes.size());
  for (std::size_t n = 0; n < coeffs.nodes.size(); ++n) {
    out.nodes[n] = coeffs.nodes[gray_code_inverse(n)];
  }
  return out;
}

void export_grid_csv(const SpectrogramGrid& grid, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("export_grid_csv: cannot open " + path);
  char buf[32];
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", grid.at(r, c));
      os << buf << (c + 1 < grid.cols ? "," : "");
    }
    os << "\n";
  }
  if (!os) throw std::runtime_error("export_grid_csv: write failed for " + path);
}

}  // namespace lwpt
