#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "dense_reference.hpp"
#include "lwpt/model.hpp"
#include "lwpt/rng.hpp"

using namespace lwpt;

namespace {

Signal random_signal(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Signal s;
  s.samples.resize(n);
  for (double& v : s.samples) v = rng.normal();
  return s;
}

ModelParams random_model(int levels, std::size_t filter_len, std::uint64_t seed,
                         double bias_lo = 0.05, double bias_hi = 0.5) {
  Rng rng(seed);
  ModelParams p;
  p.levels = levels;
  for (std::size_t f = 0; f < (std::size_t{1} << levels) - 1; ++f) {
    std::vector<double> c(filter_len);
    for (double& v : c) v = rng.uniform(-0.8, 0.8);
    p.filters.emplace_back(std::move(c));
  }
  p.biases.resize((std::size_t{2} << levels) - 2);
  for (double& b : p.biases) b = rng.uniform(bias_lo, bias_hi);
  return p;
}

}  // namespace

TEST_CASE("ht: zero input maps to zero for any threshold") {
  for (double g : {0.0, 0.1, 1.0, 50.0}) CHECK(ht(0.0, g) == 0.0);
}

TEST_CASE("ht: zero threshold is the exact identity") {
  for (double x : {-7.3, -1.0, -1e-9, 0.25, 1.0, 123.456}) {
    CHECK(ht(x, 0.0) == x);
  }
}

TEST_CASE("ht: direct evaluation at the 0.3/0.3 operating point") {
  // 0.3 * (sigmoid(-6) + sigmoid(0))
  double expected = 0.3 * (1.0 / (1.0 + std::exp(6.0)) + 0.5);
  CHECK(ht(0.3, 0.3) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(ht(0.3, 0.3) == doctest::Approx(0.150742).epsilon(1e-5));
}

TEST_CASE("ht: saturates to the identity far above the threshold") {
  CHECK(ht(5.0, 0.3) == doctest::Approx(5.0).epsilon(1e-8));
  CHECK(ht(-5.0, 0.3) == doctest::Approx(-5.0).epsilon(1e-8));
}

TEST_CASE("ht: odd, shrinking, and monotone in the threshold") {
  for (double x = -3.0; x <= 3.0; x += 0.17) {
    double prev = std::abs(x);
    for (double g = 0.0; g <= 2.0; g += 0.11) {
      double v = ht(x, g);
      CHECK(ht(-x, g) == doctest::Approx(-v).epsilon(1e-12));
      CHECK(std::abs(v) <= std::abs(x) + 1e-12);
      CHECK(std::abs(v) <= prev + 1e-12);  // non-increasing in gamma
      prev = std::abs(v);
    }
  }
}

TEST_CASE("ht derivatives match finite differences on a smooth grid") {
  const double h = 1e-6;
  for (double x = -2.0; x <= 2.0; x += 0.31) {
    for (double g : {0.05, 0.3, 1.2}) {
      double fd_x = (ht(x + h, g) - ht(x - h, g)) / (2 * h);
      double fd_g = (ht(x, g + h) - ht(x, g - h)) / (2 * h);
      CHECK(ht_dx(x, g) == doctest::Approx(fd_x).epsilon(1e-6));
      CHECK(ht_dgamma(x, g) == doctest::Approx(fd_g).epsilon(2e-6));
    }
  }
}

TEST_CASE("forward with shared db4 and zero biases equals wpt_analyze bit-for-bit") {
  Kernel db4 = wavelet_constants("db4");
  ModelParams p = ModelParams::init(4, db4, 0.0);
  Signal s = random_signal(256, 10);
  WptCoeffs learned = lwpt_forward(s, p);
  WptCoeffs classic = wpt_analyze(s, db4, 4);
  REQUIRE(learned.nodes.size() == classic.nodes.size());
  for (std::size_t i = 0; i < learned.nodes.size(); ++i) {
    CHECK(learned.nodes[i] == classic.nodes[i]);  // exact
  }
}

TEST_CASE("forward: zero signal gives zero leaves") {
  ModelParams p = random_model(3, 8, 1);
  Signal s;
  s.samples.assign(64, 0.0);
  WptCoeffs leaves = lwpt_forward(s, p);
  for (const auto& node : leaves.nodes) {
    for (double v : node) CHECK(v == 0.0);
  }
}

TEST_CASE("forward: a huge threshold suppresses a unit impulse") {
  ModelParams p;
  p.levels = 1;
  p.filters = {Kernel({0.7, 0.7})};
  p.biases = {10.0, 10.0};
  Signal s;
  s.samples.assign(8, 0.0);
  s.samples[0] = 1.0;
  WptCoeffs leaves = lwpt_forward(s, p);
  for (const auto& node : leaves.nodes) {
    for (double v : node) CHECK(std::abs(v) < 1e-30);
  }
}

TEST_CASE("inverse of forward is the identity for the degenerate model") {
  ModelParams p = ModelParams::init(5, wavelet_constants("db4"), 0.0);
  Signal s = random_signal(1024, 2);
  Signal r = lwpt_inverse(lwpt_forward(s, p), p);
  double max_err = 0.0;
  for (std::size_t n = 0; n < s.size(); ++n) {
    max_err = std::max(max_err, std::abs(s.samples[n] - r.samples[n]));
  }
  CHECK(max_err < 1e-9);
}

TEST_CASE("inverse: all-zero leaves give the zero signal") {
  ModelParams p = random_model(3, 8, 3);
  WptCoeffs leaves;
  leaves.level = 3;
  leaves.order = NodeOrder::natural;
  leaves.nodes.assign(8, std::vector<double>(8, 0.0));
  Signal r = lwpt_inverse(leaves, p);
  for (double v : r.samples) CHECK(v == 0.0);
}

TEST_CASE("random non-orthonormal model matches the dense linear-map reference") {
  ModelParams p = random_model(3, 4, 7, 0.0, 0.0);  // zero biases: both passes linear
  auto kernel_at = [&](int l, std::size_t i) {
    return p.filters[ModelParams::filter_index(l, i)].coeffs;
  };
  const std::size_t n = 64;
  Signal s = random_signal(n, 8);

  lwpt_test::Matrix a = lwpt_test::dense_analysis(3, n, kernel_at);
  std::vector<double> flat = lwpt_test::apply(a, s.samples);
  WptCoeffs leaves = lwpt_forward(s, p);
  std::size_t idx = 0;
  for (const auto& node : leaves.nodes) {
    for (double v : node) {
      CHECK(v == doctest::Approx(flat[idx]).epsilon(1e-11));
      ++idx;
    }
  }

  lwpt_test::Matrix syn = lwpt_test::dense_synthesis(3, n, kernel_at);
  Signal r = lwpt_inverse(leaves, p);
  std::vector<double> expected = lwpt_test::apply(syn, flat);
  double resid = 0.0, max_err = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    max_err = std::max(max_err, std::abs(r.samples[m] - expected[m]));
    resid = std::max(resid, std::abs(r.samples[m] - s.samples[m]));
  }
  CHECK(max_err < 1e-10);
  CHECK(resid > 1e-3);  // non-orthonormal bank does not reconstruct
  CHECK(std::isfinite(resid));
}

TEST_CASE("inverse is linear in the coefficients") {
  ModelParams p = random_model(3, 8, 11);
  const std::size_t n = 64;
  WptCoeffs y1, y2, combo;
  y1.level = y2.level = combo.level = 3;
  y1.nodes.assign(8, std::vector<double>(n / 8));
  y2.nodes.assign(8, std::vector<double>(n / 8));
  combo.nodes.assign(8, std::vector<double>(n / 8));
  Rng rng(12);
  const double a = 1.7, b = -0.6;
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t m = 0; m < n / 8; ++m) {
      y1.nodes[i][m] = rng.normal();
      y2.nodes[i][m] = rng.normal();
      combo.nodes[i][m] = a * y1.nodes[i][m] + b * y2.nodes[i][m];
    }
  }
  Signal r1 = lwpt_inverse(y1, p), r2 = lwpt_inverse(y2, p), rc = lwpt_inverse(combo, p);
  for (std::size_t m = 0; m < n; ++m) {
    CHECK(rc.samples[m] ==
          doctest::Approx(a * r1.samples[m] + b * r2.samples[m]).epsilon(1e-9));
  }
}

TEST_CASE("forward is not linear once a threshold is active") {
  ModelParams p = ModelParams::init(1, wavelet_constants("haar"), 0.5);
  Signal s1, sum;
  s1.samples = {0.4, 0.4, 0.4, 0.4};
  sum.samples = {0.8, 0.8, 0.8, 0.8};
  auto l1 = lwpt_forward(s1, p), ls = lwpt_forward(sum, p);
  // superposition fails: 0.4-level inputs are suppressed, their sum is not
  double lhs = ls.nodes[0][0];
  double rhs = 2.0 * l1.nodes[0][0];
  CHECK(std::abs(lhs - rhs) > 0.1);
}

TEST_CASE("spectrogram: gray placement, absolute values, row count") {
  WptCoeffs leaves;
  leaves.level = 2;
  leaves.order = NodeOrder::natural;
  leaves.nodes = {{1.0}, {-2.0}, {3.0}, {-4.0}};
  SpectrogramGrid g = spectrogram(leaves);
  REQUIRE(g.rows == 4);
  REQUIRE(g.cols == 1);
  CHECK(g.at(0, 0) == 1.0);
  CHECK(g.at(1, 0) == 2.0);
  CHECK(g.at(2, 0) == 4.0);
  CHECK(g.at(3, 0) == 3.0);

  WptCoeffs zero;
  zero.level = 3;
  zero.order = NodeOrder::natural;
  zero.nodes.assign(8, std::vector<double>(4, 0.0));
  SpectrogramGrid gz = spectrogram(zero);
  CHECK(gz.rows == 8);
  for (double v : gz.values) CHECK(v == 0.0);
}

TEST_CASE("loss: exact reconstruction and zero leaves give zero") {
  Signal s = random_signal(16, 14);
  WptCoeffs leaves;
  leaves.level = 2;
  leaves.nodes.assign(4, std::vector<double>(4, 0.0));
  CHECK(lwpt_loss(s, s, leaves, 1.0) == 0.0);
}

TEST_CASE("loss: arithmetic example and alpha behavior") {
  Signal s, s_hat;
  s.samples = {1.0, -1.0};
  s_hat.samples = {0.0, 0.0};
  WptCoeffs leaves;
  leaves.level = 1;
  leaves.nodes = {{2.0}, {-3.0}};
  CHECK(lwpt_loss(s, s_hat, leaves, 1.0) == 7.0);
  CHECK(lwpt_loss(s, s_hat, leaves, 0.0) == 2.0);

  Signal wrong;
  wrong.samples = {1.0};
  CHECK_THROWS_AS(lwpt_loss(s, wrong, leaves, 1.0), std::invalid_argument);
}

TEST_CASE("parameter counts over the tree") {
  auto count = [](int L, std::size_t F) {
    std::vector<double> c(F, 0.1);
    return param_count(ModelParams::init(L, Kernel(c), 0.0));
  };
  ParamCount c5 = count(5, 8);
  CHECK(c5.filter_params == 248);
  CHECK(c5.bias_params == 62);
  ParamCount c1 = count(1, 2);
  CHECK(c1.filter_params == 2);
  CHECK(c1.bias_params == 2);
  ParamCount c2 = count(2, 8);
  CHECK(c2.filter_params == 24);
  CHECK(c2.bias_params == 6);
}

TEST_CASE("model file round-trips bit-exactly") {
  ModelParams p = random_model(4, 8, 21);
  auto path = (std::filesystem::temp_directory_path() / "lwpt_model_test.lwpt").string();
  save_model(path, p);
  ModelParams q = load_model(path);
  CHECK(q.levels == p.levels);
  REQUIRE(q.filters.size() == p.filters.size());
  for (std::size_t f = 0; f < p.filters.size(); ++f) {
    CHECK(q.filters[f].coeffs == p.filters[f].coeffs);  // exact
  }
  CHECK(q.biases == p.biases);
  std::filesystem::remove(path);
}

TEST_CASE("model loader rejects malformed files") {
  auto path = (std::filesystem::temp_directory_path() / "lwpt_bad_model.lwpt").string();
  {
    std::ofstream os(path);
    os << "NOT A MODEL\n";
  }
  CHECK_THROWS_AS(load_model(path), std::runtime_error);
  {
    std::ofstream os(path);
    os << "LWPT v1 L=2 F=4\n";  // missing parameter lines
  }
  CHECK_THROWS_AS(load_model(path), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("shape violations raise errors") {
  ModelParams p = random_model(3, 8, 31);
  Signal s = random_signal(36, 32);
  CHECK_THROWS_AS(lwpt_forward(s, p), std::invalid_argument);

  WptCoeffs leaves;
  leaves.level = 2;
  leaves.nodes.assign(4, std::vector<double>(4, 0.0));
  CHECK_THROWS_AS(lwpt_inverse(leaves, p), std::invalid_argument);
}
