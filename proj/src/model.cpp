#include "lwpt/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lwpt {

namespace {

double sigmoid(double t) {
  if (t >= 0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  double e = std::exp(t);
  return e / (1.0 + e);
}

double sigmoid_deriv(double t) {
  double s = sigmoid(t);
  return s * (1.0 - s);
}

}  // namespace

double ht(double x, double gamma) {
  if (gamma == 0.0) return x;  // sigmoid complement identity
  return x * (sigmoid(-10.0 * (x + gamma)) + sigmoid(10.0 * (x - gamma)));
}

double ht_dx(double x, double gamma) {
  double gate = sigmoid(-10.0 * (x + gamma)) + sigmoid(10.0 * (x - gamma));
  double dgate = -10.0 * sigmoid_deriv(-10.0 * (x + gamma)) + 10.0 * sigmoid_deriv(10.0 * (x - gamma));
  return gate + x * dgate;
}

double ht_dgamma(double x, double gamma) {
  return x * (-10.0 * sigmoid_deriv(-10.0 * (x + gamma)) - 10.0 * sigmoid_deriv(10.0 * (x - gamma)));
}

ModelParams ModelParams::init(int levels, const Kernel& h, double bias0) {
  if (levels < 1) throw std::invalid_argument("ModelParams::init: levels must be >= 1");
  if (bias0 < 0) throw std::invalid_argument("ModelParams::init: bias must be >= 0");
  ModelParams p;
  p.levels = levels;
  p.filters.assign((std::size_t{1} << levels) - 1, h);
  p.biases.assign((std::size_t{2} << levels) - 2, bias0);
  return p;
}

void ModelParams::clamp_biases() {
  for (double& g : biases) g = std::max(g, 0.0);
}

WptCoeffs lwpt_forward(const Signal& s, const ModelParams& p, ActivationRecord* record) {
  const int L = p.levels;
  const std::size_t block = std::size_t{1} << L;
  if (s.size() == 0 || s.size() % block != 0) {
    throw std::invalid_argument("lwpt_forward: signal length must be a positive multiple of 2^levels");
  }

  if (record) {
    record->post.assign(static_cast<std::size_t>(L) + 1, {});
    record->pre.assign(static_cast<std::size_t>(L) + 1, {});
  }

  std::vector<std::vector<double>> nodes = {s.samples};
  if (record) record->post[0] = nodes;

  for (int l = 0; l < L; ++l) {
    std::vector<std::vector<double>> pre;
    pre.reserve(nodes.size() * 2);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const Kernel& theta = p.filters[ModelParams::filter_index(l, i)];
      pre.push_back(convolve_down(nodes[i], theta));
      pre.push_back(convolve_down(nodes[i], alternating_flip(theta)));
    }
    std::vector<std::vector<double>> post(pre.size());
    for (std::size_t j = 0; j < pre.size(); ++j) {
      double gamma = p.biases[ModelParams::bias_index(l + 1, j)];
      post[j].resize(pre[j].size());
      for (std::size_t n = 0; n < pre[j].size(); ++n) post[j][n] = ht(pre[j][n], gamma);
    }
    if (record) {
      record->pre[static_cast<std::size_t>(l) + 1] = pre;
      record->post[static_cast<std::size_t>(l) + 1] = post;
    }
    nodes = std::move(post);
  }

  WptCoeffs out;
  out.level = L;
  out.order = NodeOrder::natural;
  out.sample_rate = s.sample_rate;
  out.nodes = std::move(nodes);
  return out;
}

std::vector<std::vector<std::vector<double>>> lwpt_synthesis_tree(const WptCoeffs& leaves,
                                                                  const ModelParams& p) {
  const int L = p.levels;
  if (leaves.order != NodeOrder::natural) {
    throw std::invalid_argument("lwpt_inverse: leaves must be in natural order");
  }
  if (leaves.level != L || leaves.nodes.size() != (std::size_t{1} << L)) {
    throw std::invalid_argument("lwpt_inverse: leaf count does not match model levels");
  }
  for (const auto& node : leaves.nodes) {
    if (node.size() != leaves.nodes.front().size()) {
      throw std::invalid_argument("lwpt_inverse: leaf length mismatch");
    }
  }

  std::vector<std::vector<std::vector<double>>> tree(static_cast<std::size_t>(L) + 1);
  tree[static_cast<std::size_t>(L)] = leaves.nodes;
  for (int l = L - 1; l >= 0; --l) {
    const auto& children = tree[static_cast<std::size_t>(l) + 1];
    auto& parents = tree[static_cast<std::size_t>(l)];
    parents.resize(children.size() / 2);
    for (std::size_t i = 0; i < parents.size(); ++i) {
      const Kernel& theta = p.filters[ModelParams::filter_index(l, i)];
      parents[i] = synthesis_bloc(children[2 * i], children[2 * i + 1], theta);
    }
  }
  return tree;
}

Signal lwpt_inverse(const WptCoeffs& leaves, const ModelParams& p) {
  auto tree = lwpt_synthesis_tree(leaves, p);
  Signal out;
  out.sample_rate = leaves.sample_rate;
  out.samples = std::move(tree[0][0]);
  return out;
}

SpectrogramGrid spectrogram(const WptCoeffs& leaves) {
  const WptCoeffs* src = &leaves;
  WptCoeffs reordered;
  if (leaves.order == NodeOrder::natural) {
    reordered = frequency_order(leaves);
    src = &reordered;
  }
  SpectrogramGrid grid(src->nodes.size(), src->nodes.empty() ? 0 : src->nodes.front().size());
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      grid.at(r, c) = std::abs(src->nodes[r][c]);
    }
  }
  return grid;
}

double lwpt_loss(const Signal& s, const Signal& s_hat, const WptCoeffs& leaves, double alpha) {
  if (s.size() != s_hat.size()) throw std::invalid_argument("lwpt_loss: length mismatch");
  if (alpha < 0) throw std::invalid_argument("lwpt_loss: alpha must be >= 0");
  double recon = 0.0;
  for (std::size_t n = 0; n < s.size(); ++n) recon += std::abs(s.samples[n] - s_hat.samples[n]);
  double sparsity = 0.0;
  for (const auto& node : leaves.nodes) {
    for (double v : node) sparsity += std::abs(v);
  }
  return recon + alpha * sparsity;
}

ParamCount param_count(const ModelParams& p) {
  ParamCount out;
  out.filter_params = p.filters.size() * p.filter_len();
  out.bias_params = p.biases.size();
  return out;
}

void save_model(const std::string& path, const ModelParams& p) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_model: cannot open " + path);
  os << "LWPT v1 L=" << p.levels << " F=" << p.filter_len() << "\n";
  char buf[32];
  for (int l = 0; l < p.levels; ++l) {
    for (std::size_t i = 0; i < (std::size_t{1} << l); ++i) {
      os << "theta " << l << " " << i;
      for (double c : p.filters[ModelParams::filter_index(l, i)].coeffs) {
        std::snprintf(buf, sizeof(buf), "%.17g", c);
        os << " " << buf;
      }
      os << "\n";
    }
  }
  for (int l = 1; l <= p.levels; ++l) {
    for (std::size_t i = 0; i < (std::size_t{1} << l); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", p.biases[ModelParams::bias_index(l, i)]);
      os << "gamma " << l << " " << i << " " << buf << "\n";
    }
  }
  if (!os) throw std::runtime_error("save_model: write failed for " + path);
}

ModelParams load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_model: cannot open " + path);
  std::string header;
  std::getline(is, header);
  int levels = 0;
  std::size_t filter_len = 0;
  if (std::sscanf(header.c_str(), "LWPT v1 L=%d F=%zu", &levels, &filter_len) != 2 ||
      levels < 1 || filter_len < 2) {
    throw std::runtime_error("load_model: bad header in " + path);
  }

  ModelParams p;
  p.levels = levels;
  p.filters.assign((std::size_t{1} << levels) - 1, Kernel(std::vector<double>(filter_len, 0.0)));
  p.biases.assign((std::size_t{2} << levels) - 2, 0.0);

  std::string line;
  std::size_t seen_filters = 0, seen_biases = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    int l = 0;
    std::size_t i = 0;
    ls >> tag >> l >> i;
    if (tag == "theta") {
      if (l < 0 || l >= levels || i >= (std::size_t{1} << l)) {
        throw std::runtime_error("load_model: theta node out of range in " + path);
      }
      auto& k = p.filters[ModelParams::filter_index(l, i)];
      for (auto& c : k.coeffs) {
        if (!(ls >> c)) throw std::runtime_error("load_model: short theta line in " + path);
      }
      ++seen_filters;
    } else if (tag == "gamma") {
      if (l < 1 || l > levels || i >= (std::size_t{1} << l)) {
        throw std::runtime_error("load_model: gamma node out of range in " + path);
      }
      if (!(ls >> p.biases[ModelParams::bias_index(l, i)])) {
        throw std::runtime_error("load_model: short gamma line in " + path);
      }
      ++seen_biases;
    } else {
      throw std::runtime_error("load_model: unknown line tag '" + tag + "' in " + path);
    }
  }
  if (seen_filters != p.filters.size() || seen_biases != p.biases.size()) {
    throw std::runtime_error("load_model: incomplete parameter set in " + path);
  }
  p.clamp_biases();
  return p;
}

}  // namespace lwpt
