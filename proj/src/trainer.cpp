#include "lwpt/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "lwpt/parallel.hpp"

namespace lwpt {

namespace {

double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

}  // namespace

Gradients Gradients::zeros_like(const ModelParams& p) {
  Gradients g;
  g.filters.assign(p.filters.size(), std::vector<double>(p.filter_len(), 0.0));
  g.biases.assign(p.biases.size(), 0.0);
  return g;
}

void Gradients::accumulate(const Gradients& other, double scale_factor) {
  for (std::size_t f = 0; f < filters.size(); ++f) {
    for (std::size_t k = 0; k < filters[f].size(); ++k) {
      filters[f][k] += scale_factor * other.filters[f][k];
    }
  }
  for (std::size_t b = 0; b < biases.size(); ++b) biases[b] += scale_factor * other.biases[b];
}

void Gradients::scale(double factor) {
  for (auto& f : filters) {
    for (double& v : f) v *= factor;
  }
  for (double& b : biases) b *= factor;
}

BackwardResult lwpt_backward(const Signal& s, const ModelParams& p,
                             const ActivationRecord& record, double alpha) {
  const int L = p.levels;
  const std::size_t n_samples = s.size();
  if (record.post.size() != static_cast<std::size_t>(L) + 1 ||
      record.pre.size() != static_cast<std::size_t>(L) + 1 ||
      record.post[0].size() != 1 || record.post[0][0].size() != n_samples) {
    throw std::invalid_argument("lwpt_backward: record does not match signal/model");
  }
  const auto K = static_cast<std::size_t>(p.filters[0].order());
  const std::size_t flen = p.filter_len();

  // ---- synthesis pass on the thresholded leaves ----
  WptCoeffs leaves;
  leaves.level = L;
  leaves.order = NodeOrder::natural;
  leaves.sample_rate = s.sample_rate;
  leaves.nodes = record.post[static_cast<std::size_t>(L)];
  auto tree = lwpt_synthesis_tree(leaves, p);
  const std::vector<double>& s_hat = tree[0][0];

  BackwardResult result;
  result.grads = Gradients::zeros_like(p);
  for (std::size_t n = 0; n < n_samples; ++n) {
    result.recon_term += std::abs(s.samples[n] - s_hat[n]);
  }
  for (const auto& node : leaves.nodes) {
    for (double v : node) result.sparsity_term += std::abs(v);
  }
  result.sparsity_term *= alpha;
  result.loss = result.recon_term + result.sparsity_term;

  // ---- backprop through the synthesis tree ----
  // d(loss)/d(s_hat) = -sign(s - s_hat), subgradient 0 at exact zeros
  std::vector<std::vector<std::vector<double>>> d_tree(static_cast<std::size_t>(L) + 1);
  d_tree[0].resize(1);
  d_tree[0][0].resize(n_samples);
  for (std::size_t n = 0; n < n_samples; ++n) {
    d_tree[0][0][n] = -sign(s.samples[n] - s_hat[n]);
  }

  for (int l = 0; l < L; ++l) {
    const auto lu = static_cast<std::size_t>(l);
    const std::size_t node_len = n_samples >> lu;    // parent length
    const std::size_t child_len = node_len / 2;
    d_tree[lu + 1].assign(std::size_t{2} << lu, std::vector<double>(child_len, 0.0));

    for (std::size_t i = 0; i < d_tree[lu].size(); ++i) {
      const auto& g_out = d_tree[lu][i];
      const Kernel& theta = p.filters[ModelParams::filter_index(l, i)];
      auto& d_theta = result.grads.filters[ModelParams::filter_index(l, i)];
      const auto& child_lp = tree[lu + 1][2 * i];
      const auto& child_hp = tree[lu + 1][2 * i + 1];

      // undo the K-sample advance
      std::vector<double> g_sum(node_len);
      for (std::size_t m = 0; m < node_len; ++m) {
        g_sum[m] = g_out[(m + node_len - (K % node_len)) % node_len];
      }

      const Kernel f_lp = paraconjugate(theta);
      const Kernel f_hp = paraconjugate(alternating_flip(theta));
      auto& g_lp = d_tree[lu + 1][2 * i];
      auto& g_hp = d_tree[lu + 1][2 * i + 1];

      for (std::size_t k = 0; k < flen; ++k) {
        double df_lp = 0.0, df_hp = 0.0;
        for (std::size_t m = 0; m < node_len; ++m) {
          // up[child] is nonzero at even positions only
          std::size_t src = (m + node_len - (k % node_len)) % node_len;
          if ((src & 1) == 0) {
            df_lp += g_sum[m] * child_lp[src / 2];
            df_hp += g_sum[m] * child_hp[src / 2];
          }
        }
        // f_lp[k] = theta[K-k]; f_hp[k] = -(-1)^k theta[k]
        d_theta[K - k] += df_lp;
        d_theta[k] += (k % 2 == 0 ? -df_hp : df_hp);

        // input adjoints: d up[t] = sum_k f[k] g_sum[(t+k) mod n],
        // and only the even positions of up feed the children
        for (std::size_t t = 0; t < node_len; t += 2) {
          double g = g_sum[(t + k) % node_len];
          g_lp[t / 2] += f_lp.coeffs[k] * g;
          g_hp[t / 2] += f_hp.coeffs[k] * g;
        }
      }
    }
  }

  // ---- leaves: sparsity subgradient plus reconstruction-path gradient ----
  std::vector<std::vector<double>> d_post = d_tree[static_cast<std::size_t>(L)];
  for (std::size_t i = 0; i < d_post.size(); ++i) {
    const auto& leaf = leaves.nodes[i];
    for (std::size_t n = 0; n < leaf.size(); ++n) {
      d_post[i][n] += alpha * sign(leaf[n]);
    }
  }

  // ---- backprop through the analysis tree ----
  for (int l = L; l >= 1; --l) {
    const auto lu = static_cast<std::size_t>(l);
    const std::size_t parent_len = n_samples >> (lu - 1);
    std::vector<std::vector<double>> d_parent(record.post[lu - 1].size(),
                                              std::vector<double>(parent_len, 0.0));

    for (std::size_t j = 0; j < d_post.size(); ++j) {
      const auto& z = record.pre[lu][j];
      const double gamma = p.biases[ModelParams::bias_index(l, j)];
      const std::size_t child_len = z.size();

      double d_gamma = 0.0;
      std::vector<double> d_z(child_len);
      for (std::size_t n = 0; n < child_len; ++n) {
        d_z[n] = d_post[j][n] * ht_dx(z[n], gamma);
        d_gamma += d_post[j][n] * ht_dgamma(z[n], gamma);
      }
      result.grads.biases[ModelParams::bias_index(l, j)] += d_gamma;

      const std::size_t parent = j / 2;
      const bool is_hp = (j % 2) != 0;
      const Kernel& theta = p.filters[ModelParams::filter_index(l - 1, parent)];
      const Kernel conv_kernel = is_hp ? alternating_flip(theta) : theta;
      auto& d_theta = result.grads.filters[ModelParams::filter_index(l - 1, parent)];
      const auto& y = record.post[lu - 1][parent];
      auto& d_y = d_parent[parent];

      for (std::size_t k = 0; k < flen; ++k) {
        double dc = 0.0;
        std::size_t idx0 = (parent_len - (k % parent_len)) % parent_len;  // (0 - k) mod n
        for (std::size_t n = 0; n < child_len; ++n) {
          std::size_t src = (idx0 + 2 * n) % parent_len;
          dc += d_z[n] * y[src];
          d_y[src] += d_z[n] * conv_kernel.coeffs[k];
        }
        if (is_hp) {
          // c[k] = (-1)^k theta[K-k]  =>  d theta[K-k] += (-1)^k dc
          d_theta[K - k] += (k % 2 == 0 ? dc : -dc);
        } else {
          d_theta[k] += dc;
        }
      }
    }
    d_post = std::move(d_parent);
  }

  return result;
}

AdamState AdamState::init(const ModelParams& p, double lr) {
  AdamState st;
  st.lr = lr;
  st.m = Gradients::zeros_like(p);
  st.v = Gradients::zeros_like(p);
  return st;
}

void adam_step(ModelParams& p, const Gradients& g, AdamState& st) {
  if (g.filters.size() != p.filters.size() || g.biases.size() != p.biases.size()) {
    throw std::invalid_argument("adam_step: gradient/parameter shape mismatch");
  }
  st.step += 1;
  const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));

  auto update = [&](double& param, double& m, double& v, double grad) {
    m = st.beta1 * m + (1.0 - st.beta1) * grad;
    v = st.beta2 * v + (1.0 - st.beta2) * grad * grad;
    param -= st.lr * (m / bc1) / (std::sqrt(v / bc2) + st.eps);
  };

  for (std::size_t f = 0; f < p.filters.size(); ++f) {
    for (std::size_t k = 0; k < p.filter_len(); ++k) {
      update(p.filters[f].coeffs[k], st.m.filters[f][k], st.v.filters[f][k], g.filters[f][k]);
    }
  }
  for (std::size_t b = 0; b < p.biases.size(); ++b) {
    update(p.biases[b], st.m.biases[b], st.v.biases[b], g.biases[b]);
  }
  p.clamp_biases();
}

TrainResult train(const std::vector<Signal>& corpus, const TrainConfig& cfg) {
  if (corpus.empty()) throw std::invalid_argument("train: empty corpus");
  if (cfg.epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (cfg.alpha < 0) throw std::invalid_argument("train: alpha must be >= 0");

  const std::size_t block = std::size_t{1} << cfg.levels;
  for (const auto& s : corpus) {
    if (s.size() == 0 || s.size() % block != 0) {
      throw std::invalid_argument("train: corpus signal length must be a multiple of 2^levels");
    }
  }

  TrainResult result;
  result.params = ModelParams::init(cfg.levels, wavelet_constants(cfg.init_wavelet), cfg.init_bias);
  result.opt = AdamState::init(result.params, cfg.lr);
  AdamState& st = result.opt;

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng = Rng::stream(cfg.seed, 0x53484652ULL);  // shuffle stream

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the seeded stream
    for (std::size_t i = order.size(); i > 1; --i) {
      std::size_t j = shuffle_rng.below(i);
      std::swap(order[i - 1], order[j]);
    }

    EpochStats stats;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_index) {
      const std::size_t count = std::min(cfg.batch_size, order.size() - start);
      std::vector<BackwardResult> per_signal(count);
      parallel_for(count, cfg.threads, [&](std::size_t b) {
        const Signal& sig = corpus[order[start + b]];
        ActivationRecord record;
        lwpt_forward(sig, result.params, &record);
        per_signal[b] = lwpt_backward(sig, result.params, record, cfg.alpha);
      });

      Gradients batch_grad = Gradients::zeros_like(result.params);
      double batch_loss = 0.0;
      for (std::size_t b = 0; b < count; ++b) {  // index order: bit-identical for any thread count
        batch_grad.accumulate(per_signal[b].grads, 1.0);
        batch_loss += per_signal[b].loss;
        stats.mean_loss += per_signal[b].loss;
        stats.recon_term += per_signal[b].recon_term;
        stats.sparsity_term += per_signal[b].sparsity_term;
      }
      if (!std::isfinite(batch_loss)) {
        throw std::runtime_error("train: non-finite loss in batch " + std::to_string(batch_index) +
                                 " of epoch " + std::to_string(epoch));
      }
      batch_grad.scale(1.0 / static_cast<double>(count));
      adam_step(result.params, batch_grad, st);
    }

    const auto n = static_cast<double>(corpus.size());
    stats.mean_loss /= n;
    stats.recon_term /= n;
    stats.sparsity_term /= n;
    result.history.push_back(stats);
  }
  return result;
}

GradCheckReport grad_check(const ModelParams& p, const Signal& s, double alpha, double step,
                           double tol) {
  const double kink_margin = 10.0 * step;

  Signal probe = s;
  Rng rng(0xC0FFEE);
  bool clear = false;
  for (int attempt = 0; attempt < 10 && !clear; ++attempt) {
    ActivationRecord record;
    WptCoeffs leaves = lwpt_forward(probe, p, &record);
    Signal s_hat = lwpt_inverse(leaves, p);
    clear = true;
    for (std::size_t n = 0; n < probe.size() && clear; ++n) {
      if (std::abs(probe.samples[n] - s_hat.samples[n]) < kink_margin) clear = false;
    }
    for (const auto& node : leaves.nodes) {
      for (double v : node) {
        if (std::abs(v) < kink_margin) {
          clear = false;
          break;
        }
      }
    }
    if (!clear) {
      for (double& v : probe.samples) v += 0.05 * (attempt + 1) * rng.normal();
    }
  }
  if (!clear) {
    throw std::runtime_error("grad_check: could not move evaluation point off L1 kinks");
  }

  ActivationRecord record;
  lwpt_forward(probe, p, &record);
  BackwardResult analytic = lwpt_backward(probe, p, record, alpha);

  // central differences on a loss of magnitude |L| carry ~eps*|L|/step of
  // roundoff, so judge small entries against the gradient's overall scale
  double grad_scale = 0.0;
  for (const auto& f : analytic.grads.filters) {
    for (double v : f) grad_scale = std::max(grad_scale, std::abs(v));
  }
  for (double v : analytic.grads.biases) grad_scale = std::max(grad_scale, std::abs(v));

  auto loss_at = [&](const ModelParams& q) {
    WptCoeffs leaves = lwpt_forward(probe, q);
    Signal s_hat = lwpt_inverse(leaves, q);
    return lwpt_loss(probe, s_hat, leaves, alpha);
  };

  GradCheckReport report;
  ModelParams probe_params = p;
  auto check_one = [&](double analytic_grad, double* slot) {
    const double saved = *slot;
    *slot = saved + step;
    double up = loss_at(probe_params);
    *slot = saved - step;
    double down = loss_at(probe_params);
    *slot = saved;
    double fd = (up - down) / (2.0 * step);
    double denom = std::max({std::abs(analytic_grad), std::abs(fd), 1e-3 * grad_scale, 1e-8});
    report.max_rel_err = std::max(report.max_rel_err, std::abs(analytic_grad - fd) / denom);
    ++report.params_checked;
  };

  for (std::size_t f = 0; f < probe_params.filters.size(); ++f) {
    for (std::size_t k = 0; k < probe_params.filter_len(); ++k) {
      check_one(analytic.grads.filters[f][k], &probe_params.filters[f].coeffs[k]);
    }
  }
  for (std::size_t b = 0; b < probe_params.biases.size(); ++b) {
    check_one(analytic.grads.biases[b], &probe_params.biases[b]);
  }
  (void)tol;
  return report;
}

void export_loss_csv(const std::string& path, const std::vector<EpochStats>& history) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("export_loss_csv: cannot open " + path);
  os << "epoch,mean_loss,recon_term,sparsity_term\n";
  char buf[128];
  for (std::size_t e = 0; e < history.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", e + 1, history[e].mean_loss,
                  history[e].recon_term, history[e].sparsity_term);
    os << buf;
  }
  if (!os) throw std::runtime_error("export_loss_csv: write failed for " + path);
}

void save_adam_state(const std::string& path, const AdamState& st) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_adam_state: cannot open " + path);
  os << "LWPTOPT v1 step=" << st.step << " lr=" << st.lr << "\n";
  char buf[32];
  auto dump = [&](const char* tag, const Gradients& g) {
    for (std::size_t f = 0; f < g.filters.size(); ++f) {
      os << tag << "_theta " << f;
      for (double v : g.filters[f]) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os << " " << buf;
      }
      os << "\n";
    }
    for (std::size_t b = 0; b < g.biases.size(); ++b) {
      std::snprintf(buf, sizeof(buf), "%.17g", g.biases[b]);
      os << tag << "_gamma " << b << " " << buf << "\n";
    }
  };
  dump("m", st.m);
  dump("v", st.v);
  if (!os) throw std::runtime_error("save_adam_state: write failed for " + path);
}

AdamState load_adam_state(const std::string& path, const ModelParams& p) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_adam_state: cannot open " + path);
  AdamState st = AdamState::init(p, 0.001);
  std::string header;
  std::getline(is, header);
  if (std::sscanf(header.c_str(), "LWPTOPT v1 step=%lu lr=%lf", &st.step, &st.lr) != 2) {
    throw std::runtime_error("load_adam_state: bad header in " + path);
  }
  std::string tag;
  while (is >> tag) {
    Gradients* dst = nullptr;
    bool is_filter = false;
    if (tag == "m_theta") { dst = &st.m; is_filter = true; }
    else if (tag == "v_theta") { dst = &st.v; is_filter = true; }
    else if (tag == "m_gamma") { dst = &st.m; }
    else if (tag == "v_gamma") { dst = &st.v; }
    else throw std::runtime_error("load_adam_state: unknown tag '" + tag + "' in " + path);

    std::size_t idx;
    if (!(is >> idx)) throw std::runtime_error("load_adam_state: short line in " + path);
    if (is_filter) {
      if (idx >= dst->filters.size()) throw std::runtime_error("load_adam_state: theta index out of range");
      for (auto& v : dst->filters[idx]) {
        if (!(is >> v)) throw std::runtime_error("load_adam_state: short theta line in " + path);
      }
    } else {
      if (idx >= dst->biases.size()) throw std::runtime_error("load_adam_state: gamma index out of range");
      if (!(is >> dst->biases[idx])) throw std::runtime_error("load_adam_state: short gamma line in " + path);
    }
  }
  return st;
}

}  // namespace lwpt
