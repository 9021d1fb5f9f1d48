#include "lwpt/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "lwpt/parallel.hpp"
#include "lwpt/rng.hpp"

namespace lwpt {

namespace {

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

void band_stats(const std::vector<double>& v, double& mean_abs, double& max_abs) {
  mean_abs = 0.0;
  max_abs = 0.0;
  for (double x : v) {
    double a = std::abs(x);
    mean_abs += a;
    max_abs = std::max(max_abs, a);
  }
  if (!v.empty()) mean_abs /= static_cast<double>(v.size());
}

}  // namespace

std::vector<double> extract_features(const Signal& s, const ModelParams& p) {
  WptCoeffs leaves = lwpt_forward(s, p);
  Signal s_hat = lwpt_inverse(leaves, p);

  std::vector<double> residual(s.size());
  for (std::size_t n = 0; n < s.size(); ++n) residual[n] = s.samples[n] - s_hat.samples[n];

  std::vector<double> features;
  features.reserve(2 * (leaves.nodes.size() + 1));
  double mean_abs = 0.0, max_abs = 0.0;
  band_stats(residual, mean_abs, max_abs);
  features.push_back(mean_abs);
  features.push_back(max_abs);
  for (std::size_t r = 0; r < leaves.nodes.size(); ++r) {
    band_stats(leaves.nodes[gray_code(r)], mean_abs, max_abs);
    features.push_back(mean_abs);
    features.push_back(max_abs);
  }
  return features;
}

ElmModel elm_fit(const std::vector<std::vector<double>>& healthy_rows, int n_hidden, double lambda,
                 std::uint64_t seed) {
  if (healthy_rows.empty()) throw std::invalid_argument("elm_fit: no training rows");
  if (n_hidden < 1) throw std::invalid_argument("elm_fit: n_hidden must be >= 1");
  if (lambda <= 0) throw std::invalid_argument("elm_fit: lambda must be > 0");
  const std::size_t dim = healthy_rows.front().size();
  for (const auto& row : healthy_rows) {
    if (row.size() != dim) throw std::invalid_argument("elm_fit: inconsistent feature dimension");
    for (double v : row) {
      if (!std::isfinite(v)) throw std::invalid_argument("elm_fit: non-finite feature value");
    }
  }

  ElmModel m;
  m.lambda = lambda;

  // per-dimension z-score statistics from the healthy training set
  m.feat_mean.assign(dim, 0.0);
  m.feat_std.assign(dim, 0.0);
  for (const auto& row : healthy_rows) {
    for (std::size_t d = 0; d < dim; ++d) m.feat_mean[d] += row[d];
  }
  for (double& v : m.feat_mean) v /= static_cast<double>(healthy_rows.size());
  for (const auto& row : healthy_rows) {
    for (std::size_t d = 0; d < dim; ++d) {
      double c = row[d] - m.feat_mean[d];
      m.feat_std[d] += c * c;
    }
  }
  for (double& v : m.feat_std) {
    v = std::sqrt(v / static_cast<double>(healthy_rows.size()));
    if (v < 1e-12) v = 1.0;  // constant feature, leave it centered
  }

  const auto nh = static_cast<std::size_t>(n_hidden);
  Rng rng(seed);
  m.hidden_w.assign(nh, std::vector<double>(dim));
  m.hidden_b.assign(nh, 0.0);
  for (auto& row : m.hidden_w) {
    for (double& w : row) w = rng.uniform(-1.0, 1.0);
  }
  for (double& b : m.hidden_b) b = rng.uniform(-1.0, 1.0);

  // H = sigmoid(X W^T + b); solve (H^T H + lambda I) w = H^T 1
  const std::size_t n = healthy_rows.size();
  std::vector<std::vector<double>> h(n, std::vector<double>(nh));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < nh; ++j) {
      double acc = m.hidden_b[j];
      for (std::size_t d = 0; d < dim; ++d) {
        acc += m.hidden_w[j][d] * (healthy_rows[r][d] - m.feat_mean[d]) / m.feat_std[d];
      }
      h[r][j] = sigmoid(acc);
    }
  }

  // mean-normalized normal equations so the fit is invariant to duplicating
  // the training set: (H^T H / n + lambda I) w = H^T 1 / n
  std::vector<std::vector<double>> gram(nh, std::vector<double>(nh, 0.0));
  std::vector<double> rhs(nh, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < nh; ++j) {
      rhs[j] += h[r][j];
      for (std::size_t k = j; k < nh; ++k) gram[j][k] += h[r][j] * h[r][k];
    }
  }
  const auto inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < nh; ++j) {
    rhs[j] *= inv_n;
    for (std::size_t k = j; k < nh; ++k) gram[j][k] *= inv_n;
    gram[j][j] += lambda;
    for (std::size_t k = 0; k < j; ++k) gram[j][k] = gram[k][j];
  }

  // Cholesky solve; the ridge term keeps the system positive definite
  std::vector<std::vector<double>> chol(nh, std::vector<double>(nh, 0.0));
  for (std::size_t j = 0; j < nh; ++j) {
    for (std::size_t k = 0; k <= j; ++k) {
      double acc = gram[j][k];
      for (std::size_t t = 0; t < k; ++t) acc -= chol[j][t] * chol[k][t];
      if (j == k) {
        if (acc <= 0) throw std::runtime_error("elm_fit: ridge system not positive definite");
        chol[j][j] = std::sqrt(acc);
      } else {
        chol[j][k] = acc / chol[k][k];
      }
    }
  }
  std::vector<double> y(nh);
  for (std::size_t j = 0; j < nh; ++j) {
    double acc = rhs[j];
    for (std::size_t t = 0; t < j; ++t) acc -= chol[j][t] * y[t];
    y[j] = acc / chol[j][j];
  }
  m.output_w.assign(nh, 0.0);
  for (std::size_t j = nh; j-- > 0;) {
    double acc = y[j];
    for (std::size_t t = j + 1; t < nh; ++t) acc -= chol[t][j] * m.output_w[t];
    m.output_w[j] = acc / chol[j][j];
  }
  return m;
}

double elm_score(const ElmModel& m, const std::vector<double>& features) {
  if (features.size() != m.feat_mean.size()) {
    throw std::invalid_argument("elm_score: feature dimension mismatch");
  }
  double out = 0.0;
  for (std::size_t j = 0; j < m.hidden_w.size(); ++j) {
    double acc = m.hidden_b[j];
    for (std::size_t d = 0; d < features.size(); ++d) {
      acc += m.hidden_w[j][d] * (features[d] - m.feat_mean[d]) / m.feat_std[d];
    }
    out += sigmoid(acc) * m.output_w[j];
  }
  return std::abs(out - 1.0);
}

AucResult auc(const std::vector<double>& scores_pos, const std::vector<double>& scores_neg) {
  if (scores_pos.empty() || scores_neg.empty()) {
    throw std::invalid_argument("auc: both classes must be non-empty");
  }
  struct Entry {
    double score;
    bool positive;
  };
  std::vector<Entry> all;
  all.reserve(scores_pos.size() + scores_neg.size());
  for (double v : scores_pos) all.push_back({v, true});
  for (double v : scores_neg) all.push_back({v, false});
  std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.score < b.score; });

  // midrank sum over positives (Mann-Whitney with ties counted 1/2)
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j].score == all[i].score) ++j;
    double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));  // 1-based
    for (std::size_t t = i; t < j; ++t) {
      if (all[t].positive) rank_sum_pos += midrank;
    }
    i = j;
  }
  const auto np = static_cast<double>(scores_pos.size());
  const auto nn = static_cast<double>(scores_neg.size());
  double u = rank_sum_pos - np * (np + 1.0) / 2.0;
  AucResult result;
  result.auc = u / (np * nn);
  result.positives = scores_pos.size();
  result.negatives = scores_neg.size();
  return result;
}

namespace {

struct Clip {
  std::string path;
  Signal signal;
};

std::vector<Clip> load_clips(const std::string& path, int channel, std::size_t* skipped) {
  namespace fs = std::filesystem;
  std::vector<Clip> clips;
  if (fs::is_directory(path)) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".wav") {
        files.push_back(entry.path().string());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      try {
        clips.push_back({f, read_wav(f, channel)});
      } catch (const std::exception&) {
        ++*skipped;
      }
    }
  } else if (fs::is_regular_file(path)) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".wav") {
      clips.push_back({path, read_wav(path, channel)});
    } else {
      auto signals = load_corpus(path);
      for (std::size_t i = 0; i < signals.size(); ++i) {
        clips.push_back({path + "#" + std::to_string(i), std::move(signals[i])});
      }
    }
  } else {
    throw std::runtime_error("anomaly: no such file or directory: " + path);
  }
  if (clips.empty()) throw std::runtime_error("anomaly: no usable clips under " + path);
  return clips;
}

// one feature row per segment; per-clip trims to the largest transformable prefix
std::vector<std::vector<double>> clip_features(const Clip& clip, const ModelParams& p,
                                               std::size_t segment_len) {
  const std::size_t block = std::size_t{1} << p.levels;
  std::vector<std::vector<double>> rows;
  if (segment_len == 0) {
    std::size_t usable = (clip.signal.size() / block) * block;
    if (usable == 0) return rows;
    Signal trimmed;
    trimmed.sample_rate = clip.signal.sample_rate;
    trimmed.samples.assign(clip.signal.samples.begin(),
                           clip.signal.samples.begin() + static_cast<std::ptrdiff_t>(usable));
    rows.push_back(extract_features(trimmed, p));
  } else {
    for (const auto& seg : segment(clip.signal, segment_len, segment_len)) {
      rows.push_back(extract_features(seg, p));
    }
  }
  return rows;
}

}  // namespace

AnomalyResult run_anomaly_eval(const std::string& healthy_path, const std::string& anomalous_path,
                               const ModelParams& model, const AnomalyConfig& cfg) {
  if (cfg.train_fraction <= 0.0 || cfg.train_fraction >= 1.0) {
    throw std::invalid_argument("anomaly: train_fraction must be in (0, 1)");
  }
  if (cfg.segment_len != 0 && cfg.segment_len % (std::size_t{1} << model.levels) != 0) {
    throw std::invalid_argument("anomaly: segment_len must be a multiple of 2^levels");
  }

  AnomalyResult result;
  std::vector<Clip> healthy = load_clips(healthy_path, cfg.channel, &result.skipped_files);
  std::vector<Clip> anomalous = load_clips(anomalous_path, cfg.channel, &result.skipped_files);

  // per-clip feature rows, extracted in parallel but consumed in index order
  std::vector<std::vector<std::vector<double>>> healthy_rows(healthy.size());
  std::vector<std::vector<std::vector<double>>> anomalous_rows(anomalous.size());
  parallel_for(healthy.size() + anomalous.size(), cfg.threads, [&](std::size_t i) {
    if (i < healthy.size()) {
      healthy_rows[i] = clip_features(healthy[i], model, cfg.segment_len);
    } else {
      anomalous_rows[i - healthy.size()] = clip_features(anomalous[i - healthy.size()], model, cfg.segment_len);
    }
  });

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < healthy.size(); ++i) {
    if (!healthy_rows[i].empty()) order.push_back(i);
  }
  result.skipped_files += healthy.size() - order.size();
  if (order.size() < 2) throw std::runtime_error("anomaly: need at least 2 usable healthy clips");

  Rng split_rng = Rng::stream(cfg.seed, 0x53504C4954ULL);  // split stream
  for (std::size_t i = order.size(); i > 1; --i) {
    std::size_t j = split_rng.below(i);
    std::swap(order[i - 1], order[j]);
  }
  std::size_t n_train = static_cast<std::size_t>(cfg.train_fraction * static_cast<double>(order.size()));
  n_train = std::max<std::size_t>(1, std::min(n_train, order.size() - 1));

  std::vector<std::vector<double>> train_rows;
  for (std::size_t t = 0; t < n_train; ++t) {
    for (const auto& row : healthy_rows[order[t]]) train_rows.push_back(row);
  }
  result.elm = elm_fit(train_rows, cfg.n_hidden, cfg.lambda, cfg.seed ^ 0x454C4DULL);

  auto clip_score = [&](const std::vector<std::vector<double>>& rows) {
    double best = 0.0;
    for (const auto& row : rows) best = std::max(best, elm_score(result.elm, row));
    return best;  // anomalies are often transient: max over segments
  };

  std::vector<double> healthy_test_scores, anomalous_scores;
  std::vector<bool> in_train(healthy.size(), false);
  for (std::size_t t = 0; t < n_train; ++t) in_train[order[t]] = true;

  for (std::size_t i = 0; i < healthy.size(); ++i) {
    if (healthy_rows[i].empty()) continue;
    double score = clip_score(healthy_rows[i]);
    bool train_clip = in_train[i];
    if (!train_clip) healthy_test_scores.push_back(score);
    result.scores.push_back({healthy[i].path, train_clip ? "train" : "test", 0, score});
  }
  std::size_t usable_anomalous = 0;
  for (std::size_t i = 0; i < anomalous.size(); ++i) {
    if (anomalous_rows[i].empty()) {
      ++result.skipped_files;
      continue;
    }
    ++usable_anomalous;
    double score = clip_score(anomalous_rows[i]);
    anomalous_scores.push_back(score);
    result.scores.push_back({anomalous[i].path, "test", 1, score});
  }
  if (healthy_test_scores.empty() || anomalous_scores.empty()) {
    throw std::runtime_error("anomaly: empty evaluation class after split");
  }
  result.auc = auc(anomalous_scores, healthy_test_scores);
  return result;
}

void export_scores_csv(const std::string& path, const std::vector<ScoredClip>& scores) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("export_scores_csv: cannot open " + path);
  os << "path,split,label,score\n";
  char buf[64];
  for (const auto& row : scores) {
    std::snprintf(buf, sizeof(buf), "%.17g", row.score);
    os << row.path << "," << row.split << "," << row.label << "," << buf << "\n";
  }
  if (!os) throw std::runtime_error("export_scores_csv: write failed for " + path);
}

void save_elm(const std::string& path, const ElmModel& m) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_elm: cannot open " + path);
  os << "LWPTELM v1 H=" << m.hidden_w.size() << " D=" << m.feat_mean.size() << " lambda=";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", m.lambda);
  os << buf << "\n";
  auto dump_vec = [&](const char* tag, const std::vector<double>& v) {
    os << tag;
    for (double x : v) {
      std::snprintf(buf, sizeof(buf), "%.17g", x);
      os << " " << buf;
    }
    os << "\n";
  };
  for (std::size_t j = 0; j < m.hidden_w.size(); ++j) {
    dump_vec(("w " + std::to_string(j)).c_str(), m.hidden_w[j]);
  }
  dump_vec("b", m.hidden_b);
  dump_vec("beta", m.output_w);
  dump_vec("mean", m.feat_mean);
  dump_vec("std", m.feat_std);
  if (!os) throw std::runtime_error("save_elm: write failed for " + path);
}

ElmModel load_elm(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_elm: cannot open " + path);
  std::size_t n_hidden = 0, dim = 0;
  ElmModel m;
  std::string header;
  std::getline(is, header);
  if (std::sscanf(header.c_str(), "LWPTELM v1 H=%zu D=%zu lambda=%lf", &n_hidden, &dim,
                  &m.lambda) != 3 || n_hidden == 0 || dim == 0) {
    throw std::runtime_error("load_elm: bad header in " + path);
  }
  m.hidden_w.assign(n_hidden, std::vector<double>(dim));
  m.hidden_b.assign(n_hidden, 0.0);
  m.output_w.assign(n_hidden, 0.0);
  m.feat_mean.assign(dim, 0.0);
  m.feat_std.assign(dim, 0.0);

  std::string tag;
  while (is >> tag) {
    if (tag == "w") {
      std::size_t j;
      if (!(is >> j) || j >= n_hidden) throw std::runtime_error("load_elm: bad w row in " + path);
      for (auto& v : m.hidden_w[j]) {
        if (!(is >> v)) throw std::runtime_error("load_elm: short w row in " + path);
      }
    } else {
      std::vector<double>* dst = nullptr;
      if (tag == "b") dst = &m.hidden_b;
      else if (tag == "beta") dst = &m.output_w;
      else if (tag == "mean") dst = &m.feat_mean;
      else if (tag == "std") dst = &m.feat_std;
      else throw std::runtime_error("load_elm: unknown tag '" + tag + "' in " + path);
      for (auto& v : *dst) {
        if (!(is >> v)) throw std::runtime_error("load_elm: short " + tag + " row in " + path);
      }
    }
  }
  return m;
}

}  // namespace lwpt
