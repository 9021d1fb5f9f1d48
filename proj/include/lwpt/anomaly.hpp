#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lwpt/model.hpp"
#include "lwpt/signal.hpp"

namespace lwpt {

// (mean|r|, max|r|) of the reconstruction residual followed by the same
// pair for each frequency-ordered leaf band: 2 * (2^L + 1) values.
std::vector<double> extract_features(const Signal& s, const ModelParams& p);

// One-class ELM: frozen uniform(-1,1) hidden layer, sigmoid activation,
// ridge-solved output weights regressing the healthy class to 1.
struct ElmModel {
  std::vector<std::vector<double>> hidden_w;  // n_hidden x dim
  std::vector<double> hidden_b;               // n_hidden
  std::vector<double> output_w;               // n_hidden
  std::vector<double> feat_mean;              // standardization, dim
  std::vector<double> feat_std;
  double lambda = 1e-3;
};

ElmModel elm_fit(const std::vector<std::vector<double>>& healthy_rows, int n_hidden,
                 double lambda, std::uint64_t seed);

// Deviation from the healthy target: |h(f) . w - 1|. Higher = more anomalous.
double elm_score(const ElmModel& m, const std::vector<double>& features);

struct AucResult {
  double auc = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

// P(anomalous score > healthy score), ties counted 1/2 (Mann-Whitney).
AucResult auc(const std::vector<double>& scores_pos, const std::vector<double>& scores_neg);

struct AnomalyConfig {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  int n_hidden = 100;
  double lambda = 1e-3;
  std::size_t segment_len = 0;  // 0 = one feature vector per clip
  int channel = 0;              // WAV channel; -1 mixes to the mean
  int threads = 1;
};

struct ScoredClip {
  std::string path;
  std::string split;  // "train", "test"
  int label = 0;      // 0 healthy, 1 anomalous
  double score = 0.0;
};

struct AnomalyResult {
  AucResult auc;
  ElmModel elm;
  std::vector<ScoredClip> scores;
  std::size_t skipped_files = 0;
};

// Ingest healthy/anomalous clips (directory of WAVs, a WAV, or a corpus
// file), fit the ELM on a seeded healthy split, score the rest.
AnomalyResult run_anomaly_eval(const std::string& healthy_path,
                               const std::string& anomalous_path,
                               const ModelParams& model, const AnomalyConfig& cfg);

void export_scores_csv(const std::string& path, const std::vector<ScoredClip>& scores);
void save_elm(const std::string& path, const ElmModel& m);
ElmModel load_elm(const std::string& path);

}  // namespace lwpt
