// lwpt: command-line front end for the learnable wavelet packet toolkit.
//
// Subcommands: gen, train, transform, leakage, anomaly, gradcheck. Every
// command echoes its effective configuration to stdout and writes the same
// text (plus a timestamp) to a .cfg sidecar next to each output file, so
// output files themselves stay byte-reproducible for a fixed seed.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lwpt/anomaly.hpp"
#include "lwpt/filterbank.hpp"
#include "lwpt/leakage.hpp"
#include "lwpt/model.hpp"
#include "lwpt/rng.hpp"
#include "lwpt/signal.hpp"
#include "lwpt/trainer.hpp"

namespace {

struct ConfigEcho {
  std::vector<std::pair<std::string, std::string>> entries;

  void add(const std::string& key, const std::string& value) { entries.emplace_back(key, value); }
  void add(const std::string& key, double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    entries.emplace_back(key, buf);
  }
  void add(const std::string& key, long long value) { entries.emplace_back(key, std::to_string(value)); }

  std::string text(const std::string& command) const {
    std::ostringstream os;
    os << "command=" << command << "\n";
    for (const auto& [k, v] : entries) os << k << "=" << v << "\n";
    return os.str();
  }

  void emit(const std::string& command, const std::vector<std::string>& outputs) const {
    std::string body = text(command);
    std::cout << body;
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[64];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    for (const auto& out : outputs) {
      std::ofstream os(out + ".cfg");
      os << body << "timestamp=" << stamp << "\n";
    }
  }
};

lwpt::ModelParams load_model_or_wavelet(const std::string& model_path, const std::string& wavelet,
                                        int levels) {
  if (!model_path.empty()) return lwpt::load_model(model_path);
  return lwpt::ModelParams::init(levels, lwpt::wavelet_constants(wavelet), 0.0);
}

std::vector<double> parse_betas(const std::string& list) {
  std::vector<double> betas;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) betas.push_back(std::stod(item));
  }
  if (betas.empty()) throw std::invalid_argument("leakage: empty beta list");
  return betas;
}

lwpt::Signal load_input_signal(const std::string& path, int channel = 0) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".wav") {
    return lwpt::read_wav(path, channel);
  }
  auto corpus = lwpt::load_corpus(path);
  return corpus.front();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learnable wavelet packet transform toolkit"};
  app.require_subcommand(1);

  try {
    // ---- gen ----------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "Generate synthetic signals");
    gen->require_subcommand(1);

    auto* gen_fsc_cmd = gen->add_subcommand("fsc", "Frequency-swept cosine");
    double fsc_duration = 10.0, fsc_rate = 8192.0, fsc_beta = 0.0;
    std::uint64_t fsc_seed = 0;
    std::string fsc_out;
    gen_fsc_cmd->add_option("--duration", fsc_duration, "duration in seconds");
    gen_fsc_cmd->add_option("--rate", fsc_rate, "sample rate in Hz");
    gen_fsc_cmd->add_option("--beta", fsc_beta, "noise level");
    gen_fsc_cmd->add_option("--seed", fsc_seed, "noise seed");
    gen_fsc_cmd->add_option("--out", fsc_out, "output corpus file")->required();
    gen_fsc_cmd->callback([&] {
      lwpt::ChirpSpec spec{fsc_duration, fsc_rate, fsc_beta, fsc_seed};
      lwpt::save_corpus(fsc_out, {lwpt::gen_fsc(spec)});
      ConfigEcho echo;
      echo.add("duration", fsc_duration);
      echo.add("rate", fsc_rate);
      echo.add("beta", fsc_beta);
      echo.add("seed", static_cast<long long>(fsc_seed));
      echo.add("out", fsc_out);
      echo.emit("gen fsc", {fsc_out});
    });

    auto* gen_cos = gen->add_subcommand("cosines", "Noisy cosine corpus");
    std::uint64_t cos_count = 1000, cos_seed = 0;
    std::size_t cos_length = 256;
    double cos_noise = 1.0;
    int cos_levels = 5, cos_threads = 1;
    std::string cos_out;
    gen_cos->add_option("--count", cos_count, "number of signals");
    gen_cos->add_option("--length", cos_length, "samples per signal");
    gen_cos->add_option("--noise", cos_noise, "noise std-dev");
    gen_cos->add_option("--seed", cos_seed, "corpus seed");
    gen_cos->add_option("--levels", cos_levels, "levels the corpus must support");
    gen_cos->add_option("--threads", cos_threads, "worker threads");
    gen_cos->add_option("--out", cos_out, "output corpus file")->required();
    gen_cos->callback([&] {
      if (cos_length % (std::size_t{1} << cos_levels) != 0) {
        throw std::invalid_argument("gen cosines: length must be a multiple of 2^levels");
      }
      lwpt::CosineCorpusSpec spec{cos_count, cos_length, cos_noise, cos_seed};
      lwpt::save_corpus(cos_out, lwpt::gen_cosine_corpus(spec, cos_threads));
      ConfigEcho echo;
      echo.add("count", static_cast<long long>(cos_count));
      echo.add("length", static_cast<long long>(cos_length));
      echo.add("noise", cos_noise);
      echo.add("seed", static_cast<long long>(cos_seed));
      echo.add("levels", static_cast<long long>(cos_levels));
      echo.add("threads", static_cast<long long>(cos_threads));
      echo.add("out", cos_out);
      echo.emit("gen cosines", {cos_out});
    });

    // ---- train --------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "Train an L-WPT model");
    std::string train_corpus, train_out, train_loss_csv, train_opt_out;
    lwpt::TrainConfig cfg;
    train_cmd->add_option("--corpus", train_corpus, "training corpus file")->required();
    train_cmd->add_option("--out", train_out, "output model file")->required();
    train_cmd->add_option("--loss-csv", train_loss_csv, "per-epoch loss CSV");
    train_cmd->add_option("--optimizer-out", train_opt_out, "optimizer state sidecar");
    train_cmd->add_option("--epochs", cfg.epochs, "training epochs");
    train_cmd->add_option("--batch", cfg.batch_size, "mini-batch size");
    train_cmd->add_option("--alpha", cfg.alpha, "sparsity weight");
    train_cmd->add_option("--levels", cfg.levels, "decomposition levels");
    train_cmd->add_option("--seed", cfg.seed, "shuffle seed");
    train_cmd->add_option("--init-wavelet", cfg.init_wavelet, "filter initialization");
    train_cmd->add_option("--init-bias", cfg.init_bias, "threshold initialization");
    train_cmd->add_option("--lr", cfg.lr, "Adam learning rate");
    train_cmd->add_option("--threads", cfg.threads, "worker threads");
    train_cmd->callback([&] {
      auto corpus = lwpt::load_corpus(train_corpus);
      lwpt::TrainResult result = lwpt::train(corpus, cfg);
      lwpt::save_model(train_out, result.params);
      std::vector<std::string> outputs = {train_out};
      if (!train_loss_csv.empty()) {
        lwpt::export_loss_csv(train_loss_csv, result.history);
        outputs.push_back(train_loss_csv);
      }
      if (!train_opt_out.empty()) {
        lwpt::save_adam_state(train_opt_out, result.opt);
        outputs.push_back(train_opt_out);
      }
      ConfigEcho echo;
      echo.add("corpus", train_corpus);
      echo.add("epochs", static_cast<long long>(cfg.epochs));
      echo.add("batch", static_cast<long long>(cfg.batch_size));
      echo.add("alpha", cfg.alpha);
      echo.add("levels", static_cast<long long>(cfg.levels));
      echo.add("seed", static_cast<long long>(cfg.seed));
      echo.add("init_wavelet", cfg.init_wavelet);
      echo.add("init_bias", cfg.init_bias);
      echo.add("lr", cfg.lr);
      echo.add("threads", static_cast<long long>(cfg.threads));
      echo.add("out", train_out);
      if (!result.history.empty()) {
        echo.add("initial_mean_loss", result.history.front().mean_loss);
        echo.add("final_mean_loss", result.history.back().mean_loss);
      }
      echo.emit("train", outputs);
    });

    // ---- transform ----------------------------------------------------
    auto* transform = app.add_subcommand("transform", "Spectrogram of a signal");
    std::string tr_model, tr_wavelet = "db4", tr_input, tr_out, tr_mode = "linear";
    int tr_levels = 5, tr_channel = 0;
    transform->add_option("--model", tr_model, "trained model file");
    transform->add_option("--wavelet", tr_wavelet, "fixed wavelet (haar, db4, db23)");
    transform->add_option("--levels", tr_levels, "levels for fixed-wavelet transform");
    transform->add_option("--input", tr_input, "input signal (corpus file or WAV)")->required();
    transform->add_option("--channel", tr_channel, "WAV channel (-1 = mean of channels)");
    transform->add_option("--mode", tr_mode, "linear or db_percent")->check(CLI::IsMember({"linear", "db_percent"}));
    transform->add_option("--out", tr_out, "output CSV")->required();
    transform->callback([&] {
      lwpt::ModelParams model = load_model_or_wavelet(tr_model, tr_wavelet, tr_levels);
      lwpt::Signal input = load_input_signal(tr_input, tr_channel);
      const std::size_t block = std::size_t{1} << model.levels;
      if (input.size() % block != 0) {
        throw std::invalid_argument("transform: input length must be a multiple of 2^levels");
      }
      lwpt::SpectrogramGrid grid = lwpt::spectrogram(lwpt::lwpt_forward(input, model));
      lwpt::export_heatmap(grid, tr_out,
                           tr_mode == "linear" ? lwpt::HeatmapMode::linear : lwpt::HeatmapMode::db_percent);
      ConfigEcho echo;
      echo.add("model", tr_model.empty() ? "(wavelet:" + tr_wavelet + ")" : tr_model);
      echo.add("levels", static_cast<long long>(model.levels));
      echo.add("input", tr_input);
      echo.add("channel", static_cast<long long>(tr_channel));
      echo.add("mode", tr_mode);
      echo.add("out", tr_out);
      echo.emit("transform", {tr_out});
    });

    // ---- leakage ------------------------------------------------------
    auto* leakage = app.add_subcommand("leakage", "Spectral-leakage RSS sweep");
    std::string lk_model, lk_wavelet = "db4", lk_out, lk_betas = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1,1.1,1.2,1.3,1.4,1.5,1.6,1.7,1.8,1.9,2";
    int lk_levels = 5, lk_trials = 100, lk_threads = 1;
    double lk_duration = 10.0, lk_rate = 8192.0;
    std::uint64_t lk_seed = 0;
    leakage->add_option("--model", lk_model, "trained model file");
    leakage->add_option("--wavelet", lk_wavelet, "fixed wavelet");
    leakage->add_option("--levels", lk_levels, "levels");
    leakage->add_option("--betas", lk_betas, "comma-separated noise levels");
    leakage->add_option("--trials", lk_trials, "chirp realizations per beta");
    leakage->add_option("--duration", lk_duration, "chirp duration (s)");
    leakage->add_option("--rate", lk_rate, "chirp sample rate (Hz)");
    leakage->add_option("--seed", lk_seed, "trial seed");
    leakage->add_option("--threads", lk_threads, "worker threads");
    leakage->add_option("--out", lk_out, "output report CSV")->required();
    leakage->callback([&] {
      lwpt::IdealGridSpec spec{lk_levels, lk_duration, lk_rate};
      std::vector<double> betas = parse_betas(lk_betas);
      lwpt::RssReport report;
      if (!lk_model.empty()) {
        lwpt::ModelParams model = lwpt::load_model(lk_model);
        report = lwpt::run_leakage_sweep(model, spec, betas, lk_trials, lk_seed, lk_threads);
      } else {
        lwpt::Kernel h = lwpt::wavelet_constants(lk_wavelet);
        report = lwpt::run_leakage_sweep(h, spec, betas, lk_trials, lk_seed, lk_threads);
        report.method = "wpt-" + lk_wavelet;
      }
      lwpt::export_rss_report(report, lk_out);
      ConfigEcho echo;
      echo.add("method", report.method);
      echo.add("levels", static_cast<long long>(lk_levels));
      echo.add("betas", lk_betas);
      echo.add("trials", static_cast<long long>(lk_trials));
      echo.add("duration", lk_duration);
      echo.add("rate", lk_rate);
      echo.add("seed", static_cast<long long>(lk_seed));
      echo.add("threads", static_cast<long long>(lk_threads));
      echo.add("out", lk_out);
      echo.emit("leakage", {lk_out});
    });

    // ---- anomaly ------------------------------------------------------
    auto* anomaly = app.add_subcommand("anomaly", "One-class anomaly evaluation");
    std::string an_healthy, an_anomalous, an_model, an_out, an_elm_out;
    lwpt::AnomalyConfig an_cfg;
    anomaly->add_option("--healthy", an_healthy, "healthy clips (dir, WAV, or corpus)")->required();
    anomaly->add_option("--anomalous", an_anomalous, "anomalous clips")->required();
    anomaly->add_option("--model", an_model, "trained model file")->required();
    anomaly->add_option("--out", an_out, "scores CSV")->required();
    anomaly->add_option("--elm-out", an_elm_out, "fitted ELM model file");
    anomaly->add_option("--train-frac", an_cfg.train_fraction, "healthy train fraction");
    anomaly->add_option("--seed", an_cfg.seed, "split/ELM seed");
    anomaly->add_option("--hidden", an_cfg.n_hidden, "ELM hidden units");
    anomaly->add_option("--lambda", an_cfg.lambda, "ridge strength");
    anomaly->add_option("--segment", an_cfg.segment_len, "segment length (0 = whole clip)");
    anomaly->add_option("--channel", an_cfg.channel, "WAV channel (-1 = mean of channels)");
    anomaly->add_option("--threads", an_cfg.threads, "worker threads");
    anomaly->callback([&] {
      lwpt::ModelParams model = lwpt::load_model(an_model);
      lwpt::AnomalyResult result = lwpt::run_anomaly_eval(an_healthy, an_anomalous, model, an_cfg);
      lwpt::export_scores_csv(an_out, result.scores);
      std::vector<std::string> outputs = {an_out};
      if (!an_elm_out.empty()) {
        lwpt::save_elm(an_elm_out, result.elm);
        outputs.push_back(an_elm_out);
      }
      ConfigEcho echo;
      echo.add("healthy", an_healthy);
      echo.add("anomalous", an_anomalous);
      echo.add("model", an_model);
      echo.add("train_frac", an_cfg.train_fraction);
      echo.add("seed", static_cast<long long>(an_cfg.seed));
      echo.add("hidden", static_cast<long long>(an_cfg.n_hidden));
      echo.add("lambda", an_cfg.lambda);
      echo.add("segment", static_cast<long long>(an_cfg.segment_len));
      echo.add("channel", static_cast<long long>(an_cfg.channel));
      echo.add("threads", static_cast<long long>(an_cfg.threads));
      echo.add("out", an_out);
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.6f", result.auc.auc);
      echo.add("auc", std::string(buf));
      echo.add("positives", static_cast<long long>(result.auc.positives));
      echo.add("negatives", static_cast<long long>(result.auc.negatives));
      echo.add("skipped_files", static_cast<long long>(result.skipped_files));
      echo.emit("anomaly", outputs);
      std::cout << "AUC " << buf << "\n";
    });

    // ---- gradcheck ----------------------------------------------------
    auto* gradcheck = app.add_subcommand("gradcheck", "Verify analytic gradients");
    int gc_levels = 3;
    std::size_t gc_length = 64;
    std::uint64_t gc_seed = 0;
    double gc_alpha = 1.0, gc_step = 1e-6, gc_tol = 1e-5;
    std::string gc_wavelet = "db4";
    gradcheck->add_option("--levels", gc_levels, "model levels");
    gradcheck->add_option("--length", gc_length, "test signal length");
    gradcheck->add_option("--seed", gc_seed, "randomization seed");
    gradcheck->add_option("--alpha", gc_alpha, "sparsity weight");
    gradcheck->add_option("--step", gc_step, "finite-difference step");
    gradcheck->add_option("--tol", gc_tol, "max relative error tolerance");
    gradcheck->add_option("--wavelet", gc_wavelet, "base wavelet for the random model");
    gradcheck->callback([&] {
      if (gc_length % (std::size_t{1} << gc_levels) != 0) {
        throw std::invalid_argument("gradcheck: length must be a multiple of 2^levels");
      }
      lwpt::Rng rng(gc_seed);
      lwpt::ModelParams model =
          lwpt::ModelParams::init(gc_levels, lwpt::wavelet_constants(gc_wavelet), 0.0);
      for (auto& f : model.filters) {
        for (double& c : f.coeffs) c += 0.2 * rng.uniform(-1.0, 1.0);
      }
      for (double& b : model.biases) b = rng.uniform(0.05, 0.5);
      lwpt::Signal s;
      s.samples.resize(gc_length);
      for (double& v : s.samples) v = rng.normal();
      lwpt::GradCheckReport report = lwpt::grad_check(model, s, gc_alpha, gc_step, gc_tol);
      ConfigEcho echo;
      echo.add("levels", static_cast<long long>(gc_levels));
      echo.add("length", static_cast<long long>(gc_length));
      echo.add("seed", static_cast<long long>(gc_seed));
      echo.add("alpha", gc_alpha);
      echo.add("step", gc_step);
      echo.add("tol", gc_tol);
      echo.add("params_checked", static_cast<long long>(report.params_checked));
      echo.add("max_rel_err", report.max_rel_err);
      echo.emit("gradcheck", {});
      if (report.max_rel_err > gc_tol) {
        throw std::runtime_error("gradcheck: max relative error exceeds tolerance");
      }
    });

    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "LWPT_ERROR: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
