// experiments.hpp - training loop, evaluation, and the scripted experiment
// grids (velocity sweep, noise robustness, few-shot, generalization,
// ablations, cost report).

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "amc/channel.hpp"
#include "amc/engine.hpp"
#include "amc/layers.hpp"
#include "amc/predictors.hpp"

namespace amc::exp {

struct TrainConfig {
    std::size_t batch = 64;
    std::size_t epochs = 50;
    nn::AdamConfig adam;  // lr 1e-3, betas (0.9, 0.999)
    std::uint64_t seed = 1;
    // cosine decay of the learning rate down to lr * lr_floor_fraction
    bool cosine_lr = true;
    double lr_floor_fraction = 0.1;
    bool augment_noise = true;
    double noise_snr_low_db = 15.0;
    double noise_snr_high_db = 25.0;
    double subsample_fraction = 1.0;  // few-shot uses 0.1

    void validate() const;
};

struct TrainResult {
    std::vector<double> train_curve_nmse_db;  // per epoch
    std::vector<double> val_curve_nmse_db;
    double best_val_nmse_db = 0.0;
    std::size_t best_epoch = 0;
};

// Adam minimization of batch-mean NMSE on dB SINR; per-sample measurement
// noise injected at an SNR drawn uniformly from the configured range. The
// best-validation parameters are restored into the model on return.
TrainResult train(pred::TrainablePredictor& model, const chan::Dataset& train_set,
                  const chan::Dataset& val_set, const TrainConfig& config);

// Pooled NMSE ratio (sum of squared errors over sum of squared truths) over a
// dataset; optional test-time measurement noise at the given SNR.
double eval_nmse(pred::Predictor& model, const chan::Dataset& test_set,
                 std::uint64_t noise_seed = 0, const double* noise_snr_db = nullptr);

struct VelocityEval {
    double velocity_kmh = 0.0;
    double nmse_db = 0.0;
    engine::LinkSummary link;
};

struct EvalSets {
    std::map<double, chan::Dataset> pairs_by_velocity;       // NMSE metric
    std::map<double, std::vector<chan::SinrTrace>> traces_by_velocity;  // link metric
};

EvalSets build_eval_sets(const chan::DatasetConfig& data, const std::vector<double>& velocities,
                         std::size_t samples_per_velocity, std::size_t traces_per_velocity,
                         std::size_t trace_len, std::uint64_t seed);

std::vector<VelocityEval> evaluate(pred::Predictor& model, const EvalSets& sets,
                                   const engine::TimingConfig& timing,
                                   const link::LinkConfig& linkcfg, std::uint64_t seed,
                                   const engine::RunOptions& options = {});

// ---- experiment grids -------------------------------------------------------

enum class ExperimentKind {
    VelocitySweep,
    NoiseRobustness,
    FewShot,
    Generalization,
    AblationModules,
    AblationDataScale,
    AblationFinetune,
    CostReport,
};

ExperimentKind experiment_from_string(const std::string& name);
std::string to_string(ExperimentKind kind);

struct ExperimentConfig {
    chan::DatasetConfig data;
    engine::TimingConfig timing;
    link::LinkConfig link = link::LinkConfig::defaults();
    pred::ModelConfig model;
    TrainConfig train;
    std::vector<double> velocities = {40, 50, 60, 70, 80, 90, 100};
    std::size_t train_samples = 8000;
    std::size_t val_samples = 1000;
    std::size_t test_samples_per_velocity = 500;
    std::size_t traces_per_velocity = 20;
    std::size_t trace_len = 400;
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    std::vector<double> noise_test_snrs_db = {10, 15, 20, 25, 30};
    std::vector<double> data_fractions = {0.2, 0.4, 0.6, 0.8, 1.0};
    std::uint64_t data_seed = 97;
    // measurement noise in the closed loop (CQI is measured, not ideal);
    // NMSE metrics stay clean
    std::optional<double> link_noise_snr_db = 20.0;
    std::size_t jobs = 1;
    bool include_recurrent_baselines = false;
    std::size_t recurrent_hidden = 128;
};

struct ReportRow {
    std::string model;      // sinr-net, np, variant name, ...
    std::string condition;  // velocity / snr / fraction / policy
    std::uint64_t seed = 0;
    std::map<std::string, double> metrics;
};

struct ExperimentReport {
    std::string name;
    std::vector<ReportRow> rows;
    std::string config_digest;

    void write_csv(const std::string& path) const;
    std::string render_table() const;
    // two-column data files, one per (model, metric), for plotting
    void write_plot_data(const std::string& dir) const;
};

ExperimentReport run_experiment(ExperimentKind kind, const ExperimentConfig& config,
                                const std::string& config_digest = {});

// Runs fn(i) for i in [0, n) on a bounded worker pool; results land by index.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

}  // namespace amc::exp
