#include "amc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace amc::exp {

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed ^ (0x9e3779b97f4a7c15ULL * (salt + 1));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// AWGN on the dB history whose variance is the window's dB variance divided
// by the linear SNR; same convention as the engine's measurement noise.
void add_measurement_noise(std::vector<double>& history_db, double snr_db,
                           std::mt19937_64& rng) {
    double mu = 0.0, var = 0.0;
    for (double v : history_db) mu += v;
    mu /= double(history_db.size());
    for (double v : history_db) var += (v - mu) * (v - mu);
    var /= double(history_db.size());
    double sd = std::sqrt(var / std::pow(10.0, snr_db / 10.0));
    std::normal_distribution<double> gauss(0.0, sd);
    for (auto& v : history_db) v += gauss(rng);
}

double sq_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

std::vector<std::size_t> subsample_indices(std::size_t n, double fraction, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (fraction >= 1.0) return idx;
    std::mt19937_64 rng(mix(seed, 0x5b));
    std::shuffle(idx.begin(), idx.end(), rng);
    std::size_t keep = std::max<std::size_t>(1, std::size_t(std::llround(fraction * double(n))));
    idx.resize(keep);
    return idx;
}

}  // namespace

void TrainConfig::validate() const {
    if (batch == 0) throw std::invalid_argument("train: batch must be >= 1");
    if (subsample_fraction <= 0.0 || subsample_fraction > 1.0)
        throw std::invalid_argument("train: subsample fraction must be in (0, 1]");
    if (noise_snr_high_db < noise_snr_low_db)
        throw std::invalid_argument("train: noise SNR range is inverted");
}

TrainResult train(pred::TrainablePredictor& model, const chan::Dataset& train_set,
                  const chan::Dataset& val_set, const TrainConfig& config) {
    config.validate();
    if (train_set.samples.empty() || val_set.samples.empty())
        throw std::invalid_argument("train: empty dataset");

    auto params = model.parameters();
    nn::Adam adam(config.adam);
    std::mt19937_64 shuffle_rng(mix(config.seed, 1));
    std::mt19937_64 noise_rng(mix(config.seed, 2));
    std::uniform_real_distribution<double> snr_dist(config.noise_snr_low_db,
                                                    config.noise_snr_high_db);

    auto idx = subsample_indices(train_set.samples.size(), config.subsample_fraction, config.seed);

    TrainResult result;
    result.best_val_nmse_db = 1e300;
    std::vector<std::vector<double>> best_params;
    std::vector<double> noisy_history;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.cosine_lr && config.epochs > 1) {
            double t = double(epoch) / double(config.epochs - 1);
            double floor = config.adam.lr * config.lr_floor_fraction;
            adam.set_lr(floor + 0.5 * (config.adam.lr - floor) * (1.0 + std::cos(M_PI * t)));
        }
        std::shuffle(idx.begin(), idx.end(), shuffle_rng);
        double epoch_nmse = 0.0;
        std::size_t seen = 0;
        for (std::size_t b0 = 0; b0 < idx.size(); b0 += config.batch) {
            const std::size_t bsz = std::min(config.batch, idx.size() - b0);
            nn::Tape tape;
            for (auto& p : params) tape.watch(p);
            nn::TensorPtr batch_loss;
            for (std::size_t j = 0; j < bsz; ++j) {
                const auto& sample = train_set.samples[idx[b0 + j]];
                const std::vector<double>* hist = &sample.history_db;
                if (config.augment_noise) {
                    noisy_history = sample.history_db;
                    add_measurement_noise(noisy_history, snr_dist(noise_rng), noise_rng);
                    hist = &noisy_history;
                }
                auto pred = model.forward(tape, *hist);
                auto truth = nn::Tensor::from({1, train_set.subcarriers}, sample.target_db);
                auto diff = nn::sub(tape, pred, truth);
                auto loss_i = nn::scale(tape, nn::sum_all(tape, nn::mul(tape, diff, diff)),
                                        1.0 / sq_norm(sample.target_db));
                epoch_nmse += loss_i->data[0];
                batch_loss = batch_loss ? nn::add(tape, batch_loss, loss_i) : loss_i;
            }
            seen += bsz;
            auto loss = nn::scale(tape, batch_loss, 1.0 / double(bsz));
            if (!std::isfinite(loss->data[0]))
                throw std::runtime_error("train: non-finite loss at epoch " +
                                         std::to_string(epoch) + " batch " +
                                         std::to_string(b0 / config.batch));
            tape.backward(loss);
            adam.step(params);
        }
        result.train_curve_nmse_db.push_back(pred::nmse_db(epoch_nmse / double(seen)));

        double val = pred::nmse_db(eval_nmse(model, val_set));
        result.val_curve_nmse_db.push_back(val);
        if (val < result.best_val_nmse_db) {
            result.best_val_nmse_db = val;
            result.best_epoch = epoch;
            best_params.clear();
            for (auto& p : params) best_params.push_back(p->data);
        }
    }
    if (!best_params.empty())  // zero epochs leaves the initialization untouched
        for (std::size_t i = 0; i < params.size(); ++i) params[i]->data = best_params[i];
    else
        result.best_val_nmse_db = pred::nmse_db(eval_nmse(model, val_set));
    return result;
}

double eval_nmse(pred::Predictor& model, const chan::Dataset& test_set, std::uint64_t noise_seed,
                 const double* noise_snr_db) {
    if (test_set.samples.empty()) throw std::invalid_argument("eval_nmse: empty dataset");
    std::mt19937_64 rng(mix(noise_seed, 3));
    std::vector<double> noisy;
    // Pooled ratio rather than a mean of per-sample ratios: samples whose
    // mean SNR sits near 0 dB have a tiny ||truth||^2 and would dominate a
    // per-sample average.
    auto* genie = dynamic_cast<pred::GeniePredictor*>(&model);
    double err = 0.0, ref = 0.0;
    for (const auto& sample : test_set.samples) {
        if (genie) genie->set_future(sample.target_db);
        const std::vector<double>* hist = &sample.history_db;
        if (noise_snr_db) {
            noisy = sample.history_db;
            add_measurement_noise(noisy, *noise_snr_db, rng);
            hist = &noisy;
        }
        auto pred = model.predict(*hist);
        for (std::size_t k = 0; k < sample.target_db.size(); ++k) {
            double d = pred.sinr_db[k] - sample.target_db[k];
            err += d * d;
            ref += sample.target_db[k] * sample.target_db[k];
        }
    }
    return err / ref;
}

EvalSets build_eval_sets(const chan::DatasetConfig& data, const std::vector<double>& velocities,
                         std::size_t samples_per_velocity, std::size_t traces_per_velocity,
                         std::size_t trace_len, std::uint64_t seed) {
    EvalSets sets;
    std::size_t vi = 0;
    for (double v : velocities) {
        chan::DatasetConfig dc = data;
        dc.velocity_low_kmh = dc.velocity_high_kmh = v;
        sets.pairs_by_velocity[v] =
            chan::sample_dataset(dc, samples_per_velocity, mix(seed, 100 + vi));
        auto& traces = sets.traces_by_velocity[v];
        for (std::size_t t = 0; t < traces_per_velocity; ++t) {
            chan::ChannelConfig cc = data.channel;
            cc.velocity_kmh = v;
            cc.seed = mix(seed, 1000 + vi * traces_per_velocity + t);
            traces.push_back(chan::generate_trace(cc, trace_len));
        }
        ++vi;
    }
    return sets;
}

std::vector<VelocityEval> evaluate(pred::Predictor& model, const EvalSets& sets,
                                   const engine::TimingConfig& timing,
                                   const link::LinkConfig& linkcfg, std::uint64_t seed,
                                   const engine::RunOptions& options) {
    std::vector<VelocityEval> out;
    for (const auto& [v, ds] : sets.pairs_by_velocity) {
        VelocityEval ev;
        ev.velocity_kmh = v;
        ev.nmse_db = pred::nmse_db(eval_nmse(model, ds));
        std::vector<engine::LinkRecord> records;
        const auto& traces = sets.traces_by_velocity.at(v);
        for (std::size_t t = 0; t < traces.size(); ++t) {
            auto r = engine::run_link(traces[t], model, timing, linkcfg, mix(seed, 7000 + t),
                                      options);
            records.insert(records.end(), r.begin(), r.end());
        }
        ev.link = engine::summarize(records, traces.front().tti_s, linkcfg.re_per_tti);
        out.push_back(ev);
    }
    return out;
}

// ---- experiment grids -------------------------------------------------------

ExperimentKind experiment_from_string(const std::string& name) {
    if (name == "velocity-sweep") return ExperimentKind::VelocitySweep;
    if (name == "noise-robustness") return ExperimentKind::NoiseRobustness;
    if (name == "few-shot") return ExperimentKind::FewShot;
    if (name == "generalization") return ExperimentKind::Generalization;
    if (name == "ablation-modules") return ExperimentKind::AblationModules;
    if (name == "ablation-data-scale") return ExperimentKind::AblationDataScale;
    if (name == "ablation-finetune") return ExperimentKind::AblationFinetune;
    if (name == "cost-report") return ExperimentKind::CostReport;
    throw std::invalid_argument("unknown experiment: " + name);
}

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::VelocitySweep: return "velocity-sweep";
        case ExperimentKind::NoiseRobustness: return "noise-robustness";
        case ExperimentKind::FewShot: return "few-shot";
        case ExperimentKind::Generalization: return "generalization";
        case ExperimentKind::AblationModules: return "ablation-modules";
        case ExperimentKind::AblationDataScale: return "ablation-data-scale";
        case ExperimentKind::AblationFinetune: return "ablation-finetune";
        case ExperimentKind::CostReport: return "cost-report";
    }
    throw std::logic_error("bad experiment kind");
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex err_mu;
    for (std::size_t w = 0; w < jobs; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += jobs) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

namespace {

struct Harness {
    const ExperimentConfig& cfg;
    chan::Dataset train_set, val_set;
    EvalSets eval_sets;

    explicit Harness(const ExperimentConfig& c, bool with_link_traces = true) : cfg(c) {
        chan::DatasetConfig dc = c.data;
        dc.velocity_low_kmh = *std::min_element(c.velocities.begin(), c.velocities.end());
        dc.velocity_high_kmh = *std::max_element(c.velocities.begin(), c.velocities.end());
        train_set = chan::sample_dataset(dc, c.train_samples, mix(c.data_seed, 10));
        val_set = chan::sample_dataset(dc, c.val_samples, mix(c.data_seed, 11));
        eval_sets = build_eval_sets(c.data, c.velocities, c.test_samples_per_velocity,
                                    with_link_traces ? c.traces_per_velocity : 0, c.trace_len,
                                    c.data_seed);
    }

    std::shared_ptr<pred::SinrNet> make_model(const pred::ModelConfig& mc,
                                              std::uint64_t seed) const {
        return std::make_shared<pred::SinrNet>(cfg.data.history_len, cfg.data.channel.subcarriers,
                                               mc, mix(seed, 20));
    }

    pred::TrainablePtr train_model(const pred::ModelConfig& mc, std::uint64_t seed,
                                   TrainConfig tc) const {
        auto model = make_model(mc, seed);
        tc.seed = mix(seed, 21);
        train(*model, train_set, val_set, tc);
        return model;
    }

    void eval_into(ExperimentReport& report, const std::string& name, pred::Predictor& model,
                   std::uint64_t seed) const {
        engine::RunOptions options;
        options.measurement_noise_snr_db = cfg.link_noise_snr_db;
        auto evals = evaluate(model, eval_sets, cfg.timing, cfg.link, mix(seed, 22), options);
        for (const auto& ev : evals) {
            ReportRow row;
            row.model = name;
            row.condition = std::to_string(int(ev.velocity_kmh));
            row.seed = seed;
            row.metrics["nmse_db"] = ev.nmse_db;
            row.metrics["mean_bler"] = ev.link.mean_bler;
            row.metrics["throughput_mbps"] = ev.link.realized_throughput_bps / 1e6;
            row.metrics["expected_throughput_mbps"] = ev.link.expected_throughput_bps / 1e6;
            row.metrics["no_tx_fraction"] = ev.link.no_transmission_fraction;
            report.rows.push_back(row);
        }
    }

    double mean_test_nmse_db(pred::Predictor& model) const {
        double total = 0.0;
        for (const auto& [v, ds] : eval_sets.pairs_by_velocity) total += eval_nmse(model, ds);
        return pred::nmse_db(total / double(eval_sets.pairs_by_velocity.size()));
    }
};

void run_velocity_sweep(const ExperimentConfig& cfg, ExperimentReport& report) {
    Harness h(cfg);
    pred::NpPredictor np(cfg.data.history_len, cfg.data.channel.subcarriers);
    h.eval_into(report, "np", np, cfg.seeds.front());
    std::vector<ExperimentReport> parts(cfg.seeds.size());
    parallel_for(cfg.seeds.size(), cfg.jobs, [&](std::size_t i) {
        const std::uint64_t seed = cfg.seeds[i];
        auto model = h.train_model(cfg.model, seed, cfg.train);
        h.eval_into(parts[i], "sinr-net", *model, seed);
        if (cfg.include_recurrent_baselines) {
            for (auto rk : {pred::RecurrentKind::Rnn, pred::RecurrentKind::Lstm,
                            pred::RecurrentKind::Gru}) {
                auto rec = std::make_shared<pred::RecurrentNet>(
                    rk, cfg.data.history_len, cfg.data.channel.subcarriers, mix(seed, 30),
                    4, cfg.recurrent_hidden);
                TrainConfig tc = cfg.train;
                tc.seed = mix(seed, 31);
                train(*rec, h.train_set, h.val_set, tc);
                h.eval_into(parts[i], rec->kind(), *rec, seed);
            }
        }
    });
    for (auto& p : parts)
        report.rows.insert(report.rows.end(), p.rows.begin(), p.rows.end());
}

void run_noise_robustness(const ExperimentConfig& cfg, ExperimentReport& report) {
    Harness h(cfg, /*with_link_traces=*/false);
    std::vector<ExperimentReport> parts(cfg.seeds.size());
    parallel_for(cfg.seeds.size(), cfg.jobs, [&](std::size_t i) {
        const std::uint64_t seed = cfg.seeds[i];
        auto model = h.train_model(cfg.model, seed, cfg.train);
        pred::NpPredictor np(cfg.data.history_len, cfg.data.channel.subcarriers);
        for (double snr : cfg.noise_test_snrs_db) {
            double total_model = 0.0, total_np = 0.0;
            for (const auto& [v, ds] : h.eval_sets.pairs_by_velocity) {
                total_model += eval_nmse(*model, ds, mix(seed, 40), &snr);
                total_np += eval_nmse(np, ds, mix(seed, 40), &snr);
            }
            const double n = double(h.eval_sets.pairs_by_velocity.size());
            for (auto [name, value] :
                 {std::pair<const char*, double>{"sinr-net", total_model / n},
                  std::pair<const char*, double>{"np", total_np / n}}) {
                ReportRow row;
                row.model = name;
                row.condition = std::to_string(int(snr));
                row.seed = seed;
                row.metrics["nmse_db"] = pred::nmse_db(value);
                parts[i].rows.push_back(row);
            }
        }
    });
    for (auto& p : parts)
        report.rows.insert(report.rows.end(), p.rows.begin(), p.rows.end());
}

void run_few_shot(const ExperimentConfig& cfg, ExperimentReport& report) {
    Harness h(cfg);
    pred::NpPredictor np(cfg.data.history_len, cfg.data.channel.subcarriers);
    h.eval_into(report, "np", np, cfg.seeds.front());
    std::vector<ExperimentReport> parts(cfg.seeds.size());
    parallel_for(cfg.seeds.size(), cfg.jobs, [&](std::size_t i) {
        const std::uint64_t seed = cfg.seeds[i];
        TrainConfig tc = cfg.train;
        tc.subsample_fraction = 0.1;
        auto model = h.train_model(cfg.model, seed, tc);
        h.eval_into(parts[i], "sinr-net-10pct", *model, seed);
    });
    for (auto& p : parts)
        report.rows.insert(report.rows.end(), p.rows.begin(), p.rows.end());
}

void run_generalization(const ExperimentConfig& cfg, ExperimentReport& report) {
    Harness h(cfg, /*with_link_traces=*/false);  // trained and tested on cfg profile
    ExperimentConfig other = cfg;
    other.data.channel.profile = chan::PowerDelayProfile::by_name(
        cfg.data.channel.profile.name == "umi" ? "uma" : "umi");
    Harness h_other(other, /*with_link_traces=*/false);
    pred::NpPredictor np(cfg.data.history_len, cfg.data.channel.subcarriers);
    std::vector<ExperimentReport> parts(cfg.seeds.size());
    parallel_for(cfg.seeds.size(), cfg.jobs, [&](std::size_t i) {
        const std::uint64_t seed = cfg.seeds[i];
        auto model = h.train_model(cfg.model, seed, cfg.train);
        for (auto* hp : {&h, &h_other}) {
            for (auto name : {"sinr-net", "np"}) {
                ReportRow row;
                row.model = name;
                row.condition = hp->cfg.data.channel.profile.name;
                row.seed = seed;
                pred::Predictor& p = std::string(name) == "np"
                                         ? static_cast<pred::Predictor&>(np)
                                         : static_cast<pred::Predictor&>(*model);
                row.metrics["nmse_db"] = hp->mean_test_nmse_db(p);
                parts[i].rows.push_back(row);
            }
        }
    });
    for (auto& p : parts)
        report.rows.insert(report.rows.end(), p.rows.begin(), p.rows.end());
}

void run_ablation_modules(const ExperimentConfig& cfg, ExperimentReport& report) {
    Harness h(cfg, /*with_link_traces=*/false);
    std::vector<std::pair<std::string, pred::ModelConfig>> variants;
    variants.emplace_back("full", cfg.model);
    {
        pred::ModelConfig mc = cfg.model;
        mc.sa_iters = 0;
        variants.emplace_back("no-sa", mc);
    }
    {
        pred::ModelConfig mc = cfg.model;
        mc.patch = 1;
        variants.emplace_back("no-patch", mc);
    }
    {
        pred::ModelConfig mc = cfg.model;
        mc.backbone = pred::BackboneKind::Identity;
        variants.emplace_back("no-backbone", mc);
    }
    const std::size_t n = variants.size() * cfg.seeds.size();
    std::vector<ReportRow> rows(n);
    parallel_for(n, cfg.jobs, [&](std::size_t i) {
        const auto& [name, mc] = variants[i / cfg.seeds.size()];
        const std::uint64_t seed = cfg.seeds[i % cfg.seeds.size()];
        auto model = h.train_model(mc, seed, cfg.train);
        rows[i].model = name;
        rows[i].condition = "mean";
        rows[i].seed = seed;
        rows[i].metrics["nmse_db"] = h.mean_test_nmse_db(*model);
    });
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
}

void run_ablation_data_scale(const ExperimentConfig& cfg, ExperimentReport& report) {
    Harness h(cfg, /*with_link_traces=*/false);
    const std::size_t n = cfg.data_fractions.size() * cfg.seeds.size();
    std::vector<ReportRow> rows(n);
    parallel_for(n, cfg.jobs, [&](std::size_t i) {
        const double frac = cfg.data_fractions[i / cfg.seeds.size()];
        const std::uint64_t seed = cfg.seeds[i % cfg.seeds.size()];
        TrainConfig tc = cfg.train;
        tc.subsample_fraction = frac;
        auto model = h.train_model(cfg.model, seed, tc);
        char cond[32];
        std::snprintf(cond, sizeof(cond), "%.0f%%", frac * 100.0);
        rows[i].model = "sinr-net";
        rows[i].condition = cond;
        rows[i].seed = seed;
        rows[i].metrics["nmse_db"] = h.mean_test_nmse_db(*model);
    });
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
}

void run_ablation_finetune(const ExperimentConfig& cfg, ExperimentReport& report) {
    Harness h(cfg, /*with_link_traces=*/false);
    const std::vector<pred::FreezePolicy> policies = {
        pred::FreezePolicy::LnOnly, pred::FreezePolicy::AllParams, pred::FreezePolicy::Frozen,
        pred::FreezePolicy::LnMlp};
    const std::size_t n = policies.size() * cfg.seeds.size();
    std::vector<ReportRow> rows(n);
    parallel_for(n, cfg.jobs, [&](std::size_t i) {
        pred::ModelConfig mc = cfg.model;
        mc.freeze = policies[i / cfg.seeds.size()];
        const std::uint64_t seed = cfg.seeds[i % cfg.seeds.size()];
        auto model = h.make_model(mc, seed);
        TrainConfig tc = cfg.train;
        tc.seed = mix(seed, 21);
        train(*model, h.train_set, h.val_set, tc);
        rows[i].model = to_string(mc.freeze);
        rows[i].condition = "mean";
        rows[i].seed = seed;
        rows[i].metrics["nmse_db"] = h.mean_test_nmse_db(*model);
        rows[i].metrics["trainable_params"] = double(model->trainable_parameter_count());
        rows[i].metrics["backbone_trainable"] = double(model->backbone_trainable_count());
    });
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
}

void run_cost_report(const ExperimentConfig& cfg, ExperimentReport& report) {
    const std::size_t L = cfg.data.history_len;
    const std::size_t K = cfg.data.channel.subcarriers;
    auto add = [&](const std::string& name, pred::TrainablePredictor& m) {
        ReportRow row;
        row.model = name;
        row.condition = "-";
        row.seed = 0;
        row.metrics["total_params"] = double(m.total_parameter_count());
        row.metrics["trainable_params"] = double(m.trainable_parameter_count());
        if (auto* net = dynamic_cast<pred::SinrNet*>(&m)) {
            row.metrics["backbone_total"] = double(net->backbone_total_count());
            row.metrics["backbone_trainable"] = double(net->backbone_trainable_count());
        }
        report.rows.push_back(row);
    };
    pred::SinrNet net(L, K, cfg.model, 1);
    add("sinr-net", net);
    for (auto rk : {pred::RecurrentKind::Rnn, pred::RecurrentKind::Lstm, pred::RecurrentKind::Gru}) {
        pred::RecurrentNet rec(rk, L, K, 1, 4, cfg.recurrent_hidden);
        add(rec.kind(), rec);
    }
}

}  // namespace

ExperimentReport run_experiment(ExperimentKind kind, const ExperimentConfig& config,
                                const std::string& config_digest) {
    ExperimentReport report;
    report.name = to_string(kind);
    report.config_digest = config_digest;
    switch (kind) {
        case ExperimentKind::VelocitySweep: run_velocity_sweep(config, report); break;
        case ExperimentKind::NoiseRobustness: run_noise_robustness(config, report); break;
        case ExperimentKind::FewShot: run_few_shot(config, report); break;
        case ExperimentKind::Generalization: run_generalization(config, report); break;
        case ExperimentKind::AblationModules: run_ablation_modules(config, report); break;
        case ExperimentKind::AblationDataScale: run_ablation_data_scale(config, report); break;
        case ExperimentKind::AblationFinetune: run_ablation_finetune(config, report); break;
        case ExperimentKind::CostReport: run_cost_report(config, report); break;
    }
    return report;
}

// ---- report output ----------------------------------------------------------

namespace {

std::vector<std::string> metric_keys(const std::vector<ReportRow>& rows) {
    std::set<std::string> keys;
    for (const auto& r : rows)
        for (const auto& [k, v] : r.metrics) keys.insert(k);
    return {keys.begin(), keys.end()};
}

std::string fmt_metric(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

void ExperimentReport::write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    if (!config_digest.empty()) os << "# config_digest=" << config_digest << "\n";
    auto keys = metric_keys(rows);
    os << "model,condition,seed";
    for (const auto& k : keys) os << "," << k;
    os << "\n";
    for (const auto& r : rows) {
        os << r.model << "," << r.condition << "," << r.seed;
        for (const auto& k : keys) {
            auto it = r.metrics.find(k);
            os << "," << (it == r.metrics.end() ? "" : fmt_metric(it->second));
        }
        os << "\n";
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

std::string ExperimentReport::render_table() const {
    auto keys = metric_keys(rows);
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"model", "condition", "seed"});
    for (const auto& k : keys) cells.front().push_back(k);
    for (const auto& r : rows) {
        std::vector<std::string> line = {r.model, r.condition, std::to_string(r.seed)};
        for (const auto& k : keys) {
            auto it = r.metrics.find(k);
            line.push_back(it == r.metrics.end() ? "-" : fmt_metric(it->second));
        }
        cells.push_back(std::move(line));
    }
    std::vector<std::size_t> widths(cells.front().size(), 0);
    for (const auto& line : cells)
        for (std::size_t c = 0; c < line.size(); ++c) widths[c] = std::max(widths[c], line[c].size());
    std::string out = name + "\n";
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            out += line[c];
            out.append(widths[c] - line[c].size() + 2, ' ');
        }
        out += "\n";
    }
    return out;
}

void ExperimentReport::write_plot_data(const std::string& dir) const {
    std::filesystem::create_directories(dir);
    auto keys = metric_keys(rows);
    for (const auto& key : keys) {
        // mean over seeds per (model, condition), condition order preserved
        std::set<std::string> models;
        for (const auto& r : rows) models.insert(r.model);
        for (const auto& model : models) {
            std::vector<std::pair<std::string, std::pair<double, std::size_t>>> acc;
            for (const auto& r : rows) {
                if (r.model != model || r.metrics.count(key) == 0) continue;
                auto it = std::find_if(acc.begin(), acc.end(),
                                       [&](const auto& a) { return a.first == r.condition; });
                if (it == acc.end()) {
                    acc.push_back({r.condition, {r.metrics.at(key), 1}});
                } else {
                    it->second.first += r.metrics.at(key);
                    ++it->second.second;
                }
            }
            if (acc.empty()) continue;
            std::string path = dir + "/" + name + "_" + model + "_" + key + ".dat";
            std::ofstream os(path);
            if (!os) throw std::runtime_error("cannot open for write: " + path);
            os << "# condition " << key << " (mean over seeds)\n";
            for (const auto& [cond, sum] : acc)
                os << cond << " " << fmt_metric(sum.first / double(sum.second)) << "\n";
        }
    }
}

}  // namespace amc::exp
