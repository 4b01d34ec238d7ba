// amc - single entry point for data generation, training, simulation,
// experiments, and reporting.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <CLI11.hpp>

#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "amc/channel.hpp"
#include "amc/config.hpp"
#include "amc/engine.hpp"
#include "amc/experiments.hpp"
#include "amc/kernels.hpp"
#include "amc/layers.hpp"
#include "amc/linkmap.hpp"
#include "amc/predictors.hpp"

namespace {

using namespace amc;

// ---- logging ---------------------------------------------------------------

void logkv(const char* level, std::initializer_list<std::pair<const char*, std::string>> kvs) {
    auto now = std::chrono::system_clock::now();
    std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    std::ostringstream line;
    line << stamp << " " << level;
    for (const auto& [k, v] : kvs) line << " " << k << "=" << v;
    std::cerr << line.str() << "\n";
}

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Environment overrides apply to paths only: AMC_<FLAG> (uppercased, dashes
// to underscores) replaces the corresponding --<flag> path value.
std::string path_override(const std::string& flag, const std::string& value) {
    std::string env = "AMC_";
    for (char c : flag) env += c == '-' ? '_' : char(std::toupper(static_cast<unsigned char>(c)));
    if (const char* v = std::getenv(env.c_str())) return v;
    return value;
}

// ---- layered config --------------------------------------------------------

const std::set<std::string> kKnownKeys = {
    "channel.fc_hz", "channel.df_hz", "channel.subcarriers", "channel.tti_us",
    "channel.pbs_dbm", "channel.noise_dbm", "channel.mean_snr_low_db", "channel.mean_snr_high_db",
    "channel.sinusoids", "channel.profile",
    "data.history_len", "data.tm", "data.td", "data.velocity_low", "data.velocity_high",
    "model.patch", "model.sa_iters", "model.d_model", "model.backbone_layers", "model.heads",
    "model.backbone", "model.freeze", "model.se_reduction",
    "train.batch", "train.epochs", "train.lr", "train.beta1", "train.beta2",
    "train.cosine_lr", "train.lr_floor",
    "train.augment_noise", "train.noise_snr_low_db", "train.noise_snr_high_db",
    "train.subsample",
    "link.beta", "link.target_bler", "link.re_per_tti", "link.bler_slope",
    "exp.velocities", "exp.train_samples", "exp.val_samples", "exp.test_samples_per_velocity",
    "exp.traces_per_velocity", "exp.trace_len", "exp.seeds", "exp.noise_snrs",
    "exp.data_fractions", "exp.data_seed", "exp.include_recurrent", "exp.recurrent_hidden",
    "exp.link_noise_snr_db",
};

cfg::Config load_config(const std::string& file, const std::vector<std::string>& overrides) {
    cfg::Config c;
    if (!file.empty()) c = cfg::Config::parse_file(file);
    for (const auto& o : overrides) c.apply_override(o);
    c.require_known(kKnownKeys);
    return c;
}

chan::ChannelConfig channel_from(const cfg::Config& c) {
    chan::ChannelConfig cc;
    cc.fc_hz = c.dbl("channel.fc_hz", cc.fc_hz);
    cc.df_hz = c.dbl("channel.df_hz", cc.df_hz);
    cc.subcarriers = std::size_t(c.u64("channel.subcarriers", cc.subcarriers));
    cc.tti_s = c.dbl("channel.tti_us", cc.tti_s * 1e6) * 1e-6;
    cc.pbs_dbm = c.dbl("channel.pbs_dbm", cc.pbs_dbm);
    cc.noise_dbm = c.dbl("channel.noise_dbm", cc.noise_dbm);
    cc.mean_snr_low_db = c.dbl("channel.mean_snr_low_db", cc.mean_snr_low_db);
    cc.mean_snr_high_db = c.dbl("channel.mean_snr_high_db", cc.mean_snr_high_db);
    cc.sinusoids_per_tap = std::size_t(c.u64("channel.sinusoids", cc.sinusoids_per_tap));
    cc.profile = chan::PowerDelayProfile::by_name(c.str("channel.profile", "uma"));
    return cc;
}

chan::DatasetConfig dataset_from(const cfg::Config& c) {
    chan::DatasetConfig dc;
    dc.channel = channel_from(c);
    dc.history_len = std::size_t(c.u64("data.history_len", dc.history_len));
    dc.measure_period_tti = std::size_t(c.u64("data.tm", dc.measure_period_tti));
    dc.horizon_tti = std::size_t(c.u64("data.td", dc.horizon_tti));
    dc.velocity_low_kmh = c.dbl("data.velocity_low", dc.velocity_low_kmh);
    dc.velocity_high_kmh = c.dbl("data.velocity_high", dc.velocity_high_kmh);
    return dc;
}

pred::ModelConfig model_from(const cfg::Config& c) {
    pred::ModelConfig mc;
    mc.patch = std::size_t(c.u64("model.patch", mc.patch));
    mc.sa_iters = std::size_t(c.u64("model.sa_iters", mc.sa_iters));
    mc.d_model = std::size_t(c.u64("model.d_model", mc.d_model));
    mc.backbone_layers = std::size_t(c.u64("model.backbone_layers", mc.backbone_layers));
    mc.heads = std::size_t(c.u64("model.heads", mc.heads));
    mc.backbone = pred::backbone_from_string(c.str("model.backbone", "tiny-transformer"));
    mc.freeze = pred::freeze_from_string(c.str("model.freeze", "ln-only"));
    mc.se_reduction = std::size_t(c.u64("model.se_reduction", mc.se_reduction));
    return mc;
}

exp::TrainConfig train_from(const cfg::Config& c) {
    exp::TrainConfig tc;
    tc.batch = std::size_t(c.u64("train.batch", tc.batch));
    tc.epochs = std::size_t(c.u64("train.epochs", tc.epochs));
    tc.adam.lr = c.dbl("train.lr", tc.adam.lr);
    tc.adam.beta1 = c.dbl("train.beta1", tc.adam.beta1);
    tc.adam.beta2 = c.dbl("train.beta2", tc.adam.beta2);
    tc.cosine_lr = c.boolean("train.cosine_lr", tc.cosine_lr);
    tc.lr_floor_fraction = c.dbl("train.lr_floor", tc.lr_floor_fraction);
    tc.augment_noise = c.boolean("train.augment_noise", tc.augment_noise);
    tc.noise_snr_low_db = c.dbl("train.noise_snr_low_db", tc.noise_snr_low_db);
    tc.noise_snr_high_db = c.dbl("train.noise_snr_high_db", tc.noise_snr_high_db);
    tc.subsample_fraction = c.dbl("train.subsample", tc.subsample_fraction);
    return tc;
}

link::LinkConfig link_from(const cfg::Config& c) {
    link::LinkConfig lc;
    lc.beta = c.dbl("link.beta", lc.beta);
    lc.target_bler = c.dbl("link.target_bler", lc.target_bler);
    lc.re_per_tti = c.dbl("link.re_per_tti", lc.re_per_tti);
    double slope = c.dbl("link.bler_slope", lc.bler_model.slope[0]);
    for (auto& s : lc.bler_model.slope) s = slope;
    lc.thresholds = link::calibrate_thresholds(lc.bler_model, lc.target_bler);
    return lc;
}

exp::ExperimentConfig experiment_from(const cfg::Config& c) {
    exp::ExperimentConfig ec;
    ec.data = dataset_from(c);
    ec.link = link_from(c);
    ec.model = model_from(c);
    ec.train = train_from(c);
    ec.timing.history_len = ec.data.history_len;
    ec.timing.measure_period_tti = ec.data.measure_period_tti;
    ec.timing.feedback_delay_tti = ec.data.horizon_tti;
    ec.velocities = c.dbl_list("exp.velocities", ec.velocities);
    ec.train_samples = std::size_t(c.u64("exp.train_samples", ec.train_samples));
    ec.val_samples = std::size_t(c.u64("exp.val_samples", ec.val_samples));
    ec.test_samples_per_velocity =
        std::size_t(c.u64("exp.test_samples_per_velocity", ec.test_samples_per_velocity));
    ec.traces_per_velocity = std::size_t(c.u64("exp.traces_per_velocity", ec.traces_per_velocity));
    ec.trace_len = std::size_t(c.u64("exp.trace_len", ec.trace_len));
    ec.seeds.clear();
    for (double s : c.dbl_list("exp.seeds", {1, 2, 3})) ec.seeds.push_back(std::uint64_t(s));
    ec.noise_test_snrs_db = c.dbl_list("exp.noise_snrs", ec.noise_test_snrs_db);
    ec.data_fractions = c.dbl_list("exp.data_fractions", ec.data_fractions);
    ec.data_seed = c.u64("exp.data_seed", ec.data_seed);
    if (c.has("exp.link_noise_snr_db")) {
        std::string v = c.str("exp.link_noise_snr_db");
        if (v == "none")
            ec.link_noise_snr_db.reset();
        else
            ec.link_noise_snr_db = std::stod(v);
    }
    ec.include_recurrent_baselines = c.boolean("exp.include_recurrent", false);
    ec.recurrent_hidden = std::size_t(c.u64("exp.recurrent_hidden", ec.recurrent_hidden));
    return ec;
}

// Resolved config = config-file/override keys plus the subcommand's own flags,
// so the digest pins everything that shaped the artifact.
std::string resolved_digest(const cfg::Config& base,
                            std::initializer_list<std::pair<const char*, std::string>> flags) {
    cfg::Config c = base;
    for (const auto& [k, v] : flags) c.set(std::string("cli.") + k, v);
    return c.digest();
}

// ---- predictors from CLI specs ---------------------------------------------

pred::PredictorPtr make_predictor(const std::string& spec, std::size_t l, std::size_t k) {
    if (spec == "np") return std::make_shared<pred::NpPredictor>(l, k);
    if (spec == "genie") return std::make_shared<pred::GeniePredictor>(l, k);
    return pred::load_predictor(spec);
}

// ---- report CSV parsing (for `report`) --------------------------------------

exp::ExperimentReport parse_report_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    exp::ExperimentReport report;
    report.name = std::filesystem::path(path).stem().string();
    std::string line;
    std::vector<std::string> header;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line.rfind("# config_digest=", 0) == 0) {
            report.config_digest = line.substr(16);
            continue;
        }
        if (line.front() == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) fields.push_back(item);
        if (header.empty()) {
            header = fields;
            if (header.size() < 3 || header[0] != "model" || header[1] != "condition" ||
                header[2] != "seed")
                throw std::runtime_error("not a report CSV: " + path);
            continue;
        }
        exp::ReportRow row;
        row.model = fields.at(0);
        row.condition = fields.at(1);
        row.seed = std::stoull(fields.at(2));
        for (std::size_t i = 3; i < fields.size() && i < header.size(); ++i)
            if (!fields[i].empty()) row.metrics[header[i]] = std::stod(fields[i]);
        report.rows.push_back(std::move(row));
    }
    if (header.empty()) throw std::runtime_error("empty report CSV: " + path);
    return report;
}

// ---- subcommands ------------------------------------------------------------

struct CommonOpts {
    std::string config_file;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_file, "flat key = value config file");
    cmd->add_option("--set", opts.overrides, "override, key=value (repeatable)");
}

int cmd_gen_data(const CommonOpts& common, const std::string& kind, const std::string& profile,
                 const std::string& speed_range, std::size_t count, std::size_t steps,
                 std::uint64_t seed, std::string out) {
    out = path_override("out", out);
    auto c = load_config(common.config_file, common.overrides);
    if (!profile.empty()) c.set("channel.profile", profile);
    if (!speed_range.empty()) {
        auto colon = speed_range.find(':');
        std::string lo = speed_range.substr(0, colon);
        std::string hi = colon == std::string::npos ? lo : speed_range.substr(colon + 1);
        c.set("data.velocity_low", lo);
        c.set("data.velocity_high", hi);
    }
    std::string digest = resolved_digest(
        c, {{"cmd", "gen-data"}, {"kind", kind}, {"count", std::to_string(count)},
            {"steps", std::to_string(steps)}, {"seed", std::to_string(seed)}});
    logkv("INFO", {{"cmd", "gen-data"}, {"config_digest", digest}, {"out", out}});

    if (kind == "dataset") {
        auto ds = chan::sample_dataset(dataset_from(c), count, seed);
        chan::save_dataset(out, ds, digest);
        logkv("INFO", {{"samples", std::to_string(ds.samples.size())},
                       {"subcarriers", std::to_string(ds.subcarriers)}});
    } else if (kind == "trace") {
        chan::ChannelConfig cc = channel_from(c);
        cc.velocity_kmh = c.dbl("data.velocity_low", cc.velocity_kmh);
        cc.seed = seed;
        auto trace = chan::generate_trace(cc, steps);
        chan::save_trace(out, trace, digest);
        logkv("INFO", {{"steps", std::to_string(trace.steps)},
                       {"velocity_kmh", num(trace.velocity_kmh)}});
    } else {
        throw CLI::ValidationError("--kind must be dataset or trace");
    }
    return 0;
}

int cmd_train(const CommonOpts& common, const std::string& data_path, const std::string& val_path,
              std::uint64_t seed, std::string out, std::string curve_path) {
    out = path_override("out", out);
    auto c = load_config(common.config_file, common.overrides);
    std::string digest = resolved_digest(c, {{"cmd", "train"}, {"data", data_path},
                                             {"val", val_path}, {"seed", std::to_string(seed)}});
    logkv("INFO", {{"cmd", "train"}, {"config_digest", digest}});

    auto train_set = chan::load_dataset(data_path);
    auto val_set = chan::load_dataset(val_path);
    auto model = std::make_shared<pred::SinrNet>(train_set.history_len, train_set.subcarriers,
                                                 model_from(c), seed);
    exp::TrainConfig tc = train_from(c);
    tc.seed = seed;
    auto result = exp::train(*model, train_set, val_set, tc);
    model->save(out, digest);

    if (curve_path.empty()) curve_path = out + ".curve.csv";
    std::ofstream os(curve_path);
    if (!os) throw std::runtime_error("cannot open " + curve_path);
    os << "# config_digest=" << digest << "\n";
    os << "epoch,train_nmse_db,val_nmse_db\n";
    for (std::size_t e = 0; e < result.train_curve_nmse_db.size(); ++e)
        os << e << "," << num(result.train_curve_nmse_db[e]) << ","
           << num(result.val_curve_nmse_db[e]) << "\n";
    logkv("INFO", {{"best_val_nmse_db", num(result.best_val_nmse_db)},
                   {"best_epoch", std::to_string(result.best_epoch)},
                   {"checkpoint", out}, {"curve", curve_path}});
    return 0;
}

int cmd_evaluate(const CommonOpts& common, const std::string& predictor_spec, std::uint64_t seed,
                 std::string out) {
    out = path_override("out", out);
    auto c = load_config(common.config_file, common.overrides);
    std::string digest = resolved_digest(
        c, {{"cmd", "evaluate"}, {"predictor", predictor_spec}, {"seed", std::to_string(seed)}});
    logkv("INFO", {{"cmd", "evaluate"}, {"config_digest", digest}});

    exp::ExperimentConfig ec = experiment_from(c);
    auto predictor = make_predictor(predictor_spec, ec.data.history_len,
                                    ec.data.channel.subcarriers);
    auto sets = exp::build_eval_sets(ec.data, ec.velocities, ec.test_samples_per_velocity,
                                     ec.traces_per_velocity, ec.trace_len, ec.data_seed);
    engine::RunOptions options;
    options.measurement_noise_snr_db = ec.link_noise_snr_db;
    auto evals = exp::evaluate(*predictor, sets, ec.timing, ec.link, seed, options);

    exp::ExperimentReport report;
    report.name = "evaluate";
    report.config_digest = digest;
    for (const auto& ev : evals) {
        exp::ReportRow row;
        row.model = predictor->kind();
        row.condition = std::to_string(int(ev.velocity_kmh));
        row.seed = seed;
        row.metrics["nmse_db"] = ev.nmse_db;
        row.metrics["mean_bler"] = ev.link.mean_bler;
        row.metrics["throughput_mbps"] = ev.link.realized_throughput_bps / 1e6;
        report.rows.push_back(row);
    }
    std::cout << report.render_table();
    if (!out.empty()) report.write_csv(out);
    return 0;
}

int cmd_simulate(const CommonOpts& common, const std::string& trace_path,
                 const std::string& predictor_spec, std::size_t tm, std::size_t td,
                 std::size_t history_len, std::uint64_t seed, std::string out) {
    out = path_override("out", out);
    auto c = load_config(common.config_file, common.overrides);
    std::string digest = resolved_digest(
        c, {{"cmd", "simulate"}, {"trace", trace_path}, {"predictor", predictor_spec},
            {"tm", std::to_string(tm)}, {"td", std::to_string(td)},
            {"seed", std::to_string(seed)}});
    logkv("INFO", {{"cmd", "simulate"}, {"config_digest", digest}});

    auto trace = chan::load_trace(trace_path);
    auto predictor = make_predictor(predictor_spec, history_len, trace.subcarriers);
    engine::TimingConfig timing{tm, td, predictor->history_len()};
    link::LinkConfig lc = link_from(c);
    auto records = engine::run_link(trace, *predictor, timing, lc, seed);
    auto summary = engine::summarize(records, trace.tti_s, lc.re_per_tti);
    engine::write_records_csv(out, records, digest);
    logkv("INFO", {{"records", std::to_string(summary.records)},
                   {"mean_bler", num(summary.mean_bler)},
                   {"throughput_mbps", num(summary.realized_throughput_bps / 1e6)},
                   {"no_tx_fraction", num(summary.no_transmission_fraction)},
                   {"out", out}});
    return 0;
}

int cmd_experiment(const CommonOpts& common, const std::string& kind_name, std::size_t jobs,
                   std::string out_dir) {
    out_dir = path_override("out-dir", out_dir);
    auto c = load_config(common.config_file, common.overrides);
    auto kind = exp::experiment_from_string(kind_name);
    std::string digest = resolved_digest(c, {{"cmd", "experiment"}, {"kind", kind_name}});
    logkv("INFO", {{"cmd", "experiment"}, {"kind", kind_name}, {"config_digest", digest},
                   {"jobs", std::to_string(jobs)}});

    exp::ExperimentConfig ec = experiment_from(c);
    ec.jobs = jobs;
    auto report = exp::run_experiment(kind, ec, digest);
    std::filesystem::create_directories(out_dir);
    std::string csv = out_dir + "/" + report.name + ".csv";
    report.write_csv(csv);
    std::ofstream(out_dir + "/" + report.name + ".txt") << report.render_table();
    report.write_plot_data(out_dir + "/plot");
    std::cout << report.render_table();
    logkv("INFO", {{"rows", std::to_string(report.rows.size())}, {"csv", csv}});
    return 0;
}

int cmd_report(const std::string& in_path, std::string out_dir) {
    out_dir = path_override("out-dir", out_dir);
    auto report = parse_report_csv(in_path);
    std::cout << report.render_table();
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream(out_dir + "/" + report.name + ".txt") << report.render_table();
        report.write_plot_data(out_dir);
        logkv("INFO", {{"cmd", "report"}, {"out_dir", out_dir},
                       {"config_digest", report.config_digest}});
    }
    return 0;
}

int cmd_grad_check(bool tiny) {
    (void)tiny;  // one suite size; the flag names it
    std::mt19937_64 rng(7);
    double worst = 0.0;
    std::string where;
    auto run = [&](const std::string& name, std::vector<nn::LayerPtr> chain,
                   std::vector<std::size_t> shape) {
        auto input = nn::Tensor::uniform(shape, 1.0, rng, "input");
        auto report = nn::grad_check(chain, input, 1e-4);
        logkv("INFO", {{"layer", name}, {"max_rel_err", num(report.max_rel_err)}});
        if (report.max_rel_err > worst) {
            worst = report.max_rel_err;
            where = name + ":" + report.worst_location;
        }
    };
    run("conv2d", {std::make_shared<nn::Conv2DLayer>(2, 3, rng)}, {2, 4, 5});
    run("dense", {std::make_shared<nn::DenseLayer>(6, 4, rng)}, {3, 6});
    run("relu", {std::make_shared<nn::DenseLayer>(5, 5, rng), std::make_shared<nn::ReLULayer>()},
        {2, 5});
    run("sigmoid", {std::make_shared<nn::SigmoidLayer>()}, {3, 4});
    run("gap", {std::make_shared<nn::GlobalAvgPool2DLayer>()}, {3, 4, 5});
    run("layernorm", {std::make_shared<nn::LayerNormLayer>(8)}, {3, 8});
    run("softmax", {std::make_shared<nn::SoftmaxLayer>()}, {3, 5});
    run("mhsa", {std::make_shared<nn::MultiHeadSelfAttentionLayer>(8, 2, rng)}, {5, 8});
    run("dense-relu-dense",
        {std::make_shared<nn::DenseLayer>(6, 8, rng), std::make_shared<nn::ReLULayer>(),
         std::make_shared<nn::DenseLayer>(8, 3, rng)},
        {2, 6});
    run("ln-mhsa",
        {std::make_shared<nn::LayerNormLayer>(8),
         std::make_shared<nn::MultiHeadSelfAttentionLayer>(8, 2, rng)},
        {4, 8});

    pred::ModelConfig mc;
    mc.patch = 2;
    mc.sa_iters = 1;
    mc.d_model = 8;
    mc.backbone_layers = 1;
    mc.heads = 2;
    mc.freeze = pred::FreezePolicy::AllParams;
    pred::SinrNet net(8, 4, mc, 11);
    std::vector<double> history(8 * 4);
    std::uniform_real_distribution<double> u(-10.0, 25.0);
    for (auto& v : history) v = u(rng);
    auto full = pred::grad_check_model(net, history, 1e-4);
    logkv("INFO", {{"layer", "sinr-net"}, {"max_rel_err", num(full.max_rel_err)}});
    if (full.max_rel_err > worst) {
        worst = full.max_rel_err;
        where = "sinr-net:" + full.worst_location;
    }

    std::printf("max relative error: %.3e (%s)\n", worst, where.c_str());
    return worst < 1e-4 ? 0 : 2;
}

int cmd_inspect(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    char magic[4] = {};
    is.read(magic, 4);
    is.close();
    if (std::string(magic, 4) == "AMCT") {
        std::cout << chan::describe_file(path);
        return 0;
    }
    if (std::string(magic, 4) == "AMCK") {
        auto ckpt = nn::load_checkpoint(path);
        std::cout << "checkpoint " << path << "\n";
        for (const auto& [k, v] : ckpt.metadata) std::cout << "  " << k << " = " << v << "\n";
        std::size_t total = 0, trainable = 0;
        for (const auto& [name, t] : ckpt.tensors) {
            total += t->numel();
            if (t->trainable) trainable += t->numel();
        }
        std::cout << "  tensors = " << ckpt.tensors.size() << "\n";
        std::cout << "  total_params = " << total << "\n";
        std::cout << "  trainable_params = " << trainable << "\n";
        return 0;
    }
    throw std::runtime_error("unrecognized file format: " + path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive modulation and coding laboratory"};
    app.require_subcommand(1);

    CommonOpts common;

    // gen-data
    std::string gd_kind = "dataset", gd_profile, gd_speed_range, gd_out = "data.amct";
    std::size_t gd_count = 1000, gd_steps = 2000;
    std::uint64_t gd_seed = 1;
    auto* gen = app.add_subcommand("gen-data", "generate a SINR dataset or trace file");
    add_common(gen, common);
    gen->add_option("--kind", gd_kind, "dataset | trace")->default_str("dataset");
    gen->add_option("--profile", gd_profile, "uma | umi | flat");
    gen->add_option("--speed-range", gd_speed_range, "km/h, lo:hi or a single value");
    gen->add_option("--count", gd_count, "samples in a dataset");
    gen->add_option("--steps", gd_steps, "TTIs in a trace");
    gen->add_option("--seed", gd_seed, "RNG seed");
    gen->add_option("--out", gd_out, "output file")->required();

    // train
    std::string tr_data, tr_val, tr_out = "model.amck", tr_curve;
    std::uint64_t tr_seed = 1;
    auto* train_cmd = app.add_subcommand("train", "train the prediction network");
    add_common(train_cmd, common);
    train_cmd->add_option("--data", tr_data, "training dataset file")->required();
    train_cmd->add_option("--val", tr_val, "validation dataset file")->required();
    train_cmd->add_option("--seed", tr_seed, "RNG seed");
    train_cmd->add_option("--out", tr_out, "checkpoint file");
    train_cmd->add_option("--curve", tr_curve, "loss-curve CSV (default <out>.curve.csv)");

    // evaluate
    std::string ev_predictor = "np", ev_out;
    std::uint64_t ev_seed = 1;
    auto* eval_cmd = app.add_subcommand("evaluate", "NMSE + link metrics per velocity");
    add_common(eval_cmd, common);
    eval_cmd->add_option("--predictor", ev_predictor, "checkpoint path, or np");
    eval_cmd->add_option("--seed", ev_seed, "RNG seed");
    eval_cmd->add_option("--out", ev_out, "report CSV");

    // simulate
    std::string sm_trace, sm_predictor = "np", sm_out = "records.csv";
    std::size_t sm_tm = 2, sm_td = 2, sm_hist = 16;
    std::uint64_t sm_seed = 1;
    auto* sim = app.add_subcommand("simulate", "closed AMC loop over a trace file");
    add_common(sim, common);
    sim->add_option("--trace", sm_trace, "AMCT trace file")->required();
    sim->add_option("--predictor", sm_predictor, "checkpoint path, np, or genie");
    sim->add_option("--tm", sm_tm, "measurement period, TTIs");
    sim->add_option("--td", sm_td, "feedback delay, TTIs");
    sim->add_option("--history-len", sm_hist, "history length for np/genie");
    sim->add_option("--seed", sm_seed, "RNG seed");
    sim->add_option("--out", sm_out, "records CSV");

    // experiment
    std::string ex_kind, ex_out_dir = "out";
    std::size_t ex_jobs = std::max(1u, std::thread::hardware_concurrency());
    auto* expc = app.add_subcommand("experiment", "run a scripted experiment grid");
    add_common(expc, common);
    expc->add_option("--kind", ex_kind,
                     "velocity-sweep | noise-robustness | few-shot | generalization | "
                     "ablation-modules | ablation-data-scale | ablation-finetune | cost-report")
        ->required();
    expc->add_option("--jobs", ex_jobs, "parallel grid cells");
    expc->add_option("--out-dir", ex_out_dir, "report directory");

    // report
    std::string rp_in, rp_out_dir;
    auto* rep = app.add_subcommand("report", "render a report CSV as a table + plot data");
    rep->add_option("--in", rp_in, "report CSV")->required();
    rep->add_option("--out-dir", rp_out_dir, "also write table + plot files here");

    // grad-check
    bool gc_tiny = false;
    auto* gc = app.add_subcommand("grad-check", "finite-difference gradient suite");
    gc->add_flag("--tiny", gc_tiny, "tiny configuration (the default and only size)");

    // inspect
    std::string in_file;
    auto* insp = app.add_subcommand("inspect", "print an artifact file's header");
    insp->add_option("file", in_file, "AMCT or AMCK file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // CLI11 prints --help itself with exit code 0
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 1;
    }

    try {
        if (gen->parsed())
            return cmd_gen_data(common, gd_kind, gd_profile, gd_speed_range, gd_count, gd_steps,
                                gd_seed, gd_out);
        if (train_cmd->parsed()) return cmd_train(common, tr_data, tr_val, tr_seed, tr_out, tr_curve);
        if (eval_cmd->parsed()) return cmd_evaluate(common, ev_predictor, ev_seed, ev_out);
        if (sim->parsed())
            return cmd_simulate(common, sm_trace, sm_predictor, sm_tm, sm_td, sm_hist, sm_seed,
                                sm_out);
        if (expc->parsed()) return cmd_experiment(common, ex_kind, ex_jobs, ex_out_dir);
        if (rep->parsed()) return cmd_report(rp_in, rp_out_dir);
        if (gc->parsed()) return cmd_grad_check(gc_tiny);
        if (insp->parsed()) return cmd_inspect(in_file);
    } catch (const CLI::ValidationError& e) {
        logkv("ERROR", {{"error", e.what()}});
        return 1;
    } catch (const std::exception& e) {
        logkv("ERROR", {{"error", e.what()}});
        return 2;
    }
    return 1;
}
