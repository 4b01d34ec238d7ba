#include "amc/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amc::pred {

using nn::Tape;
using nn::Tensor;
using nn::TensorPtr;

std::vector<double> Prediction::linear() const {
    std::vector<double> out(sinr_db.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::pow(10.0, sinr_db[i] / 10.0);
    return out;
}

Normalization normalize(const std::vector<double>& history, std::vector<double>& out) {
    if (history.empty()) throw std::invalid_argument("normalize: empty history");
    double mu = 0.0;
    for (double v : history) mu += v;
    mu /= double(history.size());
    double var = 0.0;
    for (double v : history) var += (v - mu) * (v - mu);
    var /= double(history.size());
    double sigma = std::max(std::sqrt(var), 1e-6);
    out.resize(history.size());
    for (std::size_t i = 0; i < history.size(); ++i) out[i] = (history[i] - mu) / sigma;
    return {mu, sigma};
}

double nmse(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size()) throw std::invalid_argument("nmse: shape mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double d = pred[i] - truth[i];
        num += d * d;
        den += truth[i] * truth[i];
    }
    if (den == 0.0) throw std::invalid_argument("nmse: zero-norm truth");
    return num / den;
}

double nmse_db(double ratio) {
    if (ratio <= 1e-10) return -100.0;
    return std::max(10.0 * std::log10(ratio), -100.0);
}

Prediction NpPredictor::predict(const std::vector<double>& history_db) {
    if (history_db.size() != l_ * k_)
        throw std::invalid_argument("np: history size mismatch, expected " +
                                    std::to_string(l_ * k_) + " got " +
                                    std::to_string(history_db.size()));
    return {std::vector<double>(history_db.end() - std::ptrdiff_t(k_), history_db.end())};
}

std::size_t TrainablePredictor::trainable_parameter_count() {
    std::size_t n = 0;
    for (auto& p : parameters())
        if (p->trainable) n += p->numel();
    return n;
}

std::size_t TrainablePredictor::total_parameter_count() {
    std::size_t n = 0;
    for (auto& p : parameters()) n += p->numel();
    return n;
}

std::string to_string(BackboneKind k) {
    switch (k) {
        case BackboneKind::TinyTransformer: return "tiny-transformer";
        case BackboneKind::Identity: return "identity";
        case BackboneKind::None: return "none";
    }
    return "?";
}

std::string to_string(FreezePolicy p) {
    switch (p) {
        case FreezePolicy::LnOnly: return "ln-only";
        case FreezePolicy::AllParams: return "all-params";
        case FreezePolicy::Frozen: return "frozen";
        case FreezePolicy::LnMlp: return "ln+mlp";
    }
    return "?";
}

BackboneKind backbone_from_string(const std::string& s) {
    if (s == "tiny-transformer") return BackboneKind::TinyTransformer;
    if (s == "identity") return BackboneKind::Identity;
    if (s == "none") return BackboneKind::None;
    throw std::invalid_argument("unknown backbone kind: " + s);
}

FreezePolicy freeze_from_string(const std::string& s) {
    if (s == "ln-only") return FreezePolicy::LnOnly;
    if (s == "all-params") return FreezePolicy::AllParams;
    if (s == "frozen") return FreezePolicy::Frozen;
    if (s == "ln+mlp") return FreezePolicy::LnMlp;
    throw std::invalid_argument("unknown freeze policy: " + s);
}

void ModelConfig::validate() const {
    if (patch == 0) throw std::invalid_argument("model: patch size must be >= 1");
    if (d_model == 0) throw std::invalid_argument("model: d_model must be >= 1");
    if (se_reduction == 0) throw std::invalid_argument("model: se_reduction must be >= 1");
    if (backbone == BackboneKind::TinyTransformer) {
        if (heads == 0 || d_model % heads != 0)
            throw std::invalid_argument("model: d_model must divide evenly into heads");
    }
}

// ---- SinrNet ---------------------------------------------------------------

SinrNet::SinrNet(std::size_t history_len, std::size_t subcarriers, ModelConfig config,
                 std::uint64_t seed)
    : l_(history_len), k_(subcarriers), cfg_(config) {
    cfg_.validate();
    if (l_ == 0 || k_ == 0) throw std::invalid_argument("model: L and K must be >= 1");
    lp_ = (l_ + cfg_.patch - 1) / cfg_.patch;  // ceil(L/N)

    std::mt19937_64 rng(seed);
    const std::size_t se_hidden = std::max<std::size_t>(lp_ / cfg_.se_reduction, 1);
    for (std::size_t i = 0; i < cfg_.sa_iters; ++i) {
        SaBlock blk;
        blk.conv1 = std::make_shared<nn::Conv2DLayer>(lp_, lp_, rng);
        blk.conv2 = std::make_shared<nn::Conv2DLayer>(lp_, lp_, rng);
        blk.se_fc1 = std::make_shared<nn::DenseLayer>(lp_, se_hidden, rng);
        blk.se_fc2 = std::make_shared<nn::DenseLayer>(se_hidden, lp_, rng);
        sa_.push_back(std::move(blk));
    }
    embed_fc_ = std::make_shared<nn::DenseLayer>(cfg_.patch * k_, cfg_.d_model, rng);
    if (cfg_.backbone == BackboneKind::TinyTransformer) {
        for (std::size_t i = 0; i < cfg_.backbone_layers; ++i) {
            BackboneBlock blk;
            blk.ln1 = std::make_shared<nn::LayerNormLayer>(cfg_.d_model);
            blk.attn = std::make_shared<nn::MultiHeadSelfAttentionLayer>(cfg_.d_model, cfg_.heads, rng);
            blk.ln2 = std::make_shared<nn::LayerNormLayer>(cfg_.d_model);
            blk.ff1 = std::make_shared<nn::DenseLayer>(cfg_.d_model, 4 * cfg_.d_model, rng);
            blk.ff2 = std::make_shared<nn::DenseLayer>(4 * cfg_.d_model, cfg_.d_model, rng);
            blocks_.push_back(std::move(blk));
        }
    }
    head_fc1_ = std::make_shared<nn::DenseLayer>(lp_ * cfg_.d_model, cfg_.d_model, rng);
    head_fc2_ = std::make_shared<nn::DenseLayer>(cfg_.d_model, k_, rng);

    // sin-cos positional encoding, PE[pos, 2i] = sin(pos / 10000^(2i/d))
    pe_.assign(lp_ * cfg_.d_model, 0.0);
    for (std::size_t pos = 0; pos < lp_; ++pos)
        for (std::size_t j = 0; j < cfg_.d_model; ++j) {
            double expo = double(2 * (j / 2)) / double(cfg_.d_model);
            double arg = double(pos) / std::pow(10000.0, expo);
            pe_[pos * cfg_.d_model + j] = (j % 2 == 0) ? std::sin(arg) : std::cos(arg);
        }

    apply_freeze_policy();
}

void SinrNet::apply_freeze_policy() {
    for (auto& blk : blocks_) {
        bool ln = cfg_.freeze != FreezePolicy::Frozen;
        bool attn = cfg_.freeze == FreezePolicy::AllParams;
        bool mlp = cfg_.freeze == FreezePolicy::AllParams || cfg_.freeze == FreezePolicy::LnMlp;
        for (auto& p : blk.ln1->parameters()) p->set_trainable(ln);
        for (auto& p : blk.ln2->parameters()) p->set_trainable(ln);
        for (auto& p : blk.attn->parameters()) p->set_trainable(attn);
        for (auto& p : blk.ff1->parameters()) p->set_trainable(mlp);
        for (auto& p : blk.ff2->parameters()) p->set_trainable(mlp);
    }
}

TensorPtr SinrNet::patchify(Tape&, const std::vector<double>& normalized) const {
    if (normalized.size() != l_ * k_)
        throw std::invalid_argument("patchify: expected " + std::to_string(l_ * k_) +
                                    " values, got " + std::to_string(normalized.size()));
    std::vector<double> padded(lp_ * cfg_.patch * k_, 0.0);  // trailing rows zero
    std::copy(normalized.begin(), normalized.end(), padded.begin());
    return Tensor::from({lp_, cfg_.patch, k_}, std::move(padded), "patched");
}

TensorPtr SinrNet::sinr_attention(Tape& tape, TensorPtr x) {
    for (auto& blk : sa_) {
        auto s_f = blk.conv2->forward(tape, nn::relu(tape, blk.conv1->forward(tape, x)));
        auto gap = nn::global_avg_pool(tape, s_f);                      // [L']
        auto w = blk.se_fc1->forward(tape, gap);                        // [1 x hidden]
        w = nn::relu(tape, w);
        w = nn::sigmoid(tape, blk.se_fc2->forward(tape, w));            // [1 x L']
        auto scaled = nn::scale_channels(tape, s_f, nn::reshape(tape, w, {lp_}));
        x = nn::add(tape, scaled, x);  // residual adds the iteration input
    }
    return x;
}

TensorPtr SinrNet::embed(Tape& tape, TensorPtr x) {
    x = nn::reshape(tape, x, {lp_, cfg_.patch * k_});
    x = embed_fc_->forward(tape, x);
    return nn::add_const(tape, x, pe_);
}

TensorPtr SinrNet::backbone_forward(Tape& tape, TensorPtr x) {
    for (auto& blk : blocks_) {
        x = nn::add(tape, x, blk.attn->forward(tape, blk.ln1->forward(tape, x)));
        auto ff = blk.ff2->forward(
            tape, nn::relu(tape, blk.ff1->forward(tape, blk.ln2->forward(tape, x))));
        x = nn::add(tape, x, ff);
    }
    return x;
}

TensorPtr SinrNet::output_head(Tape& tape, TensorPtr x, const Normalization& norm) {
    x = nn::reshape(tape, x, {std::size_t(1), lp_ * cfg_.d_model});
    x = nn::relu(tape, head_fc1_->forward(tape, x));
    x = head_fc2_->forward(tape, x);  // [1 x K]
    x = nn::scale(tape, x, norm.sigma);
    return nn::add_const(tape, x, std::vector<double>(k_, norm.mu));
}

TensorPtr SinrNet::forward(Tape& tape, const std::vector<double>& history_db) {
    std::vector<double> normalized;
    auto norm = normalize(history_db, normalized);
    auto x = patchify(tape, normalized);
    x = sinr_attention(tape, x);
    x = embed(tape, x);
    x = backbone_forward(tape, x);
    return output_head(tape, x, norm);
}

Prediction SinrNet::predict(const std::vector<double>& history_db) {
    Tape tape;
    auto out = forward(tape, history_db);
    return {out->data};
}

std::vector<std::pair<std::string, TensorPtr>> SinrNet::named_parameters() {
    std::vector<std::pair<std::string, TensorPtr>> out;
    auto push = [&](const std::string& prefix, const std::vector<TensorPtr>& ps,
                    const char* const* names) {
        std::size_t i = 0;
        for (auto& p : ps) out.emplace_back(prefix + names[i++], p);
    };
    static const char* wb[] = {"w", "b"};
    static const char* qkvo[] = {"wq", "wk", "wv", "wo"};
    static const char* gb[] = {"gain", "bias"};
    for (std::size_t i = 0; i < sa_.size(); ++i) {
        std::string p = "sa" + std::to_string(i) + ".";
        push(p + "conv1.", sa_[i].conv1->parameters(), wb);
        push(p + "conv2.", sa_[i].conv2->parameters(), wb);
        push(p + "se1.", sa_[i].se_fc1->parameters(), wb);
        push(p + "se2.", sa_[i].se_fc2->parameters(), wb);
    }
    push("embed.", embed_fc_->parameters(), wb);
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        std::string p = "blk" + std::to_string(i) + ".";
        push(p + "ln1.", blocks_[i].ln1->parameters(), gb);
        push(p + "attn.", blocks_[i].attn->parameters(), qkvo);
        push(p + "ln2.", blocks_[i].ln2->parameters(), gb);
        push(p + "ff1.", blocks_[i].ff1->parameters(), wb);
        push(p + "ff2.", blocks_[i].ff2->parameters(), wb);
    }
    push("head1.", head_fc1_->parameters(), wb);
    push("head2.", head_fc2_->parameters(), wb);
    return out;
}

std::vector<TensorPtr> SinrNet::parameters() {
    std::vector<TensorPtr> out;
    for (auto& [n, p] : named_parameters()) out.push_back(p);
    return out;
}

std::size_t SinrNet::backbone_trainable_count() {
    std::size_t n = 0;
    for (auto& blk : blocks_)
        for (auto* layer : std::initializer_list<nn::Layer*>{blk.ln1.get(), blk.attn.get(),
                                                             blk.ln2.get(), blk.ff1.get(),
                                                             blk.ff2.get()})
            for (auto& p : layer->parameters())
                if (p->trainable) n += p->numel();
    return n;
}

std::size_t SinrNet::backbone_total_count() {
    std::size_t n = 0;
    for (auto& blk : blocks_)
        for (auto* layer : std::initializer_list<nn::Layer*>{blk.ln1.get(), blk.attn.get(),
                                                             blk.ln2.get(), blk.ff1.get(),
                                                             blk.ff2.get()})
            for (auto& p : layer->parameters()) n += p->numel();
    return n;
}

void SinrNet::save(const std::string& path, const std::string& config_digest) {
    std::map<std::string, std::string> meta{
        {"type", "sinr-net"},
        {"history_len", std::to_string(l_)},
        {"subcarriers", std::to_string(k_)},
        {"patch", std::to_string(cfg_.patch)},
        {"sa_iters", std::to_string(cfg_.sa_iters)},
        {"d_model", std::to_string(cfg_.d_model)},
        {"backbone_layers", std::to_string(cfg_.backbone_layers)},
        {"heads", std::to_string(cfg_.heads)},
        {"backbone", to_string(cfg_.backbone)},
        {"freeze", to_string(cfg_.freeze)},
        {"se_reduction", std::to_string(cfg_.se_reduction)},
        {"normalization", "window-zscore-v1"},
    };
    if (!config_digest.empty()) meta["config_digest"] = config_digest;
    nn::save_checkpoint(path, named_parameters(), meta);
}

// ---- recurrent baselines ----------------------------------------------------

namespace {

TensorPtr glorot_param(std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out,
                       std::mt19937_64& rng, std::string name) {
    double a = std::sqrt(6.0 / double(fan_in + fan_out));
    auto t = Tensor::uniform(std::move(shape), a, rng, std::move(name));
    t->set_trainable(true);
    return t;
}

}  // namespace

RecurrentNet::RecurrentNet(RecurrentKind kind, std::size_t history_len, std::size_t subcarriers,
                           std::uint64_t seed, std::size_t layers, std::size_t hidden)
    : rkind_(kind), l_(history_len), k_(subcarriers), layers_(layers), hidden_(hidden) {
    if (layers_ == 0 || hidden_ == 0)
        throw std::invalid_argument("recurrent: layers and hidden width must be >= 1");
    std::mt19937_64 rng(seed);
    const std::size_t g = gates();
    for (std::size_t i = 0; i < layers_; ++i) {
        std::size_t in = (i == 0) ? k_ : hidden_;
        wx_.push_back(glorot_param({in, g * hidden_}, in, hidden_, rng,
                                   "l" + std::to_string(i) + ".wx"));
        wh_.push_back(glorot_param({hidden_, g * hidden_}, hidden_, hidden_, rng,
                                   "l" + std::to_string(i) + ".wh"));
        auto bias = Tensor::zeros({g * hidden_}, "l" + std::to_string(i) + ".b");
        bias->set_trainable(true);
        b_.push_back(bias);
    }
    out_fc_ = std::make_shared<nn::DenseLayer>(hidden_, k_, rng);
}

std::size_t RecurrentNet::gates() const {
    switch (rkind_) {
        case RecurrentKind::Rnn: return 1;
        case RecurrentKind::Lstm: return 4;
        case RecurrentKind::Gru: return 3;
    }
    return 1;
}

std::string RecurrentNet::kind() const {
    switch (rkind_) {
        case RecurrentKind::Rnn: return "rnn";
        case RecurrentKind::Lstm: return "lstm";
        case RecurrentKind::Gru: return "gru";
    }
    return "?";
}

TensorPtr RecurrentNet::forward(Tape& tape, const std::vector<double>& history_db) {
    if (history_db.size() != l_ * k_)
        throw std::invalid_argument(kind() + ": history size mismatch, expected L*K = " +
                                    std::to_string(l_ * k_) + " got " +
                                    std::to_string(history_db.size()));
    std::vector<double> normalized;
    auto norm = normalize(history_db, normalized);
    auto hist = Tensor::from({l_, k_}, std::move(normalized), "history");

    const std::size_t H = hidden_;
    std::vector<TensorPtr> h(layers_), c(layers_);
    for (std::size_t i = 0; i < layers_; ++i) {
        h[i] = Tensor::zeros({std::size_t(1), H});
        c[i] = Tensor::zeros({std::size_t(1), H});
    }
    for (std::size_t t = 0; t < l_; ++t) {
        TensorPtr x = nn::slice_rows(tape, hist, t, t + 1);
        for (std::size_t i = 0; i < layers_; ++i) {
            auto zx = nn::linear(tape, x, wx_[i], b_[i]);
            switch (rkind_) {
                case RecurrentKind::Rnn: {
                    auto z = nn::add(tape, zx, nn::matmul(tape, h[i], wh_[i]));
                    h[i] = nn::tanh_op(tape, z);
                    break;
                }
                case RecurrentKind::Lstm: {
                    auto z = nn::add(tape, zx, nn::matmul(tape, h[i], wh_[i]));
                    auto ig = nn::sigmoid(tape, nn::slice_cols(tape, z, 0, H));
                    auto fg = nn::sigmoid(tape, nn::slice_cols(tape, z, H, 2 * H));
                    auto gg = nn::tanh_op(tape, nn::slice_cols(tape, z, 2 * H, 3 * H));
                    auto og = nn::sigmoid(tape, nn::slice_cols(tape, z, 3 * H, 4 * H));
                    c[i] = nn::add(tape, nn::mul(tape, fg, c[i]), nn::mul(tape, ig, gg));
                    h[i] = nn::mul(tape, og, nn::tanh_op(tape, c[i]));
                    break;
                }
                case RecurrentKind::Gru: {
                    auto zh = nn::matmul(tape, h[i], wh_[i]);
                    auto rg = nn::sigmoid(
                        tape, nn::add(tape, nn::slice_cols(tape, zx, 0, H),
                                      nn::slice_cols(tape, zh, 0, H)));
                    auto ug = nn::sigmoid(
                        tape, nn::add(tape, nn::slice_cols(tape, zx, H, 2 * H),
                                      nn::slice_cols(tape, zh, H, 2 * H)));
                    auto ng = nn::tanh_op(
                        tape,
                        nn::add(tape, nn::slice_cols(tape, zx, 2 * H, 3 * H),
                                nn::mul(tape, rg, nn::slice_cols(tape, zh, 2 * H, 3 * H))));
                    auto keep = nn::mul(tape, ug, h[i]);
                    auto fresh =
                        nn::mul(tape, nn::add_const(tape, nn::scale(tape, ug, -1.0),
                                                    std::vector<double>(H, 1.0)),
                                ng);
                    h[i] = nn::add(tape, keep, fresh);
                    break;
                }
            }
            x = h[i];
        }
    }
    auto out = out_fc_->forward(tape, h[layers_ - 1]);
    out = nn::scale(tape, out, norm.sigma);
    return nn::add_const(tape, out, std::vector<double>(k_, norm.mu));
}

Prediction RecurrentNet::predict(const std::vector<double>& history_db) {
    Tape tape;
    auto out = forward(tape, history_db);
    return {out->data};
}

std::vector<TensorPtr> RecurrentNet::parameters() {
    std::vector<TensorPtr> out;
    for (std::size_t i = 0; i < layers_; ++i) {
        out.push_back(wx_[i]);
        out.push_back(wh_[i]);
        out.push_back(b_[i]);
    }
    for (auto& p : out_fc_->parameters()) out.push_back(p);
    return out;
}

void RecurrentNet::save(const std::string& path, const std::string& config_digest) {
    std::vector<std::pair<std::string, TensorPtr>> named;
    for (std::size_t i = 0; i < layers_; ++i) {
        std::string p = "l" + std::to_string(i) + ".";
        named.emplace_back(p + "wx", wx_[i]);
        named.emplace_back(p + "wh", wh_[i]);
        named.emplace_back(p + "b", b_[i]);
    }
    named.emplace_back("out.w", out_fc_->weight);
    named.emplace_back("out.b", out_fc_->bias);
    std::map<std::string, std::string> meta{
        {"type", kind()},
        {"history_len", std::to_string(l_)},
        {"subcarriers", std::to_string(k_)},
        {"layers", std::to_string(layers_)},
        {"hidden", std::to_string(hidden_)},
        {"normalization", "window-zscore-v1"},
    };
    if (!config_digest.empty()) meta["config_digest"] = config_digest;
    nn::save_checkpoint(path, named, meta);
}

// ---- loading ----------------------------------------------------------------

TrainablePtr load_predictor(const std::string& path) {
    auto ckpt = nn::load_checkpoint(path);
    auto meta = [&](const std::string& key) -> std::string {
        auto it = ckpt.metadata.find(key);
        if (it == ckpt.metadata.end())
            throw std::runtime_error("checkpoint missing metadata key '" + key + "': " + path);
        return it->second;
    };
    auto meta_sz = [&](const std::string& key) { return std::size_t(std::stoull(meta(key))); };

    const std::string type = meta("type");
    TrainablePtr model;
    std::vector<std::pair<std::string, TensorPtr>> named;
    if (type == "sinr-net") {
        ModelConfig cfg;
        cfg.patch = meta_sz("patch");
        cfg.sa_iters = meta_sz("sa_iters");
        cfg.d_model = meta_sz("d_model");
        cfg.backbone_layers = meta_sz("backbone_layers");
        cfg.heads = meta_sz("heads");
        cfg.backbone = backbone_from_string(meta("backbone"));
        cfg.freeze = freeze_from_string(meta("freeze"));
        cfg.se_reduction = meta_sz("se_reduction");
        auto net = std::make_shared<SinrNet>(meta_sz("history_len"), meta_sz("subcarriers"),
                                             cfg, /*seed=*/0);
        named = net->named_parameters();
        model = net;
    } else if (type == "rnn" || type == "lstm" || type == "gru") {
        RecurrentKind kind = type == "rnn"   ? RecurrentKind::Rnn
                             : type == "lstm" ? RecurrentKind::Lstm
                                              : RecurrentKind::Gru;
        auto net = std::make_shared<RecurrentNet>(kind, meta_sz("history_len"),
                                                  meta_sz("subcarriers"), /*seed=*/0,
                                                  meta_sz("layers"), meta_sz("hidden"));
        for (std::size_t i = 0; i < net->layers_; ++i) {
            std::string p = "l" + std::to_string(i) + ".";
            named.emplace_back(p + "wx", net->wx_[i]);
            named.emplace_back(p + "wh", net->wh_[i]);
            named.emplace_back(p + "b", net->b_[i]);
        }
        named.emplace_back("out.w", net->out_fc_->weight);
        named.emplace_back("out.b", net->out_fc_->bias);
        model = net;
    } else {
        throw std::runtime_error("unknown predictor type in checkpoint: " + type);
    }

    for (auto& [name, dst] : named) {
        auto src = ckpt.find(name);
        if (!src)
            throw std::runtime_error("checkpoint missing tensor '" + name + "': " + path);
        if (src->shape != dst->shape)
            throw std::runtime_error("checkpoint tensor '" + name + "' shape mismatch: expected " +
                                     nn::shape_str(dst->shape) + " got " +
                                     nn::shape_str(src->shape));
        dst->data = src->data;
    }
    return model;
}

nn::GradCheckReport grad_check_model(TrainablePredictor& model,
                                     const std::vector<double>& history_db, double tol,
                                     double h) {
    // fixed pseudo-random weights keep the loss sensitive to every output
    auto weight = [](std::size_t i) { return 0.25 + double((i * 2654435761u) % 97) / 64.0; };
    auto loss_of = [&] {
        nn::Tape tape;
        auto out = model.forward(tape, history_db);
        double s = 0.0;
        for (std::size_t i = 0; i < out->numel(); ++i) s += weight(i) * out->data[i];
        return s;
    };
    auto params = model.parameters();
    nn::Tape tape;
    for (auto& p : params) tape.watch(p);
    auto out = model.forward(tape, history_db);
    auto w = nn::Tensor::zeros(out->shape, "gc.w");
    for (std::size_t i = 0; i < w->numel(); ++i) w->data[i] = weight(i);
    tape.backward(nn::sum_all(tape, nn::mul(tape, out, w)));

    nn::GradCheckReport report;
    for (auto& p : params) {
        if (!p->trainable) continue;
        p->ensure_grad();
        for (std::size_t i = 0; i < p->numel(); ++i) {
            const double saved = p->data[i];
            p->data[i] = saved + h;
            double up = loss_of();
            p->data[i] = saved - h;
            double down = loss_of();
            p->data[i] = saved;
            double numeric = (up - down) / (2.0 * h);
            double rel = std::abs(p->grad[i] - numeric) / std::max(std::abs(numeric), 1e-8);
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.worst_location = p->name + "[" + std::to_string(i) + "]";
            }
        }
    }
    report.pass = report.max_rel_err < tol;
    return report;
}

}  // namespace amc::pred
