#include "amc/layers.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace amc::nn {

std::string_view layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Conv2D: return "Conv2D";
        case LayerKind::FullyConnected: return "FullyConnected";
        case LayerKind::ReLU: return "ReLU";
        case LayerKind::Sigmoid: return "Sigmoid";
        case LayerKind::GlobalAvgPool2D: return "GlobalAvgPool2D";
        case LayerKind::LayerNorm: return "LayerNorm";
        case LayerKind::MultiHeadSelfAttention: return "MultiHeadSelfAttention";
        case LayerKind::Softmax: return "Softmax";
    }
    return "?";
}

namespace {

TensorPtr glorot(std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out,
                 std::mt19937_64& rng, std::string name) {
    double a = std::sqrt(6.0 / double(fan_in + fan_out));
    auto t = Tensor::uniform(std::move(shape), a, rng, std::move(name));
    t->set_trainable(true);
    return t;
}

TensorPtr zero_param(std::vector<std::size_t> shape, std::string name) {
    auto t = Tensor::zeros(std::move(shape), std::move(name));
    t->set_trainable(true);
    return t;
}

}  // namespace

Conv2DLayer::Conv2DLayer(std::size_t in_ch, std::size_t out_ch, std::mt19937_64& rng,
                         std::size_t kh, std::size_t kw) {
    if (in_ch == 0 || out_ch == 0) throw shape_error("Conv2D: channel counts must be positive");
    if (kh % 2 == 0 || kw % 2 == 0) throw shape_error("Conv2D: kernel dims must be odd");
    weight = glorot({out_ch, in_ch, kh, kw}, in_ch * kh * kw, out_ch * kh * kw, rng, "conv.w");
    bias = zero_param({out_ch}, "conv.b");
}

TensorPtr Conv2DLayer::forward(Tape& tape, TensorPtr x) { return conv2d(tape, std::move(x), weight, bias); }

DenseLayer::DenseLayer(std::size_t in, std::size_t out, std::mt19937_64& rng, bool with_bias) {
    if (in == 0 || out == 0) throw shape_error("FullyConnected: dims must be positive");
    weight = glorot({in, out}, in, out, rng, "fc.w");
    if (with_bias) bias = zero_param({out}, "fc.b");
}

TensorPtr DenseLayer::forward(Tape& tape, TensorPtr x) {
    if (x->shape.size() == 1) x = reshape(tape, std::move(x), {std::size_t(1), x->numel()});
    return linear(tape, std::move(x), weight, bias);
}

std::vector<TensorPtr> DenseLayer::parameters() {
    if (bias) return {weight, bias};
    return {weight};
}

TensorPtr GlobalAvgPool2DLayer::forward(Tape& tape, TensorPtr x) {
    return global_avg_pool(tape, std::move(x));
}

LayerNormLayer::LayerNormLayer(std::size_t d, double eps_) : eps(eps_) {
    if (d == 0) throw shape_error("LayerNorm: feature dim must be positive");
    gain = Tensor::full({d}, 1.0, "ln.gain");
    gain->set_trainable(true);
    bias = zero_param({d}, "ln.bias");
}

TensorPtr LayerNormLayer::forward(Tape& tape, TensorPtr x) {
    return layer_norm(tape, std::move(x), gain, bias, eps);
}

MultiHeadSelfAttentionLayer::MultiHeadSelfAttentionLayer(std::size_t d, std::size_t h,
                                                         std::mt19937_64& rng)
    : d_model(d), heads(h) {
    if (h == 0 || d == 0) throw shape_error("MultiHeadSelfAttention: dims must be positive");
    if (d % h != 0)
        throw shape_error("MultiHeadSelfAttention: d_model " + std::to_string(d) +
                          " not divisible by head count " + std::to_string(h));
    wq = glorot({d, d}, d, d, rng, "attn.wq");
    wk = glorot({d, d}, d, d, rng, "attn.wk");
    wv = glorot({d, d}, d, d, rng, "attn.wv");
    wo = glorot({d, d}, d, d, rng, "attn.wo");
}

TensorPtr MultiHeadSelfAttentionLayer::forward(Tape& tape, TensorPtr x) {
    if (x->shape.size() != 2 || x->shape[1] != d_model)
        throw shape_error("MultiHeadSelfAttention: expected [T x " + std::to_string(d_model) +
                          "], got " + shape_str(x->shape));
    auto q = matmul(tape, x, wq);
    auto k = matmul(tape, x, wk);
    auto v = matmul(tape, x, wv);
    const std::size_t dh = d_model / heads;
    const double inv_sqrt = 1.0 / std::sqrt(double(dh));
    std::vector<TensorPtr> head_outs;
    head_outs.reserve(heads);
    for (std::size_t hidx = 0; hidx < heads; ++hidx) {
        auto qh = slice_cols(tape, q, hidx * dh, (hidx + 1) * dh);
        auto kh = slice_cols(tape, k, hidx * dh, (hidx + 1) * dh);
        auto vh = slice_cols(tape, v, hidx * dh, (hidx + 1) * dh);
        auto scores = scale(tape, matmul(tape, qh, transpose(tape, kh)), inv_sqrt);
        auto attn = softmax_rows(tape, scores);
        head_outs.push_back(matmul(tape, attn, vh));
    }
    return matmul(tape, concat_cols(tape, head_outs), wo);
}

// ---- Adam ------------------------------------------------------------------

void Adam::step(const std::vector<TensorPtr>& params) {
    // validate first so a NaN rejects the step without partial updates
    for (auto& p : params) {
        if (!p->trainable) continue;
        if (p->grad.size() != p->data.size()) continue;  // untouched by backward
        for (double g : p->grad)
            if (!std::isfinite(g))
                throw std::runtime_error("adam: non-finite gradient in parameter '" +
                                         (p->name.empty() ? std::string("<unnamed>") : p->name) +
                                         "'");
    }
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, double(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, double(step_));
    for (auto& p : params) {
        if (!p->trainable || p->grad.size() != p->data.size()) continue;
        auto& mo = state_[p.get()];
        if (mo.m.size() != p->numel()) {
            mo.m.assign(p->numel(), 0.0);
            mo.v.assign(p->numel(), 0.0);
        }
        for (std::size_t i = 0; i < p->numel(); ++i) {
            double g = p->grad[i];
            mo.m[i] = cfg_.beta1 * mo.m[i] + (1.0 - cfg_.beta1) * g;
            mo.v[i] = cfg_.beta2 * mo.v[i] + (1.0 - cfg_.beta2) * g * g;
            double mhat = mo.m[i] / bc1;
            double vhat = mo.v[i] / bc2;
            p->data[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

// ---- gradient check ----------------------------------------------------------

namespace {

double chain_loss(const std::vector<LayerPtr>& chain, const TensorPtr& input, Tape* tape_out,
                  TensorPtr* loss_out) {
    Tape local;
    Tape& tape = tape_out ? *tape_out : local;
    TensorPtr x = input;
    for (auto& l : chain) x = l->forward(tape, x);
    // Weighted sum rather than a plain sum: a plain sum has an identically
    // zero input gradient through softmax and layer norm (row sums are
    // constant), which finite differences cannot resolve.
    auto w = Tensor::zeros(x->shape, "gc.w");
    for (std::size_t i = 0; i < w->numel(); ++i)
        w->data[i] = 0.25 + double((i * 2654435761u) % 97) / 64.0;
    auto loss = sum_all(tape, mul(tape, x, w));
    if (loss_out) *loss_out = loss;
    return loss->data[0];
}

double min_kink_distance(const std::vector<LayerPtr>& chain) {
    double d = 1e300;
    for (auto& l : chain)
        if (auto* r = dynamic_cast<ReLULayer*>(l.get())) d = std::min(d, r->min_abs_preact);
    return d;
}

}  // namespace

GradCheckReport grad_check(const std::vector<LayerPtr>& chain, TensorPtr input, double tol,
                           double h, std::uint64_t reseed) {
    // move off ReLU kinks: re-randomize the input if any preactivation is
    // within 1e-3 of zero
    for (int attempt = 0; attempt < 16; ++attempt) {
        chain_loss(chain, input, nullptr, nullptr);
        if (min_kink_distance(chain) >= 1e-3) break;
        std::mt19937_64 rng(reseed + 7919 * std::uint64_t(attempt));
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (auto& v : input->data) v = dist(rng);
    }

    input->requires_grad = true;
    Tape tape;
    TensorPtr loss;
    chain_loss(chain, input, &tape, &loss);
    tape.backward(loss);

    std::vector<std::pair<std::string, TensorPtr>> targets;
    targets.emplace_back("input", input);
    std::size_t li = 0;
    for (auto& l : chain) {
        for (auto& p : l->parameters())
            if (p->trainable)
                targets.emplace_back("layer" + std::to_string(li) + "." +
                                         std::string(layer_kind_name(l->kind())) + "." + p->name,
                                     p);
        ++li;
    }

    GradCheckReport rep;
    for (auto& [tname, t] : targets) {
        t->ensure_grad();
        for (std::size_t i = 0; i < t->numel(); ++i) {
            double keep = t->data[i];
            t->data[i] = keep + h;
            double lp = chain_loss(chain, input, nullptr, nullptr);
            t->data[i] = keep - h;
            double lm = chain_loss(chain, input, nullptr, nullptr);
            t->data[i] = keep;
            double numeric = (lp - lm) / (2.0 * h);
            double analytic = t->grad[i];
            if (!std::isfinite(analytic)) {
                rep.max_rel_err = 1e300;
                rep.pass = false;
                rep.worst_location = tname + "[" + std::to_string(i) + "] non-finite gradient";
                return rep;
            }
            double rel = std::abs(analytic - numeric) / std::max(std::abs(numeric), 1e-8);
            if (rel > rep.max_rel_err) {
                rep.max_rel_err = rel;
                rep.worst_location = tname + "[" + std::to_string(i) + "]";
            }
        }
    }
    rep.pass = rep.max_rel_err < tol;
    return rep;
}

// ---- checkpoint I/O -----------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'A', 'M', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

void write_string(std::ostream& os, const std::string& s) {
    write_pod<std::uint32_t>(os, std::uint32_t(s.size()));
    os.write(s.data(), std::streamsize(s.size()));
}

std::string read_string(std::istream& is) {
    auto n = read_pod<std::uint32_t>(is);
    std::string s(n, '\0');
    is.read(s.data(), std::streamsize(n));
    if (!is) throw std::runtime_error("checkpoint: truncated string");
    return s;
}

}  // namespace

void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, TensorPtr>>& tensors,
                     const std::map<std::string, std::string>& metadata) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open for write: " + path);
    os.write(kMagic, 4);
    write_pod<std::uint32_t>(os, kVersion);
    write_pod<std::uint32_t>(os, std::uint32_t(metadata.size()));
    for (auto& [k, v] : metadata) {
        write_string(os, k);
        write_string(os, v);
    }
    write_pod<std::uint32_t>(os, std::uint32_t(tensors.size()));
    for (auto& [name, t] : tensors) {
        write_string(os, name);
        write_pod<std::uint8_t>(os, t->trainable ? 1 : 0);
        write_pod<std::uint32_t>(os, std::uint32_t(t->shape.size()));
        for (auto d : t->shape) write_pod<std::uint64_t>(os, std::uint64_t(d));
        for (double v : t->data) write_pod<float>(os, float(v));
    }
    if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    auto version = read_pod<std::uint32_t>(is);
    if (version != kVersion)
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    Checkpoint ckpt;
    auto nmeta = read_pod<std::uint32_t>(is);
    for (std::uint32_t i = 0; i < nmeta; ++i) {
        auto k = read_string(is);
        ckpt.metadata[k] = read_string(is);
    }
    auto ntensors = read_pod<std::uint32_t>(is);
    for (std::uint32_t i = 0; i < ntensors; ++i) {
        auto name = read_string(is);
        bool trainable = read_pod<std::uint8_t>(is) != 0;
        auto rank = read_pod<std::uint32_t>(is);
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) d = std::size_t(read_pod<std::uint64_t>(is));
        auto t = Tensor::zeros(shape, name);
        for (auto& v : t->data) v = double(read_pod<float>(is));
        t->set_trainable(trainable);
        ckpt.tensors.emplace_back(std::move(name), std::move(t));
    }
    return ckpt;
}

TensorPtr Checkpoint::find(const std::string& name) const {
    for (auto& [n, t] : tensors)
        if (n == name) return t;
    return nullptr;
}

}  // namespace amc::nn
