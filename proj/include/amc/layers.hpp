// layers.hpp - the layer set used by the prediction network, plus Adam and
// a finite-difference gradient checker.

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "amc/tensor.hpp"

namespace amc::nn {

enum class LayerKind {
    Conv2D,
    FullyConnected,
    ReLU,
    Sigmoid,
    GlobalAvgPool2D,
    LayerNorm,
    MultiHeadSelfAttention,
    Softmax,
};

std::string_view layer_kind_name(LayerKind k);

class Layer {
public:
    virtual ~Layer() = default;
    virtual LayerKind kind() const = 0;
    virtual TensorPtr forward(Tape& tape, TensorPtr x) = 0;
    virtual std::vector<TensorPtr> parameters() { return {}; }
};

using LayerPtr = std::shared_ptr<Layer>;

// 2-d conv, odd kernel, stride 1, same padding. Default geometry 3x3.
class Conv2DLayer : public Layer {
public:
    Conv2DLayer(std::size_t in_ch, std::size_t out_ch, std::mt19937_64& rng,
                std::size_t kh = 3, std::size_t kw = 3);
    LayerKind kind() const override { return LayerKind::Conv2D; }
    TensorPtr forward(Tape& tape, TensorPtr x) override;
    std::vector<TensorPtr> parameters() override { return {weight, bias}; }
    TensorPtr weight, bias;
};

class DenseLayer : public Layer {
public:
    DenseLayer(std::size_t in, std::size_t out, std::mt19937_64& rng, bool with_bias = true);
    LayerKind kind() const override { return LayerKind::FullyConnected; }
    TensorPtr forward(Tape& tape, TensorPtr x) override;
    std::vector<TensorPtr> parameters() override;
    TensorPtr weight, bias;  // bias may be null
};

class ReLULayer : public Layer {
public:
    LayerKind kind() const override { return LayerKind::ReLU; }
    TensorPtr forward(Tape& tape, TensorPtr x) override {
        min_abs_preact = 1e300;
        for (double v : x->data) min_abs_preact = std::min(min_abs_preact, std::abs(v));
        return relu(tape, std::move(x));
    }
    double min_abs_preact = 1e300;  // kink proximity of the last forward
};

class SigmoidLayer : public Layer {
public:
    LayerKind kind() const override { return LayerKind::Sigmoid; }
    TensorPtr forward(Tape& tape, TensorPtr x) override { return sigmoid(tape, std::move(x)); }
};

class GlobalAvgPool2DLayer : public Layer {
public:
    LayerKind kind() const override { return LayerKind::GlobalAvgPool2D; }
    TensorPtr forward(Tape& tape, TensorPtr x) override;
};

class SoftmaxLayer : public Layer {
public:
    LayerKind kind() const override { return LayerKind::Softmax; }
    TensorPtr forward(Tape& tape, TensorPtr x) override { return softmax_rows(tape, std::move(x)); }
};

class LayerNormLayer : public Layer {
public:
    explicit LayerNormLayer(std::size_t d, double eps = 1e-5);
    LayerKind kind() const override { return LayerKind::LayerNorm; }
    TensorPtr forward(Tape& tape, TensorPtr x) override;
    std::vector<TensorPtr> parameters() override { return {gain, bias}; }
    TensorPtr gain, bias;
    double eps;
};

// Unmasked multi-head self-attention over a [T x d_model] sequence.
class MultiHeadSelfAttentionLayer : public Layer {
public:
    MultiHeadSelfAttentionLayer(std::size_t d_model, std::size_t heads, std::mt19937_64& rng);
    LayerKind kind() const override { return LayerKind::MultiHeadSelfAttention; }
    TensorPtr forward(Tape& tape, TensorPtr x) override;
    std::vector<TensorPtr> parameters() override { return {wq, wk, wv, wo}; }
    TensorPtr wq, wk, wv, wo;
    std::size_t d_model, heads;
};

// ---- optimizer -------------------------------------------------------------

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    // Applies one bias-corrected update to every trainable tensor in params.
    // Non-trainable tensors are skipped entirely. NaN/inf in a gradient
    // rejects the whole step.
    void step(const std::vector<TensorPtr>& params);
    std::uint64_t step_count() const { return step_; }
    const AdamConfig& config() const { return cfg_; }
    void set_lr(double lr) { cfg_.lr = lr; }

private:
    struct Moments {
        std::vector<double> m, v;
    };
    AdamConfig cfg_;
    std::uint64_t step_ = 0;
    std::map<const Tensor*, Moments> state_;
};

// ---- gradient checking ------------------------------------------------------

struct GradCheckReport {
    double max_rel_err = 0.0;
    bool pass = false;
    std::string worst_location;
};

// Central finite differences (step h) of loss = sum(chain(input)) against the
// recorded-graph gradients, over the input and every trainable parameter.
// Inputs sitting within 1e-3 of a ReLU kink are re-randomized.
GradCheckReport grad_check(const std::vector<LayerPtr>& chain, TensorPtr input, double tol,
                           double h = 1e-5, std::uint64_t reseed = 1);

// ---- checkpoints -------------------------------------------------------------

// "AMCK" container: named tensors stored as little-endian float32.
void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, TensorPtr>>& tensors,
                     const std::map<std::string, std::string>& metadata = {});

struct Checkpoint {
    std::vector<std::pair<std::string, TensorPtr>> tensors;
    std::map<std::string, std::string> metadata;
    TensorPtr find(const std::string& name) const;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace amc::nn
