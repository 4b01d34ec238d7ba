// predictors.hpp - channel-quality predictors behind one interface: the
// four-stage attention/backbone network, the no-prediction baseline, the
// recurrent baselines, and a test-only genie.

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "amc/layers.hpp"
#include "amc/tensor.hpp"

namespace amc::pred {

struct Prediction {
    std::vector<double> sinr_db;  // 1 x K
    std::vector<double> linear() const;
};

// (x - mu) / sigma over the whole window; sigma floored at 1e-6
struct Normalization {
    double mu = 0.0;
    double sigma = 1.0;
};
Normalization normalize(const std::vector<double>& history, std::vector<double>& out);

// ||pred - truth||^2 / ||truth||^2, linear ratio
double nmse(const std::vector<double>& pred, const std::vector<double>& truth);
// dB report, floored at -100 dB
double nmse_db(double ratio);

class Predictor {
public:
    virtual ~Predictor() = default;
    virtual std::string kind() const = 0;
    // history is L x K in dB
    virtual Prediction predict(const std::vector<double>& history_db) = 0;
    virtual std::size_t history_len() const = 0;
    virtual std::size_t subcarriers() const = 0;
};

using PredictorPtr = std::shared_ptr<Predictor>;

// Last measured row, verbatim.
class NpPredictor : public Predictor {
public:
    NpPredictor(std::size_t l, std::size_t k) : l_(l), k_(k) {}
    std::string kind() const override { return "np"; }
    Prediction predict(const std::vector<double>& history_db) override;
    std::size_t history_len() const override { return l_; }
    std::size_t subcarriers() const override { return k_; }

private:
    std::size_t l_, k_;
};

// Test-only oracle: the simulation loop feeds it the true future row.
class GeniePredictor : public Predictor {
public:
    GeniePredictor(std::size_t l, std::size_t k) : l_(l), k_(k) {}
    std::string kind() const override { return "genie"; }
    void set_future(std::vector<double> truth_db) { future_ = std::move(truth_db); }
    Prediction predict(const std::vector<double>&) override { return {future_}; }
    std::size_t history_len() const override { return l_; }
    std::size_t subcarriers() const override { return k_; }

private:
    std::size_t l_, k_;
    std::vector<double> future_;
};

// A predictor with a differentiable forward pass, trainable by the
// experiment harness.
class TrainablePredictor : public Predictor {
public:
    // [1 x K] prediction in dB, on the tape
    virtual nn::TensorPtr forward(nn::Tape& tape, const std::vector<double>& history_db) = 0;
    virtual std::vector<nn::TensorPtr> parameters() = 0;
    virtual void save(const std::string& path, const std::string& config_digest = {}) = 0;

    std::size_t trainable_parameter_count();
    std::size_t total_parameter_count();
};

using TrainablePtr = std::shared_ptr<TrainablePredictor>;

enum class BackboneKind { TinyTransformer, Identity, None };
enum class FreezePolicy { LnOnly, AllParams, Frozen, LnMlp };

std::string to_string(BackboneKind k);
std::string to_string(FreezePolicy p);
BackboneKind backbone_from_string(const std::string& s);
FreezePolicy freeze_from_string(const std::string& s);

struct ModelConfig {
    std::size_t patch = 4;            // N
    std::size_t sa_iters = 4;         // N_SA
    std::size_t d_model = 64;
    std::size_t backbone_layers = 2;  // N_LLM (paper value 6; 2 is the desk default)
    std::size_t heads = 4;
    BackboneKind backbone = BackboneKind::TinyTransformer;
    FreezePolicy freeze = FreezePolicy::LnOnly;
    std::size_t se_reduction = 2;     // r

    void validate() const;
};

// normalize -> patchify -> SINR attention -> embed(+PE) -> backbone -> head
// -> denormalize. Processes SINR in dB end to end.
class SinrNet : public TrainablePredictor {
public:
    SinrNet(std::size_t history_len, std::size_t subcarriers, ModelConfig config,
            std::uint64_t seed);

    std::string kind() const override { return "sinr-net"; }
    Prediction predict(const std::vector<double>& history_db) override;
    nn::TensorPtr forward(nn::Tape& tape, const std::vector<double>& history_db) override;
    std::vector<nn::TensorPtr> parameters() override;
    void save(const std::string& path, const std::string& config_digest = {}) override;
    std::size_t history_len() const override { return l_; }
    std::size_t subcarriers() const override { return k_; }

    const ModelConfig& config() const { return cfg_; }
    std::size_t patch_count() const { return lp_; }  // L'
    std::size_t backbone_trainable_count();
    std::size_t backbone_total_count();

    // exposed for stage-level tests
    nn::TensorPtr patchify(nn::Tape& tape, const std::vector<double>& normalized) const;
    nn::TensorPtr sinr_attention(nn::Tape& tape, nn::TensorPtr x);
    nn::TensorPtr embed(nn::Tape& tape, nn::TensorPtr x);
    nn::TensorPtr backbone_forward(nn::Tape& tape, nn::TensorPtr x);
    nn::TensorPtr output_head(nn::Tape& tape, nn::TensorPtr x, const Normalization& norm);
    const std::vector<double>& positional_encoding() const { return pe_; }

private:
    friend TrainablePtr load_predictor(const std::string& path);
    struct SaBlock {
        std::shared_ptr<nn::Conv2DLayer> conv1, conv2;
        std::shared_ptr<nn::DenseLayer> se_fc1, se_fc2;
    };
    struct BackboneBlock {
        std::shared_ptr<nn::LayerNormLayer> ln1, ln2;
        std::shared_ptr<nn::MultiHeadSelfAttentionLayer> attn;
        std::shared_ptr<nn::DenseLayer> ff1, ff2;
    };
    void apply_freeze_policy();
    std::vector<std::pair<std::string, nn::TensorPtr>> named_parameters();

    std::size_t l_, k_, lp_;
    ModelConfig cfg_;
    std::vector<SaBlock> sa_;
    std::shared_ptr<nn::DenseLayer> embed_fc_;
    std::vector<BackboneBlock> blocks_;
    std::shared_ptr<nn::DenseLayer> head_fc1_, head_fc2_;
    std::vector<double> pe_;  // L' x d_model
};

enum class RecurrentKind { Rnn, Lstm, Gru };

// Stacked recurrent baseline: 4 cells deep, hidden width 128 by default,
// final FC to K; same normalization convention as the main model.
class RecurrentNet : public TrainablePredictor {
public:
    RecurrentNet(RecurrentKind kind, std::size_t history_len, std::size_t subcarriers,
                 std::uint64_t seed, std::size_t layers = 4, std::size_t hidden = 128);

    std::string kind() const override;
    Prediction predict(const std::vector<double>& history_db) override;
    nn::TensorPtr forward(nn::Tape& tape, const std::vector<double>& history_db) override;
    std::vector<nn::TensorPtr> parameters() override;
    void save(const std::string& path, const std::string& config_digest = {}) override;
    std::size_t history_len() const override { return l_; }
    std::size_t subcarriers() const override { return k_; }

private:
    friend TrainablePtr load_predictor(const std::string& path);
    RecurrentKind rkind_;
    std::size_t l_, k_, layers_, hidden_;
    // per layer: input and recurrent weight matrices plus bias, gate-stacked
    std::vector<nn::TensorPtr> wx_, wh_, b_;
    std::shared_ptr<nn::DenseLayer> out_fc_;
    std::size_t gates() const;
};

// Reconstructs a trainable predictor from its checkpoint metadata.
TrainablePtr load_predictor(const std::string& path);

// Finite-difference check of the recorded-graph gradients of every trainable
// parameter; loss is the sum of the forward output for a fixed history.
nn::GradCheckReport grad_check_model(TrainablePredictor& model,
                                     const std::vector<double>& history_db, double tol,
                                     double h = 1e-5);

}  // namespace amc::pred
