// tensor.hpp - minimal dense tensor with recorded-graph reverse-mode autodiff
//
// Tensors are row-major double buffers. Ops record their backward closure
// on a Tape; Tape::backward replays them in reverse. Gradients accumulate
// only into tensors with requires_grad set; frozen parameters keep their
// grad slot untouched.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace amc::nn {

struct Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until backward touches it
    bool trainable = false;    // parameter updated by the optimizer
    bool requires_grad = false;
    std::string name;

    std::size_t numel() const { return data.size(); }
    std::size_t dim(std::size_t i) const { return shape.at(i); }

    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
    }
    void zero_grad() {
        if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
    }
    void set_trainable(bool t) {
        trainable = t;
        requires_grad = t;
    }

    static TensorPtr zeros(std::vector<std::size_t> shape, std::string name = {});
    static TensorPtr full(std::vector<std::size_t> shape, double v, std::string name = {});
    static TensorPtr from(std::vector<std::size_t> shape, std::vector<double> values,
                          std::string name = {});
    // uniform in [-a, a]
    static TensorPtr uniform(std::vector<std::size_t> shape, double a, std::mt19937_64& rng,
                             std::string name = {});
};

std::size_t shape_numel(const std::vector<std::size_t>& shape);
std::string shape_str(const std::vector<std::size_t>& shape);

class shape_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Records backward closures for one forward pass. Single use: backward()
// may run once per set of recorded ops.
class Tape {
public:
    void record(TensorPtr out, std::function<void()> backward_fn);
    void watch(TensorPtr t);  // register a leaf so its grad is reset

    // loss must be a scalar reachable from recorded ops.
    void backward(const TensorPtr& loss);
    void clear();
    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        TensorPtr out;
        std::function<void()> fn;
    };
    std::vector<Node> nodes_;
    std::vector<TensorPtr> watched_;
    bool consumed_ = false;
};

// ---- primitive ops -------------------------------------------------------

TensorPtr add(Tape& t, TensorPtr a, TensorPtr b);
TensorPtr sub(Tape& t, TensorPtr a, TensorPtr b);
TensorPtr mul(Tape& t, TensorPtr a, TensorPtr b);
TensorPtr scale(Tape& t, TensorPtr a, double s);
TensorPtr add_const(Tape& t, TensorPtr a, const std::vector<double>& c);

TensorPtr relu(Tape& t, TensorPtr a);
TensorPtr sigmoid(Tape& t, TensorPtr a);
TensorPtr tanh_op(Tape& t, TensorPtr a);

// a[m x n] * b[n x p]
TensorPtr matmul(Tape& t, TensorPtr a, TensorPtr b);
// x[m x n] * w[n x p] + bias[p] broadcast over rows
TensorPtr linear(Tape& t, TensorPtr x, TensorPtr w, TensorPtr bias);

// view with identical data, new shape (copy with pass-through gradient)
TensorPtr reshape(Tape& t, TensorPtr a, std::vector<std::size_t> shape);
// rows [from, to) of a 2-d tensor
TensorPtr slice_rows(Tape& t, TensorPtr a, std::size_t from, std::size_t to);
TensorPtr slice_cols(Tape& t, TensorPtr a, std::size_t from, std::size_t to);
TensorPtr concat_cols(Tape& t, const std::vector<TensorPtr>& parts);

// 2-d transpose
TensorPtr transpose(Tape& t, TensorPtr a);

// softmax along the last axis of a 2-d tensor
TensorPtr softmax_rows(Tape& t, TensorPtr a);
// layer norm over the last axis of a 2-d tensor [rows x d]
TensorPtr layer_norm(Tape& t, TensorPtr x, TensorPtr gain, TensorPtr bias, double eps = 1e-5);

// x[C x H x W], w[Cout x Cin x kh x kw], 3x3 stride 1 pad 1 by default
TensorPtr conv2d(Tape& t, TensorPtr x, TensorPtr w, TensorPtr bias);
// [C x H x W] -> [C]
TensorPtr global_avg_pool(Tape& t, TensorPtr x);
// x[C x H x W] scaled per channel by s[C]
TensorPtr scale_channels(Tape& t, TensorPtr x, TensorPtr s);

TensorPtr sum_all(Tape& t, TensorPtr a);       // -> scalar [1]
TensorPtr mean_all(Tape& t, TensorPtr a);      // -> scalar [1]
TensorPtr div_scalar(Tape& t, TensorPtr num, TensorPtr den);  // both scalar [1]

}  // namespace amc::nn
