#include "amc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "amc/kernels.hpp"

namespace amc::nn {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
    os << "]";
    return os.str();
}

namespace {

void check_shape(const std::vector<std::size_t>& shape) {
    if (shape.empty()) throw shape_error("tensor shape must have at least one dim");
    for (auto d : shape)
        if (d == 0) throw shape_error("tensor dims must be positive, got " + shape_str(shape));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape != b.shape)
        throw shape_error(std::string(op) + ": shape mismatch " + shape_str(a.shape) + " vs " +
                          shape_str(b.shape));
}

TensorPtr make_like(std::vector<std::size_t> shape, bool requires_grad) {
    auto t = Tensor::zeros(std::move(shape));
    t->requires_grad = requires_grad;
    return t;
}

}  // namespace

TensorPtr Tensor::zeros(std::vector<std::size_t> shape, std::string name) {
    check_shape(shape);
    auto t = std::make_shared<Tensor>();
    t->data.assign(shape_numel(shape), 0.0);
    t->shape = std::move(shape);
    t->name = std::move(name);
    return t;
}

TensorPtr Tensor::full(std::vector<std::size_t> shape, double v, std::string name) {
    auto t = zeros(std::move(shape), std::move(name));
    std::fill(t->data.begin(), t->data.end(), v);
    return t;
}

TensorPtr Tensor::from(std::vector<std::size_t> shape, std::vector<double> values,
                       std::string name) {
    check_shape(shape);
    if (values.size() != shape_numel(shape))
        throw shape_error("value count " + std::to_string(values.size()) +
                          " does not match shape " + shape_str(shape));
    auto t = std::make_shared<Tensor>();
    t->shape = std::move(shape);
    t->data = std::move(values);
    t->name = std::move(name);
    return t;
}

TensorPtr Tensor::uniform(std::vector<std::size_t> shape, double a, std::mt19937_64& rng,
                          std::string name) {
    auto t = zeros(std::move(shape), std::move(name));
    std::uniform_real_distribution<double> dist(-a, a);
    for (auto& v : t->data) v = dist(rng);
    return t;
}

void Tape::record(TensorPtr out, std::function<void()> backward_fn) {
    nodes_.push_back({std::move(out), std::move(backward_fn)});
}

void Tape::watch(TensorPtr t) { watched_.push_back(std::move(t)); }

void Tape::backward(const TensorPtr& loss) {
    if (consumed_) throw std::runtime_error("backward called twice on the same tape");
    if (loss->numel() != 1)
        throw std::runtime_error("backward requires a scalar loss, got " + shape_str(loss->shape));
    consumed_ = true;
    for (auto& n : nodes_)
        if (n.out->requires_grad) {
            n.out->ensure_grad();
            n.out->zero_grad();
        }
    for (auto& w : watched_)
        if (w->requires_grad) {
            w->ensure_grad();
            w->zero_grad();
        }
    loss->ensure_grad();
    loss->grad[0] = 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) it->fn();
}

void Tape::clear() {
    nodes_.clear();
    watched_.clear();
    consumed_ = false;
}

// ---- op helpers ------------------------------------------------------------

namespace {

// accumulate src into t->grad iff it participates in differentiation
inline bool wants_grad(const TensorPtr& t) { return t->requires_grad; }

TensorPtr unary_out(Tape& tape, const TensorPtr& a, std::vector<std::size_t> shape) {
    tape.watch(a);
    return make_like(std::move(shape), a->requires_grad);
}

TensorPtr binary_out(Tape& tape, const TensorPtr& a, const TensorPtr& b,
                     std::vector<std::size_t> shape) {
    tape.watch(a);
    tape.watch(b);
    return make_like(std::move(shape), a->requires_grad || b->requires_grad);
}

}  // namespace

TensorPtr add(Tape& t, TensorPtr a, TensorPtr b) {
    require_same_shape(*a, *b, "add");
    auto out = binary_out(t, a, b, a->shape);
    kern::add(a->numel(), a->data.data(), b->data.data(), out->data.data());
    t.record(out, [a, b, out] {
        if (wants_grad(a)) {
            a->ensure_grad();
            kern::axpy(a->numel(), 1.0, out->grad.data(), a->grad.data());
        }
        if (wants_grad(b)) {
            b->ensure_grad();
            kern::axpy(b->numel(), 1.0, out->grad.data(), b->grad.data());
        }
    });
    return out;
}

TensorPtr sub(Tape& t, TensorPtr a, TensorPtr b) {
    require_same_shape(*a, *b, "sub");
    auto out = binary_out(t, a, b, a->shape);
    for (std::size_t i = 0; i < out->numel(); ++i) out->data[i] = a->data[i] - b->data[i];
    t.record(out, [a, b, out] {
        if (wants_grad(a)) {
            a->ensure_grad();
            kern::axpy(a->numel(), 1.0, out->grad.data(), a->grad.data());
        }
        if (wants_grad(b)) {
            b->ensure_grad();
            kern::axpy(b->numel(), -1.0, out->grad.data(), b->grad.data());
        }
    });
    return out;
}

TensorPtr mul(Tape& t, TensorPtr a, TensorPtr b) {
    require_same_shape(*a, *b, "mul");
    auto out = binary_out(t, a, b, a->shape);
    kern::mul(a->numel(), a->data.data(), b->data.data(), out->data.data());
    t.record(out, [a, b, out] {
        const std::size_t n = out->numel();
        if (wants_grad(a)) {
            a->ensure_grad();
            for (std::size_t i = 0; i < n; ++i) a->grad[i] += out->grad[i] * b->data[i];
        }
        if (wants_grad(b)) {
            b->ensure_grad();
            for (std::size_t i = 0; i < n; ++i) b->grad[i] += out->grad[i] * a->data[i];
        }
    });
    return out;
}

TensorPtr scale(Tape& t, TensorPtr a, double s) {
    auto out = unary_out(t, a, a->shape);
    for (std::size_t i = 0; i < a->numel(); ++i) out->data[i] = a->data[i] * s;
    t.record(out, [a, out, s] {
        if (wants_grad(a)) {
            a->ensure_grad();
            kern::axpy(a->numel(), s, out->grad.data(), a->grad.data());
        }
    });
    return out;
}

TensorPtr add_const(Tape& t, TensorPtr a, const std::vector<double>& c) {
    if (c.size() != a->numel())
        throw shape_error("add_const: constant size mismatch");
    auto out = unary_out(t, a, a->shape);
    kern::add(a->numel(), a->data.data(), c.data(), out->data.data());
    t.record(out, [a, out] {
        if (wants_grad(a)) {
            a->ensure_grad();
            kern::axpy(a->numel(), 1.0, out->grad.data(), a->grad.data());
        }
    });
    return out;
}

TensorPtr relu(Tape& t, TensorPtr a) {
    auto out = unary_out(t, a, a->shape);
    kern::relu(a->numel(), a->data.data(), out->data.data());
    t.record(out, [a, out] {
        if (!wants_grad(a)) return;
        a->ensure_grad();
        for (std::size_t i = 0; i < a->numel(); ++i)
            if (a->data[i] > 0.0) a->grad[i] += out->grad[i];
    });
    return out;
}

TensorPtr sigmoid(Tape& t, TensorPtr a) {
    auto out = unary_out(t, a, a->shape);
    for (std::size_t i = 0; i < a->numel(); ++i) out->data[i] = 1.0 / (1.0 + std::exp(-a->data[i]));
    t.record(out, [a, out] {
        if (!wants_grad(a)) return;
        a->ensure_grad();
        for (std::size_t i = 0; i < a->numel(); ++i) {
            double y = out->data[i];
            a->grad[i] += out->grad[i] * y * (1.0 - y);
        }
    });
    return out;
}

TensorPtr tanh_op(Tape& t, TensorPtr a) {
    auto out = unary_out(t, a, a->shape);
    for (std::size_t i = 0; i < a->numel(); ++i) out->data[i] = std::tanh(a->data[i]);
    t.record(out, [a, out] {
        if (!wants_grad(a)) return;
        a->ensure_grad();
        for (std::size_t i = 0; i < a->numel(); ++i) {
            double y = out->data[i];
            a->grad[i] += out->grad[i] * (1.0 - y * y);
        }
    });
    return out;
}

TensorPtr matmul(Tape& t, TensorPtr a, TensorPtr b) {
    if (a->shape.size() != 2 || b->shape.size() != 2 || a->shape[1] != b->shape[0])
        throw shape_error("matmul: incompatible shapes " + shape_str(a->shape) + " * " +
                          shape_str(b->shape));
    const std::size_t m = a->shape[0], n = a->shape[1], p = b->shape[1];
    auto out = binary_out(t, a, b, {m, p});
    kern::matmul(m, n, p, a->data.data(), b->data.data(), out->data.data());
    t.record(out, [a, b, out, m, n, p] {
        if (wants_grad(a)) {
            a->ensure_grad();
            kern::matmul_a_bt(m, p, n, out->grad.data(), b->data.data(), a->grad.data(), true);
        }
        if (wants_grad(b)) {
            b->ensure_grad();
            kern::matmul_at_b(n, m, p, a->data.data(), out->grad.data(), b->grad.data(), true);
        }
    });
    return out;
}

TensorPtr linear(Tape& t, TensorPtr x, TensorPtr w, TensorPtr bias) {
    auto out = matmul(t, x, std::move(w));
    if (!bias) return out;
    const std::size_t m = out->shape[0], p = out->shape[1];
    if (bias->numel() != p)
        throw shape_error("linear: bias size " + std::to_string(bias->numel()) +
                          " does not match output width " + std::to_string(p));
    t.watch(bias);
    auto y = make_like(out->shape, out->requires_grad || bias->requires_grad);
    for (std::size_t i = 0; i < m; ++i)
        kern::add(p, out->data.data() + i * p, bias->data.data(), y->data.data() + i * p);
    t.record(y, [out, bias, y, m, p] {
        if (wants_grad(out)) {
            out->ensure_grad();
            kern::axpy(m * p, 1.0, y->grad.data(), out->grad.data());
        }
        if (wants_grad(bias)) {
            bias->ensure_grad();
            for (std::size_t i = 0; i < m; ++i)
                kern::axpy(p, 1.0, y->grad.data() + i * p, bias->grad.data());
        }
    });
    return y;
}

TensorPtr reshape(Tape& t, TensorPtr a, std::vector<std::size_t> shape) {
    if (shape_numel(shape) != a->numel())
        throw shape_error("reshape: " + shape_str(a->shape) + " -> " + shape_str(shape) +
                          " changes element count");
    auto out = unary_out(t, a, std::move(shape));
    out->data = a->data;
    t.record(out, [a, out] {
        if (!wants_grad(a)) return;
        a->ensure_grad();
        kern::axpy(a->numel(), 1.0, out->grad.data(), a->grad.data());
    });
    return out;
}

TensorPtr slice_rows(Tape& t, TensorPtr a, std::size_t from, std::size_t to) {
    if (a->shape.size() != 2 || from >= to || to > a->shape[0])
        throw shape_error("slice_rows: bad range");
    const std::size_t cols = a->shape[1];
    auto out = unary_out(t, a, {to - from, cols});
    std::copy(a->data.begin() + from * cols, a->data.begin() + to * cols, out->data.begin());
    t.record(out, [a, out, from, cols] {
        if (!wants_grad(a)) return;
        a->ensure_grad();
        kern::axpy(out->numel(), 1.0, out->grad.data(), a->grad.data() + from * cols);
    });
    return out;
}

TensorPtr slice_cols(Tape& t, TensorPtr a, std::size_t from, std::size_t to) {
    if (a->shape.size() != 2 || from >= to || to > a->shape[1])
        throw shape_error("slice_cols: bad range");
    const std::size_t rows = a->shape[0], cols = a->shape[1], w = to - from;
    auto out = unary_out(t, a, {rows, w});
    for (std::size_t i = 0; i < rows; ++i)
        std::copy(a->data.begin() + i * cols + from, a->data.begin() + i * cols + to,
                  out->data.begin() + i * w);
    t.record(out, [a, out, from, rows, cols, w] {
        if (!wants_grad(a)) return;
        a->ensure_grad();
        for (std::size_t i = 0; i < rows; ++i)
            kern::axpy(w, 1.0, out->grad.data() + i * w, a->grad.data() + i * cols + from);
    });
    return out;
}

TensorPtr concat_cols(Tape& t, const std::vector<TensorPtr>& parts) {
    if (parts.empty()) throw shape_error("concat_cols: no parts");
    const std::size_t rows = parts[0]->shape[0];
    std::size_t cols = 0;
    bool rg = false;
    for (auto& p : parts) {
        if (p->shape.size() != 2 || p->shape[0] != rows)
            throw shape_error("concat_cols: row count mismatch");
        cols += p->shape[1];
        rg = rg || p->requires_grad;
        t.watch(p);
    }
    auto out = make_like({rows, cols}, rg);
    std::size_t off = 0;
    for (auto& p : parts) {
        const std::size_t w = p->shape[1];
        for (std::size_t i = 0; i < rows; ++i)
            std::copy(p->data.begin() + i * w, p->data.begin() + (i + 1) * w,
                      out->data.begin() + i * cols + off);
        off += w;
    }
    t.record(out, [parts, out, rows, cols] {
        std::size_t off = 0;
        for (auto& p : parts) {
            const std::size_t w = p->shape[1];
            if (wants_grad(p)) {
                p->ensure_grad();
                for (std::size_t i = 0; i < rows; ++i)
                    kern::axpy(w, 1.0, out->grad.data() + i * cols + off, p->grad.data() + i * w);
            }
            off += w;
        }
    });
    return out;
}

TensorPtr transpose(Tape& t, TensorPtr a) {
    if (a->shape.size() != 2) throw shape_error("transpose: expects 2-d input");
    const std::size_t rows = a->shape[0], cols = a->shape[1];
    auto out = unary_out(t, a, {cols, rows});
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) out->data[j * rows + i] = a->data[i * cols + j];
    t.record(out, [a, out, rows, cols] {
        if (!wants_grad(a)) return;
        a->ensure_grad();
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) a->grad[i * cols + j] += out->grad[j * rows + i];
    });
    return out;
}

TensorPtr softmax_rows(Tape& t, TensorPtr a) {
    if (a->shape.size() != 2) throw shape_error("softmax_rows: expects 2-d input");
    const std::size_t rows = a->shape[0], cols = a->shape[1];
    auto out = unary_out(t, a, a->shape);
    for (std::size_t i = 0; i < rows; ++i) {
        const double* x = a->data.data() + i * cols;
        double* y = out->data.data() + i * cols;
        double mx = *std::max_element(x, x + cols);
        double z = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            y[j] = std::exp(x[j] - mx);
            z += y[j];
        }
        kern::scale(cols, 1.0 / z, y);
    }
    t.record(out, [a, out, rows, cols] {
        if (!wants_grad(a)) return;
        a->ensure_grad();
        for (std::size_t i = 0; i < rows; ++i) {
            const double* y = out->data.data() + i * cols;
            const double* dy = out->grad.data() + i * cols;
            double* dx = a->grad.data() + i * cols;
            double dot = kern::dot(cols, y, dy);
            for (std::size_t j = 0; j < cols; ++j) dx[j] += y[j] * (dy[j] - dot);
        }
    });
    return out;
}

TensorPtr layer_norm(Tape& t, TensorPtr x, TensorPtr gain, TensorPtr bias, double eps) {
    if (x->shape.size() != 2) throw shape_error("layer_norm: expects 2-d input");
    const std::size_t rows = x->shape[0], d = x->shape[1];
    if (gain->numel() != d || bias->numel() != d)
        throw shape_error("layer_norm: gain/bias size must equal feature dim " +
                          std::to_string(d));
    t.watch(x);
    t.watch(gain);
    t.watch(bias);
    auto out = make_like(x->shape, x->requires_grad || gain->requires_grad || bias->requires_grad);
    // keep x-hat and 1/sigma for the backward pass
    auto xhat = std::make_shared<std::vector<double>>(rows * d);
    auto inv_sigma = std::make_shared<std::vector<double>>(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        const double* xi = x->data.data() + i * d;
        double mu = kern::sum(d, xi) / double(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) var += (xi[j] - mu) * (xi[j] - mu);
        var /= double(d);
        double is = 1.0 / std::sqrt(var + eps);
        (*inv_sigma)[i] = is;
        for (std::size_t j = 0; j < d; ++j) {
            double h = (xi[j] - mu) * is;
            (*xhat)[i * d + j] = h;
            out->data[i * d + j] = gain->data[j] * h + bias->data[j];
        }
    }
    t.record(out, [x, gain, bias, out, xhat, inv_sigma, rows, d] {
        for (std::size_t i = 0; i < rows; ++i) {
            const double* dy = out->grad.data() + i * d;
            const double* h = xhat->data() + i * d;
            if (wants_grad(gain)) {
                gain->ensure_grad();
                for (std::size_t j = 0; j < d; ++j) gain->grad[j] += dy[j] * h[j];
            }
            if (wants_grad(bias)) {
                bias->ensure_grad();
                kern::axpy(d, 1.0, dy, bias->grad.data());
            }
            if (wants_grad(x)) {
                x->ensure_grad();
                double* dx = x->grad.data() + i * d;
                double m1 = 0.0, m2 = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    double g = dy[j] * gain->data[j];
                    m1 += g;
                    m2 += g * h[j];
                }
                m1 /= double(d);
                m2 /= double(d);
                double is = (*inv_sigma)[i];
                for (std::size_t j = 0; j < d; ++j) {
                    double g = dy[j] * gain->data[j];
                    dx[j] += is * (g - m1 - h[j] * m2);
                }
            }
        }
    });
    return out;
}

TensorPtr conv2d(Tape& t, TensorPtr x, TensorPtr w, TensorPtr bias) {
    if (x->shape.size() != 3 || w->shape.size() != 4)
        throw shape_error("conv2d: expects x[C x H x W], w[Co x Ci x kh x kw]");
    const std::size_t ci = x->shape[0], h = x->shape[1], wd = x->shape[2];
    const std::size_t co = w->shape[0], kh = w->shape[2], kw = w->shape[3];
    if (w->shape[1] != ci)
        throw shape_error("conv2d: input channels " + std::to_string(ci) +
                          " vs kernel channels " + std::to_string(w->shape[1]));
    if (kh % 2 == 0 || kw % 2 == 0) throw shape_error("conv2d: kernel dims must be odd");
    if (bias && bias->numel() != co) throw shape_error("conv2d: bias size must equal out channels");
    const long ph = long(kh) / 2, pw = long(kw) / 2;
    t.watch(x);
    t.watch(w);
    if (bias) t.watch(bias);
    bool rg = x->requires_grad || w->requires_grad || (bias && bias->requires_grad);
    auto out = make_like({co, h, wd}, rg);
    for (std::size_t oc = 0; oc < co; ++oc) {
        double* o = out->data.data() + oc * h * wd;
        if (bias) std::fill(o, o + h * wd, bias->data[oc]);
        for (std::size_t icn = 0; icn < ci; ++icn) {
            const double* xi = x->data.data() + icn * h * wd;
            const double* kmat = w->data.data() + (oc * ci + icn) * kh * kw;
            for (std::size_t u = 0; u < kh; ++u)
                for (std::size_t v = 0; v < kw; ++v) {
                    const double kval = kmat[u * kw + v];
                    if (kval == 0.0) continue;
                    const long du = long(u) - ph, dv = long(v) - pw;
                    const long i0 = std::max(0L, -du), i1 = std::min(long(h), long(h) - du);
                    const long j0 = std::max(0L, -dv), j1 = std::min(long(wd), long(wd) - dv);
                    for (long i = i0; i < i1; ++i)
                        kern::axpy(std::size_t(j1 - j0), kval,
                                   xi + (i + du) * long(wd) + j0 + dv, o + i * long(wd) + j0);
                }
        }
    }
    t.record(out, [x, w, bias, out, ci, co, h, wd, kh, kw, ph, pw] {
        for (std::size_t oc = 0; oc < co; ++oc) {
            const double* dout = out->grad.data() + oc * h * wd;
            if (bias && wants_grad(bias)) {
                bias->ensure_grad();
                bias->grad[oc] += kern::sum(h * wd, dout);
            }
            for (std::size_t icn = 0; icn < ci; ++icn) {
                const double* xi = x->data.data() + icn * h * wd;
                const double* kmat = w->data.data() + (oc * ci + icn) * kh * kw;
                for (std::size_t u = 0; u < kh; ++u)
                    for (std::size_t v = 0; v < kw; ++v) {
                        const long du = long(u) - ph, dv = long(v) - pw;
                        const long i0 = std::max(0L, -du), i1 = std::min(long(h), long(h) - du);
                        const long j0 = std::max(0L, -dv), j1 = std::min(long(wd), long(wd) - dv);
                        if (wants_grad(w)) {
                            w->ensure_grad();
                            double acc = 0.0;
                            for (long i = i0; i < i1; ++i)
                                acc += kern::dot(std::size_t(j1 - j0),
                                                 dout + i * long(wd) + j0,
                                                 xi + (i + du) * long(wd) + j0 + dv);
                            w->grad[(oc * ci + icn) * kh * kw + u * kw + v] += acc;
                        }
                        if (wants_grad(x)) {
                            x->ensure_grad();
                            double* dx = x->grad.data() + icn * h * wd;
                            const double kval = kmat[u * kw + v];
                            if (kval == 0.0) continue;
                            for (long i = i0; i < i1; ++i)
                                kern::axpy(std::size_t(j1 - j0), kval, dout + i * long(wd) + j0,
                                           dx + (i + du) * long(wd) + j0 + dv);
                        }
                    }
            }
        }
    });
    return out;
}

TensorPtr global_avg_pool(Tape& t, TensorPtr x) {
    if (x->shape.size() != 3) throw shape_error("global_avg_pool: expects [C x H x W]");
    const std::size_t c = x->shape[0], hw = x->shape[1] * x->shape[2];
    auto out = unary_out(t, x, {c});
    for (std::size_t i = 0; i < c; ++i)
        out->data[i] = kern::sum(hw, x->data.data() + i * hw) / double(hw);
    t.record(out, [x, out, c, hw] {
        if (!wants_grad(x)) return;
        x->ensure_grad();
        for (std::size_t i = 0; i < c; ++i) {
            double g = out->grad[i] / double(hw);
            double* dx = x->grad.data() + i * hw;
            for (std::size_t j = 0; j < hw; ++j) dx[j] += g;
        }
    });
    return out;
}

TensorPtr scale_channels(Tape& t, TensorPtr x, TensorPtr s) {
    if (x->shape.size() != 3 || s->numel() != x->shape[0])
        throw shape_error("scale_channels: weight count must equal channel count");
    const std::size_t c = x->shape[0], hw = x->shape[1] * x->shape[2];
    auto out = binary_out(t, x, s, x->shape);
    for (std::size_t i = 0; i < c; ++i) {
        const double* xi = x->data.data() + i * hw;
        double* o = out->data.data() + i * hw;
        for (std::size_t j = 0; j < hw; ++j) o[j] = s->data[i] * xi[j];
    }
    t.record(out, [x, s, out, c, hw] {
        for (std::size_t i = 0; i < c; ++i) {
            const double* dy = out->grad.data() + i * hw;
            if (wants_grad(x)) {
                x->ensure_grad();
                kern::axpy(hw, s->data[i], dy, x->grad.data() + i * hw);
            }
            if (wants_grad(s)) {
                s->ensure_grad();
                s->grad[i] += kern::dot(hw, dy, x->data.data() + i * hw);
            }
        }
    });
    return out;
}

TensorPtr sum_all(Tape& t, TensorPtr a) {
    auto out = unary_out(t, a, {1});
    out->data[0] = kern::sum(a->numel(), a->data.data());
    t.record(out, [a, out] {
        if (!wants_grad(a)) return;
        a->ensure_grad();
        double g = out->grad[0];
        for (std::size_t i = 0; i < a->numel(); ++i) a->grad[i] += g;
    });
    return out;
}

TensorPtr mean_all(Tape& t, TensorPtr a) {
    auto s = sum_all(t, a);
    return scale(t, s, 1.0 / double(a->numel()));
}

TensorPtr div_scalar(Tape& t, TensorPtr num, TensorPtr den) {
    if (num->numel() != 1 || den->numel() != 1)
        throw shape_error("div_scalar: both operands must be scalar");
    auto out = binary_out(t, num, den, {std::size_t(1)});
    out->data[0] = num->data[0] / den->data[0];
    t.record(out, [num, den, out] {
        double g = out->grad[0];
        if (wants_grad(num)) {
            num->ensure_grad();
            num->grad[0] += g / den->data[0];
        }
        if (wants_grad(den)) {
            den->ensure_grad();
            den->grad[0] -= g * num->data[0] / (den->data[0] * den->data[0]);
        }
    });
    return out;
}

}  // namespace amc::nn
