// Layer-level gradient checks, Adam contracts (first-step magnitude, freeze
// semantics, NaN rejection), and AMCK checkpoint round-trips.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "amc/layers.hpp"

using namespace amc::nn;

namespace {

TensorPtr grad_input(std::vector<std::size_t> shape, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto t = Tensor::uniform(std::move(shape), 1.0, rng, "input");
    t->requires_grad = true;
    return t;
}

std::string temp_path(const char* stem) {
    return std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") + "/" + stem;
}

}  // namespace

TEST_CASE("finite-difference gradient check per layer") {
    std::mt19937_64 rng(3);
    const double tol = 1e-4;

    SUBCASE("dense + relu") {
        std::vector<LayerPtr> chain{std::make_shared<DenseLayer>(6, 5, rng),
                                    std::make_shared<ReLULayer>(),
                                    std::make_shared<DenseLayer>(5, 3, rng)};
        auto rep = grad_check(chain, grad_input({2, 6}, 10), tol);
        CHECK_MESSAGE(rep.pass, rep.worst_location, " rel err ", rep.max_rel_err);
    }
    SUBCASE("sigmoid") {
        std::vector<LayerPtr> chain{std::make_shared<DenseLayer>(4, 4, rng),
                                    std::make_shared<SigmoidLayer>()};
        auto rep = grad_check(chain, grad_input({3, 4}, 11), tol);
        CHECK_MESSAGE(rep.pass, rep.worst_location, " rel err ", rep.max_rel_err);
    }
    SUBCASE("softmax") {
        std::vector<LayerPtr> chain{std::make_shared<SoftmaxLayer>()};
        auto rep = grad_check(chain, grad_input({3, 5}, 12), tol);
        CHECK_MESSAGE(rep.pass, rep.worst_location, " rel err ", rep.max_rel_err);
    }
    SUBCASE("layer norm") {
        std::vector<LayerPtr> chain{std::make_shared<LayerNormLayer>(6)};
        auto rep = grad_check(chain, grad_input({2, 6}, 13), tol);
        CHECK_MESSAGE(rep.pass, rep.worst_location, " rel err ", rep.max_rel_err);
    }
    SUBCASE("multi-head self-attention") {
        std::vector<LayerPtr> chain{std::make_shared<MultiHeadSelfAttentionLayer>(8, 2, rng)};
        auto rep = grad_check(chain, grad_input({4, 8}, 14), tol);
        CHECK_MESSAGE(rep.pass, rep.worst_location, " rel err ", rep.max_rel_err);
    }
    SUBCASE("conv + pool") {
        std::vector<LayerPtr> chain{std::make_shared<Conv2DLayer>(2, 3, rng),
                                    std::make_shared<ReLULayer>(),
                                    std::make_shared<GlobalAvgPool2DLayer>()};
        auto rep = grad_check(chain, grad_input({2, 4, 5}, 15), tol);
        CHECK_MESSAGE(rep.pass, rep.worst_location, " rel err ", rep.max_rel_err);
    }
}

TEST_CASE("adam first step moves every element by about lr, regardless of |g|") {
    for (double g : {1e-6, 1.0, 1e6}) {
        auto p = Tensor::from({4}, {1.0, 2.0, 3.0, 4.0});
        p->set_trainable(true);
        p->ensure_grad();
        for (auto& gv : p->grad) gv = g;
        auto before = p->data;
        Adam opt({.lr = 1e-3});
        opt.step({p});
        for (std::size_t i = 0; i < 4; ++i) {
            double delta = before[i] - p->data[i];
            CHECK(delta == doctest::Approx(1e-3).epsilon(1e-2));  // eps-perturbed
        }
    }
}

TEST_CASE("frozen tensors are bit-identical through adam") {
    auto p = Tensor::from({3}, {1.5, -2.5, 3.5});
    p->set_trainable(true);
    auto frozen = Tensor::from({3}, {7.0, 8.0, 9.0});
    frozen->set_trainable(false);
    frozen->grad = {1.0, 1.0, 1.0};  // stale grad must not be applied
    p->ensure_grad();
    p->grad = {1.0, 1.0, 1.0};

    auto frozen_before = frozen->data;
    Adam opt;
    opt.step({p, frozen});
    CHECK(frozen->data == frozen_before);
    CHECK(frozen->grad == std::vector<double>{1.0, 1.0, 1.0});
    CHECK(p->data != std::vector<double>{1.5, -2.5, 3.5});
    CHECK(opt.step_count() == 1);
}

TEST_CASE("nan gradient rejects the whole step") {
    auto p = Tensor::from({2}, {1.0, 2.0});
    p->set_trainable(true);
    p->ensure_grad();
    p->grad = {1.0, std::nan("")};
    Adam opt;
    CHECK_THROWS(opt.step({p}));
    CHECK(p->data == std::vector<double>{1.0, 2.0});
}

TEST_CASE("set_lr changes subsequent step sizes") {
    auto p = Tensor::from({1}, {0.0});
    p->set_trainable(true);
    p->ensure_grad();
    p->grad = {1.0};
    Adam opt({.lr = 1e-3});
    opt.set_lr(1e-4);
    opt.step({p});
    CHECK(std::abs(p->data[0]) == doctest::Approx(1e-4).epsilon(1e-2));
}

TEST_CASE("checkpoint round-trip is value-exact at float32") {
    auto a = Tensor::from({2, 3}, {1.0, -2.5, 3.25, 0.1, 1e-7, -42.0});
    a->set_trainable(true);
    auto b = Tensor::from({4}, {0.0, 0.5, -0.5, 123456.0});

    auto path = temp_path("amc_test_ckpt.amck");
    save_checkpoint(path, {{"layer.weight", a}, {"layer.bias", b}},
                    {{"type", "unit-test"}, {"note", "round trip"}});

    auto ck = load_checkpoint(path);
    CHECK(ck.metadata.at("type") == "unit-test");
    CHECK(ck.tensors.size() == 2);

    auto ra = ck.find("layer.weight");
    REQUIRE(ra);
    CHECK(ra->shape == a->shape);
    CHECK(ra->trainable);
    for (std::size_t i = 0; i < a->numel(); ++i)
        CHECK(ra->data[i] == double(float(a->data[i])));  // exact at 32-bit

    auto rb = ck.find("layer.bias");
    REQUIRE(rb);
    CHECK_FALSE(rb->trainable);
    CHECK(rb->data[3] == double(float(123456.0)));
    CHECK(ck.find("missing") == nullptr);
    std::remove(path.c_str());
}

TEST_CASE("checkpoint load rejects garbage") {
    auto path = temp_path("amc_test_bad.amck");
    FILE* f = std::fopen(path.c_str(), "wb");
    std::fputs("not a checkpoint", f);
    std::fclose(f);
    CHECK_THROWS(load_checkpoint(path));
    std::remove(path.c_str());
}

TEST_CASE("layer kind names are stable") {
    CHECK(layer_kind_name(LayerKind::Conv2D) == "Conv2D");
    CHECK(layer_kind_name(LayerKind::FullyConnected) == "FullyConnected");
    CHECK(layer_kind_name(LayerKind::MultiHeadSelfAttention) == "MultiHeadSelfAttention");
}
