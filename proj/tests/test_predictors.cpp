// Predictor contracts: NP verbatim row, normalization algebra, SinrNet stage
// contracts (zero head -> window mean, zero embed -> positional encoding),
// freeze accounting, overfit-one-batch, model-level gradient check, and
// checkpoint reconstruction.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "amc/predictors.hpp"

using namespace amc;
using namespace amc::pred;

namespace {

std::string temp_path(const char* stem) {
    return std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") + "/" + stem;
}

std::vector<double> rand_history(std::size_t l, std::size_t k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(10.0, 4.0);
    std::vector<double> h(l * k);
    for (auto& v : h) v = d(rng);
    return h;
}

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.patch = 2;
    cfg.sa_iters = 1;
    cfg.d_model = 16;
    cfg.backbone_layers = 1;
    cfg.heads = 2;
    cfg.freeze = FreezePolicy::AllParams;
    return cfg;
}

// zero the named tensors inside a checkpoint file, in place
void zero_in_checkpoint(const std::string& path, const std::vector<std::string>& prefixes) {
    auto ck = nn::load_checkpoint(path);
    for (auto& [name, t] : ck.tensors)
        for (const auto& p : prefixes)
            if (name.rfind(p, 0) == 0) std::fill(t->data.begin(), t->data.end(), 0.0);
    nn::save_checkpoint(path, ck.tensors, ck.metadata);
}

}  // namespace

TEST_CASE("nmse ratio and dB floor") {
    std::vector<double> a{1.0, 2.0, 2.0};
    std::vector<double> b{1.0, 2.0, 2.0};
    CHECK(nmse(a, b) == 0.0);
    CHECK(nmse_db(0.0) == -100.0);
    std::vector<double> c{2.0, 3.0, 3.0};  // err 3, truth 9+4+4=17... use exact
    CHECK(nmse(c, b) == doctest::Approx(3.0 / 9.0));
    CHECK(nmse_db(0.01) == doctest::Approx(-20.0));
    CHECK_THROWS(nmse(a, std::vector<double>{1.0}));
}

TEST_CASE("np predictor returns the last measured row verbatim") {
    NpPredictor np(3, 4);
    std::vector<double> h{0, 1, 2, 3, 10, 11, 12, 13, 20, 21, 22, 23};
    auto p = np.predict(h);
    CHECK(p.sinr_db == std::vector<double>{20, 21, 22, 23});
    CHECK(np.kind() == "np");
    CHECK_THROWS(np.predict(std::vector<double>(5, 0.0)));
}

TEST_CASE("prediction linear conversion") {
    Prediction p{{0.0, 10.0}};
    auto lin = p.linear();
    CHECK(lin[0] == doctest::Approx(1.0));
    CHECK(lin[1] == doctest::Approx(10.0));
}

TEST_CASE("window z-score normalization") {
    std::vector<double> h{2.0, 4.0, 6.0, 8.0};
    std::vector<double> out;
    auto n = normalize(h, out);
    CHECK(n.mu == doctest::Approx(5.0));
    double mean = 0.0, var = 0.0;
    for (double v : out) mean += v;
    mean /= 4.0;
    for (double v : out) var += (v - mean) * (v - mean);
    var /= 4.0;
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(var == doctest::Approx(1.0).epsilon(1e-9));

    // constant window: sigma floored, no division blow-up
    std::vector<double> flat(8, 3.3), out2;
    auto n2 = normalize(flat, out2);
    CHECK(n2.mu == doctest::Approx(3.3));
    for (double v : out2) CHECK(std::abs(v) < 1e-8);  // (x - mu) residual over floored sigma
}

TEST_CASE("sinr-net prediction is shift-equivariant") {
    SinrNet net(8, 6, tiny_config(), 42);
    auto h = rand_history(8, 6, 1);
    auto base = net.predict(h).sinr_db;
    auto shifted = h;
    for (auto& v : shifted) v += 7.5;
    auto moved = net.predict(shifted).sinr_db;
    for (std::size_t i = 0; i < base.size(); ++i)
        CHECK(moved[i] == doctest::Approx(base[i] + 7.5).epsilon(1e-9));
}

TEST_CASE("patchify pads the trailing patch with zeros") {
    auto cfg = tiny_config();
    cfg.patch = 4;
    SinrNet net(10, 3, cfg, 7);  // L' = ceil(10/4) = 3
    CHECK(net.patch_count() == 3);
    std::vector<double> normalized(10 * 3, 1.0);
    nn::Tape tape;
    auto x = net.patchify(tape, normalized);
    CHECK(x->shape == std::vector<std::size_t>{3, 4, 3});
    // rows 10..11 of the padded [12 x 3] layout are zero
    for (std::size_t i = 10 * 3; i < 12 * 3; ++i) CHECK(x->data[i] == 0.0);
    for (std::size_t i = 0; i < 10 * 3; ++i) CHECK(x->data[i] == 1.0);
    CHECK_THROWS(net.patchify(tape, std::vector<double>(7, 0.0)));
}

TEST_CASE("positional encoding is the sin-cos table") {
    SinrNet net(8, 6, tiny_config(), 3);
    const auto& pe = net.positional_encoding();
    std::size_t d = 16, lp = 4;
    REQUIRE(pe.size() == lp * d);
    for (std::size_t pos = 0; pos < lp; ++pos)
        for (std::size_t j = 0; j < d; ++j) {
            double expo = double(2 * (j / 2)) / double(d);
            double arg = double(pos) / std::pow(10000.0, expo);
            double want = (j % 2 == 0) ? std::sin(arg) : std::cos(arg);
            CHECK(pe[pos * d + j] == doctest::Approx(want).epsilon(1e-12));
        }
}

TEST_CASE("zero head weights predict the window mean everywhere") {
    SinrNet net(8, 6, tiny_config(), 5);
    auto path = temp_path("amc_test_zero_head.amck");
    net.save(path);
    zero_in_checkpoint(path, {"head1.", "head2."});
    auto loaded = load_predictor(path);

    auto h = rand_history(8, 6, 2);
    double mu = 0.0;
    for (double v : h) mu += v;
    mu /= double(h.size());
    for (double v : loaded->predict(h).sinr_db) CHECK(v == doctest::Approx(mu).epsilon(1e-9));
    std::remove(path.c_str());
}

TEST_CASE("zero embed weights reduce the embedding to the positional encoding") {
    SinrNet net(8, 6, tiny_config(), 6);
    auto path = temp_path("amc_test_zero_embed.amck");
    net.save(path);
    zero_in_checkpoint(path, {"embed."});
    auto loaded = load_predictor(path);
    auto* snet = dynamic_cast<SinrNet*>(loaded.get());
    REQUIRE(snet);

    nn::Tape tape;
    std::vector<double> normalized = rand_history(8, 6, 3);
    auto x = snet->patchify(tape, normalized);
    x = snet->sinr_attention(tape, x);
    auto e = snet->embed(tape, x);
    const auto& pe = snet->positional_encoding();
    REQUIRE(e->numel() == pe.size());
    for (std::size_t i = 0; i < pe.size(); ++i)
        CHECK(e->data[i] == doctest::Approx(pe[i]).epsilon(1e-12));
    std::remove(path.c_str());
}

TEST_CASE("freeze policies route trainability") {
    ModelConfig cfg;  // desk defaults: d64, 2 backbone layers
    SUBCASE("ln-only trainable backbone count is 2*layers*2*d") {
        cfg.freeze = FreezePolicy::LnOnly;
        SinrNet net(16, 48, cfg, 1);
        CHECK(net.backbone_trainable_count() == 2 * 2 * 2 * 64);  // 512
        CHECK(net.backbone_trainable_count() < net.backbone_total_count());
    }
    SUBCASE("frozen backbone trains nothing") {
        cfg.freeze = FreezePolicy::Frozen;
        SinrNet net(16, 48, cfg, 1);
        CHECK(net.backbone_trainable_count() == 0);
        CHECK(net.trainable_parameter_count() < net.total_parameter_count());
    }
    SUBCASE("all-params trains the whole backbone") {
        cfg.freeze = FreezePolicy::AllParams;
        SinrNet net(16, 48, cfg, 1);
        CHECK(net.backbone_trainable_count() == net.backbone_total_count());
        CHECK(net.trainable_parameter_count() == net.total_parameter_count());
    }
    SUBCASE("ln+mlp sits strictly between") {
        cfg.freeze = FreezePolicy::LnMlp;
        SinrNet net(16, 48, cfg, 1);
        std::size_t n = net.backbone_trainable_count();
        CHECK(n > 512);
        CHECK(n < net.backbone_total_count());
    }
}

TEST_CASE("identity backbone passes the embedding through") {
    auto cfg = tiny_config();
    cfg.backbone = BackboneKind::Identity;
    SinrNet net(8, 6, cfg, 9);
    CHECK(net.backbone_total_count() == 0);
    nn::Tape tape;
    auto x = nn::Tensor::from({4, 16}, std::vector<double>(64, 0.25));
    auto y = net.backbone_forward(tape, x);
    CHECK(y->data == x->data);
}

TEST_CASE("model-level gradient check on the tiny network") {
    SinrNet net(8, 4, tiny_config(), 11);
    auto rep = grad_check_model(net, rand_history(8, 4, 4), 1e-4);
    CHECK_MESSAGE(rep.pass, rep.worst_location, " rel err ", rep.max_rel_err);
}

TEST_CASE("overfit one batch to below -30 dB") {
    SinrNet net(8, 4, tiny_config(), 13);
    auto h = rand_history(8, 4, 5);
    std::vector<double> target{12.0, 9.0, 11.0, 10.0};
    double t2 = 0.0;
    for (double v : target) t2 += v * v;

    nn::Adam opt({.lr = 1e-3});
    auto params = net.parameters();
    double ratio = 1.0;
    for (int step = 0; step < 500; ++step) {
        nn::Tape tape;
        auto out = net.forward(tape, h);
        auto diff = nn::add_const(tape, out, {-target[0], -target[1], -target[2], -target[3]});
        auto loss = nn::scale(tape, nn::sum_all(tape, nn::mul(tape, diff, diff)), 1.0 / t2);
        for (auto& p : params) p->zero_grad();
        tape.backward(loss);
        opt.step(params);
        ratio = loss->data[0];
    }
    CHECK(nmse_db(ratio) < -30.0);
}

TEST_CASE("history length and width are enforced") {
    SinrNet net(8, 6, tiny_config(), 15);
    CHECK_THROWS(net.predict(std::vector<double>(8 * 5, 1.0)));
    CHECK(net.history_len() == 8);
    CHECK(net.subcarriers() == 6);
}

TEST_CASE("sinr-net checkpoints reconstruct the same predictor") {
    ModelConfig cfg = tiny_config();
    cfg.freeze = FreezePolicy::LnMlp;
    SinrNet net(8, 6, cfg, 17);
    auto path = temp_path("amc_test_roundtrip.amck");
    net.save(path, "deadbeef01");

    auto loaded = load_predictor(path);
    CHECK(loaded->kind() == "sinr-net");
    CHECK(loaded->history_len() == 8);
    CHECK(loaded->subcarriers() == 6);
    CHECK(loaded->trainable_parameter_count() == net.trainable_parameter_count());
    CHECK(loaded->total_parameter_count() == net.total_parameter_count());

    auto h = rand_history(8, 6, 6);
    auto a = net.predict(h).sinr_db;
    auto b = loaded->predict(h).sinr_db;
    // float32 storage: agreement to single precision, not double
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-4));

    auto ck = nn::load_checkpoint(path);
    CHECK(ck.metadata.at("config_digest") == "deadbeef01");
    std::remove(path.c_str());
}

TEST_CASE("recurrent baselines: kinds, shapes, gate accounting, round trip") {
    auto h = rand_history(6, 5, 8);
    RecurrentNet rnn(RecurrentKind::Rnn, 6, 5, 21, 2, 16);
    RecurrentNet gru(RecurrentKind::Gru, 6, 5, 21, 2, 16);
    RecurrentNet lstm(RecurrentKind::Lstm, 6, 5, 21, 2, 16);
    CHECK(rnn.kind() == "rnn");
    CHECK(gru.kind() == "gru");
    CHECK(lstm.kind() == "lstm");
    CHECK(rnn.predict(h).sinr_db.size() == 5);
    // gate multiplicity orders the parameter counts
    CHECK(rnn.total_parameter_count() < gru.total_parameter_count());
    CHECK(gru.total_parameter_count() < lstm.total_parameter_count());

    auto path = temp_path("amc_test_gru.amck");
    gru.save(path);
    auto loaded = load_predictor(path);
    CHECK(loaded->kind() == "gru");
    auto a = gru.predict(h).sinr_db;
    auto b = loaded->predict(h).sinr_db;
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-4));
    std::remove(path.c_str());

    RecurrentNet det(RecurrentKind::Gru, 6, 5, 21, 2, 16);
    CHECK(det.predict(h).sinr_db == gru.predict(h).sinr_db);  // same seed, same net
}

TEST_CASE("genie echoes whatever future it is fed") {
    GeniePredictor genie(4, 3);
    genie.set_future({1.0, 2.0, 3.0});
    CHECK(genie.predict(std::vector<double>(12, 0.0)).sinr_db == std::vector<double>{1, 2, 3});
}

TEST_CASE("model config validation") {
    ModelConfig cfg;
    cfg.heads = 5;  // 64 % 5 != 0
    CHECK_THROWS(cfg.validate());
    cfg = ModelConfig{};
    cfg.patch = 0;
    CHECK_THROWS(cfg.validate());
}
