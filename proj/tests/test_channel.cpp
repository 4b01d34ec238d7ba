// Channel oracles: Doppler arithmetic, degenerate traces (static user, flat
// profile), Jakes autocorrelation vs the Bessel closed form, energy
// conservation, determinism, dataset geometry, AMCT round-trips.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numeric>

#include "amc/channel.hpp"

using namespace amc::chan;

namespace {

ChannelConfig base_config(double v_kmh, std::uint64_t seed) {
    ChannelConfig cfg;
    cfg.velocity_kmh = v_kmh;
    cfg.seed = seed;
    // degenerate large-scale draw: mean per-subcarrier SNR pinned to 0 dB
    cfg.mean_snr_low_db = 0.0;
    cfg.mean_snr_high_db = 0.0;
    return cfg;
}

// lag-h autocorrelation of one subcarrier's linear SINR
double autocorr(const SinrTrace& tr, std::size_t k, std::size_t lag) {
    double mu = 0.0;
    for (std::size_t t = 0; t < tr.steps; ++t) mu += tr.at(t, k);
    mu /= double(tr.steps);
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t + lag < tr.steps; ++t)
        num += (tr.at(t, k) - mu) * (tr.at(t + lag, k) - mu);
    for (std::size_t t = 0; t < tr.steps; ++t) den += (tr.at(t, k) - mu) * (tr.at(t, k) - mu);
    return num / den;
}

std::string temp_path(const char* stem) {
    return std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") + "/" + stem;
}

}  // namespace

TEST_CASE("doppler frequency kinematics") {
    CHECK(doppler_frequency_hz(0.0, 2.4e9) == 0.0);
    CHECK(doppler_frequency_hz(100.0, 2.4e9) == doctest::Approx(222.4).epsilon(1e-3));
    CHECK(doppler_frequency_hz(80.0, 2.4e9) ==
          doctest::Approx(2.0 * doppler_frequency_hz(40.0, 2.4e9)));
}

TEST_CASE("static user freezes fading") {
    auto tr = generate_trace(base_config(0.0, 3), 64);
    for (std::size_t k = 0; k < tr.subcarriers; ++k)
        for (std::size_t t = 1; t < tr.steps; ++t)
            CHECK(tr.at(t, k) == doctest::Approx(tr.at(0, k)).epsilon(1e-12));
}

TEST_CASE("single-tap profile is flat in frequency") {
    auto cfg = base_config(60.0, 4);
    cfg.profile = PowerDelayProfile::flat();
    auto tr = generate_trace(cfg, 32);
    for (std::size_t t = 0; t < tr.steps; ++t)
        for (std::size_t k = 1; k < tr.subcarriers; ++k)
            CHECK(tr.at(t, k) == doctest::Approx(tr.at(t, 0)).epsilon(1e-9));
}

TEST_CASE("temporal autocorrelation tracks the Jakes closed form") {
    // For a complex Gaussian tap with autocorrelation J0(2 pi fd tau), the
    // power autocorrelation is J0^2. Use a flat profile so the subcarrier
    // power is a single tap's power; average many traces.
    const double v = 60.0;
    auto fd = doppler_frequency_hz(v, 2.4e9);
    const std::size_t steps = 512;
    const int traces = 40;
    for (std::size_t lag : {1u, 2u, 4u}) {
        double acc = 0.0;
        for (int i = 0; i < traces; ++i) {
            auto cfg = base_config(v, 100 + std::uint64_t(i));
            cfg.profile = PowerDelayProfile::flat();
            auto tr = generate_trace(cfg, steps);
            acc += autocorr(tr, 0, lag);
        }
        acc /= traces;
        double tau = double(lag) * 0.5e-3;
        double j0 = std::cyl_bessel_j(0.0, 2.0 * M_PI * fd * tau);
        CHECK_MESSAGE(std::abs(acc - j0 * j0) < 0.05, "lag ", lag, " emp ", acc, " want ",
                      j0 * j0);
    }
}

TEST_CASE("energy conservation of the fading process") {
    // pinned 0 dB mean SNR: long-run mean linear SINR must sit near 1
    double mean = 0.0;
    const int traces = 20;
    for (int i = 0; i < traces; ++i) {
        auto tr = generate_trace(base_config(80.0, 500 + std::uint64_t(i)), 1024);
        mean += std::accumulate(tr.values.begin(), tr.values.end(), 0.0) /
                double(tr.values.size());
    }
    mean /= traces;
    CHECK(mean == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("higher velocity decorrelates faster") {
    auto mean_lag1 = [&](double v) {
        double acc = 0.0;
        const int traces = 100;
        for (int i = 0; i < traces; ++i) {
            auto tr = generate_trace(base_config(v, 900 + std::uint64_t(i)), 256);
            acc += autocorr(tr, 0, 1);
        }
        return acc / traces;
    };
    double a40 = mean_lag1(40.0), a70 = mean_lag1(70.0), a100 = mean_lag1(100.0);
    CHECK(a40 > a70);
    CHECK(a70 > a100);
}

TEST_CASE("traces are deterministic in config and seed") {
    auto a = generate_trace(base_config(55.0, 77), 100);
    auto b = generate_trace(base_config(55.0, 77), 100);
    auto c = generate_trace(base_config(55.0, 78), 100);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
    for (double v : a.values) {
        CHECK(v > 0.0);
        CHECK(std::isfinite(v));
    }
}

TEST_CASE("config validation") {
    auto cfg = base_config(50.0, 1);
    cfg.subcarriers = 0;
    CHECK_THROWS(cfg.validate());
    cfg = base_config(-1.0, 1);
    CHECK_THROWS(cfg.validate());
    cfg = base_config(50.0, 1);
    cfg.profile.delays_s.clear();
    cfg.profile.powers_db.clear();
    CHECK_THROWS(generate_trace(cfg, 10));
}

TEST_CASE("named profiles") {
    auto uma = PowerDelayProfile::uma();
    auto umi = PowerDelayProfile::umi();
    CHECK(uma.delays_s.size() == 6);
    CHECK(umi.delays_s.size() == 6);
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(umi.delays_s[i] == doctest::Approx(uma.delays_s[i] / 2.0));
    // tap powers normalized to unit total in linear scale
    for (const auto& p : {uma, umi}) {
        double total = 0.0;
        for (double dbv : p.powers_db) total += std::pow(10.0, dbv / 10.0);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(PowerDelayProfile::flat().delays_s.size() == 1);
    CHECK(PowerDelayProfile::by_name("uma").name == "uma");
    CHECK_THROWS(PowerDelayProfile::by_name("urban-nowhere"));
}

TEST_CASE("dataset sampling geometry and determinism") {
    DatasetConfig cfg;
    cfg.channel = base_config(0.0, 1);  // per-sample velocity overrides this
    cfg.velocity_low_kmh = 40.0;
    cfg.velocity_high_kmh = 100.0;
    auto ds = sample_dataset(cfg, 25, 9);
    CHECK(ds.samples.size() == 25);
    CHECK(ds.history_len == 16);
    CHECK(ds.subcarriers == 48);
    for (const auto& s : ds.samples) {
        CHECK(s.history_db.size() == 16 * 48);
        CHECK(s.target_db.size() == 48);
        CHECK(s.velocity_kmh >= 40.0);
        CHECK(s.velocity_kmh <= 100.0);
    }
    auto ds2 = sample_dataset(cfg, 25, 9);
    CHECK(ds.samples[7].history_db == ds2.samples[7].history_db);
    CHECK(ds.samples[7].target_db == ds2.samples[7].target_db);
    auto ds3 = sample_dataset(cfg, 25, 10);
    CHECK(ds.samples[7].history_db != ds3.samples[7].history_db);
}

TEST_CASE("amct trace round trip is value-exact at float32") {
    auto tr = generate_trace(base_config(45.0, 33), 40);
    auto path = temp_path("amc_test_trace.amct");
    save_trace(path, tr, "cafebabe");
    std::string digest;
    auto rt = load_trace(path, &digest);
    CHECK(digest == "cafebabe");
    CHECK(rt.steps == tr.steps);
    CHECK(rt.subcarriers == tr.subcarriers);
    CHECK(rt.velocity_kmh == doctest::Approx(tr.velocity_kmh).epsilon(1e-6));
    CHECK(rt.profile_name == tr.profile_name);
    for (std::size_t i = 0; i < tr.values.size(); ++i)
        CHECK(rt.values[i] == double(float(tr.values[i])));
    std::remove(path.c_str());
}

TEST_CASE("amct dataset round trip and byte-identical re-save") {
    DatasetConfig cfg;
    cfg.channel = base_config(0.0, 1);
    auto ds = sample_dataset(cfg, 8, 21);
    auto p1 = temp_path("amc_test_ds1.amct");
    auto p2 = temp_path("amc_test_ds2.amct");
    save_dataset(p1, ds);
    save_dataset(p2, ds);

    // identical bytes for identical content
    FILE* f1 = std::fopen(p1.c_str(), "rb");
    FILE* f2 = std::fopen(p2.c_str(), "rb");
    int c1, c2;
    do {
        c1 = std::fgetc(f1);
        c2 = std::fgetc(f2);
        CHECK(c1 == c2);
    } while (c1 != EOF);
    std::fclose(f1);
    std::fclose(f2);

    auto rt = load_dataset(p1);
    CHECK(rt.samples.size() == 8);
    CHECK(rt.history_len == ds.history_len);
    for (std::size_t i = 0; i < rt.samples[0].history_db.size(); ++i)
        CHECK(rt.samples[0].history_db[i] == double(float(ds.samples[0].history_db[i])));

    CHECK(describe_file(p1).find("dataset") != std::string::npos);
    std::remove(p1.c_str());
    std::remove(p2.c_str());

    // empty dataset file still carries a valid header
    auto ds0 = sample_dataset(cfg, 0, 5);
    CHECK(ds0.samples.empty());
    auto p0 = temp_path("amc_test_ds0.amct");
    save_dataset(p0, ds0);
    CHECK(load_dataset(p0).samples.empty());
    std::remove(p0.c_str());
}
