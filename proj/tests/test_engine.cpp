// AMC loop contracts: genie BLER consistency, static-channel equivalences,
// timing windows, determinism, summary arithmetic, CSV export.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "amc/engine.hpp"

using namespace amc;
using namespace amc::engine;

namespace {

chan::SinrTrace make_trace(double v_kmh, std::uint64_t seed, std::size_t steps,
                           double snr_db = 15.0) {
    chan::ChannelConfig cfg;
    cfg.velocity_kmh = v_kmh;
    cfg.seed = seed;
    cfg.mean_snr_low_db = snr_db;
    cfg.mean_snr_high_db = snr_db;
    return chan::generate_trace(cfg, steps);
}

std::string temp_path(const char* stem) {
    return std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") + "/" + stem;
}

}  // namespace

TEST_CASE("genie link run keeps mean BLER near the target") {
    auto linkcfg = link::LinkConfig::defaults();
    TimingConfig timing;  // Tm=2, Td=2, L=16
    double bler_sum = 0.0;
    std::size_t tx = 0;
    for (std::uint64_t s = 0; s < 12; ++s) {
        auto trace = make_trace(40.0 + 5.0 * double(s), 60 + s, 700);
        pred::GeniePredictor genie(timing.history_len, trace.subcarriers);
        auto records = run_link(trace, genie, timing, linkcfg, 1000 + s);
        for (const auto& r : records)
            if (r.cqi >= 1) {
                bler_sum += r.bler;
                ++tx;
            }
    }
    REQUIRE(tx >= 2000);
    double mean_bler = bler_sum / double(tx);
    // within-window staleness keeps the genie at or below target on average
    CHECK(mean_bler < linkcfg.target_bler + 2.0 / std::sqrt(double(tx)));
}

TEST_CASE("with Tm=1 Td=0 the genie meets the target at every TTI") {
    auto linkcfg = link::LinkConfig::defaults();
    TimingConfig timing;
    timing.measure_period_tti = 1;
    timing.feedback_delay_tti = 0;
    auto trace = make_trace(100.0, 7, 400);
    pred::GeniePredictor genie(timing.history_len, trace.subcarriers);
    auto records = run_link(trace, genie, timing, linkcfg, 5);
    REQUIRE(!records.empty());
    for (const auto& r : records)
        if (r.cqi >= 1) CHECK(r.bler <= linkcfg.target_bler + 1e-9);
}

TEST_CASE("static channel: np equals genie decision for decision") {
    auto linkcfg = link::LinkConfig::defaults();
    TimingConfig timing;
    auto trace = make_trace(0.0, 9, 300);
    pred::NpPredictor np(timing.history_len, trace.subcarriers);
    pred::GeniePredictor genie(timing.history_len, trace.subcarriers);
    auto a = run_link(trace, np, timing, linkcfg, 3);
    auto b = run_link(trace, genie, timing, linkcfg, 3);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].cqi == b[i].cqi);
        CHECK(a[i].block_error == b[i].block_error);  // same seed, same draws
        CHECK(a[i].s_eff_db_pred == doctest::Approx(b[i].s_eff_db_pred).epsilon(1e-9));
    }
}

TEST_CASE("run_link is deterministic in the seed") {
    auto linkcfg = link::LinkConfig::defaults();
    TimingConfig timing;
    auto trace = make_trace(70.0, 12, 300);
    pred::NpPredictor np(timing.history_len, trace.subcarriers);
    auto a = run_link(trace, np, timing, linkcfg, 42);
    auto b = run_link(trace, np, timing, linkcfg, 42);
    auto c = run_link(trace, np, timing, linkcfg, 43);
    REQUIRE(a.size() == b.size());
    bool same = true, diff = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        same = same && a[i].block_error == b[i].block_error && a[i].bits_delivered == b[i].bits_delivered;
        diff = diff || a[i].block_error != c[i].block_error;
    }
    CHECK(same);
    CHECK(diff);  // a different seed draws different error patterns
}

TEST_CASE("timing windows cover each applied TTI exactly once") {
    auto linkcfg = link::LinkConfig::defaults();
    TimingConfig timing;
    timing.history_len = 4;
    auto trace = make_trace(50.0, 15, 100);
    pred::NpPredictor np(timing.history_len, trace.subcarriers);
    auto records = run_link(trace, np, timing, linkcfg, 1);
    // first governed TTI: (L-1)*Tm + Td = 8; last: < steps
    REQUIRE(!records.empty());
    CHECK(records.front().tti == 8);
    for (std::size_t i = 1; i < records.size(); ++i) CHECK(records[i].tti == records[i - 1].tti + 1);
    CHECK(records.back().tti == trace.steps - 1);
}

TEST_CASE("degenerate inputs are rejected") {
    auto linkcfg = link::LinkConfig::defaults();
    TimingConfig timing;
    auto trace = make_trace(50.0, 18, 20);  // shorter than the warmup
    pred::NpPredictor np(timing.history_len, trace.subcarriers);
    CHECK_THROWS(run_link(trace, np, timing, linkcfg, 1));

    auto trace2 = make_trace(50.0, 18, 300);
    pred::NpPredictor wrong(timing.history_len, trace2.subcarriers + 1);
    CHECK_THROWS(run_link(trace2, wrong, timing, linkcfg, 1));

    TimingConfig bad;
    bad.measure_period_tti = 0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("deep fade reports no-transmission, zero bits") {
    auto linkcfg = link::LinkConfig::defaults();
    TimingConfig timing;
    auto trace = make_trace(50.0, 21, 300, -30.0);  // far below CQI 1
    pred::NpPredictor np(timing.history_len, trace.subcarriers);
    auto records = run_link(trace, np, timing, linkcfg, 1);
    auto s = summarize(records, trace.tti_s, linkcfg.re_per_tti);
    CHECK(s.no_transmission_fraction == 1.0);
    CHECK(s.realized_throughput_bps == 0.0);
    CHECK(s.mean_bler == 0.0);  // no BLER event recorded without transmission
}

TEST_CASE("summarize arithmetic on hand-built records") {
    std::vector<LinkRecord> recs(4);
    recs[0].cqi = 1;
    recs[0].q = 2;
    recs[0].rate = 0.5;
    recs[0].bler = 0.2;
    recs[0].bits_delivered = 336.0;
    recs[1] = recs[0];
    recs[1].bits_delivered = 0.0;
    recs[1].block_error = true;
    recs[2].cqi = 0;  // no transmission
    recs[3] = recs[0];
    recs[3].bler = 0.4;

    auto s = summarize(recs, 0.5e-3, 336.0);
    CHECK(s.records == 4);
    CHECK(s.transmitting == 3);
    CHECK(s.mean_bler == doctest::Approx((0.2 + 0.2 + 0.4) / 3.0));
    CHECK(s.no_transmission_fraction == doctest::Approx(0.25));
    CHECK(s.realized_throughput_bps == doctest::Approx(672.0 / (4.0 * 0.5e-3)));
    // expected: sum (1-bler)*q*rate*re over transmitting / (records * tti)
    double expected = (0.8 + 0.8 + 0.6) * 2 * 0.5 * 336.0;
    CHECK(s.expected_throughput_bps == doctest::Approx(expected / (4.0 * 0.5e-3)));
    CHECK_THROWS(summarize({}, 0.5e-3, 336.0));
}

TEST_CASE("records csv carries the digest and one line per record") {
    auto linkcfg = link::LinkConfig::defaults();
    TimingConfig timing;
    auto trace = make_trace(60.0, 30, 200);
    pred::NpPredictor np(timing.history_len, trace.subcarriers);
    auto records = run_link(trace, np, timing, linkcfg, 2);

    auto path = temp_path("amc_test_records.csv");
    write_records_csv(path, records, "feedface");
    std::ifstream is(path);
    std::string line;
    std::getline(is, line);
    CHECK(line == "# config_digest=feedface");
    std::getline(is, line);
    CHECK(line == "tti,cqi,q,rate,s_eff_db_true,s_eff_db_pred,bler,block_error,bits");
    std::size_t n = 0;
    while (std::getline(is, line))
        if (!line.empty()) ++n;
    CHECK(n == records.size());
    std::remove(path.c_str());
}

TEST_CASE("measurement noise degrades the np link") {
    auto linkcfg = link::LinkConfig::defaults();
    TimingConfig timing;
    double clean = 0.0, noisy = 0.0;
    std::size_t n = 0;
    for (std::uint64_t s = 0; s < 6; ++s) {
        auto trace = make_trace(70.0, 40 + s, 500);
        pred::NpPredictor np(timing.history_len, trace.subcarriers);
        auto a = run_link(trace, np, timing, linkcfg, 9 + s);
        RunOptions opt;
        opt.measurement_noise_snr_db = 3.0;  // heavy noise
        auto b = run_link(trace, np, timing, linkcfg, 9 + s, opt);
        for (const auto& r : a) clean += r.reported_nmse;
        for (const auto& r : b) noisy += r.reported_nmse;
        n += a.size();
    }
    CHECK(noisy / double(n) > clean / double(n));
}
