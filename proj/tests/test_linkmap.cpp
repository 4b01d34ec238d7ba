// Linkmap oracles: EESM identities and bounds, CQI threshold calibration,
// brute-force throughput-argmax equivalence, and throughput arithmetic.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "amc/linkmap.hpp"

using namespace amc::link;

TEST_CASE("eesm fixed points and the two-tone oracle") {
    // equal inputs: S_eff equals the common value for any beta
    for (double beta : {0.25, 1.0, 4.0}) {
        std::vector<double> same(7, 3.7);
        CHECK(eesm(same, beta) == doctest::Approx(3.7).epsilon(1e-12));
    }
    // single element
    std::vector<double> one{0.42};
    CHECK(eesm(one, 1.0) == doctest::Approx(0.42).epsilon(1e-12));
    // [1, 2] at beta = 1: -ln((e^-1 + e^-2)/2)
    std::vector<double> two{1.0, 2.0};
    double want = -std::log((std::exp(-1.0) + std::exp(-2.0)) / 2.0);
    CHECK(eesm(two, 1.0) == doctest::Approx(want).epsilon(1e-12));
    CHECK(want == doctest::Approx(1.380).epsilon(5e-4));
}

TEST_CASE("eesm bounds, monotonicity, and beta behavior on random inputs") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> snr(1e-4, 1e4);
    std::uniform_int_distribution<int> len(1, 48);
    std::uniform_real_distribution<double> betad(0.1, 8.0);
    for (int it = 0; it < 100000; ++it) {
        int n = len(rng);
        std::vector<double> s(n);
        for (auto& v : s) v = snr(rng);
        double beta = betad(rng);
        double e = eesm(s, beta);
        double mn = *std::min_element(s.begin(), s.end());
        double mx = *std::max_element(s.begin(), s.end());
        REQUIRE(e >= mn - 1e-9 * mn);
        REQUIRE(e <= mx + 1e-9 * mx);
        // raising any one subcarrier cannot lower S_eff
        if (it % 100 == 0) {
            auto s2 = s;
            s2[std::size_t(it / 100 % n)] *= 1.5;
            REQUIRE(eesm(s2, beta) >= e - 1e-12);
        }
    }
}

TEST_CASE("eesm is numerically stable far outside double exp range") {
    std::vector<double> deep{db_to_linear(90.0), db_to_linear(91.0)};
    double e = eesm(deep, 1.0);  // naive exp(-1e9) underflows to a log of zero
    CHECK(std::isfinite(e));
    CHECK(linear_to_db(e) == doctest::Approx(90.0).epsilon(1e-2));
}

TEST_CASE("default cqi table matches the 3gpp 256qam entries") {
    CqiTable table;
    CHECK(table.at(0).q == 0);
    CHECK(table.at(0).rate == 0.0);
    CHECK(table.at(1).q == 2);
    CHECK(table.at(1).rate == doctest::Approx(78.0 / 1024.0));
    CHECK(table.at(6).q == 4);
    CHECK(table.at(6).rate == doctest::Approx(616.0 / 1024.0));
    CHECK(table.at(15).q == 8);
    CHECK(table.at(15).rate == doctest::Approx(948.0 / 1024.0));
    // spectral efficiency strictly increasing over 1..15
    for (int c = 2; c <= 15; ++c)
        CHECK(table.at(c).spectral_efficiency() > table.at(c - 1).spectral_efficiency());
    CHECK_THROWS(table.at(16));
    CHECK_THROWS(table.at(-1));
}

TEST_CASE("bler curves: defaults, midpoint semantics, monotonicity") {
    auto model = BlerModel::defaults();
    for (int c = 1; c <= 15; ++c) {
        double mid = -7.0 + 2.1 * (c - 1);
        CHECK(model.midpoint_db[c - 1] == doctest::Approx(mid));
        CHECK(bler(c, mid, model) == doctest::Approx(0.5));
        CHECK(bler(c, mid + 40.0, model) < 1e-4);
        CHECK(bler(c, mid - 40.0, model) > 1.0 - 1e-4);
    }
    // decreasing in SINR, increasing in CQI at fixed SINR
    for (double s = -15.0; s < 35.0; s += 0.5) {
        CHECK(bler(7, s + 0.25, model) < bler(7, s, model));
        for (int c = 2; c <= 15; ++c) CHECK(bler(c, s, model) > bler(c - 1, s, model));
    }
    CHECK_THROWS(bler(0, 0.0, model));
}

TEST_CASE("calibrated thresholds satisfy the ILLA property") {
    auto model = BlerModel::defaults();
    const double target = 0.1;
    auto th = calibrate_thresholds(model, target);
    for (int c = 1; c <= 15; ++c) {
        double want = model.midpoint_db[c - 1] +
                      std::log((1.0 - target) / target) / model.slope[c - 1];
        CHECK(th.min_sinr_db[c - 1] == doctest::Approx(want).epsilon(1e-12));
        CHECK(bler(c, th.min_sinr_db[c - 1], model) == doctest::Approx(target).epsilon(1e-9));
    }
    // chosen CQI meets the target; the next one up would not
    for (double s = th.min_sinr_db[0]; s < 35.0; s += 0.037) {
        int c = sinr_to_cqi(s, th);
        REQUIRE(c >= 1);
        CHECK(bler(c, s, model) <= target + 1e-12);
        if (c < 15) CHECK(bler(c + 1, s, model) > target - 1e-12);
    }
    // below the first threshold: no transmission
    CHECK(sinr_to_cqi(th.min_sinr_db[0] - 0.001, th) == 0);
    CHECK(sinr_to_cqi(-100.0, th) == 0);
}

TEST_CASE("threshold selection equals brute-force constrained throughput argmax") {
    auto cfg = LinkConfig::defaults();
    // 0.1 dB grid over -15..35 dB
    for (int i = 0; i <= 500; ++i) {
        double s = -15.0 + 0.1 * i;
        int via_thresholds = sinr_to_cqi(s, cfg.thresholds);

        int best = 0;
        double best_tput = 0.0;
        for (int c = 1; c <= 15; ++c) {
            double b = bler(c, s, cfg.bler_model);
            if (b > cfg.target_bler) continue;
            const auto& mcs = cfg.table.at(c);
            double tput = (1.0 - b) * mcs.spectral_efficiency();
            if (tput > best_tput) {
                best_tput = tput;
                best = c;
            }
        }
        REQUIRE_MESSAGE(via_thresholds == best, "s = ", s);
    }
}

TEST_CASE("throughput arithmetic") {
    CHECK(throughput(0.0, 2, 0.5, 336.0, 0.5e-3) == doctest::Approx(672000.0));
    CHECK(throughput(1.0, 8, 0.925, 336.0, 0.5e-3) == 0.0);
    CHECK(throughput(0.5, 4, 0.5, 336.0, 1e-3) == doctest::Approx(336000.0));
    CHECK_THROWS(throughput(-0.1, 2, 0.5, 336.0, 1e-3));
    CHECK_THROWS(throughput(0.1, 3, 0.5, 336.0, 1e-3));  // odd modulation order
}

TEST_CASE("db conversions round trip") {
    for (double db : {-30.0, 0.0, 12.3, 45.0})
        CHECK(linear_to_db(db_to_linear(db)) == doctest::Approx(db).epsilon(1e-12));
}

TEST_CASE("default link config is internally consistent") {
    auto cfg = LinkConfig::defaults();
    CHECK(cfg.beta == 1.0);
    CHECK(cfg.target_bler == 0.1);
    CHECK(cfg.re_per_tti == 336.0);
    auto th = calibrate_thresholds(cfg.bler_model, cfg.target_bler);
    for (int c = 1; c <= 15; ++c)
        CHECK(cfg.thresholds.min_sinr_db[c - 1] == doctest::Approx(th.min_sinr_db[c - 1]));
    for (int c = 2; c <= 15; ++c)
        CHECK(cfg.thresholds.min_sinr_db[c - 1] > cfg.thresholds.min_sinr_db[c - 2]);
}

TEST_CASE("bler model validation rejects malformed curves") {
    auto model = BlerModel::defaults();
    model.slope[3] = -1.0;
    CHECK_THROWS(model.validate());
    model = BlerModel::defaults();
    model.midpoint_db[5] = model.midpoint_db[6];  // not strictly increasing
    CHECK_THROWS(model.validate());
}
