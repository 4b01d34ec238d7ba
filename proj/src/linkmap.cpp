#include "amc/linkmap.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace amc::link {

// 3GPP 4-bit CQI table with 256QAM, entries (modulation order, code rate x1024)
std::array<McsEntry, 15> CqiTable::default_entries() {
    constexpr std::array<std::pair<int, int>, 15> raw = {{
        {2, 78}, {2, 193}, {2, 449},
        {4, 378}, {4, 490}, {4, 616},
        {6, 466}, {6, 567}, {6, 666}, {6, 772}, {6, 873},
        {8, 711}, {8, 797}, {8, 885}, {8, 948},
    }};
    std::array<McsEntry, 15> out;
    for (int i = 0; i < 15; ++i)
        out[std::size_t(i)] = {i + 1, raw[std::size_t(i)].first,
                               raw[std::size_t(i)].second / 1024.0};
    return out;
}

CqiTable::CqiTable(std::array<McsEntry, 15> entries) {
    entries_[0] = McsEntry{};  // no transmission
    double prev_se = 0.0;
    for (int i = 0; i < 15; ++i) {
        const auto& e = entries[std::size_t(i)];
        if (e.cqi != i + 1) throw std::invalid_argument("CqiTable: entry " + std::to_string(i) +
                                                        " must carry cqi index " + std::to_string(i + 1));
        if (e.rate <= 0.0 || e.rate > 1.0)
            throw std::invalid_argument("CqiTable: code rate must be in (0,1]");
        if (e.q != 2 && e.q != 4 && e.q != 6 && e.q != 8)
            throw std::invalid_argument("CqiTable: modulation order must be in {2,4,6,8}");
        if (e.spectral_efficiency() <= prev_se)
            throw std::invalid_argument("CqiTable: spectral efficiency must be strictly increasing");
        prev_se = e.spectral_efficiency();
        entries_[std::size_t(i + 1)] = e;
    }
}

const McsEntry& CqiTable::at(int cqi) const {
    if (cqi < 0 || cqi > 15) throw std::out_of_range("CqiTable: cqi must be in 0..15");
    return entries_[std::size_t(cqi)];
}

BlerModel BlerModel::defaults() {
    BlerModel m;
    for (int c = 0; c < 15; ++c) {
        m.midpoint_db[std::size_t(c)] = -7.0 + 2.1 * c;
        // Gentle enough that, at the 0.1 target, thresholding equals the
        // brute-force throughput argmax for every adjacent spectral-efficiency
        // ratio in the default table (needs k * 2.1 dB <= 1.09).
        m.slope[std::size_t(c)] = 0.5;
    }
    return m;
}

void BlerModel::validate() const {
    for (int c = 0; c < 15; ++c) {
        if (slope[std::size_t(c)] <= 0.0)
            throw std::invalid_argument("BlerModel: slope must be positive");
        if (c > 0 && midpoint_db[std::size_t(c)] <= midpoint_db[std::size_t(c - 1)])
            throw std::invalid_argument("BlerModel: midpoints must be strictly increasing");
    }
}

double eesm(std::span<const double> sinrs_linear, double beta) {
    if (sinrs_linear.empty()) throw std::invalid_argument("eesm: empty SINR vector");
    if (beta <= 0.0) throw std::invalid_argument("eesm: beta must be positive");
    // log-sum-exp form keeps large SINR ratios from underflowing the mean
    double amax = -1e300;
    for (double s : sinrs_linear) {
        if (!(s > 0.0) || !std::isfinite(s))
            throw std::invalid_argument("eesm: SINRs must be positive and finite");
        amax = std::max(amax, -s / beta);
    }
    double acc = 0.0;
    for (double s : sinrs_linear) acc += std::exp(-s / beta - amax);
    double lse = amax + std::log(acc) - std::log(double(sinrs_linear.size()));
    return -beta * lse;
}

int sinr_to_cqi(double s_eff_db, const CqiThresholds& th) {
    int cqi = 0;
    for (int c = 1; c <= 15; ++c)
        if (th.min_sinr_db[std::size_t(c - 1)] <= s_eff_db) cqi = c;
    return cqi;
}

const McsEntry& cqi_to_mcs(int cqi, const CqiTable& table) { return table.at(cqi); }

double bler(int cqi, double s_eff_db, const BlerModel& model) {
    if (cqi < 1 || cqi > 15) throw std::out_of_range("bler: cqi must be in 1..15");
    double m = model.midpoint_db[std::size_t(cqi - 1)];
    double k = model.slope[std::size_t(cqi - 1)];
    double p = 1.0 / (1.0 + std::exp(k * (s_eff_db - m)));
    return std::clamp(p, 0.0, 1.0);
}

CqiThresholds calibrate_thresholds(const BlerModel& model, double target_bler) {
    if (!(target_bler > 0.0 && target_bler < 1.0))
        throw std::invalid_argument("calibrate_thresholds: target must be in (0,1)");
    model.validate();
    CqiThresholds th;
    double margin_prev = -1e300;
    for (int c = 0; c < 15; ++c) {
        th.min_sinr_db[std::size_t(c)] =
            model.midpoint_db[std::size_t(c)] +
            std::log((1.0 - target_bler) / target_bler) / model.slope[std::size_t(c)];
        if (th.min_sinr_db[std::size_t(c)] <= margin_prev)
            throw std::runtime_error("calibrate_thresholds: non-monotone thresholds (misconfigured BLER model)");
        margin_prev = th.min_sinr_db[std::size_t(c)];
    }
    return th;
}

double throughput(double bler_p, int q, double rate, double re_per_tti, double tti_seconds) {
    if (bler_p < 0.0 || bler_p > 1.0) throw std::invalid_argument("throughput: bler out of [0,1]");
    if (tti_seconds <= 0.0) throw std::invalid_argument("throughput: tti must be positive");
    if (q != 0 && q != 2 && q != 4 && q != 6 && q != 8)
        throw std::invalid_argument("throughput: modulation order must be in {0,2,4,6,8}");
    if (rate < 0.0 || rate > 1.0) throw std::invalid_argument("throughput: rate out of [0,1]");
    if (re_per_tti < 0.0) throw std::invalid_argument("throughput: re_per_tti must be >= 0");
    return (1.0 - bler_p) * double(q) * rate * re_per_tti / tti_seconds;
}

LinkConfig LinkConfig::defaults() {
    LinkConfig cfg;
    cfg.thresholds = calibrate_thresholds(cfg.bler_model, cfg.target_bler);
    return cfg;
}

}  // namespace amc::link
