// linkmap.hpp - deterministic link-quality mappings: effective SINR (EESM),
// CQI quantization, MCS lookup, parametric BLER curves, throughput.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace amc::link {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

struct McsEntry {
    int cqi = 0;      // 0 = no transmission
    int q = 0;        // modulation order, bits per symbol
    double rate = 0;  // code rate in (0,1]
    double spectral_efficiency() const { return q * rate; }
};

// CQI 1..15 -> MCS. Index 0 is the out-of-range / no-transmission sentinel.
class CqiTable {
public:
    CqiTable() : CqiTable(default_entries()) {}
    explicit CqiTable(std::array<McsEntry, 15> entries);
    const McsEntry& at(int cqi) const;  // cqi in 0..15
    static std::array<McsEntry, 15> default_entries();  // 3GPP 4-bit 256QAM table

private:
    std::array<McsEntry, 16> entries_;
};

// Per-CQI logistic SINR(dB) -> BLER curve: 1/(1+exp(k*(s - m))).
struct BlerModel {
    std::array<double, 15> midpoint_db;  // SINR at BLER 0.5, strictly increasing
    std::array<double, 15> slope;        // per dB, > 0

    static BlerModel defaults();  // m_c = -7 + 2.1*(c-1), k_c = 0.5
    void validate() const;
};

struct CqiThresholds {
    std::array<double, 15> min_sinr_db;  // strictly increasing
};

// S_eff = -beta * ln( mean_i exp(-S_i / beta) ), all linear scale.
double eesm(std::span<const double> sinrs_linear, double beta);

// Largest cqi whose threshold is <= s_eff_db; 0 if below the first.
int sinr_to_cqi(double s_eff_db, const CqiThresholds& th);

const McsEntry& cqi_to_mcs(int cqi, const CqiTable& table);

double bler(int cqi, double s_eff_db, const BlerModel& model);

// thresholds[c] = m_c + ln((1-target)/target)/k_c
CqiThresholds calibrate_thresholds(const BlerModel& model, double target_bler);

// (1-bler) * Q * R * re_per_tti / tti_seconds, bits per second
double throughput(double bler, int q, double rate, double re_per_tti, double tti_seconds);

struct LinkConfig {
    CqiTable table;
    BlerModel bler_model = BlerModel::defaults();
    double beta = 1.0;
    double target_bler = 0.1;
    double re_per_tti = 336.0;  // 48 subcarriers x 7 OFDM symbols per slot
    CqiThresholds thresholds;   // derived from bler_model + target

    static LinkConfig defaults();
};

}  // namespace amc::link
