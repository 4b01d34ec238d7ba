// engine.hpp - closed AMC loop: measure, predict, report CQI, apply MCS
// after the feedback delay, draw block errors, accrue bits.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "amc/channel.hpp"
#include "amc/linkmap.hpp"
#include "amc/predictors.hpp"

namespace amc::engine {

struct TimingConfig {
    std::size_t measure_period_tti = 2;  // T_m
    std::size_t feedback_delay_tti = 2;  // T_d
    std::size_t history_len = 16;        // L

    void validate() const;
};

struct LinkRecord {
    std::size_t tti = 0;
    int cqi = 0;
    int q = 0;
    double rate = 0.0;
    double s_eff_db_true = 0.0;
    double s_eff_db_pred = 0.0;  // EESM of the governing prediction
    double bler = 0.0;            // 0 when cqi = 0 (no BLER event)
    bool block_error = false;
    double bits_delivered = 0.0;
    double reported_nmse = 0.0;   // prediction-vs-truth NMSE at application time
};

struct LinkSummary {
    double mean_bler = 0.0;            // over transmitting TTIs
    double realized_throughput_bps = 0.0;
    double expected_throughput_bps = 0.0;
    double no_transmission_fraction = 0.0;
    double mean_nmse = 0.0;            // linear ratio
    std::size_t records = 0;
    std::size_t transmitting = 0;
};

struct RunOptions {
    // AWGN on the dB-scale measured SINR before history assembly; the noise
    // variance is the history's dB variance divided by the linear SNR.
    std::optional<double> measurement_noise_snr_db;
};

std::vector<LinkRecord> run_link(const chan::SinrTrace& trace, pred::Predictor& predictor,
                                 const TimingConfig& timing, const link::LinkConfig& linkcfg,
                                 std::uint64_t seed, const RunOptions& options = {});

LinkSummary summarize(const std::vector<LinkRecord>& records, double tti_s, double re_per_tti);

void write_records_csv(const std::string& path, const std::vector<LinkRecord>& records,
                       const std::string& config_digest = {});

}  // namespace amc::engine
