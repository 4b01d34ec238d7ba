// channel.hpp - per-subcarrier SINR traces for a moving user over a
// frequency-selective fading channel (tapped delay line, sum-of-sinusoids
// Jakes Doppler per tap).

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace amc::chan {

constexpr double kSpeedOfLight = 299792458.0;

struct PowerDelayProfile {
    std::string name;
    std::vector<double> delays_s;
    std::vector<double> powers_db;  // normalized to unit total power in linear scale

    static PowerDelayProfile uma();       // 6 taps, 0..1600 ns
    static PowerDelayProfile umi();       // same powers, halved delays
    static PowerDelayProfile flat();      // single tap
    static PowerDelayProfile by_name(const std::string& name);
};

struct ChannelConfig {
    double fc_hz = 2.4e9;
    double df_hz = 15e3;
    std::size_t subcarriers = 48;
    double tti_s = 0.5e-3;
    double pbs_dbm = 40.0;
    double noise_dbm = -84.0;
    double velocity_kmh = 50.0;
    PowerDelayProfile profile = PowerDelayProfile::uma();
    double mean_snr_low_db = 0.0;   // large-scale mean-SNR draw range
    double mean_snr_high_db = 26.0;
    std::uint64_t seed = 1;
    std::size_t sinusoids_per_tap = 64;

    void validate() const;
};

struct SinrTrace {
    std::vector<double> values;  // T x K linear SINR, row-major
    std::size_t steps = 0;       // T
    std::size_t subcarriers = 0; // K
    double tti_s = 0.0;
    double velocity_kmh = 0.0;
    std::uint64_t seed = 0;
    std::string profile_name;

    double at(std::size_t t, std::size_t k) const { return values[t * subcarriers + k]; }
    const double* row(std::size_t t) const { return values.data() + t * subcarriers; }
};

double doppler_frequency_hz(double velocity_kmh, double fc_hz);

SinrTrace generate_trace(const ChannelConfig& config, std::size_t steps);

// One (history, target) training pair: L rows of SINR in dB spaced T_m TTIs
// apart plus the row T_d TTIs after the last measurement.
struct Sample {
    std::vector<double> history_db;  // L x K
    std::vector<double> target_db;   // 1 x K
    double velocity_kmh = 0.0;
};

struct DatasetConfig {
    ChannelConfig channel;
    double velocity_low_kmh = 40.0;
    double velocity_high_kmh = 100.0;
    std::size_t history_len = 16;       // L
    std::size_t measure_period_tti = 2; // T_m
    std::size_t horizon_tti = 2;        // T_d
};

struct Dataset {
    std::vector<Sample> samples;
    std::size_t subcarriers = 0;
    std::size_t history_len = 0;
    std::size_t measure_period_tti = 0;
    std::size_t horizon_tti = 0;
    double tti_s = 0.0;
    std::uint64_t seed = 0;
    std::string profile_name;
};

// Each sample comes from an independent short trace; velocity drawn uniformly
// from the configured range. Fully determined by (config, seed).
Dataset sample_dataset(const DatasetConfig& config, std::size_t count, std::uint64_t seed);

// ---- "AMCT" file container --------------------------------------------------

void save_trace(const std::string& path, const SinrTrace& trace,
                const std::string& config_digest = {});
SinrTrace load_trace(const std::string& path, std::string* config_digest = nullptr);

void save_dataset(const std::string& path, const Dataset& ds,
                  const std::string& config_digest = {});
Dataset load_dataset(const std::string& path, std::string* config_digest = nullptr);

// Header summary for `inspect`.
std::string describe_file(const std::string& path);

}  // namespace amc::chan
