#include "amc/channel.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace amc::chan {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// splitmix64, used to derive independent per-sample seeds
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

namespace {

PowerDelayProfile normalized(PowerDelayProfile p) {
    double total = 0.0;
    for (double db : p.powers_db) total += std::pow(10.0, db / 10.0);
    const double shift = 10.0 * std::log10(total);
    for (auto& db : p.powers_db) db -= shift;
    return p;
}

}  // namespace

PowerDelayProfile PowerDelayProfile::uma() {
    return normalized({"uma",
                       {0.0, 100e-9, 200e-9, 400e-9, 800e-9, 1600e-9},
                       {0.0, -2.0, -4.0, -8.0, -12.0, -16.0}});
}

PowerDelayProfile PowerDelayProfile::umi() {
    return normalized({"umi",
                       {0.0, 50e-9, 100e-9, 200e-9, 400e-9, 800e-9},
                       {0.0, -2.0, -4.0, -8.0, -12.0, -16.0}});
}

PowerDelayProfile PowerDelayProfile::flat() { return {"flat", {0.0}, {0.0}}; }

PowerDelayProfile PowerDelayProfile::by_name(const std::string& name) {
    if (name == "uma") return uma();
    if (name == "umi") return umi();
    if (name == "flat") return flat();
    throw std::invalid_argument("unknown power-delay profile: " + name);
}

void ChannelConfig::validate() const {
    if (subcarriers == 0) throw std::invalid_argument("channel: subcarrier count must be >= 1");
    if (velocity_kmh < 0.0) throw std::invalid_argument("channel: velocity must be >= 0");
    if (profile.delays_s.empty() || profile.delays_s.size() != profile.powers_db.size())
        throw std::invalid_argument("channel: degenerate power-delay profile");
    if (mean_snr_low_db > mean_snr_high_db)
        throw std::invalid_argument("channel: mean-SNR range inverted");
    if (tti_s <= 0.0 || df_hz <= 0.0 || fc_hz <= 0.0)
        throw std::invalid_argument("channel: timing/frequency parameters must be positive");
    if (sinusoids_per_tap < 32)
        throw std::invalid_argument("channel: need >= 32 sinusoids per tap");
}

double doppler_frequency_hz(double velocity_kmh, double fc_hz) {
    if (velocity_kmh < 0.0) throw std::invalid_argument("doppler: velocity must be >= 0");
    return (velocity_kmh / 3.6) * fc_hz / kSpeedOfLight;
}

SinrTrace generate_trace(const ChannelConfig& config, std::size_t steps) {
    config.validate();
    if (steps == 0) throw std::invalid_argument("generate_trace: need T >= 1");
    const std::size_t ntaps = config.profile.delays_s.size();
    const std::size_t K = config.subcarriers;
    const std::size_t M = config.sinusoids_per_tap;
    const double fd = doppler_frequency_hz(config.velocity_kmh, config.fc_hz);

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // tap powers, normalized to unit total power in linear scale
    std::vector<double> tap_pow(ntaps);
    double total = 0.0;
    for (std::size_t l = 0; l < ntaps; ++l) {
        tap_pow[l] = std::pow(10.0, config.profile.powers_db[l] / 10.0);
        total += tap_pow[l];
    }
    for (auto& p : tap_pow) p /= total;

    // per-tap oscillator banks: evenly spaced arrival angles (accurate J0
    // autocorrelation) with one random angular offset and random phases
    std::vector<std::vector<double>> omega(ntaps), phase(ntaps);
    for (std::size_t l = 0; l < ntaps; ++l) {
        omega[l].resize(M);
        phase[l].resize(M);
        const double offset = unit(rng);
        for (std::size_t m = 0; m < M; ++m) {
            double alpha = kTwoPi * (double(m) + offset) / double(M);
            omega[l][m] = kTwoPi * fd * std::cos(alpha);
            phase[l][m] = kTwoPi * unit(rng);
        }
    }

    // large-scale gain: one mean-SNR draw per trace
    const double mean_snr_db =
        config.mean_snr_low_db + (config.mean_snr_high_db - config.mean_snr_low_db) * unit(rng);
    const double snr_lin = std::pow(10.0, mean_snr_db / 10.0);

    // subcarrier phase ramps per tap: exp(-j 2 pi f_k tau_l)
    std::vector<double> ramp_re(ntaps * K), ramp_im(ntaps * K);
    for (std::size_t l = 0; l < ntaps; ++l)
        for (std::size_t k = 0; k < K; ++k) {
            double ang = -kTwoPi * config.df_hz * double(k) * config.profile.delays_s[l];
            ramp_re[l * K + k] = std::cos(ang);
            ramp_im[l * K + k] = std::sin(ang);
        }

    SinrTrace trace;
    trace.steps = steps;
    trace.subcarriers = K;
    trace.tti_s = config.tti_s;
    trace.velocity_kmh = config.velocity_kmh;
    trace.seed = config.seed;
    trace.profile_name = config.profile.name;
    trace.values.resize(steps * K);

    const double amp = 1.0 / std::sqrt(double(M));
    std::vector<double> tap_re(ntaps), tap_im(ntaps);
    for (std::size_t t = 0; t < steps; ++t) {
        const double time = double(t) * config.tti_s;
        for (std::size_t l = 0; l < ntaps; ++l) {
            double re = 0.0, im = 0.0;
            for (std::size_t m = 0; m < M; ++m) {
                double ang = omega[l][m] * time + phase[l][m];
                re += std::cos(ang);
                im += std::sin(ang);
            }
            double a = amp * std::sqrt(tap_pow[l]);
            tap_re[l] = a * re;
            tap_im[l] = a * im;
        }
        for (std::size_t k = 0; k < K; ++k) {
            double hre = 0.0, him = 0.0;
            for (std::size_t l = 0; l < ntaps; ++l) {
                hre += tap_re[l] * ramp_re[l * K + k] - tap_im[l] * ramp_im[l * K + k];
                him += tap_re[l] * ramp_im[l * K + k] + tap_im[l] * ramp_re[l * K + k];
            }
            double sinr = snr_lin * (hre * hre + him * him);
            trace.values[t * K + k] = std::max(sinr, 1e-30);
        }
    }
    return trace;
}

Dataset sample_dataset(const DatasetConfig& config, std::size_t count, std::uint64_t seed) {
    if (config.history_len == 0 || config.measure_period_tti == 0)
        throw std::invalid_argument("sample_dataset: L and T_m must be >= 1");
    const std::size_t L = config.history_len;
    const std::size_t Tm = config.measure_period_tti;
    const std::size_t Td = config.horizon_tti;
    const std::size_t K = config.channel.subcarriers;
    const std::size_t span = (L - 1) * Tm + Td + 1;

    Dataset ds;
    ds.subcarriers = K;
    ds.history_len = L;
    ds.measure_period_tti = Tm;
    ds.horizon_tti = Td;
    ds.tti_s = config.channel.tti_s;
    ds.seed = seed;
    ds.profile_name = config.channel.profile.name;
    ds.samples.reserve(count);

    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t sseed = mix_seed(seed, i);
        std::mt19937_64 vrng(mix_seed(sseed, 0xabcdULL));
        std::uniform_real_distribution<double> vel(config.velocity_low_kmh,
                                                   config.velocity_high_kmh);
        ChannelConfig cc = config.channel;
        cc.velocity_kmh = vel(vrng);
        cc.seed = sseed;
        auto trace = generate_trace(cc, span);

        Sample s;
        s.velocity_kmh = cc.velocity_kmh;
        s.history_db.resize(L * K);
        s.target_db.resize(K);
        for (std::size_t j = 0; j < L; ++j)
            for (std::size_t k = 0; k < K; ++k)
                s.history_db[j * K + k] = 10.0 * std::log10(trace.at(j * Tm, k));
        for (std::size_t k = 0; k < K; ++k)
            s.target_db[k] = 10.0 * std::log10(trace.at((L - 1) * Tm + Td, k));
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

// ---- AMCT container ---------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'A', 'M', 'C', 'T'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kKindTrace = 0;
constexpr std::uint8_t kKindDataset = 1;

template <typename T>
void wr(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T rd(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw std::runtime_error("AMCT: truncated file");
    return v;
}

void wr_str(std::ostream& os, const std::string& s) {
    wr<std::uint32_t>(os, std::uint32_t(s.size()));
    os.write(s.data(), std::streamsize(s.size()));
}

std::string rd_str(std::istream& is) {
    auto n = rd<std::uint32_t>(is);
    std::string s(n, '\0');
    is.read(s.data(), std::streamsize(n));
    if (!is) throw std::runtime_error("AMCT: truncated string");
    return s;
}

struct Header {
    std::uint8_t kind;
    std::uint64_t count;
    std::uint32_t subcarriers, history_len, tm, td, tti_us, velocity_mm_s;
    std::uint64_t seed;
    std::string profile, digest;
};

void write_header(std::ostream& os, const Header& h) {
    os.write(kMagic, 4);
    wr<std::uint32_t>(os, kVersion);
    wr<std::uint8_t>(os, h.kind);
    wr<std::uint64_t>(os, h.count);
    wr<std::uint32_t>(os, h.subcarriers);
    wr<std::uint32_t>(os, h.history_len);
    wr<std::uint32_t>(os, h.tm);
    wr<std::uint32_t>(os, h.td);
    wr<std::uint32_t>(os, h.tti_us);
    wr<std::uint32_t>(os, h.velocity_mm_s);
    wr<std::uint64_t>(os, h.seed);
    wr_str(os, h.profile);
    wr_str(os, h.digest);
}

Header read_header(std::istream& is, const std::string& path) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("AMCT: bad magic in " + path);
    auto version = rd<std::uint32_t>(is);
    if (version != kVersion)
        throw std::runtime_error("AMCT: unsupported version " + std::to_string(version));
    Header h;
    h.kind = rd<std::uint8_t>(is);
    h.count = rd<std::uint64_t>(is);
    h.subcarriers = rd<std::uint32_t>(is);
    h.history_len = rd<std::uint32_t>(is);
    h.tm = rd<std::uint32_t>(is);
    h.td = rd<std::uint32_t>(is);
    h.tti_us = rd<std::uint32_t>(is);
    h.velocity_mm_s = rd<std::uint32_t>(is);
    h.seed = rd<std::uint64_t>(is);
    h.profile = rd_str(is);
    h.digest = rd_str(is);
    return h;
}

std::uint32_t kmh_to_mm_s(double kmh) {
    return std::uint32_t(std::llround(kmh * 1e6 / 3600.0));
}

}  // namespace

void save_trace(const std::string& path, const SinrTrace& trace, const std::string& digest) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("AMCT: cannot open for write: " + path);
    Header h{kKindTrace,
             trace.steps,
             std::uint32_t(trace.subcarriers),
             0,
             0,
             0,
             std::uint32_t(std::llround(trace.tti_s * 1e6)),
             kmh_to_mm_s(trace.velocity_kmh),
             trace.seed,
             trace.profile_name,
             digest};
    write_header(os, h);
    for (double v : trace.values) wr<float>(os, float(v));  // linear SINR
    if (!os) throw std::runtime_error("AMCT: write failed: " + path);
}

SinrTrace load_trace(const std::string& path, std::string* digest) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("AMCT: cannot open: " + path);
    auto h = read_header(is, path);
    if (h.kind != kKindTrace) throw std::runtime_error("AMCT: not a trace file: " + path);
    SinrTrace t;
    t.steps = h.count;
    t.subcarriers = h.subcarriers;
    t.tti_s = double(h.tti_us) * 1e-6;
    t.velocity_kmh = double(h.velocity_mm_s) * 3600.0 / 1e6;
    t.seed = h.seed;
    t.profile_name = h.profile;
    t.values.resize(t.steps * t.subcarriers);
    for (auto& v : t.values) v = double(rd<float>(is));
    if (digest) *digest = h.digest;
    return t;
}

void save_dataset(const std::string& path, const Dataset& ds, const std::string& digest) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("AMCT: cannot open for write: " + path);
    Header h{kKindDataset,
             ds.samples.size(),
             std::uint32_t(ds.subcarriers),
             std::uint32_t(ds.history_len),
             std::uint32_t(ds.measure_period_tti),
             std::uint32_t(ds.horizon_tti),
             std::uint32_t(std::llround(ds.tti_s * 1e6)),
             0,
             ds.seed,
             ds.profile_name,
             digest};
    write_header(os, h);
    // payload rows are SINR in dB (the predictor-facing unit)
    for (const auto& s : ds.samples) {
        wr<float>(os, float(s.velocity_kmh));
        for (double v : s.history_db) wr<float>(os, float(v));
        for (double v : s.target_db) wr<float>(os, float(v));
    }
    if (!os) throw std::runtime_error("AMCT: write failed: " + path);
}

Dataset load_dataset(const std::string& path, std::string* digest) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("AMCT: cannot open: " + path);
    auto h = read_header(is, path);
    if (h.kind != kKindDataset) throw std::runtime_error("AMCT: not a dataset file: " + path);
    Dataset ds;
    ds.subcarriers = h.subcarriers;
    ds.history_len = h.history_len;
    ds.measure_period_tti = h.tm;
    ds.horizon_tti = h.td;
    ds.tti_s = double(h.tti_us) * 1e-6;
    ds.seed = h.seed;
    ds.profile_name = h.profile;
    ds.samples.resize(h.count);
    for (auto& s : ds.samples) {
        s.velocity_kmh = double(rd<float>(is));
        s.history_db.resize(ds.history_len * ds.subcarriers);
        s.target_db.resize(ds.subcarriers);
        for (auto& v : s.history_db) v = double(rd<float>(is));
        for (auto& v : s.target_db) v = double(rd<float>(is));
    }
    if (digest) *digest = h.digest;
    return ds;
}

std::string describe_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    auto h = read_header(is, path);
    std::ostringstream os;
    os << "kind=" << (h.kind == kKindTrace ? "trace" : "dataset") << "\n"
       << (h.kind == kKindTrace ? "steps=" : "samples=") << h.count << "\n"
       << "subcarriers=" << h.subcarriers << "\n";
    if (h.kind == kKindDataset)
        os << "history_len=" << h.history_len << "\n"
           << "measure_period_tti=" << h.tm << "\n"
           << "horizon_tti=" << h.td << "\n";
    os << "tti_us=" << h.tti_us << "\n"
       << "velocity_mm_s=" << h.velocity_mm_s << "\n"
       << "seed=" << h.seed << "\n"
       << "profile=" << h.profile << "\n"
       << "config_digest=" << (h.digest.empty() ? "(none)" : h.digest) << "\n";
    return os.str();
}

}  // namespace amc::chan
