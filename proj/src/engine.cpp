#include "amc/engine.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

namespace amc::engine {

void TimingConfig::validate() const {
    if (measure_period_tti == 0) throw std::invalid_argument("timing: T_m must be >= 1");
    if (history_len == 0) throw std::invalid_argument("timing: L must be >= 1");
}

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed ^ (0x9e3779b97f4a7c15ULL * (salt + 1));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double eesm_db(const double* row, std::size_t k, double beta) {
    return link::linear_to_db(link::eesm({row, k}, beta));
}

}  // namespace

std::vector<LinkRecord> run_link(const chan::SinrTrace& trace, pred::Predictor& predictor,
                                 const TimingConfig& timing, const link::LinkConfig& linkcfg,
                                 std::uint64_t seed, const RunOptions& options) {
    timing.validate();
    const std::size_t K = trace.subcarriers;
    const std::size_t L = timing.history_len;
    const std::size_t Tm = timing.measure_period_tti;
    const std::size_t Td = timing.feedback_delay_tti;
    const std::size_t warmup = (L - 1) * Tm + Td;  // first TTI a report can govern
    if (trace.steps <= warmup)
        throw std::invalid_argument("run_link: trace too short, need more than " +
                                    std::to_string(warmup) + " TTIs, got " +
                                    std::to_string(trace.steps));
    if (predictor.history_len() != L || predictor.subcarriers() != K)
        throw std::invalid_argument("run_link: predictor trained for L=" +
                                    std::to_string(predictor.history_len()) + " K=" +
                                    std::to_string(predictor.subcarriers()) +
                                    ", trace/timing has L=" + std::to_string(L) +
                                    " K=" + std::to_string(K));

    std::mt19937_64 noise_rng(mix(seed, 1));
    std::mt19937_64 error_rng(mix(seed, 2));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto* genie = dynamic_cast<pred::GeniePredictor*>(&predictor);

    std::vector<LinkRecord> records;
    std::vector<double> history(L * K), truth(K), pred_lin(K);
    for (std::size_t n = L - 1; n * Tm + Td < trace.steps; ++n) {
        const std::size_t t_meas = n * Tm;
        for (std::size_t j = 0; j < L; ++j) {
            const double* row = trace.row((n - L + 1 + j) * Tm);
            for (std::size_t k = 0; k < K; ++k)
                history[j * K + k] = link::linear_to_db(row[k]);
        }
        if (options.measurement_noise_snr_db) {
            double mu = 0.0, var = 0.0;
            for (double v : history) mu += v;
            mu /= double(history.size());
            for (double v : history) var += (v - mu) * (v - mu);
            var /= double(history.size());
            double sd = std::sqrt(var / std::pow(10.0, *options.measurement_noise_snr_db / 10.0));
            for (auto& v : history) v += sd * gauss(noise_rng);
        }
        if (genie) {
            const double* row = trace.row(t_meas + Td);
            std::vector<double> future(K);
            for (std::size_t k = 0; k < K; ++k) future[k] = link::linear_to_db(row[k]);
            genie->set_future(std::move(future));
        }
        auto prediction = predictor.predict(history);
        if (prediction.sinr_db.size() != K)
            throw std::runtime_error("run_link: predictor returned wrong width");
        for (std::size_t k = 0; k < K; ++k)
            pred_lin[k] = link::db_to_linear(prediction.sinr_db[k]);
        double s_pred_db = link::linear_to_db(link::eesm(pred_lin, linkcfg.beta));
        int cqi = link::sinr_to_cqi(s_pred_db, linkcfg.thresholds);
        const auto& mcs = linkcfg.table.at(cqi);

        // report governs [t_meas+Td, t_meas+Tm+Td)
        const std::size_t apply_end = std::min(t_meas + Tm + Td, trace.steps);
        for (std::size_t t = t_meas + Td; t < apply_end; ++t) {
            double u = unit(error_rng);  // one draw per TTI, decision-independent
            LinkRecord rec;
            rec.tti = t;
            rec.cqi = cqi;
            rec.q = mcs.q;
            rec.rate = mcs.rate;
            rec.s_eff_db_true = eesm_db(trace.row(t), K, linkcfg.beta);
            rec.s_eff_db_pred = s_pred_db;
            for (std::size_t k = 0; k < K; ++k)
                truth[k] = link::linear_to_db(trace.at(t, k));
            rec.reported_nmse = pred::nmse(prediction.sinr_db, truth);
            if (cqi >= 1) {
                rec.bler = link::bler(cqi, rec.s_eff_db_true, linkcfg.bler_model);
                rec.block_error = u < rec.bler;
                rec.bits_delivered =
                    rec.block_error ? 0.0 : double(mcs.q) * mcs.rate * linkcfg.re_per_tti;
            }
            records.push_back(rec);
        }
    }
    return records;
}

LinkSummary summarize(const std::vector<LinkRecord>& records, double tti_s, double re_per_tti) {
    if (records.empty()) throw std::invalid_argument("summarize: no records");
    LinkSummary s;
    s.records = records.size();
    double bits = 0.0, expected = 0.0, bler_sum = 0.0, nmse_sum = 0.0;
    for (const auto& r : records) {
        bits += r.bits_delivered;
        nmse_sum += r.reported_nmse;
        if (r.cqi >= 1) {
            ++s.transmitting;
            bler_sum += r.bler;
            expected += (1.0 - r.bler) * double(r.q) * r.rate * re_per_tti;
        }
    }
    s.mean_bler = s.transmitting ? bler_sum / double(s.transmitting) : 0.0;
    s.realized_throughput_bps = bits / (double(s.records) * tti_s);
    s.expected_throughput_bps = expected / (double(s.records) * tti_s);
    s.no_transmission_fraction = double(s.records - s.transmitting) / double(s.records);
    s.mean_nmse = nmse_sum / double(s.records);
    return s;
}

void write_records_csv(const std::string& path, const std::vector<LinkRecord>& records,
                       const std::string& config_digest) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    if (!config_digest.empty()) os << "# config_digest=" << config_digest << "\n";
    os << "tti,cqi,q,rate,s_eff_db_true,s_eff_db_pred,bler,block_error,bits\n";
    char buf[256];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof(buf), "%zu,%d,%d,%.6f,%.6f,%.6f,%.6g,%d,%.1f\n", r.tti, r.cqi,
                      r.q, r.rate, r.s_eff_db_true, r.s_eff_db_pred, r.bler,
                      r.block_error ? 1 : 0, r.bits_delivered);
        os << buf;
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace amc::engine
