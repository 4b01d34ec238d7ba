// config.hpp - flat key = value configuration with [section] headers and a
// single `include` directive; merged as defaults < file < overrides.

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace amc::cfg {

class Config {
public:
    Config() = default;

    static Config parse_file(const std::string& path);
    // "key=value" strings, e.g. from command-line overrides
    void apply_override(const std::string& assignment);
    void set(const std::string& key, const std::string& value);
    void merge_under(const Config& defaults);  // keeps existing keys

    bool has(const std::string& key) const;
    std::string str(const std::string& key, const std::string& fallback = {}) const;
    std::int64_t i64(const std::string& key, std::int64_t fallback) const;
    std::uint64_t u64(const std::string& key, std::uint64_t fallback) const;
    double dbl(const std::string& key, double fallback) const;
    bool boolean(const std::string& key, bool fallback) const;
    std::vector<double> dbl_list(const std::string& key, std::vector<double> fallback) const;

    // throws listing every unknown key
    void require_known(const std::set<std::string>& known) const;

    // FNV-1a 64 over the sorted key=value lines
    std::string digest() const;
    std::string dump() const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t v);

}  // namespace amc::cfg
