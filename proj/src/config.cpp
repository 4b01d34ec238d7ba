#include "amc/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace amc::cfg {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

void parse_into(const std::string& path, Config& out, int depth) {
    if (depth > 8) throw std::runtime_error("config: include depth exceeded at " + path);
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open " + path);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        if (line.rfind("include ", 0) == 0) {
            std::filesystem::path inc = trim(line.substr(8));
            if (inc.is_relative()) inc = std::filesystem::path(path).parent_path() / inc;
            parse_into(inc.string(), out, depth + 1);
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: " + path + ":" + std::to_string(lineno) +
                                     ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config: " + path + ":" + std::to_string(lineno) +
                                     ": empty key");
        if (!section.empty()) key = section + "." + key;
        out.set(key, value);
    }
}

}  // namespace

Config Config::parse_file(const std::string& path) {
    Config c;
    parse_into(path, c, 0);
    return c;
}

void Config::apply_override(const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::runtime_error("override must be key=value, got '" + assignment + "'");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

void Config::merge_under(const Config& defaults) {
    for (auto& [k, v] : defaults.values_) values_.emplace(k, v);
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

std::string Config::str(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::int64_t Config::i64(const std::string& key, std::int64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return std::stoll(it->second);
    } catch (...) {
        throw std::runtime_error("config: key '" + key + "' is not an integer: " + it->second);
    }
}

std::uint64_t Config::u64(const std::string& key, std::uint64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return std::stoull(it->second);
    } catch (...) {
        throw std::runtime_error("config: key '" + key + "' is not an integer: " + it->second);
    }
}

double Config::dbl(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return std::stod(it->second);
    } catch (...) {
        throw std::runtime_error("config: key '" + key + "' is not a number: " + it->second);
    }
}

bool Config::boolean(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::runtime_error("config: key '" + key + "' is not a boolean: " + v);
}

std::vector<double> Config::dbl_list(const std::string& key, std::vector<double> fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    if (out.empty())
        throw std::runtime_error("config: key '" + key + "' has no values");
    return out;
}

void Config::require_known(const std::set<std::string>& known) const {
    std::string unknown;
    for (auto& [k, v] : values_)
        if (known.count(k) == 0) unknown += (unknown.empty() ? "" : ", ") + k;
    if (!unknown.empty()) throw std::runtime_error("config: unknown keys: " + unknown);
}

std::string Config::digest() const { return hex64(fnv1a64(dump())); }

std::string Config::dump() const {
    std::string out;
    for (auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace amc::cfg
