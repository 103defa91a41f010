#include "config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "blowup/errors.hpp"

namespace cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "inf" || t == "+inf") return HUGE_VAL;
    if (t == "-inf") return -HUGE_VAL;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE)
        throw ConfigError("key '" + key + "': '" + text + "' is not a number");
    return v;
}

}  // namespace

Config Config::from_text(const std::string& text, const std::string& origin) {
    Config c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        c.set(key, trim(t.substr(eq + 1)));
    }
    return c;
}

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str(), path);
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

void Config::merge(const Config& over) {
    for (const auto& [k, v] : over.values_) values_[k] = v;
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

std::string Config::str(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing required key '" + key + "'");
    return it->second;
}

std::string Config::str(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::num(const std::string& key) const { return parse_double(key, str(key)); }

double Config::num(const std::string& key, double fallback) const {
    return has(key) ? parse_double(key, str(key)) : fallback;
}

std::optional<double> Config::opt_num(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return parse_double(key, str(key));
}

long long Config::integer(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    const double v = num(key);
    if (v != std::floor(v) || std::fabs(v) > 9.0e15) throw ConfigError("key '" + key + "' must be an integer");
    return static_cast<long long>(v);
}

std::uint64_t Config::seed() const {
    if (!has("seed")) throw ConfigError("stochastic subcommands need a seed (key 'seed' or --seed)");
    const std::string t = trim(str("seed"));
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
    if (t.empty() || t[0] == '-' || end != t.c_str() + t.size() || errno == ERANGE)
        throw ConfigError("seed must be a non-negative integer, got '" + t + "'");
    return v;
}

bool Config::flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = trim(str(key));
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError("key '" + key + "' must be true or false");
}

blowup::ExtReal Config::ext(const std::string& key, blowup::ExtReal fallback) const {
    if (!has(key)) return fallback;
    const double v = num(key);
    if (std::isinf(v)) return v > 0 ? blowup::ExtReal::pos_inf() : blowup::ExtReal::neg_inf();
    return blowup::ExtReal(v);
}

blowup::FunctionExpr Config::expr(const std::string& key, const std::string& var) const {
    const std::string text = str(key);
    try {
        return blowup::FunctionExpr::parse(text, var);
    } catch (const blowup::ParseError& e) {
        throw ConfigError("key '" + key + "': " + e.what());
    }
}

blowup::FunctionExpr Config::expr(const std::string& key, const std::string& var, const std::string& fallback) const {
    if (!has(key)) return blowup::FunctionExpr::parse(fallback, var);
    return expr(key, var);
}

std::vector<double> Config::list(const std::string& key) const {
    std::vector<double> out;
    std::istringstream in(str(key));
    std::string item;
    while (std::getline(in, item, ',')) {
        if (trim(item).empty()) continue;
        out.push_back(parse_double(key, item));
    }
    if (out.empty()) throw ConfigError("key '" + key + "' is an empty list");
    return out;
}

std::string Config::canonical() const {
    std::string out;
    for (const auto& [k, v] : values_)
        if (k != "workers") out += k + "=" + v + "\n";  // execution-only; outputs do not depend on it
    return out;
}

std::string Config::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace cli
