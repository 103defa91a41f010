#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "blowup/ext_real.hpp"
#include "blowup/expr.hpp"

namespace cli {

/// Bad or missing configuration; maps to exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat key=value configuration. Later layers override earlier ones, so callers merge
/// defaults, then the file, then command-line values.
class Config {
public:
    /// Lines are `key = value`; blank lines and lines starting with '#' are skipped.
    static Config from_text(const std::string& text, const std::string& origin = "<text>");
    static Config from_file(const std::string& path);

    void set(const std::string& key, const std::string& value);
    void merge(const Config& over);
    bool has(const std::string& key) const;

    std::string str(const std::string& key) const;
    std::string str(const std::string& key, const std::string& fallback) const;
    double num(const std::string& key) const;
    double num(const std::string& key, double fallback) const;
    std::optional<double> opt_num(const std::string& key) const;
    long long integer(const std::string& key, long long fallback) const;
    std::uint64_t seed() const;
    bool flag(const std::string& key, bool fallback) const;
    /// Accepts "inf", "+inf", "-inf" as well as finite numbers.
    blowup::ExtReal ext(const std::string& key, blowup::ExtReal fallback) const;
    blowup::FunctionExpr expr(const std::string& key, const std::string& var) const;
    blowup::FunctionExpr expr(const std::string& key, const std::string& var, const std::string& fallback) const;
    /// Comma-separated list of numbers.
    std::vector<double> list(const std::string& key) const;

    /// 64-bit FNV-1a of the canonical "key=value\n" dump, as 16 hex digits. The worker
    /// count is left out since results do not depend on it.
    std::string hash() const;
    std::string canonical() const;
    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace cli
