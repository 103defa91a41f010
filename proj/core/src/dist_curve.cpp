#include "blowup/dist_curve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace blowup {

void DistCurve::validate(double tol) const {
    if (times.size() != cdf.size()) throw std::invalid_argument("DistCurve: grid and values differ in length");
    if (!std_errors.empty() && std_errors.size() != times.size())
        throw std::invalid_argument("DistCurve: standard errors differ in length");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (i > 0 && !(times[i] > times[i - 1])) throw std::invalid_argument("DistCurve: grid not increasing");
        if (times[i] < 0.0) throw std::invalid_argument("DistCurve: negative time");
        if (!(cdf[i] >= -tol && cdf[i] <= 1.0 + tol)) throw std::invalid_argument("DistCurve: value outside [0,1]");
        if (i > 0 && cdf[i] < cdf[i - 1] - tol) throw std::invalid_argument("DistCurve: CDF decreases");
    }
}

double DistCurve::at(double t) const {
    if (times.empty()) throw std::invalid_argument("DistCurve: empty curve");
    if (t <= times.front()) return cdf.front();
    if (t >= times.back()) return cdf.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times.begin());
    const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
    return (1.0 - w) * cdf[i - 1] + w * cdf[i];
}

double sup_gap(const DistCurve& a, const DistCurve& b) {
    double gap = 0.0;
    for (std::size_t i = 0; i < a.times.size(); ++i) gap = std::max(gap, std::fabs(a.cdf[i] - b.at(a.times[i])));
    return gap;
}

namespace {
std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace

std::string to_csv(const DistCurve& curve, const std::vector<std::pair<std::string, std::string>>& header) {
    std::string out;
    for (const auto& [k, v] : header) out += "# " + k + "=" + v + "\n";
    if (curve.closed_form) out += "# closed_form=" + *curve.closed_form + "\n";
    if (curve.censored_mass) out += "# censored_mass=" + fmt17(*curve.censored_mass) + "\n";
    const bool se = !curve.std_errors.empty();
    out += se ? "t,cdf,se\n" : "t,cdf\n";
    for (std::size_t i = 0; i < curve.times.size(); ++i) {
        out += fmt17(curve.times[i]) + "," + fmt17(curve.cdf[i]);
        if (se) out += "," + fmt17(curve.std_errors[i]);
        out += "\n";
    }
    return out;
}

DistCurve dist_curve_from_csv(const std::string& text) {
    DistCurve c;
    std::istringstream in(text);
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq != std::string::npos && line.compare(2, eq - 2, "closed_form") == 0)
                c.closed_form = line.substr(eq + 1);
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            if (line.rfind("t,", 0) == 0) continue;
        }
        std::istringstream row(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() < 2) throw std::invalid_argument("DistCurve CSV: row with fewer than two columns");
        c.times.push_back(vals[0]);
        c.cdf.push_back(vals[1]);
        if (vals.size() >= 3) c.std_errors.push_back(vals[2]);
    }
    if (!c.cdf.empty()) c.total_mass = c.cdf.back();
    return c;
}

std::string to_json(const DistCurve& curve) {
    nlohmann::ordered_json j;
    j["times"] = curve.times;
    j["cdf"] = curve.cdf;
    j["closed_form"] = curve.closed_form ? nlohmann::ordered_json(*curve.closed_form) : nlohmann::ordered_json();
    j["total_mass"] = curve.total_mass;
    if (!curve.std_errors.empty()) j["std_errors"] = curve.std_errors;
    if (curve.censored_mass) j["censored_mass"] = *curve.censored_mass;
    return j.dump(2);
}

}  // namespace blowup
