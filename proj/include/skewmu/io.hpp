#pragma once

// Text formats: alpha specs, function / observable specs in JSON, and the CSV writer
// used by the command-line tool.
//
//   alpha     dec:0.<digits> | rat:<p>/<q> | cf:a1,a2,...[,(p1,p2,...)] | golden | liouville:<B>,<levels>
//   series    {"real": true, "coeffs": [[m, re, im], ...]} | "zero" | "cos" | "sin" | "cos:<m>" | "sin:<m>"
//   obs       "fA" | {"class": "A", "xi": [x1, x2, x3], "m": 1, "j": 0, "starred": false,
//                     "conjugated": false, "k_trunc": 12}
//             | {"class": "B", "f1": <series>, "f2": [[m1, m2, re, im], ...]}

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "continued_fraction.hpp"
#include "error.hpp"
#include "flows.hpp"
#include "fourier.hpp"
#include "observables.hpp"

namespace skewmu::io {

using json = nlohmann::json;

namespace detail {

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::int64_t parse_int(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &used);
    } catch (const std::exception&) {
        throw validation_error("cannot parse " + what + ": '" + s + "'");
    }
    if (used != s.size()) throw validation_error("cannot parse " + what + ": '" + s + "'");
    return v;
}

inline double parse_double(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw validation_error("cannot parse " + what + ": '" + s + "'");
    }
    if (used != s.size()) throw validation_error("cannot parse " + what + ": '" + s + "'");
    return v;
}

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace detail

struct ParsedAlpha {
    ContinuedFraction cf;
    Rotation rot;
};

/// Integer list "1e3,1e4" or "1000,10000"; scientific notation must denote an integer.
inline std::vector<std::int64_t> parse_int_list(const std::string& text) {
    std::vector<std::int64_t> out;
    if (detail::trim(text).empty()) return out;
    for (auto part : detail::split(text, ',')) {
        part = detail::trim(part);
        const double v = detail::parse_double(part, "integer list entry");
        if (v != std::floor(v) || std::abs(v) > 9.0e18) throw validation_error("not an integer: '" + part + "'");
        out.push_back(static_cast<std::int64_t>(v));
    }
    return out;
}

inline std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    if (detail::trim(text).empty()) return out;
    for (auto part : detail::split(text, ',')) out.push_back(detail::parse_double(detail::trim(part), "number list entry"));
    return out;
}

inline ParsedAlpha parse_alpha(const std::string& text, int k_max = 64, std::int64_t q_cap = 1'000'000'000'000'000) {
    const auto colon = text.find(':');
    const std::string kind = colon == std::string::npos ? text : text.substr(0, colon);
    const std::string body = colon == std::string::npos ? std::string() : text.substr(colon + 1);
    if (kind == "golden") {
        auto cf = cf_expand(alpha_spec::Quotients{{}, {1}}, k_max, q_cap);
        return {cf, Rotation::irrational(cf.alpha())};
    }
    if (kind == "liouville") {
        const auto parts = detail::split(body, ',');
        if (parts.size() != 2) throw validation_error("liouville alpha needs 'liouville:<B>,<levels>'");
        auto cf = liouville_alpha(detail::parse_double(parts[0], "B"),
                                  static_cast<int>(detail::parse_int(parts[1], "levels")), k_max, q_cap);
        return {cf, Rotation::irrational(cf.alpha())};
    }
    if (kind == "dec") {
        auto cf = cf_expand(alpha_from_decimal(body), k_max, q_cap);
        return {cf, Rotation::irrational(cf.alpha())};
    }
    if (kind == "rat") {
        const auto parts = detail::split(body, '/');
        if (parts.size() != 2) throw validation_error("rational alpha needs 'rat:<p>/<q>'");
        const std::int64_t p = detail::parse_int(parts[0], "numerator");
        const std::int64_t q = detail::parse_int(parts[1], "denominator");
        if (q <= 0 || p <= 0 || p >= q) throw validation_error("rational alpha must lie in (0, 1)");
        auto cf = cf_expand(alpha_spec::Rational{p, q}, k_max, q_cap);
        return {cf, Rotation::rational(p, q)};
    }
    if (kind == "cf") {
        alpha_spec::Quotients spec;
        std::string prefix = body;
        const auto open = body.find('(');
        if (open != std::string::npos) {
            const auto close = body.find(')', open);
            if (close == std::string::npos || close + 1 != body.size())
                throw validation_error("periodic tail must close the list: '" + body + "'");
            for (const auto& s : detail::split(body.substr(open + 1, close - open - 1), ','))
                spec.period.push_back(detail::parse_int(detail::trim(s), "partial quotient"));
            prefix = body.substr(0, open);
            while (!prefix.empty() && (prefix.back() == ',' || prefix.back() == ' ')) prefix.pop_back();
        }
        if (!detail::trim(prefix).empty())
            for (const auto& s : detail::split(prefix, ','))
                spec.prefix.push_back(detail::parse_int(detail::trim(s), "partial quotient"));
        for (const auto a : spec.prefix)
            if (a < 1) throw validation_error("partial quotients must be positive");
        for (const auto a : spec.period)
            if (a < 1) throw validation_error("partial quotients must be positive");
        if (spec.prefix.empty() && spec.period.empty()) throw validation_error("empty partial-quotient list");
        auto cf = cf_expand(spec, k_max, q_cap);
        if (spec.period.empty()) {
            const std::int64_t q = cf.q(cf.size());
            return {cf, Rotation::rational(cf.l(cf.size()), q)};
        }
        return {cf, Rotation::irrational(cf.alpha())};
    }
    throw validation_error("unknown alpha syntax '" + text + "' (expected dec:, rat:, cf:, golden or liouville:)");
}

inline FourierSeries parse_series(const json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "zero") return {};
        const auto colon = s.find(':');
        const std::string name = s.substr(0, colon);
        const std::int64_t m = colon == std::string::npos ? 1 : detail::parse_int(s.substr(colon + 1), "frequency");
        if (name == "cos") return FourierSeries::cos_mode(m);
        if (name == "sin") return FourierSeries::sin_mode(m);
        throw validation_error("unknown series preset '" + s + "'");
    }
    if (!j.is_object() || !j.contains("coeffs")) throw validation_error("series spec needs a 'coeffs' array");
    std::map<std::int64_t, complex> acc;
    for (const auto& row : j.at("coeffs")) {
        if (!row.is_array() || row.size() < 2 || row.size() > 3)
            throw validation_error("series coefficient rows are [m, re] or [m, re, im]");
        acc[row[0].get<std::int64_t>()] += complex(row[1].get<double>(), row.size() == 3 ? row[2].get<double>() : 0.0);
    }
    const bool real = j.value("real", true);
    FourierSeries f(acc, real);
    if (real && f.hermitian_defect() > 1e-12)
        throw validation_error("series flagged real has coefficients with c(-m) != conj(c(m))");
    return f;
}

inline json series_to_json(const FourierSeries& f) {
    json rows = json::array();
    for (const auto& t : f.terms()) rows.push_back({t.m, t.c.real(), t.c.imag()});
    return {{"real", f.real_valued()}, {"coeffs", rows}};
}

/// Either observable class, evaluated through one interface.
struct Observable {
    std::variant<ClassAObservable, ClassBObservable> obs;

    complex eval(const ProductPoint& P) const {
        return std::visit([&](const auto& o) { return o.eval(P); }, obs);
    }
};

inline Observable parse_observable(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "fA") return {preset_fA()};
        throw validation_error("unknown observable preset '" + j.get<std::string>() + "'");
    }
    const std::string cls = j.value("class", "");
    if (cls == "A") {
        ClassAObservable a;
        const auto xi = j.value("xi", std::vector<int>{0, 0, 0});
        if (xi.size() != 3) throw validation_error("class A observable needs three xi entries");
        a.xi1 = xi[0];
        a.xi2 = xi[1];
        a.xi3 = xi[2];
        a.theta = ThetaObservable(j.value("m", 1), j.value("j", 0), j.value("starred", false), j.value("k_trunc", 12));
        a.conjugated = j.value("conjugated", false);
        return {a};
    }
    if (cls == "B") {
        ClassBObservable b;
        b.f1 = j.contains("f1") ? parse_series(j.at("f1")) : FourierSeries::constant(1.0);
        std::map<std::pair<int, int>, complex> acc;
        if (j.contains("f2"))
            for (const auto& row : j.at("f2")) {
                if (!row.is_array() || row.size() < 3 || row.size() > 4)
                    throw validation_error("class B f2 rows are [m1, m2, re] or [m1, m2, re, im]");
                acc[{row[0].get<int>(), row[1].get<int>()}] +=
                    complex(row[2].get<double>(), row.size() == 4 ? row[3].get<double>() : 0.0);
            }
        else
            acc[{0, 0}] = 1.0;
        b.f2 = FourierSeries2(acc);
        return {b};
    }
    throw validation_error("observable spec needs class 'A' or 'B', or the preset \"fA\"");
}

/// 64-bit FNV-1a of the text, as 16 hex digits.
inline std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 14695981039346656037ull;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

/// Hash of the canonical (key-sorted, compact) dump of a configuration.
inline std::string config_hash(const json& config) { return fnv1a_hex(config.dump()); }

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

/// CSV with a leading comment line and a header row. Doubles use 17 significant digits.
class CsvWriter {
public:
    using Cell = std::variant<std::int64_t, double, std::string>;

    CsvWriter(std::ostream& out, const std::string& hash, double tail_bound, const std::vector<std::string>& columns)
        : out_(out), width_(columns.size()) {
        out_ << "# config_hash=" << hash << " tail_bound=" << format_double(tail_bound) << '\n';
        for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
        out_ << '\n';
    }

    void row(const std::vector<Cell>& cells) {
        if (cells.size() != width_) throw error("csv row has " + std::to_string(cells.size()) + " cells, header has " +
                                                std::to_string(width_));
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>)
                        out_ << format_double(v);
                    else
                        out_ << v;
                },
                cells[i]);
        }
        out_ << '\n';
    }

private:
    std::ostream& out_;
    std::size_t width_;
};

}  // namespace skewmu::io
