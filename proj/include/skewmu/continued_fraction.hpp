#pragma once

// Continued-fraction expansion with certified partial quotients, convergents
// (l_k, q_k), and the B-dependent split of denominators into Q_flat / Q_sharp.
//
// Alpha is given either exactly (a rational, or a list of partial quotients with an
// optional periodic tail) or as an interval of rationals. For an interval the expansion
// only emits a partial quotient when both endpoints agree on it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "error.hpp"
#include "numeric.hpp"

namespace skewmu {

using bigint = boost::multiprecision::cpp_int;
using rational = boost::multiprecision::cpp_rational;
using hpfloat = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<256, boost::multiprecision::digit_base_2>>;

namespace alpha_spec {

struct Rational {
    bigint p;
    bigint q;
};

/// [0; prefix..., period, period, ...]; an empty period means the list is finite.
struct Quotients {
    std::vector<std::int64_t> prefix;
    std::vector<std::int64_t> period;
};

/// alpha lies in the closed interval [lo, hi].
struct Interval {
    rational lo;
    rational hi;
};

}  // namespace alpha_spec

using AlphaSpec = std::variant<alpha_spec::Rational, alpha_spec::Quotients, alpha_spec::Interval>;

/// Decimal digits of a truncation: alpha in [d, d + 10^-digits].
inline AlphaSpec alpha_from_decimal(const std::string& text) {
    const auto dot = text.find('.');
    if (dot == std::string::npos || text.substr(0, dot) != "0" || dot + 1 >= text.size())
        throw validation_error("decimal alpha must look like 0.<digits>: '" + text + "'");
    const std::string digits = text.substr(dot + 1);
    if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw validation_error("decimal alpha has non-digit characters: '" + text + "'");
    const auto nz = digits.find_first_not_of('0');
    const bigint num(nz == std::string::npos ? std::string("0") : digits.substr(nz));
    const bigint den = boost::multiprecision::pow(bigint(10), static_cast<unsigned>(digits.size()));
    return alpha_spec::Interval{rational(num, den), rational(num + 1, den)};
}

/// Interval of half-width 2^-250 around a high-precision value.
inline AlphaSpec alpha_from_hpfloat(const hpfloat& x) {
    const rational mid(x);
    const rational eps(bigint(1), boost::multiprecision::pow(bigint(2), 250u));
    return alpha_spec::Interval{mid - eps, mid + eps};
}

class ContinuedFraction {
public:
    /// Number of partial quotients K; convergents are indexed 0..K.
    int size() const noexcept { return static_cast<int>(a_.size()); }

    /// a_k for 1 <= k <= K.
    std::int64_t a(int k) const { return a_.at(static_cast<std::size_t>(k - 1)); }
    std::int64_t l(int k) const { return l_.at(static_cast<std::size_t>(k)); }
    std::int64_t q(int k) const { return q_.at(static_cast<std::size_t>(k)); }

    const std::vector<std::int64_t>& quotients() const noexcept { return a_; }
    const std::vector<std::int64_t>& numerators() const noexcept { return l_; }
    const std::vector<std::int64_t>& denominators() const noexcept { return q_; }

    /// True when alpha is rational and the expansion ran to its end.
    bool terminated() const noexcept { return terminated_; }

    const hpfloat& alpha_hp() const noexcept { return alpha_; }
    double alpha() const noexcept { return alpha_d_; }
    const std::optional<rational>& exact() const noexcept { return exact_; }

    /// ||q_k alpha|| at working precision.
    hpfloat norm_q_alpha(int k) const {
        const hpfloat v = hpfloat(q(k)) * alpha_;
        return boost::multiprecision::abs(v - boost::multiprecision::round(v));
    }

    /// Index k with q_k <= n < q_{k+1}, k >= 1; -1 when n < q_1, size() when n >= q_K.
    int band_of(std::int64_t n) const noexcept {
        if (q_.size() < 2 || n < q_[1]) return -1;
        const auto it = std::upper_bound(q_.begin() + 1, q_.end(), n);
        return static_cast<int>(it - q_.begin()) - 1;
    }

private:
    std::vector<std::int64_t> a_;
    std::vector<std::int64_t> l_{0};
    std::vector<std::int64_t> q_{1};
    std::int64_t l_prev_ = 1;
    std::int64_t q_prev_ = 0;
    bool terminated_ = false;
    hpfloat alpha_{0};
    double alpha_d_ = 0.0;
    std::optional<rational> exact_;

    void push(std::int64_t a) {
        std::int64_t ln = 0;
        std::int64_t qn = 0;
        const std::int64_t lk = l_.back();
        const std::int64_t qk = q_.back();
        if (__builtin_mul_overflow(a, lk, &ln) || __builtin_add_overflow(ln, l_prev_, &ln) ||
            __builtin_mul_overflow(a, qk, &qn) || __builtin_add_overflow(qn, q_prev_, &qn))
            throw overflow_error("convergent denominator exceeds the 64-bit range at k = " +
                                 std::to_string(a_.size() + 1));
        a_.push_back(a);
        l_prev_ = lk;
        q_prev_ = qk;
        l_.push_back(ln);
        q_.push_back(qn);
    }

    void set_alpha(const hpfloat& v) {
        alpha_ = v;
        alpha_d_ = static_cast<double>(v);
    }

    friend ContinuedFraction cf_expand(const AlphaSpec&, int, std::int64_t);
};

namespace detail {

// Value of [0; quotient stream] at ~2^-300 accuracy using big-integer convergents.
template <typename Next>
hpfloat quotient_stream_value(Next next, std::size_t max_terms) {
    bigint lp = 1, l = 0, qp = 0, q = 1;
    const bigint target = boost::multiprecision::pow(bigint(2), 300u);
    for (std::size_t i = 0; i < max_terms && q < target; ++i) {
        auto a = next(i);
        if (!a) break;
        bigint ln = *a * l + lp;
        bigint qn = *a * q + qp;
        lp = l;
        l = ln;
        qp = q;
        q = qn;
    }
    return hpfloat(l) / hpfloat(q);
}

}  // namespace detail

/// Expands alpha in (0,1). Stops after k_max partial quotients or at the first q_k > q_cap
/// (that q_k is kept). Throws precision_error when an interval alpha cannot certify a
/// required quotient.
inline ContinuedFraction cf_expand(const AlphaSpec& spec, int k_max = 64, std::int64_t q_cap = 1'000'000'000'000'000) {
    ContinuedFraction cf;
    auto done = [&] { return cf.size() >= k_max || cf.q_.back() > q_cap; };

    if (const auto* quo = std::get_if<alpha_spec::Quotients>(&spec)) {
        auto next = [quo](std::size_t i) -> std::optional<std::int64_t> {
            if (i < quo->prefix.size()) return quo->prefix[i];
            if (quo->period.empty()) return std::nullopt;
            return quo->period[(i - quo->prefix.size()) % quo->period.size()];
        };
        for (std::size_t i = 0; i < quo->prefix.size() + quo->period.size(); ++i)
            if (*next(i) < 1) throw validation_error("partial quotients must be positive integers");
        if (quo->prefix.empty() && quo->period.empty()) throw validation_error("empty partial-quotient list");
        const std::size_t total = quo->period.empty() ? quo->prefix.size() : static_cast<std::size_t>(-1);
        for (std::size_t i = 0; i < total && !done(); ++i) cf.push(*next(i));
        cf.terminated_ = quo->period.empty() && static_cast<std::size_t>(cf.size()) == quo->prefix.size();
        if (quo->period.empty()) {
            rational exact(0);
            for (auto it = quo->prefix.rbegin(); it != quo->prefix.rend(); ++it) exact = 1 / (*it + exact);
            cf.exact_ = exact;
            cf.set_alpha(hpfloat(exact));
        } else {
            cf.set_alpha(detail::quotient_stream_value(next, 100000));
        }
        return cf;
    }

    rational lo, hi;
    if (const auto* r = std::get_if<alpha_spec::Rational>(&spec)) {
        if (r->q <= 0 || r->p <= 0 || r->p >= r->q) throw validation_error("rational alpha must lie in (0,1)");
        lo = hi = rational(r->p, r->q);
        cf.exact_ = lo;
        cf.set_alpha(hpfloat(lo));
    } else {
        const auto& iv = std::get<alpha_spec::Interval>(spec);
        lo = iv.lo;
        hi = iv.hi;
        if (lo <= 0 || hi >= 1 || lo > hi) throw validation_error("alpha interval must lie inside (0,1)");
        if (lo == hi) cf.exact_ = lo;
        cf.set_alpha(hpfloat(lo));
    }

    while (!done()) {
        if (lo == 0 && hi == 0) {
            cf.terminated_ = true;
            break;
        }
        if (lo == 0) {
            throw precision_error("alpha interval admits a rational endpoint after k = " + std::to_string(cf.size()) +
                                  "; cannot certify the next partial quotient");
        }
        const rational inv_hi = 1 / hi;
        const rational inv_lo = 1 / lo;
        const bigint a_lo = numerator(inv_hi) / denominator(inv_hi);
        const bigint a_hi = numerator(inv_lo) / denominator(inv_lo);
        if (a_lo != a_hi)
            throw precision_error("working precision exhausted: cannot certify partial quotient a_" +
                                  std::to_string(cf.size() + 1));
        if (a_lo > bigint(std::numeric_limits<std::int64_t>::max()))
            throw overflow_error("partial quotient exceeds the 64-bit range");
        const auto a = static_cast<std::int64_t>(a_lo);
        cf.push(a);
        const rational nlo = inv_hi - a;
        const rational nhi = inv_lo - a;
        lo = nlo;
        hi = nhi;
    }
    return cf;
}

enum class QClass { flat, sharp, unknown };

/// Split of the computed denominators for a given B > 2. Class of q_k is decided by
/// q_{k+1} <= q_k^B (flat) versus q_{k+1} > q_k^B > 1 (sharp). The last convergent of a
/// non-terminated expansion has no successor and stays unknown; for a terminated
/// (rational) expansion it is sharp when q_K > 1 (q_{K+1} = infinity).
struct DenominatorClassification {
    double B = 3.0;
    std::vector<QClass> cls;  // indexed by k = 0..K; index 0 (q_0 = 1) is flat
    std::set<std::int64_t> q_flat;
    std::set<std::int64_t> q_sharp;

    QClass at(int k) const { return cls.at(static_cast<std::size_t>(k)); }

    /// Indices k with q_k in Q_sharp, ascending.
    std::vector<int> sharp_indices() const {
        std::vector<int> out;
        for (std::size_t k = 1; k < cls.size(); ++k)
            if (cls[k] == QClass::sharp) out.push_back(static_cast<int>(k));
        return out;
    }
};

namespace detail {

// q_next > q^B, exact for integral B.
inline bool exceeds_power(std::int64_t q_next, std::int64_t q, double B) {
    if (B == std::floor(B) && B < 64) {
        const bigint pw = boost::multiprecision::pow(bigint(q), static_cast<unsigned>(B));
        return bigint(q_next) > pw;
    }
    return std::log(static_cast<long double>(q_next)) > static_cast<long double>(B) * std::log(static_cast<long double>(q));
}

}  // namespace detail

inline DenominatorClassification classify(const ContinuedFraction& cf, double B) {
    if (!(B > 2.0)) throw validation_error("classify: B must exceed 2");
    DenominatorClassification out;
    out.B = B;
    out.cls.assign(static_cast<std::size_t>(cf.size()) + 1, QClass::unknown);
    out.cls[0] = QClass::flat;
    out.q_flat.insert(1);
    for (int k = 1; k <= cf.size(); ++k) {
        const std::int64_t qk = cf.q(k);
        QClass c = QClass::unknown;
        if (k < cf.size())
            c = (qk > 1 && detail::exceeds_power(cf.q(k + 1), qk, B)) ? QClass::sharp : QClass::flat;
        else if (cf.terminated())
            c = qk > 1 ? QClass::sharp : QClass::flat;
        out.cls[static_cast<std::size_t>(k)] = c;
        if (c == QClass::sharp) out.q_sharp.insert(qk);
        if (c == QClass::flat) out.q_flat.insert(qk);
    }
    return out;
}

/// m in M_1(B): m = 0, or q_k <= |m| < q_{k+1} with q_k | m for some q_k in Q_sharp(B).
/// For a terminated expansion the last band is unbounded.
inline bool m1_member(std::int64_t m, const DenominatorClassification& cls, const ContinuedFraction& cf) {
    if (m == 0) return true;
    const std::int64_t am = m < 0 ? -m : m;
    if (am >= cf.q(cf.size())) {
        if (cf.terminated()) return cls.at(cf.size()) == QClass::sharp && am % cf.q(cf.size()) == 0;
        throw undecidable_error("frequency " + std::to_string(m) + " lies beyond the largest computed q_k = " +
                                std::to_string(cf.q(cf.size())));
    }
    const int k = cf.band_of(am);
    if (k < 1) return false;
    return cls.at(k) == QClass::sharp && am % cf.q(k) == 0;
}

/// alpha with q_{k+1} > q_k^B at the first `levels` indices: a_1 = first_quotient,
/// a_{k+1} = floor(q_k^(B-1)) + 1 (bumped until the inequality holds), then a periodic tail
/// (all ones by default).
inline ContinuedFraction liouville_alpha(double B, int levels, int k_max = 64,
                                         std::int64_t q_cap = 1'000'000'000'000'000, std::int64_t first_quotient = 2,
                                         std::vector<std::int64_t> tail = {1}) {
    if (!(B > 2.0)) throw validation_error("liouville_alpha: B must exceed 2");
    if (levels < 0 || levels > 5) throw validation_error("liouville_alpha: levels must lie in [0, 5]");
    if (tail.empty() || std::any_of(tail.begin(), tail.end(), [](std::int64_t a) { return a < 1; }))
        throw validation_error("liouville_alpha: tail quotients must be positive");
    alpha_spec::Quotients spec;
    spec.period = std::move(tail);
    if (levels > 0) {
        spec.prefix.push_back(first_quotient);
        std::int64_t q_prev = 1;
        std::int64_t q = first_quotient;
        for (int i = 0; i < levels; ++i) {
            const long double pw = std::pow(static_cast<long double>(q), static_cast<long double>(B) - 1.0L);
            if (pw > 9.0e18L) throw overflow_error("liouville_alpha: partial quotient exceeds the 64-bit range");
            auto a = static_cast<std::int64_t>(std::floor(pw)) + 1;
            std::int64_t next = 0;
            for (;;) {
                if (__builtin_mul_overflow(a, q, &next) || __builtin_add_overflow(next, q_prev, &next))
                    throw overflow_error("liouville_alpha: q_k exceeds the 64-bit range at level " + std::to_string(i + 1));
                if (detail::exceeds_power(next, q, B)) break;
                ++a;
            }
            spec.prefix.push_back(a);
            q_prev = q;
            q = next;
        }
    }
    auto cf = cf_expand(spec, std::max(k_max, levels + 2), q_cap);
    if (cf.size() < levels + 1) throw overflow_error("liouville_alpha: q_cap cut the construction short");
    return cf;
}

}  // namespace skewmu
