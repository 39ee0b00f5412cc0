#pragma once

// Mobius function tables built by a linear sieve (default) or a segmented sieve,
// plus the on-disk cache format:
//
//   offset 0   8 bytes  magic "SKMUMOB1"
//   offset 8   8 bytes  n_max, unsigned little-endian
//   offset 16  n_max signed bytes, mu(1) first

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <new>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace skewmu {

enum class SieveMethod { linear, segmented };

class MobiusTable {
public:
    static constexpr std::array<char, 8> magic{'S', 'K', 'M', 'U', 'M', 'O', 'B', '1'};

    MobiusTable() = default;

    std::int64_t n_max() const noexcept { return static_cast<std::int64_t>(values_.size()) - 1; }

    int operator()(std::int64_t n) const noexcept { return values_[static_cast<std::size_t>(n)]; }

    /// Checked access; throws sieve_range_error outside [1, n_max].
    int at(std::int64_t n) const {
        if (n < 1 || n > n_max())
            throw sieve_range_error("mobius table covers 1.." + std::to_string(n_max()) + ", asked for " +
                                    std::to_string(n));
        return values_[static_cast<std::size_t>(n)];
    }

    /// Values mu(1..n_max).
    std::span<const std::int8_t> values() const noexcept {
        return std::span<const std::int8_t>(values_).subspan(1);
    }

    void require(std::int64_t n) const {
        if (n > n_max())
            throw sieve_range_error("mobius table covers 1.." + std::to_string(n_max()) + ", need " +
                                    std::to_string(n));
    }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw error("cannot open " + path + " for writing");
        out.write(magic.data(), magic.size());
        std::array<unsigned char, 8> len{};
        auto n = static_cast<std::uint64_t>(n_max());
        for (auto& byte : len) {
            byte = static_cast<unsigned char>(n & 0xffu);
            n >>= 8;
        }
        out.write(reinterpret_cast<const char*>(len.data()), len.size());
        out.write(reinterpret_cast<const char*>(values_.data() + 1), static_cast<std::streamsize>(n_max()));
        if (!out) throw error("write failed for " + path);
    }

    static MobiusTable load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw error("cannot open " + path);
        std::array<char, 8> head{};
        std::array<unsigned char, 8> len{};
        in.read(head.data(), head.size());
        in.read(reinterpret_cast<char*>(len.data()), len.size());
        if (!in || head != magic) throw validation_error(path + " is not a mobius cache file");
        std::uint64_t n = 0;
        for (int i = 7; i >= 0; --i) n = (n << 8) | len[static_cast<std::size_t>(i)];
        MobiusTable t;
        t.values_.assign(n + 1, 0);
        in.read(reinterpret_cast<char*>(t.values_.data() + 1), static_cast<std::streamsize>(n));
        if (!in) throw validation_error(path + " is truncated");
        return t;
    }

    friend MobiusTable mobius_sieve(std::int64_t n_max, SieveMethod method);

private:
    std::vector<std::int8_t> values_;  // index 0 unused
};

namespace detail {

inline void linear_mobius(std::vector<std::int8_t>& mu, std::int64_t n) {
    std::vector<bool> composite(static_cast<std::size_t>(n) + 1, false);
    std::vector<std::int32_t> primes;
    primes.reserve(static_cast<std::size_t>(1.3 * n / std::max(1.0, std::log(static_cast<double>(n)))) + 16);
    mu[1] = 1;
    for (std::int64_t i = 2; i <= n; ++i) {
        if (!composite[static_cast<std::size_t>(i)]) {
            primes.push_back(static_cast<std::int32_t>(i));
            mu[static_cast<std::size_t>(i)] = -1;
        }
        for (const std::int64_t p : primes) {
            const std::int64_t ip = i * p;
            if (ip > n) break;
            composite[static_cast<std::size_t>(ip)] = true;
            if (i % p == 0) {
                mu[static_cast<std::size_t>(ip)] = 0;
                break;
            }
            mu[static_cast<std::size_t>(ip)] = static_cast<std::int8_t>(-mu[static_cast<std::size_t>(i)]);
        }
    }
}

inline std::vector<std::int64_t> small_primes(std::int64_t limit) {
    std::vector<bool> comp(static_cast<std::size_t>(limit) + 1, false);
    std::vector<std::int64_t> out;
    for (std::int64_t i = 2; i <= limit; ++i) {
        if (comp[static_cast<std::size_t>(i)]) continue;
        out.push_back(i);
        for (std::int64_t j = i * i; j <= limit; j += i) comp[static_cast<std::size_t>(j)] = true;
    }
    return out;
}

inline void segmented_mobius(std::vector<std::int8_t>& mu, std::int64_t n, std::int64_t segment = 1 << 18) {
    auto root = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
    while (root * root > n) --root;
    while ((root + 1) * (root + 1) <= n) ++root;
    const auto primes = small_primes(root);

    std::vector<std::int64_t> rem(static_cast<std::size_t>(segment));
    std::vector<std::int8_t> sign(static_cast<std::size_t>(segment));
    for (std::int64_t lo = 1; lo <= n; lo += segment) {
        const std::int64_t hi = std::min(n + 1, lo + segment);
        const auto len = static_cast<std::size_t>(hi - lo);
        std::fill_n(rem.begin(), len, 1);
        std::fill_n(sign.begin(), len, 1);
        for (const std::int64_t p : primes) {
            for (std::int64_t m = (lo + p - 1) / p * p; m < hi; m += p) {
                const auto i = static_cast<std::size_t>(m - lo);
                sign[i] = static_cast<std::int8_t>(-sign[i]);
                rem[i] *= p;
            }
            const std::int64_t p2 = p * p;
            for (std::int64_t m = (lo + p2 - 1) / p2 * p2; m < hi; m += p2) sign[static_cast<std::size_t>(m - lo)] = 0;
        }
        for (std::size_t i = 0; i < len; ++i) {
            const std::int64_t m = lo + static_cast<std::int64_t>(i);
            std::int8_t s = sign[i];
            if (s != 0 && rem[i] != m) s = static_cast<std::int8_t>(-s);  // one prime factor above sqrt(n)
            mu[static_cast<std::size_t>(m)] = s;
        }
    }
}

}  // namespace detail

/// mu(n) for 1 <= n <= n_max.
inline MobiusTable mobius_sieve(std::int64_t n_max, SieveMethod method = SieveMethod::linear) {
    if (n_max < 1 || n_max > 1'000'000'000)
        throw validation_error("mobius_sieve: n_max must lie in [1, 1e9], got " + std::to_string(n_max));
    MobiusTable t;
    try {
        t.values_.assign(static_cast<std::size_t>(n_max) + 1, 0);
        if (method == SieveMethod::linear)
            detail::linear_mobius(t.values_, n_max);
        else
            detail::segmented_mobius(t.values_, n_max);
    } catch (const std::bad_alloc&) {
        throw budget_error("mobius_sieve: allocation failed for n_max = " + std::to_string(n_max));
    }
    return t;
}

}  // namespace skewmu
