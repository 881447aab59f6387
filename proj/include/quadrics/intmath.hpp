#pragma once

// Exact integer/rational arithmetic helpers on top of GMP, plus the
// small number-theoretic kit (factorization, Jacobi symbols, square
// roots mod prime powers) used throughout the library.

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "quadrics/errors.hpp"

namespace quadrics {

using Int = mpz_class;
using Rat = mpq_class;

inline bool fits_i64(const Int& a) { return a.fits_slong_p(); }

inline int64_t to_i64(const Int& a) {
    if (!fits_i64(a)) throw TooLarge("integer exceeds 64-bit range: " + a.get_str());
    return static_cast<int64_t>(a.get_si());
}

inline double to_double(const Int& a) { return a.get_d(); }
inline double to_double(const Rat& a) { return a.get_d(); }

inline Int parse_int(const std::string& s) {
    Int r;
    if (r.set_str(s, 10) != 0) throw InvalidInput("not a decimal integer: '" + s + "'");
    return r;
}

inline Int igcd(const Int& a, const Int& b) {
    Int r;
    mpz_gcd(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

inline Int iabs(const Int& a) { return abs(a); }

inline Int ipow(const Int& b, unsigned long e) {
    Int r;
    mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), e);
    return r;
}

/// Floor of sqrt(n); requires n >= 0.
inline Int isqrt(const Int& n) {
    if (n < 0) throw InvalidInput("isqrt of negative value");
    Int r;
    mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
    return r;
}

inline bool is_square(const Int& n, Int* root = nullptr) {
    if (n < 0) return false;
    Int r = isqrt(n);
    if (r * r == n) {
        if (root) *root = r;
        return true;
    }
    return false;
}

/// v_p(n) together with n / p^v_p(n).
inline std::pair<unsigned, Int> remove_factor(const Int& n, const Int& p) {
    Int rest;
    auto v = mpz_remove(rest.get_mpz_t(), n.get_mpz_t(), p.get_mpz_t());
    return {static_cast<unsigned>(v), rest};
}

/// Division rounded to nearest (|a - q b| <= |b|/2, ties away from zero in
/// magnitude); b != 0.
inline Int round_div(const Int& a, const Int& b) {
    Int aa = abs(a), bb = abs(b);
    Int q, r;
    mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), aa.get_mpz_t(), bb.get_mpz_t());
    if (2 * r >= bb) q += 1;
    bool neg = (a < 0) != (b < 0);
    return neg ? Int(-q) : q;
}

// ---------------------------------------------------------------------------
// 64-bit modular arithmetic

inline uint64_t mulmod_u64(uint64_t a, uint64_t b, uint64_t m) {
    return static_cast<uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

inline uint64_t powmod_u64(uint64_t b, uint64_t e, uint64_t m) {
    uint64_t r = m > 1 ? 1 : 0;
    b %= m;
    while (e) {
        if (e & 1) r = mulmod_u64(r, b, m);
        b = mulmod_u64(b, b, m);
        e >>= 1;
    }
    return r;
}

inline int64_t mod_inverse_i64(int64_t a, int64_t m) {
    // 128-bit intermediates: the Bezout coefficients can reach |m|.
    __int128 t = 0, nt = 1, r = m, nr = a % m;
    if (nr < 0) nr += m;
    while (nr != 0) {
        __int128 q = r / nr;
        __int128 tmp = t - q * nt; t = nt; nt = tmp;
        tmp = r - q * nr; r = nr; nr = tmp;
    }
    if (r != 1) throw InvalidInput("mod_inverse: not invertible");
    if (t < 0) t += m;
    return static_cast<int64_t>(t);
}

inline bool is_prime_u64(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % p == 0) return n == p;
    }
    uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    // Deterministic for n < 3.3e24 with this witness set.
    for (uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        uint64_t x = powmod_u64(a % n, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 0; i < s - 1; ++i) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) { composite = false; break; }
        }
        if (composite) return false;
    }
    return true;
}

namespace detail {
inline uint64_t pollard_rho(uint64_t n) {
    if ((n & 1) == 0) return 2;
    uint64_t c = 1;
    while (true) {
        uint64_t x = 2, y = 2, d = 1;
        while (d == 1) {
            x = (mulmod_u64(x, x, n) + c) % n;
            y = (mulmod_u64(y, y, n) + c) % n;
            y = (mulmod_u64(y, y, n) + c) % n;
            uint64_t diff = x > y ? x - y : y - x;
            d = std::gcd(diff, n);
        }
        if (d != n) return d;
        ++c;
    }
}
}  // namespace detail

inline void factor_u64(uint64_t n, std::map<uint64_t, unsigned>& out) {
    if (n <= 1) return;
    if (is_prime_u64(n)) { ++out[n]; return; }
    for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull}) {
        if (n % p == 0) {
            while (n % p == 0) { ++out[p]; n /= p; }
            factor_u64(n, out);
            return;
        }
    }
    uint64_t d = detail::pollard_rho(n);
    factor_u64(d, out);
    factor_u64(n / d, out);
}

/// Full factorization of |n|, smallest prime first. n must have |n| < 2^126
/// with at most one prime factor above 64 bits; desk-scale inputs are far
/// smaller.
inline std::vector<std::pair<Int, unsigned>> factorize(const Int& n_in) {
    Int n = abs(n_in);
    if (n == 0) throw ZeroInput("factorize(0)");
    std::map<uint64_t, unsigned> small;
    // Strip tiny primes first so the u64 machinery sees a smaller cofactor.
    for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull}) {
        auto [v, rest] = remove_factor(n, Int(static_cast<unsigned long>(p)));
        if (v) { small[p] += v; n = rest; }
    }
    if (fits_i64(n * n)) {
        factor_u64(static_cast<uint64_t>(n.get_ui()), small);
        std::vector<std::pair<Int, unsigned>> out;
        for (auto& [p, e] : small) out.emplace_back(Int(static_cast<unsigned long>(p)), e);
        return out;
    }
    // Large cofactor: trial divide to 10^6, then accept only a prime remainder.
    for (uint64_t p = 37; p <= 1000000 && n > 1; p += 2) {
        if (Int rem = n % static_cast<unsigned long>(p); rem == 0) {
            auto [v, rest] = remove_factor(n, Int(static_cast<unsigned long>(p)));
            small[p] += v;
            n = rest;
        }
    }
    std::vector<std::pair<Int, unsigned>> out;
    for (auto& [p, e] : small) out.emplace_back(Int(static_cast<unsigned long>(p)), e);
    if (n > 1) {
        if (mpz_probab_prime_p(n.get_mpz_t(), 40) == 0)
            throw TooLarge("factorize: composite cofactor beyond budget: " + n.get_str());
        out.emplace_back(n, 1);
    }
    return out;
}

inline Int tau_of_prime_power(unsigned e) { return Int(e + 1); }

// ---------------------------------------------------------------------------
// Quadratic symbols

/// Jacobi symbol (a|n) for odd n >= 1.
inline int jacobi_i64(int64_t a, uint64_t n) {
    if (n % 2 == 0) throw InvalidInput("jacobi: even modulus");
    a %= static_cast<int64_t>(n);
    if (a < 0) a += n;
    uint64_t ua = static_cast<uint64_t>(a), un = n;
    int t = 1;
    while (ua != 0) {
        while ((ua & 1) == 0) {
            ua >>= 1;
            uint64_t r = un & 7;
            if (r == 3 || r == 5) t = -t;
        }
        std::swap(ua, un);
        if ((ua & 3) == 3 && (un & 3) == 3) t = -t;
        ua %= un;
    }
    return un == 1 ? t : 0;
}

inline int jacobi(const Int& a, const Int& n) {
    return mpz_jacobi(a.get_mpz_t(), n.get_mpz_t());
}

/// Kronecker symbol (a|2): 0 if a even, +1 if a = +-1 mod 8, -1 otherwise.
inline int kronecker_at_2(const Int& a) {
    if (a % 2 == 0) return 0;
    unsigned long r = mpz_fdiv_ui(a.get_mpz_t(), 8);
    return (r == 1 || r == 7) ? 1 : -1;
}

/// Tonelli--Shanks: square root of a mod odd prime p; requires (a|p) = 1.
inline uint64_t sqrt_mod_p(uint64_t a, uint64_t p) {
    a %= p;
    if (a == 0) return 0;
    if (p % 4 == 3) return powmod_u64(a, (p + 1) / 4, p);
    uint64_t q = p - 1, s = 0;
    while ((q & 1) == 0) { q >>= 1; ++s; }
    uint64_t z = 2;
    while (jacobi_i64(static_cast<int64_t>(z), p) != -1) ++z;
    uint64_t m = s, c = powmod_u64(z, q, p);
    uint64_t t = powmod_u64(a, q, p), r = powmod_u64(a, (q + 1) / 2, p);
    while (t != 1) {
        uint64_t i = 0, tt = t;
        while (tt != 1) { tt = mulmod_u64(tt, tt, p); ++i; }
        uint64_t b = c;
        for (uint64_t j = 0; j + i + 1 < m; ++j) b = mulmod_u64(b, b, p);
        m = i;
        c = mulmod_u64(b, b, p);
        t = mulmod_u64(t, c, p);
        r = mulmod_u64(r, b, p);
    }
    return r;
}

/// Hensel lift of a square root of `a` to modulus p^k (p odd, a a unit square).
inline uint64_t sqrt_mod_prime_power(uint64_t a, uint64_t p, unsigned k) {
    uint64_t pk = p;
    uint64_t r = sqrt_mod_p(a % p, p);
    for (unsigned i = 1; i < k; ++i) {
        uint64_t pk1 = pk * p;
        // r' = r - (r^2 - a)/(2r) mod p^(i+1)
        uint64_t r2 = mulmod_u64(r, r, pk1);
        uint64_t diff = (r2 + pk1 - a % pk1) % pk1;
        int64_t inv = mod_inverse_i64(static_cast<int64_t>(mulmod_u64(2, r, pk1)), static_cast<int64_t>(pk1));
        r = (r + pk1 - mulmod_u64(diff, static_cast<uint64_t>(inv), pk1)) % pk1;
        pk = pk1;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Prime sieves

inline std::vector<int64_t> primes_below(int64_t n) {
    std::vector<int64_t> out;
    if (n <= 2) return out;
    std::vector<bool> comp(static_cast<size_t>(n), false);
    for (int64_t i = 2; i < n; ++i) {
        if (!comp[static_cast<size_t>(i)]) {
            out.push_back(i);
            for (int64_t j = i * i; j < n; j += i) comp[static_cast<size_t>(j)] = true;
        }
    }
    return out;
}

/// Smallest-prime-factor sieve for repeated factorization of values <= bound.
struct SpfSieve {
    std::vector<uint32_t> spf;

    explicit SpfSieve(uint32_t bound) : spf(static_cast<size_t>(bound) + 1, 0) {
        for (uint64_t i = 2; i <= bound; ++i) {
            if (spf[i] == 0) {
                for (uint64_t j = i; j <= bound; j += i)
                    if (spf[j] == 0) spf[j] = static_cast<uint32_t>(i);
            }
        }
    }

    uint32_t limit() const { return static_cast<uint32_t>(spf.size() - 1); }

    template <class F>
    void factor(uint64_t n, F&& visit) const {  // visit(p, e)
        while (n > 1) {
            uint32_t p = spf[n];
            unsigned e = 0;
            while (n % p == 0) { n /= p; ++e; }
            visit(p, e);
        }
    }
};

// ---------------------------------------------------------------------------
// 128-bit helpers for enumeration hot paths

inline unsigned __int128 u128_isqrt(unsigned __int128 n) {
    if (n == 0) return 0;
    unsigned __int128 r = static_cast<unsigned __int128>(std::sqrt(static_cast<long double>(n)));
    while (r > 0 && r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

/// Exact square test over __int128.
inline bool i128_square_root(__int128 n, __int128* root) {
    if (n < 0) return false;
    unsigned __int128 r = u128_isqrt(static_cast<unsigned __int128>(n));
    if (static_cast<__int128>(r) * static_cast<__int128>(r) == n) {
        *root = static_cast<__int128>(r);
        return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Deterministic PRNG (splitmix64); identical streams on every platform.

struct Rng {
    uint64_t state;

    explicit Rng(uint64_t seed) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, n); n > 0.
    uint64_t below(uint64_t n) {
        // Rejection sampling keeps the distribution exactly uniform.
        uint64_t lim = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do { v = next(); } while (v >= lim);
        return v % n;
    }

    int64_t range(int64_t lo, int64_t hi) {  // inclusive
        return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo + 1)));
    }
};

}  // namespace quadrics
