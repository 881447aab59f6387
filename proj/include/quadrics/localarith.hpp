#pragma once

// Multiplicative and local arithmetic attached to a quaternary form and its
// ternary restrictions: the square-full part, the character chi = (disc|.),
// Euler products, the divisor-like weight R(N), local densities rho(m) of
// the dual form, quadratic exponential sums, ternary local invariants
// (chi_q, D(q), C(q)), and windowed averages of R over boxes.

#include <complex>
#include <functional>

#include "quadrics/forms.hpp"
#include "quadrics/parallel.hpp"

namespace quadrics {

constexpr uint64_t kDefaultBudget = 1000000000ull;      // residue tuples / box cells
constexpr uint32_t kDefaultSieveCap = 1u << 25;         // SPF sieve size cap

/// Product of p^e over p^e || N with e >= 2 (positive; 1 for square-free N).
inline Int squarefull_part(const Int& n) {
    if (n == 0) throw ZeroInput("squarefull_part of 0");
    Int out = 1;
    for (auto& [p, e] : factorize(n))
        if (e >= 2) out *= ipow(p, e);
    return out;
}

/// varpi(m) = prod_{p | m} (1 + 1/p), exact.
inline Rat varpi(const Int& m) {
    if (m < 1) throw InvalidInput("varpi needs m >= 1");
    Rat r(1);
    for (auto& [p, e] : factorize(m)) {
        (void)e;
        Rat f(p + 1, p);
        f.canonicalize();
        r *= f;
    }
    return r;
}

/// chi(p) = (delta | p): Legendre symbol for odd p, Kronecker convention at
/// p = 2, zero when p | delta.
inline int chi(const Int& delta, const Int& p) {
    if (delta == 0) throw ZeroInput("chi with delta = 0");
    if (p == 2) return kronecker_at_2(delta);
    if (delta % p == 0) return 0;
    return jacobi(delta, p);
}

/// Cached chi(p) lookups for one discriminant.
struct CharacterTable {
    Int delta;
    std::map<int64_t, int> cache;

    explicit CharacterTable(Int d) : delta(std::move(d)) {
        if (delta == 0) throw ZeroInput("CharacterTable with delta = 0");
    }

    int operator()(int64_t p) {
        auto it = cache.find(p);
        if (it != cache.end()) return it->second;
        int v = chi(delta, Int(p));
        cache.emplace(p, v);
        return v;
    }
};

/// Pi_B = prod_{p <= B} (1 + chi(p)/p), exact rational.
inline Rat pi_B(const Int& delta, double b) {
    if (b < 1) throw InvalidInput("pi_B needs B >= 1");
    Rat r(1);
    for (int64_t p : primes_below(static_cast<int64_t>(std::floor(b)) + 1)) {
        int x = chi(delta, Int(p));
        Rat f(Int(p + x), Int(p));
        f.canonicalize();
        r *= f;
    }
    return r;
}

/// R(N): tau(p^e) at primes dividing 2*delta, sum_{k<=e} chi(p)^k elsewhere.
inline Int R_value(const Int& delta, const Int& n) {
    if (delta == 0) throw ZeroInput("R_value with delta = 0");
    if (n < 1) throw InvalidInput("R_value needs N >= 1");
    Int r = 1;
    for (auto& [p, e] : factorize(n)) {
        if ((2 * delta) % p == 0) {
            r *= Int(e + 1);
        } else {
            int x = chi(delta, p);
            if (x == 1)
                r *= Int(e + 1);
            else
                r *= Int(e % 2 == 0 ? 1 : 0);
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Local densities of the dual form

namespace detail {

/// Reduces the integer dual matrix modulo m into an int64 grid.
inline std::array<std::array<int64_t, 4>, 4> dual_matrix_mod(const DualForm& d, int64_t m) {
    Mat a = d.matrix_int();
    std::array<std::array<int64_t, 4>, 4> out{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            Int r = a.at(i, j) % m;
            if (r < 0) r += m;
            out[static_cast<size_t>(i)][static_cast<size_t>(j)] = to_i64(r);
        }
    return out;
}

/// #{x mod m : Q*(x) = 0 mod m} by direct enumeration; m^4 must fit budget.
inline Int rho_brute(const DualForm& d, int64_t m, uint64_t budget, int workers) {
    double cost = std::pow(static_cast<double>(m), 4.0);
    if (cost > static_cast<double>(budget))
        throw TooLarge("rho enumeration budget exceeded for m = " + std::to_string(m));
    auto a = dual_matrix_mod(d, m);
    auto body = [&](int64_t lo, int64_t hi) -> int64_t {
        int64_t cnt = 0;
        for (int64_t x1 = lo; x1 < hi; ++x1)
            for (int64_t x2 = 0; x2 < m; ++x2) {
                int64_t q12 = a[0][0] * x1 % m * x1 % m + 2 * a[0][1] * x1 % m * x2 % m + a[1][1] * x2 % m * x2 % m;
                int64_t l3_12 = 2 * (a[0][2] * x1 + a[1][2] * x2) % m;
                int64_t l4_12 = 2 * (a[0][3] * x1 + a[1][3] * x2) % m;
                for (int64_t x3 = 0; x3 < m; ++x3) {
                    int64_t q123 = (q12 + l3_12 * x3 + a[2][2] * x3 % m * x3) % m;
                    int64_t l4 = (l4_12 + 2 * a[2][3] * x3) % m;
                    for (int64_t x4 = 0; x4 < m; ++x4) {
                        int64_t v = (q123 + l4 * x4 + a[3][3] * x4 % m * x4) % m;
                        if (v == 0) ++cnt;
                    }
                }
            }
        return cnt;
    };
    int64_t total = parallel_chunks<int64_t>(0, m, workers, 0, body,
                                             [](int64_t acc, int64_t part) { return acc + part; });
    return Int(static_cast<long>(total));
}

}  // namespace detail

/// rho(p^k) with the closed form rho(p) = p^3 + chi(p)(p^2 - p) as the fast
/// path for k = 1, p not dividing 2*Delta_bad; enumeration elsewhere.
inline Int rho_prime_power(const DualForm& d, const Int& p, unsigned k,
                           uint64_t budget = kDefaultBudget, int workers = 1,
                           bool force_brute = false) {
    if (!d.integral()) throw NonClassical("rho needs a classical (integral) dual form");
    Int delta = Int(d.primal_disc().get_num());
    if (k == 1 && !force_brute) {
        Int dbad = squarefull_part(delta);
        if ((2 * dbad) % p != 0) {
            // p may divide delta exactly once; chi is 0 there and the closed
            // form still applies.
            Int pp = p;
            return pp * pp * pp + Int(chi(delta, p)) * (pp * pp - pp);
        }
    }
    Int m = ipow(p, k);
    if (!fits_i64(m)) throw TooLarge("rho modulus exceeds 64 bits");
    return detail::rho_brute(d, to_i64(m), budget, workers);
}

/// Multiplicative rho(m) = #{x in (Z/m)^4 : Q*(x) = 0 mod m}.
inline Int rho(const DualForm& d, const Int& m, uint64_t budget = kDefaultBudget, int workers = 1) {
    if (m < 1) throw InvalidInput("rho needs m >= 1");
    if (m == 1) return 1;
    Int out = 1;
    for (auto& [p, e] : factorize(m)) out *= rho_prime_power(d, p, e, budget, workers);
    return out;
}

/// S(a; p^k) = sum_x e_{p^k}(a Q*(x)), computed by direct summation over the
/// value distribution of Q* mod p^k.
inline std::complex<double> exp_sum(const DualForm& d, const Int& a, const Int& p, unsigned k,
                                    uint64_t budget = kDefaultBudget) {
    if (!d.integral()) throw NonClassical("exp_sum needs a classical dual form");
    Int q_big = ipow(p, k);
    if (!fits_i64(q_big)) throw TooLarge("exp_sum modulus exceeds 64 bits");
    int64_t q = to_i64(q_big);
    double cost = std::pow(static_cast<double>(q), 4.0);
    if (cost > static_cast<double>(budget)) throw TooLarge("exp_sum enumeration budget exceeded");
    auto m = detail::dual_matrix_mod(d, q);
    std::vector<uint64_t> hist(static_cast<size_t>(q), 0);
    for (int64_t x1 = 0; x1 < q; ++x1)
        for (int64_t x2 = 0; x2 < q; ++x2) {
            int64_t q12 = (m[0][0] * x1 % q * x1 + 2 * m[0][1] * x1 % q * x2 + m[1][1] * x2 % q * x2) % q;
            int64_t l3 = 2 * (m[0][2] * x1 + m[1][2] * x2) % q;
            int64_t l4a = 2 * (m[0][3] * x1 + m[1][3] * x2) % q;
            for (int64_t x3 = 0; x3 < q; ++x3) {
                int64_t q123 = (q12 + l3 * x3 + m[2][2] * x3 % q * x3) % q;
                int64_t l4 = (l4a + 2 * m[2][3] * x3) % q;
                for (int64_t x4 = 0; x4 < q; ++x4) {
                    int64_t v = (q123 + l4 * x4 + m[3][3] * x4 % q * x4) % q;
                    ++hist[static_cast<size_t>(v)];
                }
            }
        }
    Int amod = a % q_big;
    if (amod < 0) amod += q_big;
    int64_t a64 = to_i64(amod);
    std::complex<double> s(0, 0);
    for (int64_t t = 0; t < q; ++t) {
        if (hist[static_cast<size_t>(t)] == 0) continue;
        double ang = 2.0 * M_PI * static_cast<double>(a64 * t % q) / static_cast<double>(q);
        s += static_cast<double>(hist[static_cast<size_t>(t)]) * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    return s;
}

// ---------------------------------------------------------------------------
// Ternary local invariants

namespace detail {

/// Gram matrix of a ternary form reduced mod an odd prime (uses 1/2 mod p).
inline std::array<std::array<int64_t, 3>, 3> ternary_gram_mod(const QuadraticForm& q, int64_t p) {
    uint64_t up = static_cast<uint64_t>(p);
    uint64_t inv2 = static_cast<uint64_t>(mod_inverse_i64(2, p));
    std::array<std::array<int64_t, 3>, 3> a{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Int r = q.gram2().at(i, j) % p;
            if (r < 0) r += p;
            a[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                static_cast<int64_t>(mulmod_u64(static_cast<uint64_t>(to_i64(r)), inv2, up));
        }
    return a;
}

struct F2Quadratic {
    // coefficients of y_i^2 and y_i y_j over F_2
    int d[3];
    int c[3];  // c[0]=y1y2, c[1]=y1y3, c[2]=y2y3

    int eval(int y1, int y2, int y3) const {
        return (d[0] * y1 + d[1] * y2 + d[2] * y3 + c[0] * y1 * y2 + c[1] * y1 * y3 + c[2] * y2 * y3) & 1;
    }
};

inline F2Quadratic ternary_poly_mod2(const QuadraticForm& q) {
    F2Quadratic f{};
    for (int i = 0; i < 3; ++i) f.d[i] = static_cast<int>(mpz_fdiv_ui(q.coeff(i + 1, i + 1).get_mpz_t(), 2));
    f.c[0] = static_cast<int>(mpz_fdiv_ui(q.coeff(1, 2).get_mpz_t(), 2));
    f.c[1] = static_cast<int>(mpz_fdiv_ui(q.coeff(1, 3).get_mpz_t(), 2));
    f.c[2] = static_cast<int>(mpz_fdiv_ui(q.coeff(2, 3).get_mpz_t(), 2));
    return f;
}

/// Number of variables genuinely used after the best GL_3(F_2) change of
/// basis; this is the rank of the quadratic polynomial in characteristic 2.
inline int f2_rank(const F2Quadratic& f) {
    // All 168 invertible matrices over F_2, built once.
    static const std::vector<std::array<int, 9>>& mats = [] {
        static std::vector<std::array<int, 9>> v;
        for (int bits = 0; bits < 512; ++bits) {
            std::array<int, 9> m{};
            for (int t = 0; t < 9; ++t) m[static_cast<size_t>(t)] = (bits >> t) & 1;
            int dd = (m[0] * (m[4] * m[8] ^ m[5] * m[7]) ^ m[1] * (m[3] * m[8] ^ m[5] * m[6]) ^
                      m[2] * (m[3] * m[7] ^ m[4] * m[6])) & 1;
            if (dd) v.push_back(m);
        }
        return v;
    }();
    int best = 3;
    for (const auto& m : mats) {
        // transformed coefficients: q'(y) = q(T y)
        int d2[3], c2[3];
        for (int v = 0; v < 3; ++v) d2[v] = f.eval(m[static_cast<size_t>(v)], m[static_cast<size_t>(3 + v)], m[static_cast<size_t>(6 + v)]);
        int pair_idx = 0;
        for (int u = 0; u < 3; ++u)
            for (int v = u + 1; v < 3; ++v, ++pair_idx) {
                int su = f.eval(m[static_cast<size_t>(u)] ^ m[static_cast<size_t>(v)],
                                m[static_cast<size_t>(3 + u)] ^ m[static_cast<size_t>(3 + v)],
                                m[static_cast<size_t>(6 + u)] ^ m[static_cast<size_t>(6 + v)]);
                c2[pair_idx] = su ^ d2[u] ^ d2[v];
            }
        int used = 0;
        bool u0 = d2[0] || c2[0] || c2[1];
        bool u1 = d2[1] || c2[0] || c2[2];
        bool u2 = d2[2] || c2[1] || c2[2];
        used = (u0 ? 1 : 0) + (u1 ? 1 : 0) + (u2 ? 1 : 0);
        best = std::min(best, used);
        if (best == (f.d[0] || f.d[1] || f.d[2] || f.c[0] || f.c[1] || f.c[2] ? 1 : 0)) break;
    }
    return best;
}

inline bool f2_reducible(const F2Quadratic& f) {
    // try all products of two (possibly equal) nonzero linear forms
    for (int l1 = 0; l1 < 8; ++l1)
        for (int l2 = l1; l2 < 8; ++l2) {
            bool ok = true;
            for (int y1 = 0; y1 < 2 && ok; ++y1)
                for (int y2 = 0; y2 < 2 && ok; ++y2)
                    for (int y3 = 0; y3 < 2 && ok; ++y3) {
                        int v1 = ((l1 & 1) * y1 ^ ((l1 >> 1) & 1) * y2 ^ ((l1 >> 2) & 1) * y3) & 1;
                        int v2 = ((l2 & 1) * y1 ^ ((l2 >> 1) & 1) * y2 ^ ((l2 >> 2) & 1) * y3) & 1;
                        if ((v1 & v2) != f.eval(y1, y2, y3)) ok = false;
                    }
            if (ok) return true;
        }
    return false;
}

}  // namespace detail

/// chi_q(p): +1 / -1 when the reduction mod p has rank exactly 2 and is
/// reducible / irreducible over F_p; 0 otherwise. At p = 2 the quadratic
/// polynomial itself is classified over F_2.
inline int chi_q_ternary(const QuadraticForm& q, const Int& p) {
    if (q.n() != 3) throw BadDimension("chi_q is defined for ternary forms");
    if (p == 2) {
        auto f = detail::ternary_poly_mod2(q);
        if (detail::f2_rank(f) != 2) return 0;
        return detail::f2_reducible(f) ? 1 : -1;
    }
    if (!fits_i64(p)) throw TooLarge("chi_q: prime too large");
    int64_t pp = to_i64(p);
    uint64_t up = static_cast<uint64_t>(pp);
    auto a = detail::ternary_gram_mod(q, pp);
    auto mul = [&](int64_t x, int64_t y) {
        return static_cast<int64_t>(mulmod_u64(static_cast<uint64_t>(x), static_cast<uint64_t>(y), up));
    };
    // rank by Gaussian elimination over F_p
    int rank = 0;
    {
        auto m = a;
        int row = 0;
        for (int col = 0; col < 3 && row < 3; ++col) {
            int piv = -1;
            for (int r = row; r < 3; ++r)
                if (m[static_cast<size_t>(r)][static_cast<size_t>(col)] != 0) { piv = r; break; }
            if (piv < 0) continue;
            std::swap(m[static_cast<size_t>(piv)], m[static_cast<size_t>(row)]);
            int64_t inv = mod_inverse_i64(m[static_cast<size_t>(row)][static_cast<size_t>(col)], pp);
            for (int r = 0; r < 3; ++r) {
                if (r == row) continue;
                int64_t f = mul(m[static_cast<size_t>(r)][static_cast<size_t>(col)], inv);
                if (f == 0) continue;
                for (int cc = 0; cc < 3; ++cc) {
                    int64_t sub = mul(f, m[static_cast<size_t>(row)][static_cast<size_t>(cc)]);
                    int64_t val = m[static_cast<size_t>(r)][static_cast<size_t>(cc)] - sub;
                    if (val < 0) val += pp;
                    m[static_cast<size_t>(r)][static_cast<size_t>(cc)] = val;
                }
            }
            ++row;
        }
        rank = row;
    }
    if (rank != 2) return 0;
    // kernel vector of the Gram matrix mod p, from the adjugate
    std::array<int64_t, 3> v{};
    {
        auto minor2 = [&](int i1, int i2, int j1, int j2) {
            int64_t d = mul(a[static_cast<size_t>(i1)][static_cast<size_t>(j1)], a[static_cast<size_t>(i2)][static_cast<size_t>(j2)]) -
                        mul(a[static_cast<size_t>(i1)][static_cast<size_t>(j2)], a[static_cast<size_t>(i2)][static_cast<size_t>(j1)]);
            return d < 0 ? d + pp : d;
        };
        std::array<std::array<int64_t, 3>, 3> adj{};
        adj[0] = {minor2(1, 2, 1, 2), (pp - minor2(0, 2, 1, 2)) % pp, minor2(0, 1, 1, 2)};
        adj[1] = {(pp - minor2(1, 2, 0, 2)) % pp, minor2(0, 2, 0, 2), (pp - minor2(0, 1, 0, 2)) % pp};
        adj[2] = {minor2(1, 2, 0, 1), (pp - minor2(0, 2, 0, 1)) % pp, minor2(0, 1, 0, 1)};
        bool found = false;
        for (int j = 0; j < 3 && !found; ++j) {
            for (int i = 0; i < 3; ++i) v[static_cast<size_t>(i)] = adj[static_cast<size_t>(i)][static_cast<size_t>(j)];
            if (v[0] || v[1] || v[2]) found = true;
        }
        if (!found) throw InvariantViolation("rank-2 reduction with zero adjugate");
    }
    // complete v to a basis mod p with two coordinate vectors
    int skip = 0;
    for (int i = 0; i < 3; ++i)
        if (v[static_cast<size_t>(i)] != 0) { skip = i; break; }
    int u1 = (skip + 1) % 3, u2 = (skip + 2) % 3;
    // binary form on the complement: b(s,t) = q(s e_u1 + t e_u2)
    int64_t aa = a[static_cast<size_t>(u1)][static_cast<size_t>(u1)];
    int64_t bb = 2 * a[static_cast<size_t>(u1)][static_cast<size_t>(u2)] % pp;
    int64_t cc = a[static_cast<size_t>(u2)][static_cast<size_t>(u2)];
    int64_t disc = mul(bb, bb) - mul(4 % pp, mul(aa, cc));
    if (disc < 0) disc += pp;
    if (disc == 0) throw InvariantViolation("rank-2 reduction with degenerate complement");
    return jacobi_i64(disc, up);
}

/// D(q): gcd of the nine 2x2 minors of the integer matrix of a classical
/// ternary form.
inline Int minor_gcd_D(const QuadraticForm& q) {
    if (q.n() != 3) throw BadDimension("D(q) is defined for ternary forms");
    if (!q.classical()) throw NonClassical("D(q) needs a classical form");
    Mat a(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a.at(i, j) = q.gram2().at(i, j) / 2;
    Int g = 0;
    for (int i1 = 0; i1 < 3; ++i1)
        for (int i2 = i1 + 1; i2 < 3; ++i2)
            for (int j1 = 0; j1 < 3; ++j1)
                for (int j2 = j1 + 1; j2 < 3; ++j2)
                    g = igcd(g, a.at(i1, j1) * a.at(i2, j2) - a.at(i1, j2) * a.at(i2, j1));
    if (g == 0) throw InvariantViolation("all 2x2 minors vanish for a nonsingular form");
    return g;
}

struct LocalProfile {
    Int p;
    unsigned xi;      // v_p(Delta_q)
    int chi_q;        // in {-1, 0, +1}
    unsigned d_contrib;  // v_p(D(q))
    Int c_factor;     // local factor of C(q)
};

/// Per-prime invariants for every p with p^xi || Delta_q, xi >= 1.
inline std::vector<LocalProfile> local_profiles(const QuadraticForm& q) {
    if (q.n() != 3) throw BadDimension("local profiles are for ternary forms");
    if (!q.classical()) throw NonClassical("local profiles need a classical form");
    Int delta = q.disc_int();
    Int dq = minor_gcd_D(q);
    std::vector<LocalProfile> out;
    for (auto& [p, e] : factorize(delta)) {
        LocalProfile lp;
        lp.p = p;
        lp.xi = e;
        lp.chi_q = chi_q_ternary(q, p);
        lp.d_contrib = remove_factor(dq, p).first;
        if ((2 * dq) % p == 0) {
            lp.c_factor = Int(e + 1);  // tau(p^xi)
        } else {
            if (lp.chi_q == 1)
                lp.c_factor = Int(e + 1);
            else if (lp.chi_q == -1)
                lp.c_factor = Int(e % 2 == 0 ? 1 : 0);
            else
                throw InvariantViolation("chi_q = 0 at a prime not dividing 2 D(q)");
        }
        out.push_back(std::move(lp));
    }
    return out;
}

/// C(q): product of the local cover factors; C(q) = 0 certifies that the
/// conic has no primitive integer zeros.
inline Int C_value(const QuadraticForm& q) {
    Int c = 1;
    for (auto& lp : local_profiles(q)) c *= lp.c_factor;
    return c;
}

struct GcdInequality {
    Int lhs;  // (m, n^2)^2 * (m, h^4)^3
    Int rhs;  // m * h^12
    bool holds;
};

/// Verifies (m,n^2)^{1/6} <= m^{1/12} h / (m,h^4)^{1/4} with h = (m,n) by
/// comparing exact 12th powers.
inline GcdInequality gcd_inequality(const Int& m, const Int& n) {
    if (m < 1) throw InvalidInput("gcd_inequality needs m >= 1");
    if (n == 0) throw ZeroInput("gcd_inequality needs n != 0");
    Int h = igcd(m, n);
    Int g1 = igcd(m, n * n);
    Int g2 = igcd(m, ipow(h, 4));
    GcdInequality r;
    r.lhs = g1 * g1 * ipow(g2, 3);
    r.rhs = m * ipow(h, 12);
    r.holds = r.lhs <= r.rhs;
    return r;
}

// ---------------------------------------------------------------------------
// Windowed counts and averages over boxes

namespace detail {

struct DualGrid64 {
    int64_t a[4][4];
    // |Q*(x)| <= bound for the box in use
    __int128 max_abs;

    static DualGrid64 build(const DualForm& d, const IVec& center, int64_t radius) {
        Mat m = d.matrix_int();
        DualGrid64 g{};
        __int128 bound = 0;
        int64_t ext = 0;
        for (int i = 0; i < 4; ++i) ext = std::max<int64_t>(ext, std::abs(to_i64(center[static_cast<size_t>(i)])) + radius);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                g.a[i][j] = to_i64(m.at(i, j));  // throws TooLarge if it does not fit
                bound += static_cast<__int128>(std::abs(g.a[i][j])) * ext * ext;
            }
        g.max_abs = bound;
        return g;
    }

    int64_t eval(int64_t x1, int64_t x2, int64_t x3, int64_t x4) const {
        // fits int64 as long as max_abs < 2^62, checked by callers
        return a[0][0] * x1 * x1 + a[1][1] * x2 * x2 + a[2][2] * x3 * x3 + a[3][3] * x4 * x4 +
               2 * (a[0][1] * x1 * x2 + a[0][2] * x1 * x3 + a[0][3] * x1 * x4 +
                    a[1][2] * x2 * x3 + a[1][3] * x2 * x4 + a[2][3] * x3 * x4);
    }
};

}  // namespace detail

/// U(a;tau): points of the box |x - center|_inf <= X with a | Q*(x),
/// Q*(x) != 0, and no prime below tau dividing Q*(x)/a (P^-(1) = infinity).
inline Int U_count(const DualForm& d, const Int& a, double tau, const IVec& center, int64_t x_radius,
                   uint64_t budget = kDefaultBudget, int workers = 1) {
    if (!d.integral()) throw NonClassical("U_count needs a classical dual form");
    if (a < 1) throw InvalidInput("U_count needs a >= 1");
    if (tau < 2) throw InvalidInput("U_count needs tau >= 2");
    if (x_radius < 0) throw InvalidInput("U_count needs X >= 0");
    double vol = std::pow(2.0 * static_cast<double>(x_radius) + 1.0, 4.0);
    if (vol > static_cast<double>(budget)) throw TooLarge("U_count box exceeds budget");
    auto grid = detail::DualGrid64::build(d, center, x_radius);
    if (grid.max_abs > (static_cast<__int128>(1) << 62)) throw TooLarge("U_count values exceed int64");
    int64_t a64 = to_i64(a);
    auto small_primes = primes_below(static_cast<int64_t>(std::ceil(tau)));
    // primes strictly below tau violate the P^- condition
    std::vector<int64_t> sieve;
    for (int64_t p : small_primes)
        if (static_cast<double>(p) < tau) sieve.push_back(p);
    int64_t c1 = to_i64(center[0]), c2 = to_i64(center[1]), c3 = to_i64(center[2]), c4 = to_i64(center[3]);
    auto body = [&](int64_t lo, int64_t hi) -> int64_t {
        int64_t cnt = 0;
        for (int64_t x1 = lo; x1 < hi; ++x1)
            for (int64_t x2 = c2 - x_radius; x2 <= c2 + x_radius; ++x2)
                for (int64_t x3 = c3 - x_radius; x3 <= c3 + x_radius; ++x3)
                    for (int64_t x4 = c4 - x_radius; x4 <= c4 + x_radius; ++x4) {
                        int64_t v = grid.eval(x1, x2, x3, x4);
                        if (v == 0 || v % a64 != 0) continue;
                        int64_t w = std::abs(v / a64);
                        bool ok = true;
                        for (int64_t p : sieve) {
                            if (w == 1) break;
                            if (w % p == 0) { ok = false; break; }
                        }
                        if (ok) ++cnt;
                    }
        return cnt;
    };
    int64_t total = parallel_chunks<int64_t>(c1 - x_radius, c1 + x_radius + 1, workers, 0, body,
                                             [](int64_t acc, int64_t p) { return acc + p; });
    return Int(static_cast<long>(total));
}

/// S^(h)(X): the windowed sum of R(|Q*(x)|) over h | Q*(x), maximized over
/// the supplied centers (a sampled stand-in for the supremum over all
/// window positions).
inline Int S_h_window(const DualForm& d, const Int& h, const std::vector<IVec>& centers, int64_t x_radius,
                      uint64_t budget = kDefaultBudget, int workers = 1,
                      uint32_t sieve_cap = kDefaultSieveCap) {
    if (!d.integral()) throw NonClassical("S_h_window needs a classical dual form");
    if (h < 1) throw InvalidInput("S_h_window needs h >= 1");
    if (centers.empty()) throw InvalidInput("S_h_window needs at least one center");
    double vol = std::pow(2.0 * static_cast<double>(x_radius) + 1.0, 4.0);
    if (vol * static_cast<double>(centers.size()) > static_cast<double>(budget))
        throw TooLarge("S_h_window boxes exceed budget");
    Int delta = Int(d.primal_disc().get_num());
    Int two_delta = 2 * delta;
    int64_t h64 = to_i64(h);

    Int best = 0;
    for (const IVec& center : centers) {
        auto grid = detail::DualGrid64::build(d, center, x_radius);
        if (grid.max_abs > (static_cast<__int128>(1) << 62)) throw TooLarge("S_h_window values exceed int64");
        if (grid.max_abs > sieve_cap) throw TooLarge("S_h_window value range exceeds the SPF sieve cap");
        uint32_t lim = static_cast<uint32_t>(grid.max_abs);
        SpfSieve spf(std::max<uint32_t>(lim, 3));
        // chi at every prime up to the sieve limit, indexed by prime value
        std::vector<int8_t> chi_at(static_cast<size_t>(spf.limit()) + 1, 2);
        auto chi_of = [&](uint32_t p) -> int {
            int8_t& slot = chi_at[p];
            if (slot == 2) slot = static_cast<int8_t>(chi(delta, Int(static_cast<unsigned long>(p))));
            return slot;
        };
        // R over the factorization from the sieve
        auto r_of = [&](int64_t n) -> int64_t {
            int64_t r = 1;
            spf.factor(static_cast<uint64_t>(n), [&](uint32_t p, unsigned e) {
                if (mpz_divisible_ui_p(two_delta.get_mpz_t(), p))
                    r *= static_cast<int64_t>(e + 1);
                else if (chi_of(p) == 1)
                    r *= static_cast<int64_t>(e + 1);
                else if (e % 2 != 0)
                    r = 0;
            });
            return r;
        };
        int64_t c1 = to_i64(center[0]), c2 = to_i64(center[1]), c3 = to_i64(center[2]), c4 = to_i64(center[3]);
        // chi_of writes into chi_at lazily; precompute for all primes so the
        // parallel sweep stays read-only.
        for (uint32_t p = 2; p <= spf.limit(); ++p)
            if (spf.spf[p] == p) chi_of(p);
        auto body = [&](int64_t lo, int64_t hi) -> int64_t {
            int64_t acc = 0;
            for (int64_t x1 = lo; x1 < hi; ++x1)
                for (int64_t x2 = c2 - x_radius; x2 <= c2 + x_radius; ++x2)
                    for (int64_t x3 = c3 - x_radius; x3 <= c3 + x_radius; ++x3)
                        for (int64_t x4 = c4 - x_radius; x4 <= c4 + x_radius; ++x4) {
                            int64_t v = grid.eval(x1, x2, x3, x4);
                            if (v == 0 || v % h64 != 0) continue;
                            acc += r_of(std::abs(v));
                        }
            return acc;
        };
        int64_t total = parallel_chunks<int64_t>(c1 - x_radius, c1 + x_radius + 1, workers, 0, body,
                                                 [](int64_t a2, int64_t p2) { return a2 + p2; });
        if (Int(static_cast<long>(total)) > best) best = Int(static_cast<long>(total));
    }
    return best;
}

/// frakS = prod_{p <= X} (1 + R(p)/p), exact.
inline Rat frakS(const Int& delta, double x) {
    if (delta == 0) throw ZeroInput("frakS with delta = 0");
    Rat r(1);
    for (int64_t p : primes_below(static_cast<int64_t>(std::floor(x)) + 1)) {
        Int rp;
        if ((2 * delta) % p == 0)
            rp = 2;  // tau(p)
        else
            rp = 1 + chi(delta, Int(p));
        Rat f(Int(p) + rp, Int(p));
        f.canonicalize();
        r *= f;
    }
    return r;
}

}  // namespace quadrics
