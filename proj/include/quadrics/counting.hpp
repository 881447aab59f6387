#pragma once

// Exact point counting on quadric surfaces: the brute-force counter, Siegel
// witness vectors, conic zero enumeration in boxes, the local lattice cover
// of conic zeros, the plane-slicing counter, and the rational-line machinery
// for square discriminants. All counts are exact; floating point only guides
// enumeration boxes, never membership.

#include <chrono>
#include <set>
#include <unordered_set>

#include "quadrics/localarith.hpp"

namespace quadrics {

using V4 = std::array<int64_t, 4>;
using V3 = std::array<int64_t, 3>;

struct CountReport {
    int64_t b = 0;
    Int count = 0;
    std::string method;
    uint64_t slices_visited = 0;   // canonical primitive slice vectors examined
    uint64_t singular_slices = 0;  // slices with Q*(c) = 0
    double elapsed = 0.0;          // seconds
};

namespace detail {

inline int64_t gcd4(int64_t a, int64_t b, int64_t c, int64_t d) {
    return std::gcd(std::gcd(std::abs(a), std::abs(b)), std::gcd(std::abs(c), std::abs(d)));
}

/// Canonical representative of {x, -x}: first nonzero coordinate positive.
inline V4 canonical_pm(V4 x) {
    for (int64_t v : x) {
        if (v > 0) return x;
        if (v < 0) {
            for (auto& t : x) t = -t;
            return x;
        }
    }
    return x;
}

struct PointSet {
    // packed path for |x| < 2^15 (16 bits per coordinate), set fallback otherwise
    std::unordered_set<uint64_t> packed;
    std::set<V4> wide;
    bool use_packed;

    explicit PointSet(int64_t b) : use_packed(b < 32000) {}

    static uint64_t pack(const V4& x) {
        uint64_t r = 0;
        for (int i = 0; i < 4; ++i) r = (r << 16) | (static_cast<uint64_t>(x[static_cast<size_t>(i)] + 32768) & 0xffff);
        return r;
    }

    void insert(const V4& x) {
        if (use_packed)
            packed.insert(pack(x));
        else
            wide.insert(x);
    }

    size_t size() const { return use_packed ? packed.size() : wide.size(); }

    void merge(PointSet&& o) {
        if (use_packed)
            packed.merge(std::move(o.packed));
        else
            wide.merge(std::move(o.wide));
    }
};

/// int64 view of a quaternary doubled Gram matrix, with an overflow guard
/// for evaluation over |x| <= b.
struct FormGrid64 {
    int64_t g2[4][4];
    bool ok = false;

    static FormGrid64 build(const QuadraticForm& q, int64_t b) {
        FormGrid64 g{};
        __int128 mag = 0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                const Int& e = q.gram2().at(i, j);
                if (!fits_i64(e)) return g;
                g.g2[i][j] = to_i64(e);
                mag += static_cast<__int128>(std::abs(g.g2[i][j]));
            }
        // quadratic-in-x4 solving needs disc = l^2 - 2*g44*rest to stay in i128
        __int128 lim = mag * b * b;
        if (lim > (static_cast<__int128>(1) << 60)) return g;
        g.ok = true;
        return g;
    }

    // 2*Q(x)
    __int128 eval2(int64_t x1, int64_t x2, int64_t x3, int64_t x4) const {
        __int128 s = 0;
        const int64_t x[4] = {x1, x2, x3, x4};
        for (int i = 0; i < 4; ++i) {
            if (x[i] == 0) continue;
            int64_t row = 0;
            for (int j = 0; j < 4; ++j) row += g2[i][j] * x[j];
            s += static_cast<__int128>(x[i]) * row;
        }
        return s;
    }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Brute-force counting

/// N(B): primitive x in Z^4, |x| <= B, Q(x) = 0, with x and -x counted
/// separately. Iterates (x1,x2,x3) and solves the exact integer quadratic in
/// x4.
inline CountReport brute_force_count(const QuadraticForm& q, int64_t b,
                                     uint64_t budget = kDefaultBudget, int workers = 1) {
    if (q.n() != 4) throw BadDimension("brute_force_count needs a quaternary form");
    if (b < 1) throw InvalidInput("brute_force_count needs B >= 1");
    double vol = std::pow(2.0 * static_cast<double>(b) + 1.0, 3.0);
    if (vol > static_cast<double>(budget)) throw TooLarge("brute-force box exceeds budget");
    auto t0 = std::chrono::steady_clock::now();
    auto grid = detail::FormGrid64::build(q, b);
    if (!grid.ok) throw TooLarge("coefficients too large for the 128-bit fast path");

    // Q(x) = a4 x4^2 + l(x123) x4 + Q3(x123), scaled by 2 to stay integral:
    // 2Q = g44 x4^2 + 2 l x4 + 2 Q3 with l = sum_i g2[i][3] x_i.
    const int64_t g44 = grid.g2[3][3];  // = 2*a4

    auto body = [&](int64_t lo, int64_t hi) -> int64_t {
        int64_t cnt = 0;
        for (int64_t x1 = lo; x1 < hi; ++x1)
            for (int64_t x2 = -b; x2 <= b; ++x2)
                for (int64_t x3 = -b; x3 <= b; ++x3) {
                    __int128 q3_2 = grid.eval2(x1, x2, x3, 0);  // 2*Q3
                    __int128 l = grid.g2[0][3] * x1 + grid.g2[1][3] * x2 + grid.g2[2][3] * x3;
                    if (g44 != 0) {
                        // g44 x4^2 + 2 l x4 + q3_2 = 0
                        __int128 disc = l * l - static_cast<__int128>(g44) * q3_2;
                        if (disc < 0) continue;
                        __int128 s;
                        if (!i128_square_root(disc, &s)) continue;
                        for (int sgn = 0; sgn < (s == 0 ? 1 : 2); ++sgn) {
                            __int128 num = -l + (sgn == 0 ? s : -s);
                            if (num % g44 != 0) continue;
                            __int128 x4 = num / g44;
                            if (x4 < -b || x4 > b) continue;
                            if (detail::gcd4(x1, x2, x3, static_cast<int64_t>(x4)) == 1) ++cnt;
                        }
                    } else if (l != 0) {
                        if (q3_2 % (2 * l) != 0) continue;
                        __int128 x4 = -q3_2 / (2 * l);
                        if (x4 < -b || x4 > b) continue;
                        if (detail::gcd4(x1, x2, x3, static_cast<int64_t>(x4)) == 1) ++cnt;
                    } else if (q3_2 == 0) {
                        for (int64_t x4 = -b; x4 <= b; ++x4)
                            if (detail::gcd4(x1, x2, x3, x4) == 1) ++cnt;
                    }
                }
        return cnt;
    };
    int64_t total = parallel_chunks<int64_t>(-b, b + 1, workers, 0, body,
                                             [](int64_t a, int64_t p) { return a + p; });
    CountReport rep;
    rep.b = b;
    rep.count = Int(static_cast<long>(total));
    rep.method = "brute";
    rep.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// ---------------------------------------------------------------------------
// Siegel witnesses

namespace detail {

/// Kernel basis of x^perp in Z^4, by unimodular column reduction (int64).
inline std::array<V4, 3> kernel_basis_i64(const V4& x) {
    int64_t row[4] = {x[0], x[1], x[2], x[3]};
    int64_t u[4][4] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
    int piv = -1;
    for (int j = 0; j < 4; ++j)
        if (row[j] != 0) { piv = j; break; }
    for (int j = piv + 1; j < 4; ++j) {
        while (row[j] != 0) {
            int64_t q = row[j] / row[piv];
            row[j] -= q * row[piv];
            for (int i = 0; i < 4; ++i) u[i][j] -= q * u[i][piv];
            if (row[j] != 0) {
                std::swap(row[piv], row[j]);
                for (int i = 0; i < 4; ++i) std::swap(u[i][piv], u[i][j]);
            }
        }
    }
    std::array<V4, 3> out{};
    int k = 0;
    for (int j = 0; j < 4; ++j) {
        if (j == piv) continue;
        out[static_cast<size_t>(k)] = {u[0][j], u[1][j], u[2][j], u[3][j]};
        ++k;
    }
    return out;
}

inline int64_t dot_i64(const V4& a, const V4& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

inline int64_t sup_i64(const V4& a) {
    int64_t m = 0;
    for (int64_t v : a) m = std::max(m, std::abs(v));
    return m;
}

inline void size_reduce_i64(std::array<V4, 3>& g) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                if (i == j) continue;
                int64_t njj = dot_i64(g[static_cast<size_t>(j)], g[static_cast<size_t>(j)]);
                if (njj == 0) continue;
                int64_t num = dot_i64(g[static_cast<size_t>(i)], g[static_cast<size_t>(j)]);
                int64_t t = static_cast<int64_t>(std::llround(static_cast<double>(num) / static_cast<double>(njj)));
                if (t == 0) continue;
                V4 cand;
                for (int a = 0; a < 4; ++a) cand[static_cast<size_t>(a)] = g[static_cast<size_t>(i)][static_cast<size_t>(a)] - t * g[static_cast<size_t>(j)][static_cast<size_t>(a)];
                if (dot_i64(cand, cand) < dot_i64(g[static_cast<size_t>(i)], g[static_cast<size_t>(i)])) {
                    g[static_cast<size_t>(i)] = cand;
                    changed = true;
                }
            }
    }
    std::sort(g.begin(), g.end(), [](const V4& a, const V4& b) { return dot_i64(a, a) < dot_i64(b, b); });
}

}  // namespace detail

/// Minimal sup-norm primitive c with c.x = 0, found by exact enumeration in
/// the reduced kernel basis. Tie-break: lexicographically smallest canonical
/// vector.
inline V4 siegel_witness_i64(const V4& x) {
    if (detail::gcd4(x[0], x[1], x[2], x[3]) != 1) throw NotPrimitive("siegel witness needs primitive x");
    auto g = detail::kernel_basis_i64(x);
    detail::size_reduce_i64(g);
    // initial candidate: best single basis vector (primitivized)
    V4 best = g[0];
    {
        int64_t gg = detail::gcd4(best[0], best[1], best[2], best[3]);
        for (auto& v : best) v /= gg;
    }
    int64_t best_sup = detail::sup_i64(best);
    // coefficient bounds for any vector with euclidean norm <= 2*best_sup
    int64_t gram[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) gram[i][j] = detail::dot_i64(g[static_cast<size_t>(i)], g[static_cast<size_t>(j)]);
    int64_t det_g = gram[0][0] * (gram[1][1] * gram[2][2] - gram[1][2] * gram[2][1]) -
                    gram[0][1] * (gram[1][0] * gram[2][2] - gram[1][2] * gram[2][0]) +
                    gram[0][2] * (gram[1][0] * gram[2][1] - gram[1][1] * gram[2][0]);
    double adj[3][3];
    adj[0][0] = static_cast<double>(gram[1][1] * gram[2][2] - gram[1][2] * gram[2][1]);
    adj[0][1] = -static_cast<double>(gram[0][1] * gram[2][2] - gram[0][2] * gram[2][1]);
    adj[0][2] = static_cast<double>(gram[0][1] * gram[1][2] - gram[0][2] * gram[1][1]);
    adj[1][0] = -static_cast<double>(gram[1][0] * gram[2][2] - gram[1][2] * gram[2][0]);
    adj[1][1] = static_cast<double>(gram[0][0] * gram[2][2] - gram[0][2] * gram[2][0]);
    adj[1][2] = -static_cast<double>(gram[0][0] * gram[1][2] - gram[0][2] * gram[1][0]);
    adj[2][0] = static_cast<double>(gram[1][0] * gram[2][1] - gram[1][1] * gram[2][0]);
    adj[2][1] = -static_cast<double>(gram[0][0] * gram[2][1] - gram[0][1] * gram[2][0]);
    adj[2][2] = static_cast<double>(gram[0][0] * gram[1][1] - gram[0][1] * gram[1][0]);
    double r2 = 2.0 * static_cast<double>(best_sup);  // ||c||_2 <= 2*sup for c in Z^4
    int64_t lim[3];
    for (int j = 0; j < 3; ++j) {
        double s = 0;
        for (int i = 0; i < 3; ++i) s += std::abs(adj[j][i]) * std::sqrt(static_cast<double>(gram[i][i]));
        lim[j] = static_cast<int64_t>(s * r2 / static_cast<double>(det_g) * (1 + 1e-9)) + 1;
    }
    for (int64_t l1 = -lim[0]; l1 <= lim[0]; ++l1)
        for (int64_t l2 = -lim[1]; l2 <= lim[1]; ++l2)
            for (int64_t l3 = -lim[2]; l3 <= lim[2]; ++l3) {
                if (l1 == 0 && l2 == 0 && l3 == 0) continue;
                V4 v;
                for (int a = 0; a < 4; ++a)
                    v[static_cast<size_t>(a)] = l1 * g[0][static_cast<size_t>(a)] + l2 * g[1][static_cast<size_t>(a)] + l3 * g[2][static_cast<size_t>(a)];
                int64_t sup = detail::sup_i64(v);
                if (sup == 0 || sup > best_sup) continue;
                int64_t gg = detail::gcd4(v[0], v[1], v[2], v[3]);
                if (gg != 1) {
                    for (auto& t : v) t /= gg;
                    sup = detail::sup_i64(v);
                }
                v = detail::canonical_pm(v);
                if (sup < best_sup || (sup == best_sup && v < detail::canonical_pm(best))) {
                    best = v;
                    best_sup = sup;
                }
            }
    return detail::canonical_pm(best);
}

inline IVec siegel_witness(const IVec& x) {
    V4 xi{};
    for (int i = 0; i < 4; ++i) xi[static_cast<size_t>(i)] = to_i64(x[static_cast<size_t>(i)]);
    V4 c = siegel_witness_i64(xi);
    return IVec{Int(static_cast<long>(c[0])), Int(static_cast<long>(c[1])), Int(static_cast<long>(c[2])), Int(static_cast<long>(c[3]))};
}

// ---------------------------------------------------------------------------
// Conic zeros in boxes

namespace detail {

inline bool i64_square_root(int64_t n, int64_t* root) {
    if (n < 0) return false;
    int64_t r = static_cast<int64_t>(std::sqrt(static_cast<double>(n)));
    while (r > 0 && r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    if (r * r == n) {
        *root = r;
        return true;
    }
    return false;
}

/// Enumerates integer zeros of the ternary form with doubled Gram `g2`
/// inside |y_i| <= floor(L_i), iterating the two tightest coordinates and
/// solving the exact quadratic in the third. Calls cb on every nonzero
/// solution (not only primitive ones). Work is int64 when magnitudes allow,
/// 128-bit otherwise.
template <class Wide, class Cb>
inline void enumerate_gram_zeros_impl(const std::array<std::array<int64_t, 3>, 3>& g2, const int64_t lim[3],
                                      int ia, int ib, int ic, Cb&& cb) {
    const int64_t qcc = g2[static_cast<size_t>(ic)][static_cast<size_t>(ic)] / 2;  // coefficient of y_c^2
    const int64_t gca = g2[static_cast<size_t>(ic)][static_cast<size_t>(ia)];
    const int64_t gcb = g2[static_cast<size_t>(ic)][static_cast<size_t>(ib)];
    const int64_t gaa = g2[static_cast<size_t>(ia)][static_cast<size_t>(ia)];
    const int64_t gab = g2[static_cast<size_t>(ia)][static_cast<size_t>(ib)];
    const int64_t gbb = g2[static_cast<size_t>(ib)][static_cast<size_t>(ib)];
    for (int64_t ya = -lim[ia]; ya <= lim[ia]; ++ya)
        for (int64_t yb = -lim[ib]; yb <= lim[ib]; ++yb) {
            // Q(y) = qcc yc^2 + l yc + q0 with l = g2[c][a] ya + g2[c][b] yb
            // and 2*q0 the restricted binary value.
            Wide l = static_cast<Wide>(gca) * ya + static_cast<Wide>(gcb) * yb;
            Wide q0_2 = static_cast<Wide>(gaa) * ya * ya + 2 * static_cast<Wide>(gab) * ya * yb +
                        static_cast<Wide>(gbb) * yb * yb;
            auto emit = [&](Wide yc) {
                if (yc < -lim[ic] || yc > lim[ic]) return;
                V3 y{};
                y[static_cast<size_t>(ia)] = ya;
                y[static_cast<size_t>(ib)] = yb;
                y[static_cast<size_t>(ic)] = static_cast<int64_t>(yc);
                if (y[0] == 0 && y[1] == 0 && y[2] == 0) return;
                cb(y);
            };
            if (qcc != 0) {
                // qcc t^2 + l t + q0 = 0; (2 qcc t + l)^2 = l^2 - 2 qcc q0_2
                Wide disc = l * l - 2 * static_cast<Wide>(qcc) * q0_2;
                if (disc < 0) continue;
                Wide s;
                if constexpr (std::is_same_v<Wide, int64_t>) {
                    if (!i64_square_root(disc, &s)) continue;
                } else {
                    if (!i128_square_root(disc, &s)) continue;
                }
                for (int sgn = 0; sgn < (s == 0 ? 1 : 2); ++sgn) {
                    Wide num = -l + (sgn == 0 ? s : -s);
                    if (num % (2 * qcc) != 0) continue;
                    emit(num / (2 * qcc));
                }
            } else if (l != 0) {
                if (q0_2 % (2 * l) != 0) continue;
                emit(-q0_2 / (2 * l));
            } else if (q0_2 == 0) {
                for (int64_t t = -lim[ic]; t <= lim[ic]; ++t) emit(static_cast<Wide>(t));
            }
        }
}

template <class Cb>
inline void enumerate_gram_zeros(const std::array<std::array<int64_t, 3>, 3>& g2, const BoxBounds& bounds,
                                 uint64_t budget, Cb&& cb) {
    int64_t lim[3];
    for (int i = 0; i < 3; ++i) {
        double l = bounds.at(i);
        if (l < 0) throw InvalidInput("negative box bound");
        lim[i] = static_cast<int64_t>(std::floor(l));
    }
    // solve for the coordinate with the largest bound
    int order[3] = {0, 1, 2};
    std::sort(order, order + 3, [&](int a, int b) { return lim[a] < lim[b]; });
    int ia = order[0], ib = order[1], ic = order[2];
    double cells = (2.0 * static_cast<double>(lim[ia]) + 1.0) * (2.0 * static_cast<double>(lim[ib]) + 1.0);
    if (cells > static_cast<double>(budget)) throw TooLarge("conic box exceeds budget");

    double maxg = 0, maxl = 0;
    for (auto& row : g2)
        for (int64_t v : row) maxg = std::max(maxg, std::abs(static_cast<double>(v)));
    for (int i = 0; i < 3; ++i) maxl = std::max(maxl, static_cast<double>(lim[i]));
    maxl = std::max(maxl, 1.0);
    // disc <= 12 * maxg^2 * maxl^2 and the linear path divides by 2l
    if (12.0 * maxg * maxg * maxl * maxl < 4.0e18)
        enumerate_gram_zeros_impl<int64_t>(g2, lim, ia, ib, ic, cb);
    else
        enumerate_gram_zeros_impl<__int128>(g2, lim, ia, ib, ic, cb);
}

inline std::array<std::array<int64_t, 3>, 3> gram2_to_i64(const Mat& g2) {
    std::array<std::array<int64_t, 3>, 3> out{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[static_cast<size_t>(i)][static_cast<size_t>(j)] = to_i64(g2.at(i, j));
    return out;
}

}  // namespace detail

/// Primitive zeros of a nonsingular ternary form in the box |y_i| <= L_i;
/// y and -y are both listed. Sorted lexicographically.
inline std::vector<IVec> conic_zeros_in_box(const QuadraticForm& q, const BoxBounds& bounds,
                                            uint64_t budget = kDefaultBudget) {
    if (q.n() != 3) throw BadDimension("conic_zeros_in_box needs a ternary form");
    auto g2 = detail::gram2_to_i64(q.gram2());
    std::vector<V3> found;
    detail::enumerate_gram_zeros(g2, bounds, budget, [&](const V3& y) {
        if (std::gcd(std::gcd(std::abs(y[0]), std::abs(y[1])), std::abs(y[2])) == 1) found.push_back(y);
    });
    std::sort(found.begin(), found.end());
    std::vector<IVec> out;
    out.reserve(found.size());
    for (auto& y : found)
        out.push_back(IVec{Int(static_cast<long>(y[0])), Int(static_cast<long>(y[1])), Int(static_cast<long>(y[2]))});
    return out;
}

// ---------------------------------------------------------------------------
// Rank-2 conics (singular slices, lines)

namespace detail {

struct Rank2Structure {
    IVec radical;           // primitive kernel vector of the Gram matrix
    bool split = false;     // does the conic factor into two rational lines
    std::vector<IVec> line_dirs;  // zero directions w with q(w) = 0 (when split)
};

/// Structure of a rank-2 ternary conic with doubled Gram g2 (3x3, det 0).
inline Rank2Structure rank2_structure(const Mat& g2) {
    Mat adj = adjugate(g2);
    IVec v0;
    for (int j = 0; j < 3 && v0.empty(); ++j) {
        IVec col = adj.column(j);
        if (!is_zero_vec(col)) v0 = primitivize(col);
    }
    if (v0.empty()) throw InvariantViolation("restricted conic has rank < 2");
    Rank2Structure out;
    out.radical = v0;
    // complete the radical to a basis with two coordinate vectors
    int skip = 0;
    Int best = 0;
    for (int i = 0; i < 3; ++i)
        if (abs(v0[static_cast<size_t>(i)]) > best) { best = abs(v0[static_cast<size_t>(i)]); skip = i; }
    int u1 = (skip + 1) % 3, u2 = (skip + 2) % 3;
    // binary form q(s e_u1 + t e_u2) = alpha s^2 + beta s t + gamma t^2
    Int alpha = g2.at(u1, u1) / 2;
    Int beta = g2.at(u1, u2);
    Int gamma = g2.at(u2, u2) / 2;
    Int disc = beta * beta - 4 * alpha * gamma;
    Int sigma;
    if (disc < 0 || !is_square(disc, &sigma)) return out;  // irreducible over Q
    if (disc == 0) throw InvariantViolation("rank-2 conic with degenerate complement");
    out.split = true;
    auto drop_in = [&](const Int& s, const Int& t) {
        IVec w(3, Int(0));
        w[static_cast<size_t>(u1)] = s;
        w[static_cast<size_t>(u2)] = t;
        out.line_dirs.push_back(primitivize(w));
    };
    if (alpha != 0) {
        drop_in(-beta + sigma, 2 * alpha);
        drop_in(-beta - sigma, 2 * alpha);
    } else {
        drop_in(Int(1), Int(0));
        drop_in(-gamma, beta);
    }
    return out;
}

inline Int sup_norm(const IVec& v) {
    Int m = 0;
    for (const Int& x : v) m = std::max(m, Int(abs(x)));
    return m;
}

inline IVec canonical_pm_int(IVec x) {
    for (auto& v : x) {
        if (v > 0) return x;
        if (v < 0) {
            for (auto& t : x) t = -t;
            return x;
        }
    }
    return x;
}

/// Enumerates all nonzero points s*h1 + t*h2 of sup-norm <= b; exact Cramer
/// bounds on (s, t). Calls cb on each (including both signs).
template <class Cb>
inline void enumerate_rank2_points(const IVec& h1, const IVec& h2, int64_t b, Cb&& cb) {
    Int g11 = dot(h1, h1), g12 = dot(h1, h2), g22 = dot(h2, h2);
    Int dg = g11 * g22 - g12 * g12;
    if (dg <= 0) throw InvariantViolation("rank-2 enumeration with dependent basis");
    size_t n = h1.size();
    Int r2 = Int(2 * b);  // ||x||_2 <= sqrt(n) |x| <= 2b for n <= 4
    Int n1 = isqrt(g11) + 1, n2 = isqrt(g22) + 1;
    Int smax = (g22 * n1 + abs(g12) * n2) * r2 / dg + 1;
    Int tmax = (g11 * n2 + abs(g12) * n1) * r2 / dg + 1;
    int64_t sl = to_i64(smax), tl = to_i64(tmax);
    for (int64_t s = -sl; s <= sl; ++s)
        for (int64_t t = -tl; t <= tl; ++t) {
            if (s == 0 && t == 0) continue;
            IVec x(n, Int(0));
            for (size_t i = 0; i < n; ++i) x[i] = Int(s) * h1[i] + Int(t) * h2[i];
            if (sup_norm(x) > b) continue;
            cb(x);
        }
}

/// Two-dimensional Lagrange reduction, exact.
inline void reduce_pair(IVec& h1, IVec& h2) {
    if (dot(h1, h1) > dot(h2, h2)) std::swap(h1, h2);
    while (true) {
        Int n1 = dot(h1, h1);
        if (n1 == 0) throw InvariantViolation("zero vector in rank-2 basis");
        Int t = round_div(dot(h1, h2), n1);
        if (t != 0) h2 = vec_sub_scaled(h2, t, h1);
        if (dot(h2, h2) >= n1) break;
        std::swap(h1, h2);
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Lattice cover of conic zeros

namespace detail {

struct DiagonalizationModPK {
    Mat t;        // integer change of basis, det a unit mod p
    Mat tinv;     // inverse of t mod p^K, entries reduced
    std::array<Int, 3> d;       // diagonal residues mod p^K
    std::array<unsigned, 3> v;  // their p-adic valuations, ascending
};

/// Congruence diagonalization of an integer symmetric 3x3 matrix mod p^K
/// (p odd): T^t A T = diag(d) mod p^K with det(T) a unit mod p.
inline DiagonalizationModPK diagonalize_mod_pk(const Mat& a_in, const Int& p, unsigned k) {
    Int m = ipow(p, k);
    auto mod = [&](const Int& x) {
        Int r = x % m;
        if (r < 0) r += m;
        return r;
    };
    Mat a = a_in;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a.at(i, j) = mod(a.at(i, j));
    Mat t = Mat::identity(3);
    auto val = [&](const Int& x) -> unsigned {
        if (x % m == 0) return k;
        return remove_factor(x, p).first;
    };
    auto add_col = [&](Mat& mm, int dst, int src, const Int& c) {
        for (int i = 0; i < 3; ++i) mm.at(i, dst) = mod(mm.at(i, dst) + c * mm.at(i, src));
    };
    auto add_row = [&](Mat& mm, int dst, int src, const Int& c) {
        for (int j = 0; j < 3; ++j) mm.at(dst, j) = mod(mm.at(dst, j) + c * mm.at(src, j));
    };
    auto swap_basis = [&](int i, int j) {
        for (int r = 0; r < 3; ++r) std::swap(a.at(r, i), a.at(r, j));
        for (int c = 0; c < 3; ++c) std::swap(a.at(i, c), a.at(j, c));
        for (int r = 0; r < 3; ++r) std::swap(t.at(r, i), t.at(r, j));
    };
    for (int step = 0; step < 3; ++step) {
        // locate the minimal-valuation entry in the trailing block,
        // preferring the diagonal on ties
        unsigned bestv = k + 1;
        int bi = -1, bj = -1;
        for (int i = step; i < 3; ++i) {
            unsigned vv = val(a.at(i, i));
            if (vv < bestv) { bestv = vv; bi = i; bj = i; }
        }
        for (int i = step; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j) {
                unsigned vv = val(a.at(i, j));
                if (vv < bestv) { bestv = vv; bi = i; bj = j; }
            }
        if (bi < 0 || bestv > k) throw InvariantViolation("diagonalization: trailing block vanishes mod p^K");
        if (bi != bj) {
            // e_bi += e_bj moves the minimal valuation onto the diagonal
            add_col(a, bi, bj, Int(1));
            add_row(a, bi, bj, Int(1));
            for (int r = 0; r < 3; ++r) t.at(r, bi) = mod(t.at(r, bi) + t.at(r, bj));
        }
        if (bi != step) swap_basis(step, bi);
        // clear the off-diagonal entries of row/col `step`
        Int pv = ipow(p, val(a.at(step, step)));
        Int unit = a.at(step, step) / pv;
        Int unit_inv;
        if (!mpz_invert(unit_inv.get_mpz_t(), unit.get_mpz_t(), m.get_mpz_t()))
            throw InvariantViolation("diagonalization: pivot unit not invertible");
        for (int j = step + 1; j < 3; ++j) {
            if (a.at(step, j) % pv != 0) throw InvariantViolation("diagonalization: pivot valuation not minimal");
            Int c = mod(-(a.at(step, j) / pv) * unit_inv);
            if (c == 0) continue;
            add_col(a, j, step, c);
            add_row(a, j, step, c);
            for (int r = 0; r < 3; ++r) t.at(r, j) = mod(t.at(r, j) + c * t.at(r, step));
        }
    }
    DiagonalizationModPK out;
    // sort by valuation
    std::array<int, 3> idx{0, 1, 2};
    std::array<unsigned, 3> vv{};
    for (int i = 0; i < 3; ++i) vv[static_cast<size_t>(i)] = val(a.at(i, i));
    std::sort(idx.begin(), idx.end(), [&](int x, int y) { return vv[static_cast<size_t>(x)] < vv[static_cast<size_t>(y)]; });
    Mat tperm(3, 3);
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) tperm.at(i, j) = t.at(i, idx[static_cast<size_t>(j)]);
    out.t = tperm;
    for (int j = 0; j < 3; ++j) {
        out.d[static_cast<size_t>(j)] = a.at(idx[static_cast<size_t>(j)], idx[static_cast<size_t>(j)]);
        out.v[static_cast<size_t>(j)] = vv[static_cast<size_t>(idx[static_cast<size_t>(j)])];
    }
    // inverse of T mod p^K
    Int dt = det(out.t);
    Int dt_inv;
    Int dt_mod = dt % m;
    if (dt_mod < 0) dt_mod += m;
    if (!mpz_invert(dt_inv.get_mpz_t(), dt_mod.get_mpz_t(), m.get_mpz_t()))
        throw InvariantViolation("diagonalization: transform not invertible mod p^K");
    Mat adj = adjugate(out.t);
    out.tinv = Mat(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out.tinv.at(i, j) = mod(adj.at(i, j) * dt_inv);
    return out;
}

/// Tonelli--Shanks over mpz for an odd prime, then Hensel lift to p^k.
inline Int sqrt_mod_prime_power_int(const Int& a_in, const Int& p, unsigned k) {
    Int pk = ipow(p, k);
    Int a = a_in % pk;
    if (a < 0) a += pk;
    // square root mod p
    Int r;
    {
        Int ap = a % p;
        if (ap == 0) throw InvalidInput("sqrt_mod: not a unit");
        if (jacobi(ap, p) != 1) throw InvalidInput("sqrt_mod: not a residue");
        if (p % 4 == 3) {
            Int e = (p + 1) / 4;
            mpz_powm(r.get_mpz_t(), ap.get_mpz_t(), e.get_mpz_t(), p.get_mpz_t());
        } else {
            Int q = p - 1;
            unsigned s = 0;
            while (q % 2 == 0) { q /= 2; ++s; }
            Int z = 2;
            while (jacobi(z, p) != -1) z += 1;
            Int mm = s, c, t, rr;
            mpz_powm(c.get_mpz_t(), z.get_mpz_t(), q.get_mpz_t(), p.get_mpz_t());
            mpz_powm(t.get_mpz_t(), ap.get_mpz_t(), q.get_mpz_t(), p.get_mpz_t());
            Int e = (q + 1) / 2;
            mpz_powm(rr.get_mpz_t(), ap.get_mpz_t(), e.get_mpz_t(), p.get_mpz_t());
            while (t != 1) {
                unsigned i = 0;
                Int tt = t;
                while (tt != 1) { tt = tt * tt % p; ++i; }
                Int b = c;
                for (unsigned j = 0; j + i + 1 < mm.get_ui(); ++j) b = b * b % p;
                mm = i;
                c = b * b % p;
                t = t * c % p;
                rr = rr * b % p;
            }
            r = rr;
        }
    }
    // Hensel
    Int cur = p;
    for (unsigned i = 1; i < k; ++i) {
        Int nxt = cur * p;
        Int diff = (r * r - a) % nxt;
        if (diff < 0) diff += nxt;
        Int inv;
        Int two_r = (2 * r) % nxt;
        if (!mpz_invert(inv.get_mpz_t(), two_r.get_mpz_t(), nxt.get_mpz_t()))
            throw InvariantViolation("hensel: 2r not invertible");
        r = (r - diff * inv) % nxt;
        if (r < 0) r += nxt;
        cur = nxt;
    }
    return r;
}

/// Projective primitive solutions of q = 0 mod p^k by Hensel-style lifting;
/// canonical representatives are scaled so the pivot coordinate equals 1.
/// The doubled Gram matrix is reduced mod p^k.
inline std::vector<V3> projective_solutions_mod_pk(const std::array<std::array<int64_t, 3>, 3>& g2m,
                                                   int64_t p, unsigned k, uint64_t budget) {
    int64_t pk = 1;
    for (unsigned i = 0; i < k; ++i) {
        if (pk > static_cast<int64_t>(budget) / p) throw TooLarge("cover: residue modulus exceeds budget");
        pk *= p;
    }
    // Track 2q(y) mod 2*p^level so that q(y) = 0 mod p^level is exact for
    // p = 2 as well.
    std::vector<V3> level;  // current representatives
    std::vector<V3> next;
    auto twoq_mod = [&](const V3& y, int64_t m2) -> int64_t {
        int64_t acc = 0;
        for (int i = 0; i < 3; ++i) {
            int64_t row = 0;
            for (int j = 0; j < 3; ++j)
                row = (row + g2m[static_cast<size_t>(i)][static_cast<size_t>(j)] % m2 * (y[static_cast<size_t>(j)] % m2)) % m2;
            acc = (acc + (y[static_cast<size_t>(i)] % m2) * row) % m2;
        }
        return acc;
    };
    // level 1: pivot coordinate 1, earlier coordinates 0, later ones free
    for (int pivot = 0; pivot < 3; ++pivot) {
        V3 y{0, 0, 0};
        y[static_cast<size_t>(pivot)] = 1;
        int free1 = pivot + 1, free2 = pivot + 2;
        int64_t r1 = (free1 < 3) ? p : 1;
        int64_t r2 = (free2 < 3) ? p : 1;
        for (int64_t a = 0; a < r1; ++a)
            for (int64_t b = 0; b < r2; ++b) {
                V3 yy = y;
                if (free1 < 3) yy[static_cast<size_t>(free1)] = a;
                if (free2 < 3) yy[static_cast<size_t>(free2)] = b;
                if (twoq_mod(yy, 2 * p) == 0) level.push_back(yy);
            }
    }
    // lift level by level
    int64_t mod_cur = p;
    for (unsigned lvl = 1; lvl < k; ++lvl) {
        int64_t mod_next = mod_cur * p;
        next.clear();
        double cost = static_cast<double>(level.size()) * static_cast<double>(p) * static_cast<double>(p);
        if (cost > static_cast<double>(budget)) throw TooLarge("cover: lifting budget exceeded");
        for (const V3& y : level) {
            int pivot = 0;
            while (y[static_cast<size_t>(pivot)] % p == 0) ++pivot;
            int f1 = (pivot == 0) ? 1 : 0;
            int f2 = (pivot == 2) ? 1 : 2;
            if (f1 == f2) f2 = (f1 == 1) ? 2 : 1;
            for (int64_t a = 0; a < p; ++a)
                for (int64_t b = 0; b < p; ++b) {
                    V3 yy = y;
                    yy[static_cast<size_t>(f1)] += a * mod_cur;
                    yy[static_cast<size_t>(f2)] += b * mod_cur;
                    int64_t tq = twoq_mod(yy, 2 * mod_next);
                    if (tq % (2 * mod_next) == 0) next.push_back(yy);
                }
        }
        level.swap(next);
        mod_cur = mod_next;
    }
    std::sort(level.begin(), level.end());
    return level;
}

}  // namespace detail

enum class CoverPolicy {
    full,                  // every prime of Delta_q contributes lattices
    analytic_primes_only,  // skip primes that would need residue enumeration
};

/// Lattice cover of the primitive zeros of a classical nonsingular ternary
/// form: every primitive integer zero lies
/// in one of the returned full-rank sublattices of Z^3. Returns the empty
/// list when local solubility fails (in particular whenever C(q) = 0).
inline std::vector<SublatticeBasis> lattice_cover(const QuadraticForm& q, uint64_t budget = kDefaultBudget,
                                                  CoverPolicy policy = CoverPolicy::full) {
    if (q.n() != 3) throw BadDimension("lattice_cover needs a ternary form");
    if (!q.classical()) throw NonClassical("lattice_cover needs a classical form");
    Int delta = q.disc_int();
    Int dq = minor_gcd_D(q);
    Mat a(3, 3);  // integer Gram
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a.at(i, j) = q.gram2().at(i, j) / 2;

    std::vector<std::vector<Mat>> per_prime;
    for (auto& [p, xi] : factorize(delta)) {
        std::vector<Mat> lats;
        bool odd = (p != 2);
        unsigned beta = remove_factor(dq, p).first;
        if ((!odd || beta != 0) && policy == CoverPolicy::analytic_primes_only) continue;
        if (odd && beta == 0) {
            // analytic route: diagonalize mod p^(xi+1); valuations are (0,0,xi)
            auto dg = detail::diagonalize_mod_pk(a, p, xi + 1);
            if (dg.v[0] != 0 || dg.v[1] != 0 || dg.v[2] != xi)
                throw InvariantViolation("cover: unexpected valuation pattern at a prime away from D(q)");
            Int m = ipow(p, xi + 1);
            Int neg = (-(dg.d[1]) % m + m) % m;
            Int d0inv;
            mpz_invert(d0inv.get_mpz_t(), dg.d[0].get_mpz_t(), m.get_mpz_t());
            Int target = neg * d0inv % m;  // -d1/d0 mod p^(xi+1)
            int ch = jacobi(target % p, p);
            if (ch == -1) {
                if (xi % 2 == 1) return {};  // locally insoluble
                Int half = ipow(p, xi / 2);
                std::vector<std::pair<IVec, Int>> conds;
                conds.emplace_back(IVec{dg.tinv.at(0, 0), dg.tinv.at(0, 1), dg.tinv.at(0, 2)}, half);
                conds.emplace_back(IVec{dg.tinv.at(1, 0), dg.tinv.at(1, 1), dg.tinv.at(1, 2)}, half);
                lats.push_back(congruence_lattice(3, conds));
            } else {
                Int s = detail::sqrt_mod_prime_power_int(target, p, xi);
                Int pxi = ipow(p, xi);
                IVec row0{dg.tinv.at(0, 0), dg.tinv.at(0, 1), dg.tinv.at(0, 2)};
                IVec row1{dg.tinv.at(1, 0), dg.tinv.at(1, 1), dg.tinv.at(1, 2)};
                IVec lminus = vec_sub_scaled(row0, s, row1);
                IVec lplus = vec_sub_scaled(row0, -s, row1);
                for (unsigned split = 0; split <= xi; ++split) {
                    std::vector<std::pair<IVec, Int>> conds;
                    if (split >= 1) conds.emplace_back(lminus, ipow(p, split));
                    if (xi - split >= 1) conds.emplace_back(lplus, ipow(p, xi - split));
                    lats.push_back(congruence_lattice(3, conds));
                }
            }
        } else {
            // enumerative route
            if (!fits_i64(p)) throw TooLarge("cover: prime exceeds enumeration range");
            int64_t p64 = to_i64(p);
            unsigned probe = xi + (p64 == 2 ? 2 : 1);
            // guard: modulus and lifting cost
            double cost = std::pow(static_cast<double>(p64), static_cast<double>(probe) + 2.0);
            if (cost > static_cast<double>(budget)) throw TooLarge("cover: enumeration budget exceeded");
            std::array<std::array<int64_t, 3>, 3> g2m{};
            int64_t big = 4;
            for (unsigned i = 0; i < probe; ++i) big *= p64;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    Int r = q.gram2().at(i, j) % big;
                    if (r < 0) r += big;
                    g2m[static_cast<size_t>(i)][static_cast<size_t>(j)] = to_i64(r);
                }
            auto probe_sols = detail::projective_solutions_mod_pk(g2m, p64, probe, budget);
            if (probe_sols.empty()) return {};
            auto sols = detail::projective_solutions_mod_pk(g2m, p64, xi, budget);
            if (sols.empty()) return {};
            if (sols.size() > 500000) throw TooLarge("cover: too many residue classes");
            // greedy cover by totally isotropic subgroups mod p^xi
            int64_t m = 1;
            for (unsigned i = 0; i < xi; ++i) m *= p64;
            auto a_mod = [&](int i, int j) {
                Int r = a.at(i, j) % m;
                if (r < 0) r += m;
                return to_i64(r);
            };
            int64_t am[3][3];
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) am[i][j] = a_mod(i, j);
            auto cross_ok = [&](const V3& g, const V3& s) {
                // 2 g^T A s = 0 mod p^xi
                int64_t acc = 0;
                for (int i = 0; i < 3; ++i) {
                    int64_t row = 0;
                    for (int j = 0; j < 3; ++j) row = (row + am[i][j] * (s[static_cast<size_t>(j)] % m)) % m;
                    acc = (acc + (g[static_cast<size_t>(i)] % m) * row) % m;
                }
                return (2 * acc) % m == 0;
            };
            auto lattice_of = [&](const std::vector<V3>& gens) {
                std::vector<IVec> cols;
                for (const V3& g : gens)
                    cols.push_back(IVec{Int(static_cast<long>(g[0])), Int(static_cast<long>(g[1])), Int(static_cast<long>(g[2]))});
                for (int i = 0; i < 3; ++i) {
                    IVec e(3, Int(0));
                    e[static_cast<size_t>(i)] = Int(static_cast<long>(m));
                    cols.push_back(e);
                }
                return hnf_columns(cols);
            };
            std::vector<Mat> groups;
            for (const V3& r : sols) {
                IVec rv{Int(static_cast<long>(r[0])), Int(static_cast<long>(r[1])), Int(static_cast<long>(r[2]))};
                bool covered = false;
                for (const Mat& h : groups)
                    if (lattice_contains(h, rv)) { covered = true; break; }
                if (covered) continue;
                std::vector<V3> gens{r};
                Mat h = lattice_of(gens);
                bool grew = true;
                while (grew) {
                    grew = false;
                    for (const V3& s : sols) {
                        IVec sv{Int(static_cast<long>(s[0])), Int(static_cast<long>(s[1])), Int(static_cast<long>(s[2]))};
                        if (lattice_contains(h, sv)) continue;
                        bool ok = true;
                        for (const V3& g : gens)
                            if (!cross_ok(g, s)) { ok = false; break; }
                        if (!ok) continue;
                        gens.push_back(s);
                        h = lattice_of(gens);
                        grew = true;
                    }
                }
                groups.push_back(h);
                if (groups.size() > 256) throw TooLarge("cover: group extraction blow-up");
            }
            lats = std::move(groups);
        }
        if (lats.empty()) return {};
        per_prime.push_back(std::move(lats));
    }
    // combine across primes by lattice intersection
    std::vector<Mat> combined{Mat::identity(3)};
    for (auto& lats : per_prime) {
        std::vector<Mat> next;
        if (combined.size() * lats.size() > 4096) throw TooLarge("cover: combination blow-up");
        for (const Mat& x : combined)
            for (const Mat& y : lats) next.push_back(lattice_intersect(x, y));
        combined.swap(next);
    }
    std::vector<SublatticeBasis> out;
    for (Mat& h : combined) out.push_back(make_sublattice(columns_of(h)));
    return out;
}

// ---------------------------------------------------------------------------
// Sliced counting

namespace detail {

inline bool is_definite3(const Mat& g2) {
    Int d1 = g2.at(0, 0);
    Int d2 = g2.at(0, 0) * g2.at(1, 1) - g2.at(0, 1) * g2.at(1, 0);
    Int d3 = det(g2);
    if (d1 > 0 && d2 > 0 && d3 > 0) return true;               // positive definite
    if (d1 < 0 && d2 > 0 && d3 < 0) return true;               // negative definite
    return false;
}

inline V4 ivec_to_v4(const IVec& x) {
    return V4{to_i64(x[0]), to_i64(x[1]), to_i64(x[2]), to_i64(x[3])};
}

inline IVec v4_to_ivec(const V4& x) {
    return IVec{Int(static_cast<long>(x[0])), Int(static_cast<long>(x[1])), Int(static_cast<long>(x[2])), Int(static_cast<long>(x[3]))};
}

/// Points of the singular slice Q*(c) = 0: the radical point of the rank-2
/// conic always; the two rational lines when the conic splits.
inline void handle_singular_slice(const QuadraticForm& q, const IVec& c, int64_t b, PointSet& ps) {
    SublatticeBasis lam = reduce_greedy(kernel_lattice(c));
    Mat g2c = restricted_gram2(q, lam.vectors);
    auto st = rank2_structure(g2c);
    Mat e = mat_from_columns(lam.vectors);
    IVec x0 = primitivize(mat_vec(e, st.radical));
    if (sup_norm(x0) <= b) {
        if (q.eval(x0) != 0) throw InvariantViolation("radical point off the quadric");
        ps.insert(canonical_pm(ivec_to_v4(x0)));
    }
    if (!st.split) return;
    for (const IVec& w : st.line_dirs) {
        IVec n = primitivize(cross3(st.radical, w));
        Mat row(1, 3);
        for (int j = 0; j < 3; ++j) row.at(0, j) = n[static_cast<size_t>(j)];
        auto uker = kernel_basis(row);
        IVec h1 = mat_vec(e, uker[0]), h2 = mat_vec(e, uker[1]);
        reduce_pair(h1, h2);
        if (q.eval(h1) != 0 || q.eval(h2) != 0) throw InvariantViolation("slice line off the quadric");
        enumerate_rank2_points(h1, h2, b, [&](const IVec& x) {
            if (content(x) != 1) return;
            ps.insert(canonical_pm(ivec_to_v4(x)));
        });
    }
}

inline std::vector<SublatticeBasis> trivial_cover3() {
    std::vector<IVec> id;
    for (int i = 0; i < 3; ++i) {
        IVec ei(3, Int(0));
        ei[static_cast<size_t>(i)] = 1;
        id.push_back(ei);
    }
    return {make_sublattice(id)};
}

/// Shared per-count state for the slice solubility prefilter.
struct SliceFilter {
    bool active = false;
    Int delta;                        // integral discriminant of Q
    std::vector<int64_t> bad_primes;  // primes dividing 2*delta (64-bit ones)
    bool bad_primes_complete = false;

    static SliceFilter build(const QuadraticForm& q) {
        SliceFilter f;
        if (!q.classical()) return f;
        f.delta = q.disc_int();
        try {
            for (auto& [p, e] : factorize(2 * f.delta)) {
                (void)e;
                if (!fits_i64(p)) return f;
                f.bad_primes.push_back(to_i64(p));
            }
            f.bad_primes_complete = true;
            f.active = true;
        } catch (const TooLarge&) {
        }
        return f;
    }

    bool is_bad(int64_t p) const {
        for (int64_t bp : bad_primes)
            if (bp == p) return true;
        return false;
    }

    /// True when the slice provably has no primitive zeros: some odd prime
    /// away from 2*delta divides Q*(c) to an odd power with (delta|p) = -1,
    /// which forces the local factor of C(Q_c) to vanish.
    bool slice_insoluble(int64_t qc, std::map<int64_t, int>& chi_cache) const {
        if (!active) return false;
        uint64_t n = static_cast<uint64_t>(std::abs(qc));
        std::map<uint64_t, unsigned> fac;
        factor_u64(n, fac);
        for (auto& [p, e] : fac) {
            if (e % 2 == 0) continue;
            int64_t ps = static_cast<int64_t>(p);
            if (ps == 2 || is_bad(ps)) continue;
            auto it = chi_cache.find(ps);
            int ch;
            if (it != chi_cache.end()) {
                ch = it->second;
            } else {
                ch = chi(delta, Int(ps));
                chi_cache.emplace(ps, ch);
            }
            if (ch == -1) return true;
        }
        return false;
    }
};

/// Enumerates quadric points on one rank-3 lattice within |x|_inf <= b and
/// inserts the primitive ones.
inline void enumerate_lattice_points(const QuadraticForm& q, const SublatticeBasis& lat, int64_t b,
                                     uint64_t budget, PointSet& ps) {
    static const DMat eye = identity_metric(4);
    double radius = 2.0 * static_cast<double>(b) + 0.5;
    auto [basis_f, bounds] = box_adapted_basis(lat, eye, radius);
    Mat g2f = restricted_gram2(q, basis_f.vectors);
    auto g2f64 = gram2_to_i64(g2f);
    std::array<V4, 3> fv{};
    for (int j = 0; j < 3; ++j) fv[static_cast<size_t>(j)] = ivec_to_v4(basis_f.vectors[static_cast<size_t>(j)]);
    enumerate_gram_zeros(g2f64, bounds, budget, [&](const V3& lv) {
        V4 x{};
        for (int i = 0; i < 4; ++i)
            x[static_cast<size_t>(i)] = lv[0] * fv[0][static_cast<size_t>(i)] + lv[1] * fv[1][static_cast<size_t>(i)] + lv[2] * fv[2][static_cast<size_t>(i)];
        int64_t sup = sup_i64(x);
        if (sup == 0 || sup > b) return;
        if (gcd4(x[0], x[1], x[2], x[3]) != 1) return;
        ps.insert(canonical_pm(x));
    });
}

/// Box cells needed for the two tightest directions of a bound triple.
inline double two_smallest_cells(const BoxBounds& bounds) {
    double l[3] = {std::floor(bounds.L1), std::floor(bounds.L2), std::floor(bounds.L3)};
    std::sort(l, l + 3);
    return (2 * l[0] + 1) * (2 * l[1] + 1);
}

/// One nonsingular slice: either enumerate the slice lattice directly (small
/// boxes) or cover the conic zeros by the analytic lattices first.
inline void handle_nonsingular_slice(const QuadraticForm& q, const IVec& c, int64_t b,
                                     uint64_t budget, PointSet& ps) {
    SublatticeBasis lam = reduce_greedy(kernel_lattice(c));
    Mat g2c = restricted_gram2(q, lam.vectors);
    if (is_definite3(g2c)) return;  // no real zeros on this slice
    static const DMat eye = identity_metric(4);
    double radius = 2.0 * static_cast<double>(b) + 0.5;
    auto [basis_f, bounds] = box_adapted_basis(lam, eye, radius);
    // Direct enumeration is cheaper than cover construction up to a few
    // thousand cells.
    if (two_smallest_cells(bounds) <= 3000.0) {
        enumerate_lattice_points(q, basis_f, b, budget, ps);
        return;
    }
    QuadraticForm qc = QuadraticForm::from_gram2(3, g2c);
    std::vector<SublatticeBasis> cover;
    if (qc.classical()) {
        try {
            cover = lattice_cover(qc, budget, CoverPolicy::analytic_primes_only);
        } catch (const TooLarge&) {
            cover = trivial_cover3();  // sound fallback: enumerate the slice directly
        }
    } else {
        cover = trivial_cover3();
    }
    if (cover.empty()) return;
    for (auto& lamc : cover) enumerate_lattice_points(q, hat_lattice(lamc, lam), b, budget, ps);
}

}  // namespace detail

/// Smallest slicing radius H whose pigeonhole certificate (H+1)^4 > 8HB + 1
/// holds: every x with |x| <= B then has a nonzero witness c, |c| <= H,
/// c.x = 0, so slicing up to H misses no point. This is smaller than the
/// recorded empirical Siegel radius 4(1+B)^(1/3), which over-covers.
inline int64_t slicing_radius(int64_t b) {
    int64_t h = 1;
    auto ok = [&](int64_t hh) {
        __int128 lhs = static_cast<__int128>(hh + 1) * (hh + 1) * (hh + 1) * (hh + 1);
        __int128 rhs = static_cast<__int128>(8) * hh * b + 1;
        return lhs > rhs;
    };
    while (!ok(h)) ++h;
    return h;
}

/// Exact N(B) by plane slicing: enumerate primitive slice vectors up to the
/// slicing radius, solve the restricted conic on each slice, and de-duplicate
/// points globally. Agrees exactly with brute_force_count.
inline CountReport sliced_count(const QuadraticForm& q, int64_t b,
                                uint64_t budget = kDefaultBudget, int workers = 1) {
    if (q.n() != 4) throw BadDimension("sliced_count needs a quaternary form");
    if (b < 1) throw InvalidInput("sliced_count needs B >= 1");
    // Above ||Q|| ~ B^20 the slicing estimate is out of its regime (points
    // concentrate on a second quadric); we refuse rather than mis-handle it.
    if (q.height() > ipow(Int(b), 20))
        throw TooLarge("form height exceeds B^20; the slicing method does not cover this regime");
    auto t0 = std::chrono::steady_clock::now();
    int64_t r = slicing_radius(b);
    // Runtime soundness certificate for the slice enumeration.
    {
        __int128 lhs = static_cast<__int128>(r + 1) * (r + 1) * (r + 1) * (r + 1);
        __int128 rhs = static_cast<__int128>(8) * r * b + 1;
        if (lhs <= rhs) throw InvariantViolation("slicing radius below the pigeonhole bound");
    }
    DualForm dual(q);
    bool fast_dual = dual.integral();
    detail::DualGrid64 grid{};
    if (fast_dual) {
        IVec zero(4, Int(0));
        try {
            grid = detail::DualGrid64::build(dual, zero, r);
            if (grid.max_abs > (static_cast<__int128>(1) << 62)) fast_dual = false;
        } catch (const TooLarge&) {
            fast_dual = false;
        }
    }

    detail::SliceFilter filter = detail::SliceFilter::build(q);

    struct Part {
        detail::PointSet ps;
        uint64_t slices = 0, singular = 0;
        explicit Part(int64_t bb) : ps(bb) {}
    };
    auto body = [&](int64_t lo, int64_t hi) -> Part {
        Part local(b);
        std::map<int64_t, int> chi_cache;
        for (int64_t c1 = lo; c1 < hi; ++c1)
            for (int64_t c2 = -r; c2 <= r; ++c2)
                for (int64_t c3 = -r; c3 <= r; ++c3)
                    for (int64_t c4 = -r; c4 <= r; ++c4) {
                        // canonical: first nonzero coordinate positive
                        if (c1 == 0) {
                            if (c2 < 0 || (c2 == 0 && (c3 < 0 || (c3 == 0 && c4 <= 0)))) continue;
                        }
                        if (detail::gcd4(c1, c2, c3, c4) != 1) continue;
                        ++local.slices;
                        IVec c{Int(static_cast<long>(c1)), Int(static_cast<long>(c2)), Int(static_cast<long>(c3)), Int(static_cast<long>(c4))};
                        if (fast_dual) {
                            int64_t qc = grid.eval(c1, c2, c3, c4);
                            if (qc == 0) {
                                ++local.singular;
                                detail::handle_singular_slice(q, c, b, local.ps);
                            } else {
                                if (filter.slice_insoluble(qc, chi_cache)) continue;
                                detail::handle_nonsingular_slice(q, c, b, budget, local.ps);
                            }
                        } else {
                            if (dual.eval(c) == 0) {
                                ++local.singular;
                                detail::handle_singular_slice(q, c, b, local.ps);
                            } else {
                                detail::handle_nonsingular_slice(q, c, b, budget, local.ps);
                            }
                        }
                    }
        return local;
    };
    Part total = parallel_chunks<Part>(0, r + 1, workers, Part(b), body, [](Part acc, Part part) {
        acc.ps.merge(std::move(part.ps));
        acc.slices += part.slices;
        acc.singular += part.singular;
        return acc;
    });

    CountReport rep;
    rep.b = b;
    rep.count = Int(2) * Int(static_cast<unsigned long>(total.ps.size()));
    rep.method = "sliced";
    rep.slices_visited = total.slices;
    rep.singular_slices = total.singular;
    rep.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// ---------------------------------------------------------------------------
// Rational lines (square discriminant)

struct RationalLine {
    IVec g1, g2;   // basis of the line's rank-2 integer lattice in Z^4
    IVec plucker;  // primitive Plucker vector (p12,p13,p14,p23,p24,p34), sign-canonical
    Int det_sq;    // squared lattice determinant; equals |plucker|_2^2
};

namespace detail {

inline IVec plucker_of(const IVec& a, const IVec& b) {
    IVec p(6);
    int idx = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j, ++idx) p[static_cast<size_t>(idx)] = a[static_cast<size_t>(i)] * b[static_cast<size_t>(j)] - a[static_cast<size_t>(j)] * b[static_cast<size_t>(i)];
    return p;
}

}  // namespace detail

inline bool rat_is_square(const Rat& r) {
    if (r <= 0) return false;
    return is_square(Int(r.get_num())) && is_square(Int(r.get_den()));
}

/// All rational lines on Q = 0 with lattice determinant d(L) <= H, found via
/// singular slices; empty unless the discriminant is a nonzero square. The
/// scan radius comes from Minkowski's bound for the rank-2 lattice of planes
/// through each line.
inline std::vector<RationalLine> lines_up_to_height(const QuadraticForm& q, int64_t h) {
    if (q.n() != 4) throw BadDimension("lines_up_to_height needs a quaternary form");
    if (h < 1) throw InvalidInput("lines_up_to_height needs H >= 1");
    if (!rat_is_square(q.disc())) return {};
    DualForm dual(q);
    int64_t rad = static_cast<int64_t>(std::floor(1.0746 * std::sqrt(static_cast<double>(h)))) + 1;
    std::map<IVec, RationalLine> found;
    for (int64_t c1 = 0; c1 <= rad; ++c1)
        for (int64_t c2 = -rad; c2 <= rad; ++c2)
            for (int64_t c3 = -rad; c3 <= rad; ++c3)
                for (int64_t c4 = -rad; c4 <= rad; ++c4) {
                    if (c1 == 0 && (c2 < 0 || (c2 == 0 && (c3 < 0 || (c3 == 0 && c4 <= 0))))) continue;
                    if (detail::gcd4(c1, c2, c3, c4) != 1) continue;
                    IVec c{Int(static_cast<long>(c1)), Int(static_cast<long>(c2)), Int(static_cast<long>(c3)), Int(static_cast<long>(c4))};
                    if (dual.eval(c) != 0) continue;
                    SublatticeBasis lam = reduced_basis(kernel_lattice(c));
                    Mat g2c = restricted_gram2(q, lam.vectors);
                    auto st = detail::rank2_structure(g2c);
                    if (!st.split) continue;
                    Mat e = mat_from_columns(lam.vectors);
                    for (const IVec& w : st.line_dirs) {
                        IVec n = primitivize(cross3(st.radical, w));
                        Mat row(1, 3);
                        for (int j = 0; j < 3; ++j) row.at(0, j) = n[static_cast<size_t>(j)];
                        auto uker = kernel_basis(row);
                        IVec h1 = mat_vec(e, uker[0]), h2 = mat_vec(e, uker[1]);
                        detail::reduce_pair(h1, h2);
                        IVec pl = detail::plucker_of(h1, h2);
                        if (content(pl) != 1) throw InvariantViolation("non-primitive Plucker vector on a saturated lattice");
                        pl = detail::canonical_pm_int(pl);
                        Int dsq = dot(h1, h1) * dot(h2, h2) - dot(h1, h2) * dot(h1, h2);
                        if (dsq != dot(pl, pl)) throw InvariantViolation("Plucker norm mismatch");
                        if (dsq > Int(h) * Int(h)) continue;
                        // exact vanishing of Q on the line
                        IVec bil = mat_vec(q.gram2(), h2);
                        if (q.eval(h1) != 0 || q.eval(h2) != 0 || dot(h1, bil) != 0)
                            throw InvariantViolation("line not contained in the quadric");
                        if (!found.count(pl)) found.emplace(pl, RationalLine{h1, h2, pl, dsq});
                    }
                }
    std::vector<RationalLine> out;
    for (auto& [pl, line] : found) out.push_back(line);
    std::sort(out.begin(), out.end(), [](const RationalLine& x, const RationalLine& y) {
        if (x.det_sq != y.det_sq) return x.det_sq < y.det_sq;
        return x.plucker < y.plucker;
    });
    return out;
}

/// Exact count of primitive integer points of sup-norm <= B on the line's
/// lattice (vectors, so x and -x count separately).
inline Int line_point_count(const RationalLine& l, int64_t b) {
    if (b < 0) throw InvalidInput("line_point_count needs B >= 0");
    if (b == 0) return 0;
    int64_t cnt = 0;
    detail::enumerate_rank2_points(l.g1, l.g2, b, [&](const IVec& x) {
        if (content(x) == 1) ++cnt;
    });
    return Int(static_cast<long>(cnt));
}

}  // namespace quadrics
