#pragma once

// Integer sublattices of Z^4 (and of Z^3 for conic covers): kernel lattices
// of slicing vectors, exact basis reduction with coefficient-extraction
// bounds, and box-adapted bases for enumerating lattice points inside
// ellipsoids. Determinants are kept squared so everything stays integral.

#include <algorithm>
#include <array>
#include <cmath>

#include "quadrics/linalg.hpp"

namespace quadrics {

struct SublatticeBasis {
    std::vector<IVec> vectors;  // k linearly independent vectors of equal dimension
    Int det_sq;                 // det of the Gram matrix; > 0

    int rank() const { return static_cast<int>(vectors.size()); }
    int dim() const { return vectors.empty() ? 0 : static_cast<int>(vectors[0].size()); }
};

inline Int gram_det_sq(const std::vector<IVec>& vecs) {
    Mat g = mat_from_columns(vecs);
    return det(gram_of_columns(g));
}

inline SublatticeBasis make_sublattice(std::vector<IVec> vecs) {
    if (vecs.empty() || vecs.size() > 4) throw InvalidInput("sublattice rank out of range");
    size_t d = vecs[0].size();
    for (auto& v : vecs)
        if (v.size() != d) throw InvalidInput("sublattice vectors of mixed dimension");
    Int dsq = gram_det_sq(vecs);
    if (dsq <= 0) throw InvalidInput("sublattice vectors are linearly dependent");
    return SublatticeBasis{std::move(vecs), dsq};
}

struct BoxBounds {
    double L1, L2, L3;
    double at(int j) const { return j == 0 ? L1 : (j == 1 ? L2 : L3); }
};

/// Basis of {x in Z^4 : c.x = 0} for primitive nonzero c. The lattice is
/// saturated and its Gram determinant equals c1^2+...+c4^2 exactly.
inline SublatticeBasis kernel_lattice(const IVec& c) {
    if (c.size() != 4) throw BadDimension("kernel_lattice expects a 4-vector");
    if (is_zero_vec(c)) throw NotPrimitive("kernel_lattice: zero vector");
    if (content(c) != 1) throw NotPrimitive("kernel_lattice: gcd(c) != 1");
    Mat row(1, 4);
    for (int j = 0; j < 4; ++j) row.at(0, j) = c[static_cast<size_t>(j)];
    auto basis = kernel_basis(row);
    if (basis.size() != 3) throw InvariantViolation("kernel_lattice: unexpected rank");
    auto out = make_sublattice(std::move(basis));
    Int norm_sq = dot(c, c);
    if (out.det_sq != norm_sq)
        throw InvariantViolation("kernel_lattice: det^2 != |c|_2^2");
    return out;
}

namespace detail {

// One pass of exact pairwise size reduction; returns true if some vector
// strictly shrank.
inline bool size_reduce_pass(std::vector<IVec>& g) {
    bool changed = false;
    for (size_t i = 0; i < g.size(); ++i) {
        for (size_t j = 0; j < g.size(); ++j) {
            if (i == j) continue;
            Int gj2 = dot(g[j], g[j]);
            if (gj2 == 0) continue;
            Int t = round_div(dot(g[i], g[j]), gj2);
            if (t == 0) continue;
            IVec cand = vec_sub_scaled(g[i], t, g[j]);
            if (dot(cand, cand) < dot(g[i], g[i])) {
                g[i] = std::move(cand);
                changed = true;
            }
        }
    }
    return changed;
}

inline void sort_by_norm(std::vector<IVec>& g) {
    std::stable_sort(g.begin(), g.end(), [](const IVec& a, const IVec& b) {
        Int na = dot(a, a), nb = dot(b, b);
        if (na != nb) return na < nb;
        return a < b;
    });
}

}  // namespace detail

/// Greedy pairwise size reduction only; cheap enough for per-slice use.
inline SublatticeBasis reduce_greedy(const SublatticeBasis& lat) {
    std::vector<IVec> g = lat.vectors;
    while (detail::size_reduce_pass(g)) {}
    detail::sort_by_norm(g);
    auto out = make_sublattice(std::move(g));
    if (out.det_sq != lat.det_sq) throw InvariantViolation("reduce_greedy changed the lattice");
    return out;
}

/// Exact reduction of a rank-3 basis: greedy size reduction plus a small
/// exhaustive polish over coefficient combinations. The output spans the
/// same lattice and satisfies the Cassels-style coefficient bounds checked
/// in the test suite.
inline SublatticeBasis reduced_basis(const SublatticeBasis& lat) {
    if (lat.rank() != 3) throw BadDimension("reduced_basis expects rank 3");
    std::vector<IVec> g = lat.vectors;
    while (detail::size_reduce_pass(g)) {}
    detail::sort_by_norm(g);
    // Polish: look for short combinations that can replace a longer basis
    // vector (coefficient +-1 at the replaced position keeps a basis).
    bool improved = true;
    while (improved) {
        improved = false;
        for (int a = -2; a <= 2 && !improved; ++a)
            for (int b = -2; b <= 2 && !improved; ++b)
                for (int c = -2; c <= 2 && !improved; ++c) {
                    if (a == 0 && b == 0 && c == 0) continue;
                    IVec v(g[0].size(), Int(0));
                    for (size_t t = 0; t < v.size(); ++t)
                        v[t] = Int(a) * g[0][t] + Int(b) * g[1][t] + Int(c) * g[2][t];
                    Int nv = dot(v, v);
                    int coef[3] = {a, b, c};
                    for (int rep = 2; rep >= 0; --rep) {
                        if (coef[rep] != 1 && coef[rep] != -1) continue;
                        if (nv < dot(g[static_cast<size_t>(rep)], g[static_cast<size_t>(rep)])) {
                            g[static_cast<size_t>(rep)] = v;
                            while (detail::size_reduce_pass(g)) {}
                            detail::sort_by_norm(g);
                            improved = true;
                            break;
                        }
                    }
                }
    }
    auto out = make_sublattice(std::move(g));
    if (out.det_sq != lat.det_sq) throw InvariantViolation("reduced_basis changed the lattice");
    return out;
}

using DMat = std::vector<std::vector<double>>;

inline DMat identity_metric(int n) {
    DMat e(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(n), 0.0));
    for (int i = 0; i < n; ++i) e[static_cast<size_t>(i)][static_cast<size_t>(i)] = 1.0;
    return e;
}

namespace detail {

inline double metric_dot(const DMat& e, const IVec& a, const IVec& b) {
    size_t n = a.size();
    double s = 0;
    for (size_t i = 0; i < n; ++i) {
        double ai = to_double(a[i]);
        if (ai == 0) continue;
        for (size_t j = 0; j < n; ++j) s += ai * e[i][j] * to_double(b[j]);
    }
    return s;
}

inline double det3(const std::array<std::array<double, 3>, 3>& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

}  // namespace detail

/// Measure of {x in span(basis) : x^T E x <= r^2}.
inline double ellipsoid_measure_in_span(const SublatticeBasis& lat, const DMat& e, double r) {
    std::array<std::array<double, 3>, 3> ge{}, gr{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            ge[i][j] = detail::metric_dot(e, lat.vectors[static_cast<size_t>(i)], lat.vectors[static_cast<size_t>(j)]);
            gr[i][j] = to_double(dot(lat.vectors[static_cast<size_t>(i)], lat.vectors[static_cast<size_t>(j)]));
        }
    double de = detail::det3(ge), dg = detail::det3(gr);
    if (de <= 0) throw DegenerateEllipsoid("ellipsoid not positive definite on span");
    return (4.0 * M_PI / 3.0) * r * r * r * std::sqrt(dg / de);
}

/// Reduces the basis with respect to the metric E and returns coefficient
/// bounds L_j such that every lattice point x with x^T E x <= r^2 has
/// |lambda_j| <= L_j when expanded in the returned basis; the containment is
/// rigorous (Cramer's rule plus Cauchy-Schwarz in the E-inner product, with
/// a small inflation for rounding).
inline std::pair<SublatticeBasis, BoxBounds> box_adapted_basis(const SublatticeBasis& lat,
                                                               const DMat& e, double r) {
    if (lat.rank() != 3) throw BadDimension("box_adapted_basis expects rank 3");
    if (r <= 0) throw InvalidInput("box_adapted_basis: radius must be positive");
    std::vector<IVec> g = lat.vectors;
    // Exact Euclidean pre-reduction: keeps the float Gram well conditioned
    // even for very skew input bases.
    while (detail::size_reduce_pass(g)) {}
    detail::sort_by_norm(g);

    auto e_gram = [&](const std::vector<IVec>& v) {
        std::array<std::array<double, 3>, 3> ge{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) ge[i][j] = detail::metric_dot(e, v[static_cast<size_t>(i)], v[static_cast<size_t>(j)]);
        return ge;
    };

    auto ge = e_gram(g);
    // positive definiteness on the span (leading principal minors)
    if (!(ge[0][0] > 0) || !(ge[0][0] * ge[1][1] - ge[0][1] * ge[1][0] > 0) || !(detail::det3(ge) > 0))
        throw DegenerateEllipsoid("metric not positive definite on lattice span");

    // metric-guided integer size reduction
    for (int pass = 0; pass < 32; ++pass) {
        bool changed = false;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                if (i == j) continue;
                double mu = ge[i][j] / ge[j][j];
                long t = std::lround(mu);
                if (t == 0) continue;
                IVec cand = vec_sub_scaled(g[static_cast<size_t>(i)], Int(t), g[static_cast<size_t>(j)]);
                double nn = detail::metric_dot(e, cand, cand);
                if (nn < ge[i][i] * (1 - 1e-12)) {
                    g[static_cast<size_t>(i)] = std::move(cand);
                    ge = e_gram(g);
                    changed = true;
                }
            }
        if (!changed) break;
    }
    std::stable_sort(g.begin(), g.end(), [&](const IVec& a, const IVec& b) {
        return detail::metric_dot(e, a, a) < detail::metric_dot(e, b, b);
    });
    ge = e_gram(g);

    // Cramer bounds: lambda = Ge^{-1} d with |d_i| <= sqrt(Ge_ii) * r.
    double dge = detail::det3(ge);
    std::array<std::array<double, 3>, 3> inv{};
    inv[0][0] = (ge[1][1] * ge[2][2] - ge[1][2] * ge[2][1]) / dge;
    inv[0][1] = -(ge[0][1] * ge[2][2] - ge[0][2] * ge[2][1]) / dge;
    inv[0][2] = (ge[0][1] * ge[1][2] - ge[0][2] * ge[1][1]) / dge;
    inv[1][0] = -(ge[1][0] * ge[2][2] - ge[1][2] * ge[2][0]) / dge;
    inv[1][1] = (ge[0][0] * ge[2][2] - ge[0][2] * ge[2][0]) / dge;
    inv[1][2] = -(ge[0][0] * ge[1][2] - ge[0][2] * ge[1][0]) / dge;
    inv[2][0] = (ge[1][0] * ge[2][1] - ge[1][1] * ge[2][0]) / dge;
    inv[2][1] = -(ge[0][0] * ge[2][1] - ge[0][1] * ge[2][0]) / dge;
    inv[2][2] = (ge[0][0] * ge[1][1] - ge[0][1] * ge[1][0]) / dge;

    double l[3];
    for (int j = 0; j < 3; ++j) {
        double s = 0;
        for (int i = 0; i < 3; ++i) s += std::abs(inv[j][i]) * std::sqrt(ge[i][i]);
        l[j] = s * r * (1 + 1e-9) + 1e-12;
    }

    auto out = make_sublattice(std::move(g));
    if (out.det_sq != lat.det_sq) throw InvariantViolation("box_adapted_basis changed the lattice");
    return {std::move(out), BoxBounds{l[0], l[1], l[2]}};
}

/// Pushes a rank-3 coefficient lattice in Z^3 through the column vectors of
/// a slicing basis (three vectors in Z^4). det^2 multiplies exactly by the
/// basis Gram determinant.
inline SublatticeBasis hat_lattice(const SublatticeBasis& coeff, const SublatticeBasis& slice_basis) {
    if (coeff.dim() != 3 || coeff.rank() != 3) throw BadDimension("hat_lattice expects a full lattice in Z^3");
    if (slice_basis.dim() != 4 || slice_basis.rank() != 3) throw BadDimension("hat_lattice expects 3 vectors in Z^4");
    std::vector<IVec> out;
    for (const IVec& y : coeff.vectors) {
        IVec x(4, Int(0));
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 4; ++i)
                x[static_cast<size_t>(i)] += y[static_cast<size_t>(j)] * slice_basis.vectors[static_cast<size_t>(j)][static_cast<size_t>(i)];
        out.push_back(std::move(x));
    }
    auto lat = make_sublattice(std::move(out));
    if (lat.det_sq != coeff.det_sq * slice_basis.det_sq)
        throw InvariantViolation("hat_lattice determinant identity failed");
    return lat;
}

}  // namespace quadrics
