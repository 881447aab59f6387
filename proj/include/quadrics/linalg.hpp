#pragma once

// Small exact linear algebra over arbitrary-precision integers: dense
// matrices up to dimension ~6, Bareiss determinants, adjugates, column
// Hermite normal form, integer kernels, and lattices cut out by linear
// congruences. Everything is exact; nothing here touches floating point.

#include <cassert>
#include <vector>

#include "quadrics/intmath.hpp"

namespace quadrics {

using IVec = std::vector<Int>;

inline Int dot(const IVec& a, const IVec& b) {
    assert(a.size() == b.size());
    Int s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline IVec vec_sub_scaled(const IVec& a, const Int& t, const IVec& b) {
    IVec r = a;
    for (size_t i = 0; i < r.size(); ++i) r[i] -= t * b[i];
    return r;
}

inline Int content(const IVec& v) {
    Int g = 0;
    for (const Int& x : v) g = igcd(g, x);
    return g;
}

inline bool is_zero_vec(const IVec& v) {
    for (const Int& x : v)
        if (x != 0) return false;
    return true;
}

/// Divides out the content; zero vectors are rejected.
inline IVec primitivize(const IVec& v) {
    Int g = content(v);
    if (g == 0) throw InvalidInput("primitivize: zero vector");
    IVec r = v;
    for (Int& x : r) x /= g;
    return r;
}

inline IVec cross3(const IVec& a, const IVec& b) {
    assert(a.size() == 3 && b.size() == 3);
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

struct Mat {
    int rows = 0, cols = 0;
    std::vector<Int> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, Int(0)) {}

    Int& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    const Int& at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1;
        return m;
    }

    IVec column(int j) const {
        IVec v(static_cast<size_t>(rows));
        for (int i = 0; i < rows; ++i) v[static_cast<size_t>(i)] = at(i, j);
        return v;
    }

    bool operator==(const Mat& o) const { return rows == o.rows && cols == o.cols && a == o.a; }
};

inline Mat mat_from_columns(const std::vector<IVec>& cols) {
    if (cols.empty()) return Mat();
    Mat m(static_cast<int>(cols[0].size()), static_cast<int>(cols.size()));
    for (int j = 0; j < m.cols; ++j)
        for (int i = 0; i < m.rows; ++i) m.at(i, j) = cols[static_cast<size_t>(j)][static_cast<size_t>(i)];
    return m;
}

inline std::vector<IVec> columns_of(const Mat& m) {
    std::vector<IVec> out;
    for (int j = 0; j < m.cols; ++j) out.push_back(m.column(j));
    return out;
}

inline Mat transpose(const Mat& m) {
    Mat t(m.cols, m.rows);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) t.at(j, i) = m.at(i, j);
    return t;
}

inline Mat mat_mul(const Mat& x, const Mat& y) {
    assert(x.cols == y.rows);
    Mat r(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k) {
            const Int& v = x.at(i, k);
            if (v == 0) continue;
            for (int j = 0; j < y.cols; ++j) r.at(i, j) += v * y.at(k, j);
        }
    return r;
}

inline IVec mat_vec(const Mat& m, const IVec& v) {
    assert(static_cast<size_t>(m.cols) == v.size());
    IVec r(static_cast<size_t>(m.rows), Int(0));
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) r[static_cast<size_t>(i)] += m.at(i, j) * v[static_cast<size_t>(j)];
    return r;
}

/// Gram matrix G^T G of the columns of G.
inline Mat gram_of_columns(const Mat& g) {
    Mat r(g.cols, g.cols);
    for (int i = 0; i < g.cols; ++i)
        for (int j = i; j < g.cols; ++j) {
            Int s = 0;
            for (int k = 0; k < g.rows; ++k) s += g.at(k, i) * g.at(k, j);
            r.at(i, j) = s;
            r.at(j, i) = s;
        }
    return r;
}

/// Exact determinant (Bareiss fraction-free elimination).
inline Int det(const Mat& m_in) {
    assert(m_in.rows == m_in.cols);
    int n = m_in.rows;
    if (n == 0) return 1;
    Mat m = m_in;
    Int sign = 1, prev = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (m.at(k, k) == 0) {
            int swap_row = -1;
            for (int i = k + 1; i < n; ++i)
                if (m.at(i, k) != 0) { swap_row = i; break; }
            if (swap_row < 0) return 0;
            for (int j = 0; j < n; ++j) std::swap(m.at(k, j), m.at(swap_row, j));
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j) {
                Int num = m.at(i, j) * m.at(k, k) - m.at(i, k) * m.at(k, j);
                mpz_divexact(m.at(i, j).get_mpz_t(), num.get_mpz_t(), prev.get_mpz_t());
            }
        prev = m.at(k, k);
    }
    return sign * m.at(n - 1, n - 1);
}

namespace detail {
inline Int minor_det(const Mat& m, int di, int dj) {
    Mat s(m.rows - 1, m.cols - 1);
    for (int i = 0, si = 0; i < m.rows; ++i) {
        if (i == di) continue;
        for (int j = 0, sj = 0; j < m.cols; ++j) {
            if (j == dj) continue;
            s.at(si, sj) = m.at(i, j);
            ++sj;
        }
        ++si;
    }
    return det(s);
}
}  // namespace detail

/// Adjugate: adj(M) * M = det(M) * I.
inline Mat adjugate(const Mat& m) {
    assert(m.rows == m.cols);
    int n = m.rows;
    Mat r(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Int c = detail::minor_det(m, j, i);
            r.at(i, j) = ((i + j) % 2 == 0) ? c : -c;
        }
    return r;
}

// ---------------------------------------------------------------------------
// Column Hermite normal form.
//
// Input columns generate a sublattice of Z^k. The result's columns are a
// canonical basis: pivots march down the rows, each pivot is positive, and
// entries to the left of a pivot in its row are reduced into [0, pivot).

inline Mat hnf_columns(std::vector<IVec> cols) {
    if (cols.empty()) return Mat();
    int k = static_cast<int>(cols[0].size());
    // drop zero columns up front
    std::vector<IVec> work;
    for (auto& c : cols)
        if (!is_zero_vec(c)) work.push_back(c);
    int pivot = 0;
    for (int r = 0; r < k && pivot < static_cast<int>(work.size()); ++r) {
        int nz = -1;
        for (int j = pivot; j < static_cast<int>(work.size()); ++j)
            if (work[static_cast<size_t>(j)][static_cast<size_t>(r)] != 0) { nz = j; break; }
        if (nz < 0) continue;
        std::swap(work[static_cast<size_t>(pivot)], work[static_cast<size_t>(nz)]);
        for (int j = pivot + 1; j < static_cast<int>(work.size()); ++j) {
            while (work[static_cast<size_t>(j)][static_cast<size_t>(r)] != 0) {
                Int q = work[static_cast<size_t>(j)][static_cast<size_t>(r)] / work[static_cast<size_t>(pivot)][static_cast<size_t>(r)];
                work[static_cast<size_t>(j)] = vec_sub_scaled(work[static_cast<size_t>(j)], q, work[static_cast<size_t>(pivot)]);
                if (work[static_cast<size_t>(j)][static_cast<size_t>(r)] != 0)
                    std::swap(work[static_cast<size_t>(pivot)], work[static_cast<size_t>(j)]);
            }
        }
        if (work[static_cast<size_t>(pivot)][static_cast<size_t>(r)] < 0)
            for (Int& x : work[static_cast<size_t>(pivot)]) x = -x;
        const Int& d = work[static_cast<size_t>(pivot)][static_cast<size_t>(r)];
        for (int t = 0; t < pivot; ++t) {
            Int q;
            mpz_fdiv_q(q.get_mpz_t(), work[static_cast<size_t>(t)][static_cast<size_t>(r)].get_mpz_t(), d.get_mpz_t());
            if (q != 0) work[static_cast<size_t>(t)] = vec_sub_scaled(work[static_cast<size_t>(t)], q, work[static_cast<size_t>(pivot)]);
        }
        ++pivot;
    }
    for (int j = pivot; j < static_cast<int>(work.size()); ++j)
        assert(is_zero_vec(work[static_cast<size_t>(j)]));
    work.resize(static_cast<size_t>(pivot));
    return mat_from_columns(work);
}

/// Basis of {x in Z^m : A x = 0}; the returned lattice is saturated.
inline std::vector<IVec> kernel_basis(const Mat& a_in) {
    int t = a_in.rows, m = a_in.cols;
    Mat a = a_in;
    Mat u = Mat::identity(m);
    auto col_sub = [&](Mat& mm, int j, const Int& q, int piv) {
        for (int i = 0; i < mm.rows; ++i) mm.at(i, j) -= q * mm.at(i, piv);
    };
    auto col_swap = [&](Mat& mm, int j1, int j2) {
        for (int i = 0; i < mm.rows; ++i) std::swap(mm.at(i, j1), mm.at(i, j2));
    };
    int pivot = 0;
    for (int r = 0; r < t && pivot < m; ++r) {
        int nz = -1;
        for (int j = pivot; j < m; ++j)
            if (a.at(r, j) != 0) { nz = j; break; }
        if (nz < 0) continue;
        if (nz != pivot) { col_swap(a, pivot, nz); col_swap(u, pivot, nz); }
        for (int j = pivot + 1; j < m; ++j) {
            while (a.at(r, j) != 0) {
                Int q = a.at(r, j) / a.at(r, pivot);
                col_sub(a, j, q, pivot);
                col_sub(u, j, q, pivot);
                if (a.at(r, j) != 0) { col_swap(a, pivot, j); col_swap(u, pivot, j); }
            }
        }
        ++pivot;
    }
    std::vector<IVec> out;
    for (int j = pivot; j < m; ++j) out.push_back(u.column(j));
    return out;
}

/// Lattice {y in Z^k : row_i . y == 0 mod mod_i for all i}, as a column-HNF
/// basis. Moduli must be positive.
inline Mat congruence_lattice(int k, const std::vector<std::pair<IVec, Int>>& conditions) {
    if (conditions.empty()) return Mat::identity(k);
    int t = static_cast<int>(conditions.size());
    Mat sys(t, k + t);
    for (int i = 0; i < t; ++i) {
        assert(static_cast<int>(conditions[static_cast<size_t>(i)].first.size()) == k);
        assert(conditions[static_cast<size_t>(i)].second > 0);
        for (int j = 0; j < k; ++j) sys.at(i, j) = conditions[static_cast<size_t>(i)].first[static_cast<size_t>(j)];
        sys.at(i, k + i) = -conditions[static_cast<size_t>(i)].second;
    }
    auto ker = kernel_basis(sys);
    std::vector<IVec> gens;
    for (auto& v : ker) gens.emplace_back(v.begin(), v.begin() + k);
    Mat h = hnf_columns(gens);
    assert(h.cols == k);
    return h;
}

/// Intersection of two full-rank lattices in Z^k given by basis columns.
inline Mat lattice_intersect(const Mat& b1, const Mat& b2) {
    assert(b1.rows == b2.rows && b1.cols == b1.rows && b2.cols == b2.rows);
    int k = b1.rows;
    Mat sys(k, 2 * k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            sys.at(i, j) = b1.at(i, j);
            sys.at(i, k + j) = -b2.at(i, j);
        }
    auto ker = kernel_basis(sys);
    std::vector<IVec> gens;
    for (auto& v : ker) {
        IVec u(v.begin(), v.begin() + k);
        gens.push_back(mat_vec(b1, u));
    }
    Mat h = hnf_columns(gens);
    assert(h.cols == k);
    return h;
}

/// Does the column-HNF basis H contain y? (H as produced by hnf_columns,
/// full rank.)
inline bool lattice_contains(const Mat& h, const IVec& y) {
    assert(h.rows == h.cols);
    int k = h.rows;
    IVec rem = y;
    for (int r = 0, j = 0; r < k; ++r, ++j) {
        const Int& piv = h.at(r, j);
        if (rem[static_cast<size_t>(r)] % piv != 0) return false;
        Int c = rem[static_cast<size_t>(r)] / piv;
        if (c != 0)
            for (int i = r; i < k; ++i) rem[static_cast<size_t>(i)] -= c * h.at(i, j);
    }
    return is_zero_vec(rem);
}

/// |det| of a full-rank column basis of Z^k.
inline Int lattice_det_abs(const Mat& b) { return abs(det(b)); }

}  // namespace quadrics
