#pragma once

// Exact algebra of integral quadratic forms in 3 or 4 variables: Gram data
// is stored doubled (2M), so all integral polynomial forms round-trip
// exactly; discriminants are exact rationals (integers in the classical
// case). Includes the dual form, restriction to a hyperplane, and the real
// spectral identities of the restriction.

#include <array>
#include <map>

#include "quadrics/lattices.hpp"

namespace quadrics {

class QuadraticForm {
  public:
    /// build_form: coefficients keyed by (i, j) with 1 <= i <= j <= n;
    /// missing entries are zero. Rejects singular forms.
    static QuadraticForm build(int n, const std::map<std::pair<int, int>, Int>& coeffs) {
        if (n != 3 && n != 4) throw BadDimension("quadratic form dimension must be 3 or 4");
        Mat g2(n, n);
        for (auto& [ij, v] : coeffs) {
            auto [i, j] = ij;
            if (i < 1 || j < i || j > n) throw InvalidInput("coefficient index out of range");
            if (i == j)
                g2.at(i - 1, i - 1) = 2 * v;
            else {
                g2.at(i - 1, j - 1) = v;
                g2.at(j - 1, i - 1) = v;
            }
        }
        return from_gram2(n, std::move(g2));
    }

    /// Constructs from a doubled Gram matrix (symmetric, even diagonal).
    static QuadraticForm from_gram2(int n, Mat g2) {
        if (n != 3 && n != 4) throw BadDimension("quadratic form dimension must be 3 or 4");
        if (g2.rows != n || g2.cols != n) throw BadDimension("gram matrix size mismatch");
        for (int i = 0; i < n; ++i) {
            if (g2.at(i, i) % 2 != 0) throw InvalidInput("doubled Gram matrix needs an even diagonal");
            for (int j = i + 1; j < n; ++j)
                if (g2.at(i, j) != g2.at(j, i)) throw InvalidInput("gram matrix not symmetric");
        }
        QuadraticForm f;
        f.n_ = n;
        f.det_gram2_ = det(g2);
        if (f.det_gram2_ == 0) throw SingularForm("form is singular");
        f.disc_ = Rat(f.det_gram2_, ipow(Int(2), static_cast<unsigned long>(n)));
        f.disc_.canonicalize();
        f.height_ = 0;
        f.classical_ = true;
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                Int c = (i == j) ? Int(g2.at(i, i) / 2) : g2.at(i, j);
                if (abs(c) > f.height_) f.height_ = abs(c);
                if (g2.at(i, j) % 2 != 0) f.classical_ = false;
            }
        f.gram2_ = std::move(g2);
        return f;
    }

    int n() const { return n_; }
    const Mat& gram2() const { return gram2_; }

    /// Discriminant det(M); integral exactly when the form is classical.
    const Rat& disc() const { return disc_; }

    /// det(M) as an integer; requires a classical form.
    Int disc_int() const {
        if (!classical_) throw NonClassical("integral discriminant needs a classical form");
        return Int(disc_.get_num());
    }

    const Int& height() const { return height_; }
    bool classical() const { return classical_; }

    /// Polynomial coefficient of x_i x_j (1-based, i <= j).
    Int coeff(int i, int j) const {
        if (i == j) return Int(gram2_.at(i - 1, i - 1) / 2);
        return gram2_.at(i - 1, j - 1);
    }

    /// Exact Q(x) for an integer vector.
    Int eval(const IVec& x) const {
        Int s = 0;
        for (int i = 0; i < n_; ++i) {
            if (x[static_cast<size_t>(i)] == 0) continue;
            for (int j = 0; j < n_; ++j) s += x[static_cast<size_t>(i)] * gram2_.at(i, j) * x[static_cast<size_t>(j)];
        }
        return s / 2;
    }

  private:
    QuadraticForm() = default;
    int n_ = 0;
    Mat gram2_;
    Int det_gram2_;
    Rat disc_;
    Int height_;
    bool classical_ = false;
};

/// The dual form Q* with matrix M^adj = disc * M^{-1} (the adjugate of M).
/// Stored as adj(2M) over 2^{n-1}; integral for classical quaternary forms.
class DualForm {
  public:
    explicit DualForm(const QuadraticForm& q)
        : n_(q.n()), adj_gram2_(adjugate(q.gram2())), den_(ipow(Int(2), static_cast<unsigned long>(q.n() - 1))),
          disc_(q.disc()) {
        integral_ = true;
        for (int i = 0; i < n_ && integral_; ++i)
            for (int j = 0; j < n_; ++j)
                if (adj_gram2_.at(i, j) % den_ != 0) { integral_ = false; break; }
    }

    int n() const { return n_; }
    bool integral() const { return integral_; }
    const Rat& primal_disc() const { return disc_; }

    /// Exact rational Q*(c).
    Rat eval(const IVec& c) const {
        Int s = 0;
        for (int i = 0; i < n_; ++i) {
            if (c[static_cast<size_t>(i)] == 0) continue;
            for (int j = 0; j < n_; ++j) s += c[static_cast<size_t>(i)] * adj_gram2_.at(i, j) * c[static_cast<size_t>(j)];
        }
        Rat r(s, den_);
        r.canonicalize();
        return r;
    }

    /// Q*(c) as an integer; requires an integral dual (classical primal).
    Int eval_int(const IVec& c) const {
        Rat r = eval(c);
        if (r.get_den() != 1) throw NonClassical("dual form value is not integral");
        return Int(r.get_num());
    }

    /// Integer matrix of Q* (classical primal only).
    Mat matrix_int() const {
        if (!integral_) throw NonClassical("dual matrix is not integral");
        Mat m(n_, n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) m.at(i, j) = adj_gram2_.at(i, j) / den_;
        return m;
    }

    /// det(M^adj) = disc^(n-1), exact.
    Rat det_dual() const {
        Int d = det(adj_gram2_);
        Rat r(d, ipow(den_, static_cast<unsigned long>(n_)));
        r.canonicalize();
        return r;
    }

    /// Entries of M^adj as exact rationals.
    Rat entry(int i, int j) const {
        Rat r(adj_gram2_.at(i, j), den_);
        r.canonicalize();
        return r;
    }

  private:
    int n_;
    Mat adj_gram2_;
    Int den_;
    Rat disc_;
    bool integral_;
};

inline DualForm dual_form(const QuadraticForm& q) { return DualForm(q); }

/// Doubled Gram matrix of Q restricted to the span of three basis vectors.
inline Mat restricted_gram2(const QuadraticForm& q, const std::vector<IVec>& basis) {
    Mat e = mat_from_columns(basis);
    return mat_mul(transpose(e), mat_mul(q.gram2(), e));
}

/// Q restricted to the hyperplane c.x = 0.
struct RestrictedConic {
    QuadraticForm q;          // ternary form Q_c
    SublatticeBasis basis_e;  // basis of the kernel lattice of c
    IVec c;
};

/// Restriction of a quaternary form to the kernel lattice of a primitive
/// vector c; requires Q*(c) != 0 (use restricted_gram2 directly on singular
/// slices). Guarantees det M_{Q_c} = Q*(c) exactly.
inline RestrictedConic restrict_to_hyperplane(const QuadraticForm& q, const IVec& c) {
    if (q.n() != 4) throw BadDimension("restriction needs a quaternary form");
    SublatticeBasis lam = kernel_lattice(c);  // validates primitivity
    lam = reduced_basis(lam);
    Mat g2 = restricted_gram2(q, lam.vectors);
    QuadraticForm qc = QuadraticForm::from_gram2(3, std::move(g2));
    // Cauchy-Binet: det M_{Q_c} = Q*(c).
    Rat expect = dual_form(q).eval(c);
    if (qc.disc() != expect) throw InvariantViolation("restriction determinant != Q*(c)");
    return RestrictedConic{std::move(qc), std::move(lam), c};
}

namespace detail {

/// Eigenvalues of a symmetric 3x3 via cyclic Jacobi rotations.
inline std::array<double, 3> jacobi_eigen3(std::array<std::array<double, 3>, 3> a) {
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
        if (off < 1e-300) break;
        for (int p = 0; p < 2; ++p)
            for (int qq = p + 1; qq < 3; ++qq) {
                if (std::abs(a[p][qq]) < 1e-300) continue;
                double theta = (a[qq][qq] - a[p][p]) / (2 * a[p][qq]);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                double cth = 1 / std::sqrt(t * t + 1), s = t * cth;
                for (int k = 0; k < 3; ++k) {
                    double akp = a[k][p], akq = a[k][qq];
                    a[k][p] = cth * akp - s * akq;
                    a[k][qq] = s * akp + cth * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    double apk = a[p][k], aqk = a[qq][k];
                    a[p][k] = cth * apk - s * aqk;
                    a[qq][k] = s * apk + cth * aqk;
                }
            }
        if (off < 1e-14 * (std::abs(a[0][0]) + std::abs(a[1][1]) + std::abs(a[2][2]) + 1e-30)) break;
    }
    return {a[0][0], a[1][1], a[2][2]};
}

}  // namespace detail

/// Eigenvalues of Q restricted to the real orthogonal complement of c,
/// ordered |mu1| >= |mu2| >= |mu3|. Their product equals Q*(c)/|c|_2^2 up to
/// floating error.
inline std::array<double, 3> restricted_spectrum(const QuadraticForm& q, const IVec& c) {
    if (q.n() != 4) throw BadDimension("restricted_spectrum needs a quaternary form");
    if (is_zero_vec(c)) throw InvalidInput("restricted_spectrum: c = 0");
    double cv[4];
    double norm = 0;
    for (int i = 0; i < 4; ++i) {
        cv[i] = to_double(c[static_cast<size_t>(i)]);
        norm += cv[i] * cv[i];
    }
    norm = std::sqrt(norm);
    for (double& x : cv) x /= norm;
    // Householder reflection sending e_k -> c; its other columns span the
    // orthogonal complement.
    int k = 0;
    for (int i = 1; i < 4; ++i)
        if (std::abs(cv[i]) > std::abs(cv[k])) k = i;
    double v[4];
    for (int i = 0; i < 4; ++i) v[i] = cv[i];
    v[k] += (cv[k] >= 0 ? 1.0 : -1.0);
    double vn = 0;
    for (double x : v) vn += x * x;
    double u[3][4];
    int col = 0;
    for (int j = 0; j < 4; ++j) {
        if (j == k) continue;
        for (int i = 0; i < 4; ++i) u[col][i] = (i == j ? 1.0 : 0.0) - 2 * v[i] * v[j] / vn;
        ++col;
    }
    std::array<std::array<double, 3>, 3> s{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double acc = 0;
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) acc += u[i][a] * to_double(q.gram2().at(a, b)) * u[j][b];
            s[static_cast<size_t>(i)][static_cast<size_t>(j)] = acc / 2.0;
        }
    auto ev = detail::jacobi_eigen3(s);
    std::sort(ev.begin(), ev.end(), [](double x, double y) { return std::abs(x) > std::abs(y); });
    return ev;
}

}  // namespace quadrics
