#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <optional>

#include "quadrics/counting.hpp"

using namespace quadrics;

namespace {

using CoeffMap = std::map<std::pair<int, int>, Int>;

QuadraticForm diag4(int64_t a, int64_t b, int64_t c, int64_t d) {
    return QuadraticForm::build(4, CoeffMap{{{1, 1}, Int(a)}, {{2, 2}, Int(b)}, {{3, 3}, Int(c)}, {{4, 4}, Int(d)}});
}

QuadraticForm diag3(int64_t a, int64_t b, int64_t c) {
    return QuadraticForm::build(3, CoeffMap{{{1, 1}, Int(a)}, {{2, 2}, Int(b)}, {{3, 3}, Int(c)}});
}

QuadraticForm random_classical4(Rng& rng, int64_t bound) {
    for (;;) {
        CoeffMap m;
        for (int i = 1; i <= 4; ++i)
            for (int j = i; j <= 4; ++j) {
                int64_t v = (i == j) ? rng.range(-bound, bound) : 2 * rng.range(-bound / 2, bound / 2);
                if (v != 0) m[{i, j}] = Int(v);
            }
        try {
            return QuadraticForm::build(4, m);
        } catch (const SingularForm&) {
        }
    }
}

/// Plain full-grid oracle: every tuple of the box is checked directly.
int64_t grid_oracle(const QuadraticForm& q, int64_t b) {
    int64_t cnt = 0;
    IVec x(4);
    for (int64_t a = -b; a <= b; ++a)
        for (int64_t bb = -b; bb <= b; ++bb)
            for (int64_t c = -b; c <= b; ++c)
                for (int64_t d = -b; d <= b; ++d) {
                    x[0] = a;
                    x[1] = bb;
                    x[2] = c;
                    x[3] = d;
                    if (std::gcd(std::gcd(std::abs(a), std::abs(bb)), std::gcd(std::abs(c), std::abs(d))) != 1) continue;
                    if (q.eval(x) == 0) ++cnt;
                }
    return cnt;
}

}  // namespace

TEST_CASE("brute force counter against the grid oracle") {
    auto q = diag4(1, 1, 1, -1);
    CHECK(brute_force_count(q, 1).count == 12);
    CHECK(grid_oracle(q, 1) == 12);
    auto q2 = diag4(1, 1, -1, -1);
    CHECK(brute_force_count(q2, 1).count == 32);
    CHECK(grid_oracle(q2, 1) == 32);
    // positive definite: empty for every B
    auto qpos = diag4(1, 2, 3, 4);
    for (int64_t b : {1, 5, 9}) CHECK(brute_force_count(qpos, b).count == 0);
    // random forms against the oracle
    Rng rng(83);
    for (int iter = 0; iter < 12; ++iter) {
        auto qq = random_classical4(rng, 7);
        CHECK(brute_force_count(qq, 4).count == grid_oracle(qq, 4));
    }
    // degenerate x4 direction (no x4^2 term)
    auto qdeg = QuadraticForm::build(4, CoeffMap{{{1, 1}, Int(1)}, {{2, 2}, Int(1)}, {{3, 4}, Int(2)}});
    CHECK(brute_force_count(qdeg, 3).count == grid_oracle(qdeg, 3));
    CHECK_THROWS_AS(brute_force_count(q, 0), InvalidInput);
    CHECK_THROWS_AS(brute_force_count(q, 100000, 1000), TooLarge);
    // workers do not change the count
    CHECK(brute_force_count(q2, 6, kDefaultBudget, 2).count == brute_force_count(q2, 6).count);
}

TEST_CASE("siegel witnesses") {
    {
        V4 x{1, 1, 1, 1};
        V4 c = siegel_witness_i64(x);
        CHECK(detail::dot_i64(c, x) == 0);
        CHECK(detail::sup_i64(c) == 1);
    }
    {
        V4 x{1, 0, 0, 0};
        V4 c = siegel_witness_i64(x);
        CHECK(detail::dot_i64(c, x) == 0);
        CHECK(detail::sup_i64(c) == 1);
        CHECK(c[0] == 0);
    }
    CHECK_THROWS_AS(siegel_witness_i64(V4{2, 2, 0, 0}), NotPrimitive);
    // exhaustive over |x| <= 8: witness orthogonal, primitive, ratio <= 4
    double max_ratio = 0;
    for (int64_t a = -8; a <= 8; ++a)
        for (int64_t b = -8; b <= 8; ++b)
            for (int64_t c = -8; c <= 8; ++c)
                for (int64_t d = -8; d <= 8; ++d) {
                    if (detail::gcd4(a, b, c, d) != 1) continue;
                    V4 x{a, b, c, d};
                    V4 w = siegel_witness_i64(x);
                    CHECK(detail::dot_i64(w, x) == 0);
                    CHECK(detail::gcd4(w[0], w[1], w[2], w[3]) == 1);
                    double ratio = static_cast<double>(detail::sup_i64(w)) /
                                   std::cbrt(1.0 + static_cast<double>(detail::sup_i64(x)));
                    max_ratio = std::max(max_ratio, ratio);
                }
    CHECK(max_ratio <= 4.0);
    // minimality on a sample: no nonzero kernel vector is strictly smaller
    Rng rng(89);
    for (int iter = 0; iter < 40; ++iter) {
        V4 x{};
        do {
            for (auto& v : x) v = rng.range(-20, 20);
        } while (detail::gcd4(x[0], x[1], x[2], x[3]) != 1);
        V4 w = siegel_witness_i64(x);
        int64_t sup = detail::sup_i64(w);
        if (sup <= 1) continue;  // already minimal possible
        for (int64_t a = -(sup - 1); a <= sup - 1; ++a)
            for (int64_t b = -(sup - 1); b <= sup - 1; ++b)
                for (int64_t c = -(sup - 1); c <= sup - 1; ++c)
                    for (int64_t d = -(sup - 1); d <= sup - 1; ++d) {
                        if (a == 0 && b == 0 && c == 0 && d == 0) continue;
                        CHECK(a * x[0] + b * x[1] + c * x[2] + d * x[3] != 0);
                    }
    }
}

TEST_CASE("conic zeros in boxes") {
    {
        auto zeros = conic_zeros_in_box(diag3(1, 1, -1), BoxBounds{5, 5, 5});
        CHECK(zeros.size() == 24);
        bool has345 = false;
        for (auto& y : zeros)
            if (y[0] == 3 && y[1] == 4 && y[2] == 5) has345 = true;
        CHECK(has345);
        for (auto& y : zeros) CHECK(diag3(1, 1, -1).eval(y) == 0);
    }
    CHECK(conic_zeros_in_box(diag3(1, 1, 3), BoxBounds{30, 30, 30}).empty());
    CHECK(conic_zeros_in_box(diag3(1, 1, -1), BoxBounds{0.5, 0.5, 0.5}).empty());
    // cardinality against the conic count lemma, recorded constant
    {
        auto zeros = conic_zeros_in_box(diag3(1, 1, -1), BoxBounds{20, 20, 20});
        double v3 = std::cbrt(20.0 * 20.0 * 20.0);
        CHECK(static_cast<double>(zeros.size()) <= 8.0 * (1.0 + v3));
    }
}

TEST_CASE("lattice cover: fixed examples") {
    {
        auto cover = lattice_cover(diag3(1, 1, -1));
        REQUIRE(cover.size() == 1);
        CHECK(cover[0].det_sq == 1);  // the whole of Z^3
    }
    CHECK(lattice_cover(diag3(1, 1, 3)).empty());
    {
        auto q = diag3(1, 1, -25);
        auto cover = lattice_cover(q);
        CHECK(!cover.empty());
        CHECK(cover.size() <= 3);  // I <= C(q) = 3
        auto zeros = conic_zeros_in_box(q, BoxBounds{100, 100, 100});
        CHECK(!zeros.empty());
        for (auto& y : zeros) {
            bool covered = false;
            for (auto& lat : cover) {
                Mat h = hnf_columns(lat.vectors);
                if (lattice_contains(h, y)) { covered = true; break; }
            }
            CHECK(covered);
        }
        // D(q) = 1 here, so every cover lattice has det >= |Delta_q| = 25
        for (auto& lat : cover) CHECK(lat.det_sq >= Int(25) * 25);
    }
}

TEST_CASE("lattice cover: soundness on random restrictions") {
    Rng rng(97);
    int tested = 0;
    double kappa_nl = 0;
    for (int iter = 0; iter < 400 && tested < 25; ++iter) {
        auto q = random_classical4(rng, 8);
        IVec c(4);
        do {
            for (int i = 0; i < 4; ++i) c[static_cast<size_t>(i)] = Int(rng.range(-5, 5));
        } while (is_zero_vec(c) || content(c) != 1);
        if (dual_form(q).eval(c) == 0) continue;
        auto rc = restrict_to_hyperplane(q, c);
        if (!rc.q.classical()) continue;
        std::vector<SublatticeBasis> cover;
        try {
            cover = lattice_cover(rc.q);
        } catch (const TooLarge&) {
            continue;
        }
        ++tested;
        auto zeros = conic_zeros_in_box(rc.q, BoxBounds{40, 40, 40});
        if (C_value(rc.q) == 0) {
            CHECK(cover.empty());
            CHECK(zeros.empty());
            continue;
        }
        if (cover.empty()) {
            // the cover may certify insolubility even when C(q) != 0
            CHECK(zeros.empty());
            continue;
        }
        std::vector<Mat> hs;
        for (auto& lat : cover) hs.push_back(hnf_columns(lat.vectors));
        for (auto& y : zeros) {
            bool covered = false;
            for (auto& h : hs)
                if (lattice_contains(h, y)) { covered = true; break; }
            CHECK(covered);
        }
        Int dsq_full = squarefull_part(minor_gcd_D(rc.q));
        Int delta_q = abs(rc.q.disc_int());
        for (auto& lat : cover) {
            double lhs = to_double(lat.det_sq) * to_double(ipow(dsq_full, 3));
            double ratio = to_double(Int(delta_q * delta_q)) / lhs;
            kappa_nl = std::max(kappa_nl, std::sqrt(ratio));
        }
    }
    CHECK(tested == 25);
    CHECK(kappa_nl <= 64.0);  // recorded corpus constant
}

TEST_CASE("sliced count equals brute force") {
    {
        auto q = diag4(1, 1, 1, -1);
        auto rep = sliced_count(q, 1);
        CHECK(rep.count == 12);
        CHECK(rep.slices_visited > 0);
    }
    {
        auto qpos = diag4(1, 2, 3, 4);
        CHECK(sliced_count(qpos, 5).count == 0);
    }
    {
        auto q2 = diag4(1, 1, -1, -1);  // square discriminant: lines appear
        CHECK(sliced_count(q2, 1).count == 32);
        CHECK(sliced_count(q2, 5).count == brute_force_count(q2, 5).count);
    }
    Rng rng(101);
    for (int iter = 0; iter < 10; ++iter) {
        auto q = random_classical4(rng, 6);
        auto b1 = brute_force_count(q, 5);
        auto s1 = sliced_count(q, 5);
        CHECK(b1.count == s1.count);
    }
    // scaling invariance: Q and 3Q have the same zero set
    {
        auto q = diag4(1, 1, 1, -1);
        auto q3 = diag4(3, 3, 3, -3);
        CHECK(brute_force_count(q3, 6).count == brute_force_count(q, 6).count);
        CHECK(sliced_count(q3, 6).count == brute_force_count(q, 6).count);
    }
    // workers do not change the result
    {
        auto q = diag4(1, 1, -1, -1);
        CHECK(sliced_count(q, 4, kDefaultBudget, 2).count == sliced_count(q, 4).count);
    }
}

TEST_CASE("sliced count on non-classical forms falls back cleanly") {
    auto q = QuadraticForm::build(4, CoeffMap{{{1, 1}, Int(1)}, {{1, 2}, Int(1)}, {{2, 2}, Int(1)},
                                              {{3, 3}, Int(1)}, {{4, 4}, Int(-1)}});
    CHECK(sliced_count(q, 4).count == brute_force_count(q, 4).count);
}

TEST_CASE("slicing refuses the giant-height regime") {
    // height above B^20 falls outside the slicing method's regime
    Int huge = ipow(Int(10), 25);
    auto q = QuadraticForm::build(
        4, CoeffMap{{{1, 1}, huge}, {{2, 2}, Int(1)}, {{3, 3}, Int(1)}, {{4, 4}, Int(-1)}});
    CHECK_THROWS_AS(sliced_count(q, 2), TooLarge);
}

TEST_CASE("congruence diagonalization of ternary forms") {
    // T^t A T = diag(d) mod p^K with det(T) a unit and valuations summing to
    // v_p(det A)
    Rng rng(113);
    int tested = 0;
    for (int iter = 0; iter < 2000 && tested < 150; ++iter) {
        CoeffMap m;
        for (int i = 1; i <= 3; ++i)
            for (int j = i; j <= 3; ++j) {
                int64_t v = (i == j) ? rng.range(-9, 9) : 2 * rng.range(-4, 4);
                if (v != 0) m[{i, j}] = Int(v);
            }
        std::optional<QuadraticForm> q;
        try {
            q = QuadraticForm::build(3, m);
        } catch (const SingularForm&) {
            continue;
        }
        Int delta = q->disc_int();
        for (int64_t p : {3ll, 5ll, 7ll}) {
            auto [xi, rest] = remove_factor(delta, Int(p));
            (void)rest;
            if (xi == 0) continue;
            Mat a(3, 3);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) a.at(i, j) = q->gram2().at(i, j) / 2;
            if (!q->classical()) continue;
            auto dg = detail::diagonalize_mod_pk(a, Int(p), xi + 1);
            Int mod = ipow(Int(p), xi + 1);
            // congruence identity
            Mat lhs = mat_mul(transpose(dg.t), mat_mul(a, dg.t));
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    Int want = (i == j) ? dg.d[static_cast<size_t>(i)] : Int(0);
                    Int got = (lhs.at(i, j) - want) % mod;
                    CHECK(got == 0);
                }
            // unit transform, sorted valuations, total valuation = xi
            CHECK(det(dg.t) % p != 0);
            CHECK(dg.v[0] <= dg.v[1]);
            CHECK(dg.v[1] <= dg.v[2]);
            CHECK(dg.v[0] + dg.v[1] + dg.v[2] == xi);
            // tinv really inverts t mod p^K
            Mat prod = mat_mul(dg.tinv, dg.t);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    Int want = (i == j) ? Int(1) : Int(0);
                    CHECK((prod.at(i, j) - want) % mod == 0);
                }
            ++tested;
        }
    }
    CHECK(tested >= 100);
}

TEST_CASE("projective solution lifting matches direct residue enumeration") {
    Rng rng(127);
    for (int iter = 0; iter < 40; ++iter) {
        CoeffMap m;
        for (int i = 1; i <= 3; ++i)
            for (int j = i; j <= 3; ++j) {
                int64_t v = (i == j) ? rng.range(-6, 6) : 2 * rng.range(-3, 3);
                if (v != 0) m[{i, j}] = Int(v);
            }
        std::optional<QuadraticForm> q;
        try {
            q = QuadraticForm::build(3, m);
        } catch (const SingularForm&) {
            continue;
        }
        for (auto [p, k] : std::vector<std::pair<int64_t, unsigned>>{{2, 1}, {2, 2}, {2, 3}, {3, 1}, {3, 2}, {5, 1}}) {
            int64_t mod = 1;
            for (unsigned i = 0; i < k; ++i) mod *= p;
            std::array<std::array<int64_t, 3>, 3> g2m{};
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    Int r = q->gram2().at(i, j) % (4 * mod);
                    if (r < 0) r += 4 * mod;
                    g2m[static_cast<size_t>(i)][static_cast<size_t>(j)] = to_i64(r);
                }
            auto reps = detail::projective_solutions_mod_pk(g2m, p, k, kDefaultBudget);
            // oracle: enumerate all primitive residues and canonicalize by
            // unit scaling (pivot coordinate normalized to 1)
            std::set<V3> expect;
            IVec y(3);
            for (int64_t a = 0; a < mod; ++a)
                for (int64_t b = 0; b < mod; ++b)
                    for (int64_t c = 0; c < mod; ++c) {
                        if (a % p == 0 && b % p == 0 && c % p == 0) continue;
                        y[0] = a;
                        y[1] = b;
                        y[2] = c;
                        Int val = q->eval(y) % mod;
                        if (val < 0) val += mod;
                        if (val != 0) continue;
                        // canonical rep of the unit-scaling class
                        int64_t coords[3] = {a, b, c};
                        int pivot = 0;
                        while (coords[pivot] % p == 0) ++pivot;
                        int64_t inv = mod_inverse_i64(coords[pivot] % mod, mod);
                        V3 canon{};
                        for (int t = 0; t < 3; ++t)
                            canon[static_cast<size_t>(t)] = static_cast<int64_t>(
                                mulmod_u64(static_cast<uint64_t>(coords[t]), static_cast<uint64_t>(inv), static_cast<uint64_t>(mod)));
                        expect.insert(canon);
                    }
            std::set<V3> got(reps.begin(), reps.end());
            CHECK(got == expect);
        }
    }
}

TEST_CASE("singular slice counts stay within the O(B) law") {
    // The sharp exponent is left open (split duals carry lines of singular
    // slice vectors), so only the linear-in-B law is asserted; the constant
    // is recorded on this family.
    auto q = diag4(1, 1, -1, -1);
    double kappa_sing = 0;
    for (int64_t b : {5ll, 10ll, 20ll, 40ll}) {
        auto rep = sliced_count(q, b);
        kappa_sing = std::max(kappa_sing, static_cast<double>(rep.singular_slices) / static_cast<double>(b));
    }
    CHECK(kappa_sing <= 24.0);  // recorded constant on this family
}
