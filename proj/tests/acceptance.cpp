// Acceptance suite: one pass/fail line per criterion, exact oracles
// throughout, and corpus-wide recorded constants asserted against the
// frozen values noted inline.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "quadrics/harness.hpp"

using namespace quadrics;

namespace {

using CoeffMap = std::map<std::pair<int, int>, Int>;

QuadraticForm diag4(int64_t a, int64_t b, int64_t c, int64_t d) {
    return QuadraticForm::build(4, CoeffMap{{{1, 1}, Int(a)}, {{2, 2}, Int(b)}, {{3, 3}, Int(c)}, {{4, 4}, Int(d)}});
}

IVec random_primitive4(Rng& rng, int64_t bound) {
    for (;;) {
        IVec c(4);
        for (int i = 0; i < 4; ++i) c[static_cast<size_t>(i)] = Int(rng.range(-bound, bound));
        if (is_zero_vec(c)) continue;
        if (content(c) == 1) return c;
    }
}

/// Full-grid oracle used for the fixed N(1) values.
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

int g_workers = 1;

struct Outcome {
    bool pass;
    std::string detail;
};

int run_criteria(const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria) {
    int failures = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] %2zu. %s (%.1fs)%s%s\n", out.pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].first.c_str(), dt, out.detail.empty() ? "" : " -- ", out.detail.c_str());
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    return failures;
}

// 1. det M_{Q_c} = Q*(c) exactly on 1000 random classical pairs, height <= 50.
Outcome criterion_dual_determinant() {
    ExperimentConfig cfg;
    cfg.seed = 101;
    cfg.coeff_bound = 50;
    Rng crng(9001);
    int done = 0;
    uint64_t salt = 0;
    while (done < 1000) {
        auto q = random_form(cfg, salt++);
        if (q.height() > 50) return {false, "corpus height exceeded 50"};
        IVec c = random_primitive4(crng, 10);
        Rat qc = dual_form(q).eval(c);
        if (qc == 0) continue;
        auto rc = restrict_to_hyperplane(q, c);  // throws on any mismatch
        if (rc.q.disc() != qc) return {false, "determinant mismatch"};
        ++done;
    }
    return {true, "1000 pairs exact"};
}

// 2. rho(p) closed form and the rho(p^k) fourth-power bound.
Outcome criterion_rho() {
    ExperimentConfig cfg;
    cfg.seed = 202;
    cfg.coeff_bound = 8;
    int closed_checked = 0, bound_checked = 0;
    for (int f = 0; f < 20; ++f) {
        auto q = random_form(cfg, static_cast<uint64_t>(f));
        DualForm d(q);
        Int delta = q.disc_int();
        Int dbad = squarefull_part(delta);
        for (int64_t p : {3ll, 5ll, 7ll, 11ll, 13ll}) {
            if ((2 * dbad) % p == 0) continue;
            Int closed = rho_prime_power(d, Int(p), 1);
            Int brute = rho_prime_power(d, Int(p), 1, kDefaultBudget, g_workers, true);
            if (closed != brute) return {false, "closed form != brute force at p = " + std::to_string(p)};
            Int expect = Int(p) * p * p + Int(chi(delta, Int(p))) * (Int(p) * p - p);
            if (closed != expect) return {false, "closed form disagrees with the formula"};
            ++closed_checked;
        }
        Int dbad3 = ipow(dbad, 3);
        for (auto [p, kmax] : std::vector<std::pair<int64_t, unsigned>>{{2, 5}, {3, 3}, {5, 2}, {7, 2}, {11, 1}, {13, 1}}) {
            for (unsigned k = 1; k <= kmax; ++k) {
                Int pk4 = ipow(Int(p), 4 * k);
                if (pk4 > 100000000) continue;
                Int val = rho_prime_power(d, Int(p), k, kDefaultBudget, g_workers, true);
                Int lhs = ipow(val, 4);
                Int rhs = ipow(Int(4) * Int(k), 4) * ipow(Int(p), 12 * k) * igcd(dbad3, pk4);
                if (lhs > rhs) return {false, "rho(p^k) bound violated"};
                ++bound_checked;
            }
        }
    }
    return {true, std::to_string(closed_checked) + " closed-form checks, " + std::to_string(bound_checked) + " power bounds"};
}

// 3. |S(b;p) - chi(p) p^2| <= 1e-6 p^2 for p <= 23 away from 2*Delta.
Outcome criterion_gauss() {
    ExperimentConfig cfg;
    cfg.seed = 303;
    cfg.coeff_bound = 6;
    int checked = 0;
    for (int f = 0; f < 10; ++f) {
        auto q = random_form(cfg, static_cast<uint64_t>(f));
        DualForm d(q);
        Int delta = q.disc_int();
        for (int64_t p : {3ll, 5ll, 7ll, 11ll, 13ll, 17ll, 19ll, 23ll}) {
            if ((2 * delta) % p == 0) continue;
            double target = static_cast<double>(chi(delta, Int(p))) * static_cast<double>(p) * static_cast<double>(p);
            for (int64_t b = 1; b < p; ++b) {
                auto s = exp_sum(d, Int(b), Int(p), 1);
                double err = std::hypot(s.real() - target, s.imag());
                if (err > 1e-6 * static_cast<double>(p) * static_cast<double>(p))
                    return {false, "Gauss value off at p = " + std::to_string(p)};
                ++checked;
            }
        }
    }
    return {true, std::to_string(checked) + " sums within tolerance"};
}

// 4. sliced = brute on 20 random classical forms at B in {5, 10, 20}, plus
// the fixed N(1) values against the 3^4-grid oracle.
Outcome criterion_counting() {
    auto q1 = diag4(1, 1, 1, -1);
    if (grid_oracle(q1, 1) != 12 || brute_force_count(q1, 1).count != 12 || sliced_count(q1, 1).count != 12)
        return {false, "N(1) != 12 for the signature (3,1) form"};
    auto q2 = diag4(1, 1, -1, -1);
    if (grid_oracle(q2, 1) != 32 || brute_force_count(q2, 1).count != 32 || sliced_count(q2, 1).count != 32)
        return {false, "N(1) != 32 for the split form"};
    ExperimentConfig cfg;
    cfg.seed = 404;
    cfg.coeff_bound = 6;
    for (int f = 0; f < 20; ++f) {
        auto q = random_form(cfg, static_cast<uint64_t>(f));
        for (int64_t b : {5ll, 10ll, 20ll}) {
            auto rb = brute_force_count(q, b, kDefaultBudget, g_workers);
            auto rs = sliced_count(q, b, kDefaultBudget, g_workers);
            if (rb.count != rs.count)
                return {false, "mismatch on form " + std::to_string(f) + " at B = " + std::to_string(b)};
        }
    }
    return {true, "60 cross-method equalities plus fixed values"};
}

// 5. Cover soundness on 20 ternary restrictions; recorded kappa_NL <= 64.
Outcome criterion_cover() {
    ExperimentConfig cfg;
    cfg.seed = 505;
    cfg.coeff_bound = 8;
    Rng crng(5005);
    int tested = 0;
    double kappa_nl = 0;
    uint64_t salt = 0;
    while (tested < 20) {
        auto q = random_form(cfg, salt++);
        IVec c = random_primitive4(crng, 5);
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
        auto zeros = conic_zeros_in_box(rc.q, BoxBounds{100, 100, 100});
        if (C_value(rc.q) == 0) {
            if (!cover.empty()) return {false, "C(q) = 0 with a nonempty cover"};
            if (!zeros.empty()) return {false, "C(q) = 0 with primitive zeros"};
            continue;
        }
        if (cover.empty()) {
            if (!zeros.empty()) return {false, "empty cover with primitive zeros"};
            continue;
        }
        std::vector<Mat> hs;
        for (auto& lat : cover) hs.push_back(hnf_columns(lat.vectors));
        for (auto& y : zeros) {
            bool covered = false;
            for (auto& h : hs)
                if (lattice_contains(h, y)) { covered = true; break; }
            if (!covered) return {false, "uncovered zero"};
        }
        Int dsq_full = squarefull_part(minor_gcd_D(rc.q));
        Int delta_q = abs(rc.q.disc_int());
        for (auto& lat : cover) {
            double lhs = to_double(lat.det_sq) * to_double(ipow(dsq_full, 3));
            double ratio = to_double(Int(delta_q * delta_q)) / lhs;
            kappa_nl = std::max(kappa_nl, std::sqrt(ratio));
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "20 restrictions sound; recorded kappa_NL = %.3f", kappa_nl);
    if (kappa_nl > 8.0) return {false, buf};
    return {true, buf};
}

// 6. gcd inequality: 1e5 random pairs, exact 12th powers, zero failures.
Outcome criterion_gcd() {
    Rng rng(606);
    for (int i = 0; i < 100000; ++i) {
        Int m(static_cast<long>(rng.below(1000000000) + 1));
        Int n(static_cast<long>(rng.below(1000000000) + 1));
        if (rng.below(2)) n = -n;
        if (!gcd_inequality(m, n).holds) return {false, "inequality failed"};
    }
    return {true, "100000 exact comparisons"};
}

// 7. Siegel witnesses, exhaustively over primitive |x| <= 30.
Outcome criterion_siegel() {
    struct Acc {
        double max_ratio = 0;
        uint64_t count = 0;
        bool ok = true;
    };
    auto body = [&](int64_t lo, int64_t hi) -> Acc {
        Acc acc;
        for (int64_t a = lo; a < hi; ++a)
            for (int64_t b = -30; b <= 30; ++b)
                for (int64_t c = -30; c <= 30; ++c)
                    for (int64_t d = -30; d <= 30; ++d) {
                        if (detail::gcd4(a, b, c, d) != 1) continue;
                        V4 x{a, b, c, d};
                        V4 w = siegel_witness_i64(x);
                        if (detail::dot_i64(w, x) != 0 || detail::gcd4(w[0], w[1], w[2], w[3]) != 1) {
                            acc.ok = false;
                            return acc;
                        }
                        double ratio = static_cast<double>(detail::sup_i64(w)) /
                                       std::cbrt(1.0 + static_cast<double>(detail::sup_i64(x)));
                        acc.max_ratio = std::max(acc.max_ratio, ratio);
                        ++acc.count;
                    }
        return acc;
    };
    Acc total = parallel_chunks<Acc>(-30, 31, g_workers, Acc{}, body, [](Acc x, Acc y) {
        x.max_ratio = std::max(x.max_ratio, y.max_ratio);
        x.count += y.count;
        x.ok = x.ok && y.ok;
        return x;
    });
    char buf[96];
    std::snprintf(buf, sizeof buf, "%llu witnesses; recorded max ratio = %.3f",
                  static_cast<unsigned long long>(total.count), total.max_ratio);
    if (!total.ok) return {false, "invalid witness"};
    if (total.max_ratio > 4.0) return {false, buf};
    return {true, buf};
}

// 8. Average order of R over boxes: S^(1)(X) / (frakS X^4 / log X) stays
// below the recorded constant and does not trend upward.
Outcome criterion_average() {
    ExperimentConfig cfg;
    cfg.seed = 808;
    cfg.coeff_bound = 3;
    const std::vector<int64_t> xs{8, 12, 16, 24, 32};
    double global_max = 0;
    for (int f = 0; f < 5; ++f) {
        auto q = random_form(cfg, static_cast<uint64_t>(f));
        DualForm d(q);
        Int delta = q.disc_int();
        std::vector<IVec> centers{IVec{Int(0), Int(0), Int(0), Int(0)}};
        double first = 0, last = 0;
        for (size_t i = 0; i < xs.size(); ++i) {
            int64_t x = xs[i];
            Int s = S_h_window(d, Int(1), centers, x, kDefaultBudget, g_workers);
            double xd = static_cast<double>(x);
            double denom = to_double(frakS(delta, xd)) * xd * xd * xd * xd / std::log(xd);
            double ratio = to_double(s) / denom;
            global_max = std::max(global_max, ratio);
            if (i == 0) first = ratio;
            if (i + 1 == xs.size()) last = ratio;
        }
        if (last > 1.5 * first) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "upward trend on form %d: %.3f -> %.3f", f, first, last);
            return {false, buf};
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "recorded max ratio = %.3f", global_max);
    // The ratio carries the box volume (2X+1)^4 ~ 16 X^4, so the recorded
    // constant sits near 85 on this corpus; frozen with margin.
    if (global_max > 128.0) return {false, buf};
    return {true, buf};
}

// 9. Lines on the split form: Plucker identities, ordering law, and the
// per-line point-count bound.
Outcome criterion_lines() {
    auto q = diag4(1, 1, -1, -1);
    auto lines = lines_up_to_height(q, 40);
    if (lines.empty()) return {false, "no lines found"};
    double kappa_c = 0, kappa_line = 0;
    for (size_t n = 0; n < lines.size(); ++n) {
        const auto& l = lines[n];
        if (l.plucker[0] * l.plucker[5] - l.plucker[1] * l.plucker[4] + l.plucker[2] * l.plucker[3] != 0)
            return {false, "Grassmann relation failed"};
        if (l.det_sq != dot(l.plucker, l.plucker)) return {false, "Plucker norm mismatch"};
        if (n > 0 && lines[n - 1].det_sq > l.det_sq) return {false, "lines not sorted"};
        double dl = std::sqrt(to_double(l.det_sq));
        kappa_c = std::max(kappa_c, static_cast<double>(n + 1) / dl);
        for (int64_t b : {10ll, 50ll}) {
            Int cnt = line_point_count(l, b);
            double bound = 1.0 + static_cast<double>(b) * static_cast<double>(b) / dl;
            kappa_line = std::max(kappa_line, to_double(cnt) / bound);
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%zu lines; recorded kappa_c = %.3f, kappa_line = %.3f",
                  lines.size(), kappa_c, kappa_line);
    if (kappa_c > 4.5 || kappa_line > 8.0) return {false, buf};
    return {true, buf};
}

// 10. Bound monitoring on a square-free corpus: N/rhs and N/B^2 stay below
// the recorded constants (no attempt to reproduce asymptotic constants).
Outcome criterion_bound_monitor() {
    ExperimentConfig cfg;
    cfg.seed = 1010;
    cfg.coeff_bound = 5;
    cfg.constraint = "squarefree";
    cfg.workers = g_workers;
    cfg.methods = "both";
    std::vector<QuadraticForm> forms;
    for (int i = 0; i < 10; ++i) forms.push_back(random_form(cfg, static_cast<uint64_t>(i)));
    auto res = growth_experiment(forms, {10, 20}, cfg);
    for (auto& row : res.rows)
        if (row.skipped) return {false, "skipped cell in a desk-scale corpus"};
    // hypothesis flag: Delta_bad = 1 <= B^(1/20) holds on square-free corpora
    for (auto& q : forms)
        if (!theorem_rhs(q, 10, 1e-3).hypothesis_ok) return {false, "hypothesis flag failed"};
    char buf[96];
    std::snprintf(buf, sizeof buf, "recorded max N/rhs = %.4f, max N/B^2 = %.3f",
                  res.max_n_over_rhs, res.max_n_over_b2_nonsquare);
    // Desk-scale implied constants: observed 3.42 and 2.78 on this fixed
    // corpus; only boundedness is asserted, with margin.
    if (res.max_n_over_rhs > 8.0) return {false, buf};
    if (res.max_n_over_b2_nonsquare > 12.0) return {false, buf};
    return {true, buf};
}

}  // namespace

int main(int argc, char** argv) {
    g_workers = 2;
    if (argc > 1) g_workers = std::max(1, std::atoi(argv[1]));
    std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"dual-determinant identity det M_{Q_c} = Q*(c)", criterion_dual_determinant},
        {"local density closed form and rho(p^k) bound", criterion_rho},
        {"Gauss-sum identity S(b;p) = chi(p) p^2", criterion_gauss},
        {"counting oracle equivalence (sliced = brute)", criterion_counting},
        {"cover soundness and determinant floor", criterion_cover},
        {"gcd inequality at the 12th power", criterion_gcd},
        {"Siegel witnesses, exhaustive |x| <= 30", criterion_siegel},
        {"average order of R over boxes", criterion_average},
        {"square-discriminant lines", criterion_lines},
        {"bound monitoring on a square-free corpus", criterion_bound_monitor},
    };
    int failures = run_criteria(criteria);
    if (failures) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
