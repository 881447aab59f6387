// quadrics: exact counting of primitive integer points on quadric surfaces,
// with the local/multiplicative machinery exposed as subcommands.
//
// Exit codes: 0 success, 2 enumeration budget exceeded, 3 invalid input,
// 4 invariant violation.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "quadrics/harness.hpp"

using namespace quadrics;

namespace {

struct GlobalOpts {
    int workers = 1;
    uint64_t budget = kDefaultBudget;
    uint64_t seed = 1;
    std::string out;
};

std::ostream& sink(const GlobalOpts& g, std::ofstream& file) {
    if (g.out.empty()) return std::cout;
    file.open(g.out);
    if (!file) throw InvalidInput("cannot open output file: " + g.out);
    return file;
}

void print_count(std::ostream& os, const CountReport& rep) {
    os << "method=" << rep.method << " B=" << rep.b << " N=" << rep.count.get_str()
       << " slices=" << rep.slices_visited << " singular=" << rep.singular_slices
       << " elapsed=" << fmt_g12(rep.elapsed) << "s\n";
}

int run_selfcheck(const GlobalOpts& g) {
    using CoeffMap = std::map<std::pair<int, int>, Int>;
    auto check = [](bool ok, const std::string& what) {
        std::cout << (ok ? "[ok]   " : "[FAIL] ") << what << "\n";
        if (!ok) throw InvariantViolation("selfcheck failed: " + what);
    };
    auto diag = [](std::initializer_list<int64_t> d) {
        CoeffMap m;
        int i = 1;
        for (int64_t v : d) {
            m[{i, i}] = Int(v);
            ++i;
        }
        return QuadraticForm::build(static_cast<int>(d.size()), m);
    };

    auto q = diag({1, 1, 1, -1});
    check(q.disc() == Rat(-1) && q.height() == 1, "form construction");
    check(dual_form(q).eval_int(IVec{Int(1), Int(1), Int(1), Int(1)}) == -2, "dual evaluation");

    Rng rng(g.seed);
    bool kernel_ok = true;
    for (int i = 0; i < 50; ++i) {
        IVec c(4);
        do {
            for (auto& v : c) v = Int(rng.range(-20, 20));
        } while (is_zero_vec(c) || content(c) != 1);
        kernel_ok = kernel_ok && (kernel_lattice(c).det_sq == dot(c, c));
    }
    check(kernel_ok, "kernel lattice determinant law");

    ExperimentConfig cfg;
    cfg.seed = g.seed;
    cfg.coeff_bound = 8;
    bool restr_ok = true;
    for (uint64_t s = 0; s < 100; ++s) {
        auto qq = random_form(cfg, s);
        IVec c(4);
        do {
            for (auto& v : c) v = Int(rng.range(-6, 6));
        } while (is_zero_vec(c) || content(c) != 1);
        if (dual_form(qq).eval(c) == 0) continue;
        auto rc = restrict_to_hyperplane(qq, c);  // throws on mismatch
        restr_ok = restr_ok && (rc.q.disc() == dual_form(qq).eval(c));
    }
    check(restr_ok, "restriction determinant identity");

    check(rho(dual_form(q), Int(5)) == 145, "local density rho(5)");
    check(pi_B(Int(-1), 10.0) == Rat(36, 35), "Euler product Pi_B");
    check(brute_force_count(q, 1).count == 12, "N(1) = 12 for the signature (3,1) form");
    check(brute_force_count(diag({1, 1, -1, -1}), 1).count == 32, "N(1) = 32 for the split form");

    bool agree = true;
    for (uint64_t s = 0; s < 3; ++s) {
        auto qq = random_form(cfg, 1000 + s);
        agree = agree && (brute_force_count(qq, 5, g.budget, g.workers).count ==
                          sliced_count(qq, 5, g.budget, g.workers).count);
    }
    check(agree, "sliced count equals brute force");

    bool gcd_ok = true;
    for (int i = 0; i < 1000; ++i) {
        Int m(static_cast<long>(rng.below(1000000000) + 1));
        Int n(static_cast<long>(rng.below(1000000000) + 1));
        gcd_ok = gcd_ok && gcd_inequality(m, n).holds;
    }
    check(gcd_ok, "gcd inequality");

    {
        auto qc = diag({1, 1, -25});
        auto cover = lattice_cover(qc, g.budget);
        auto zeros = conic_zeros_in_box(qc, BoxBounds{60, 60, 60}, g.budget);
        bool sound = !cover.empty() && !zeros.empty();
        std::vector<Mat> hs;
        for (auto& lat : cover) hs.push_back(hnf_columns(lat.vectors));
        for (auto& y : zeros) {
            bool covered = false;
            for (auto& h : hs)
                if (lattice_contains(h, y)) { covered = true; break; }
            sound = sound && covered;
        }
        sound = sound && lattice_cover(diag({1, 1, 3}), g.budget).empty();
        check(sound, "lattice cover soundness");
    }

    {
        auto lam = kernel_lattice(IVec{Int(1), Int(1), Int(1), Int(1)});
        auto [red, bounds] = box_adapted_basis(lam, identity_metric(4), 8.0);
        bool contained = true;
        for (int64_t a = -30; a <= 30 && contained; ++a)
            for (int64_t b = -30; b <= 30 && contained; ++b)
                for (int64_t c = -30; c <= 30 && contained; ++c) {
                    IVec x(4, Int(0));
                    for (int i = 0; i < 4; ++i)
                        x[static_cast<size_t>(i)] = Int(a) * lam.vectors[0][static_cast<size_t>(i)] +
                                                    Int(b) * lam.vectors[1][static_cast<size_t>(i)] +
                                                    Int(c) * lam.vectors[2][static_cast<size_t>(i)];
                    if (to_double(dot(x, x)) > 64.0) continue;
                    // coefficients in the returned basis stay inside the box
                    Mat gm = mat_from_columns(red.vectors);
                    Mat gram = gram_of_columns(gm);
                    Mat adj = adjugate(gram);
                    Int dg = det(gram);
                    for (int j = 0; j < 3 && contained; ++j) {
                        Int num = 0;
                        for (int i = 0; i < 3; ++i) num += adj.at(j, i) * dot(red.vectors[static_cast<size_t>(i)], x);
                        double lam_j = to_double(num) / to_double(dg);
                        if (std::abs(lam_j) > bounds.at(j) + 1e-9) contained = false;
                    }
                }
        check(contained, "box-adapted basis containment");
    }

    auto lines = lines_up_to_height(diag({1, 1, -1, -1}), 10);
    bool lines_ok = !lines.empty();
    for (auto& l : lines)
        lines_ok = lines_ok && (l.plucker[0] * l.plucker[5] - l.plucker[1] * l.plucker[4] +
                                    l.plucker[2] * l.plucker[3] ==
                                0);
    check(lines_ok, "rational lines and Plucker relation");

    std::cout << "selfcheck passed\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact point counts and local invariants of quadric surfaces"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand
    GlobalOpts g;
    app.add_option("--workers", g.workers, "parallel workers")->capture_default_str();
    app.add_option("--budget", g.budget, "enumeration budget (cells / residue tuples)")->capture_default_str();
    app.add_option("--seed", g.seed, "seed for randomized subcommands")->capture_default_str();
    app.add_option("--out", g.out, "output path (default: stdout)");

    std::string form_path, config_path;
    int64_t opt_b = 10, opt_m = 5, opt_h = 20;
    double opt_eps = 1e-3;
    std::string method = "both";

    auto* c_count = app.add_subcommand("count", "count primitive points of height at most B");
    c_count->add_option("form", form_path, "form file (JSON)")->required();
    c_count->add_option("--B", opt_b, "height bound")->required();
    c_count->add_option("--method", method, "brute | sliced | both")->capture_default_str();

    auto* c_rho = app.add_subcommand("rho", "local density of the dual form: #{x mod m : Q*(x) = 0}");
    c_rho->add_option("form", form_path, "form file (JSON)")->required();
    c_rho->add_option("--m", opt_m, "modulus")->required();

    auto* c_bound = app.add_subcommand("bound", "evaluate the height-bound right-hand side and the ratio N/rhs");
    c_bound->add_option("form", form_path, "form file (JSON)")->required();
    c_bound->add_option("--B", opt_b, "height bound")->required();
    c_bound->add_option("--eps", opt_eps, "epsilon exponent")->capture_default_str();

    auto* c_cover = app.add_subcommand("cover", "lattice cover of the primitive zeros of a ternary form");
    c_cover->add_option("form", form_path, "ternary form file (JSON)")->required();

    auto* c_lines = app.add_subcommand("lines", "rational lines on the surface up to lattice height H");
    c_lines->add_option("form", form_path, "form file (JSON)")->required();
    c_lines->add_option("--H", opt_h, "height bound")->capture_default_str();

    auto* c_exp = app.add_subcommand("experiment", "growth experiment over a random form corpus (CSV)");
    c_exp->add_option("config", config_path, "config file (JSON)")->required();

    app.add_subcommand("selfcheck", "run the built-in invariant suite");

    CLI11_PARSE(app, argc, argv);

    try {
        std::ofstream file;
        if (c_count->parsed()) {
            auto q = load_form_file(form_path);
            auto& os = sink(g, file);
            if (method != "brute" && method != "sliced" && method != "both")
                throw InvalidInput("unknown method: " + method);
            std::optional<Int> first;
            if (method == "brute" || method == "both") {
                auto rep = brute_force_count(q, opt_b, g.budget, g.workers);
                print_count(os, rep);
                first = rep.count;
            }
            if (method == "sliced" || method == "both") {
                auto rep = sliced_count(q, opt_b, g.budget, g.workers);
                print_count(os, rep);
                if (first && *first != rep.count)
                    throw InvariantViolation("brute and sliced counts disagree");
            }
        } else if (c_rho->parsed()) {
            auto q = load_form_file(form_path);
            auto& os = sink(g, file);
            Int v = rho(dual_form(q), Int(static_cast<long>(opt_m)), g.budget, g.workers);
            os << "rho(" << opt_m << ") = " << v.get_str() << "\n";
        } else if (c_bound->parsed()) {
            auto q = load_form_file(form_path);
            auto& os = sink(g, file);
            auto r = theorem_rhs(q, opt_b, opt_eps);
            CountReport rep = brute_force_count(q, opt_b, g.budget, g.workers);
            r.count = rep.count;
            r.ratio = to_double(rep.count) / r.rhs;
            os << "B=" << r.b << " eps=" << fmt_g12(r.epsilon) << "\n"
               << "delta=" << r.delta.get_str() << " delta_bad=" << r.delta_bad.get_str()
               << " height=" << r.height.get_str() << "\n"
               << "pi_B=" << r.pi_b.get_num().get_str() << "/" << r.pi_b.get_den().get_str()
               << " (" << fmt_g12(to_double(r.pi_b)) << ")\n"
               << "rhs=" << fmt_g12(r.rhs) << "\n"
               << "hypothesis_ok=" << (r.hypothesis_ok ? "true" : "false") << "\n"
               << "N=" << r.count->get_str() << "\n"
               << "ratio=" << fmt_g12(r.ratio) << "\n";
        } else if (c_cover->parsed()) {
            auto q = load_form_file(form_path);
            auto& os = sink(g, file);
            if (q.n() != 3) throw InvalidInput("cover expects a ternary form file");
            auto cover = lattice_cover(q, g.budget);
            os << "C(q) = " << C_value(q).get_str() << "\n";
            os << "lattices: " << cover.size() << "\n";
            for (size_t i = 0; i < cover.size(); ++i) {
                os << "  [" << i << "] det_sq=" << cover[i].det_sq.get_str() << " basis:";
                for (auto& v : cover[i].vectors) {
                    os << " (";
                    for (size_t j = 0; j < v.size(); ++j) os << (j ? "," : "") << v[j].get_str();
                    os << ")";
                }
                os << "\n";
            }
        } else if (c_lines->parsed()) {
            auto q = load_form_file(form_path);
            auto& os = sink(g, file);
            auto lines = lines_up_to_height(q, opt_h);
            os << "lines: " << lines.size() << "\n";
            for (size_t i = 0; i < lines.size(); ++i) {
                const auto& l = lines[i];
                os << "  [" << i << "] det_sq=" << l.det_sq.get_str() << " plucker=(";
                for (size_t j = 0; j < 6; ++j) os << (j ? "," : "") << l.plucker[j].get_str();
                os << ") basis: (";
                for (size_t j = 0; j < 4; ++j) os << (j ? "," : "") << l.g1[j].get_str();
                os << ") (";
                for (size_t j = 0; j < 4; ++j) os << (j ? "," : "") << l.g2[j].get_str();
                os << ")\n";
            }
        } else if (c_exp->parsed()) {
            std::ifstream in(config_path);
            if (!in) throw InvalidInput("cannot open config file: " + config_path);
            json j;
            try {
                in >> j;
            } catch (const std::exception& e) {
                throw InvalidInput(std::string("bad JSON in config: ") + e.what());
            }
            auto cfg = config_from_json(j);
            if (g.workers != 1) cfg.workers = g.workers;
            if (g.budget != kDefaultBudget) cfg.budget = g.budget;
            if (g.seed != 1) cfg.seed = g.seed;
            if (!g.out.empty()) cfg.out = g.out;
            std::vector<QuadraticForm> forms;
            for (int i = 0; i < cfg.num_forms; ++i) forms.push_back(random_form(cfg, static_cast<uint64_t>(i)));
            auto res = growth_experiment(forms, cfg.b_grid, cfg);
            std::string csv = experiment_csv(res);
            if (cfg.out.empty()) {
                std::cout << csv;
            } else {
                std::ofstream out(cfg.out);
                if (!out) throw InvalidInput("cannot open output file: " + cfg.out);
                out << csv;
            }
            std::cerr << "max N/B^2 (nonsquare disc): " << fmt_g12(res.max_n_over_b2_nonsquare) << "\n"
                      << "max N/(B^2 log B) (square disc): " << fmt_g12(res.max_n_over_b2logb_square) << "\n"
                      << "max N/rhs: " << fmt_g12(res.max_n_over_rhs) << "\n";
        } else {
            return run_selfcheck(g);
        }
    } catch (const TooLarge& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return 2;
    } catch (const InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
