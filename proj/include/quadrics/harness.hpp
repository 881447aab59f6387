#pragma once

// Experiment harness: form files, seeded random form generation, the
// upper-bound evaluation, and the growth experiment with CSV reporting.

#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "quadrics/counting.hpp"

namespace quadrics {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Form files: {"n": 4, "coeffs": {"i,j": value, ...}} with i <= j, values
// either JSON integers or decimal strings of unbounded magnitude.

inline QuadraticForm form_from_json(const json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("coeffs"))
        throw InvalidInput("form file needs fields 'n' and 'coeffs'");
    int n = j.at("n").get<int>();
    std::map<std::pair<int, int>, Int> coeffs;
    for (auto& [key, val] : j.at("coeffs").items()) {
        auto comma = key.find(',');
        if (comma == std::string::npos) throw InvalidInput("coefficient key must be 'i,j': " + key);
        int i = std::stoi(key.substr(0, comma));
        int jj = std::stoi(key.substr(comma + 1));
        Int v;
        if (val.is_number_integer())
            v = Int(static_cast<long>(val.get<long long>()));
        else if (val.is_string())
            v = parse_int(val.get<std::string>());
        else
            throw InvalidInput("coefficient must be an integer or decimal string");
        if (v != 0) coeffs[{i, jj}] = v;
    }
    return QuadraticForm::build(n, coeffs);
}

inline json form_to_json(const QuadraticForm& q) {
    json coeffs = json::object();
    for (int i = 1; i <= q.n(); ++i)
        for (int jj = i; jj <= q.n(); ++jj) {
            Int c = q.coeff(i, jj);
            if (c == 0) continue;
            std::string key = std::to_string(i) + "," + std::to_string(jj);
            if (fits_i64(c))
                coeffs[key] = to_i64(c);
            else
                coeffs[key] = c.get_str();
        }
    return json{{"n", q.n()}, {"coeffs", coeffs}};
}

inline QuadraticForm load_form_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open form file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw InvalidInput(std::string("bad JSON in form file: ") + e.what());
    }
    return form_from_json(j);
}

// ---------------------------------------------------------------------------
// Height-bound right-hand side

struct BoundReport {
    int64_t b = 0;
    double epsilon = 0;
    Int delta;
    Int delta_bad;
    Int height;
    Rat pi_b;        // exact Euler product
    double rhs = 0;  // float assembly of the bound
    bool hypothesis_ok = false;  // Delta_bad <= B^(1/20)
    std::optional<Int> count;    // exact N(B) when a count was run
    double ratio = 0;            // count / rhs when available
};

/// Assembles varpi(Delta) * Delta_bad^(1/4+eps) * (||Q||^4/|Delta|)^(5/8)
/// * Pi_B * (B^(4/3) + B^2/|Delta|^(1/4)); Pi_B is exact and converted to
/// float last.
inline BoundReport theorem_rhs(const QuadraticForm& q, int64_t b, double epsilon) {
    if (q.n() != 4) throw BadDimension("theorem_rhs needs a quaternary form");
    if (!q.classical()) throw NonClassical("theorem_rhs needs a classical form");
    if (b < 2) throw InvalidInput("theorem_rhs needs B >= 2");
    if (epsilon < 0) throw InvalidInput("epsilon must be nonnegative");
    BoundReport r;
    r.b = b;
    r.epsilon = epsilon;
    r.delta = q.disc_int();
    r.delta_bad = squarefull_part(r.delta);
    r.height = q.height();
    r.pi_b = pi_B(r.delta, static_cast<double>(b));
    double dabs = std::abs(to_double(r.delta));
    double shape = std::pow(to_double(r.height), 4.0) / dabs;
    double bb = static_cast<double>(b);
    r.rhs = to_double(varpi(abs(r.delta))) * std::pow(to_double(r.delta_bad), 0.25 + epsilon) *
            std::pow(shape, 0.625) * to_double(r.pi_b) *
            (std::pow(bb, 4.0 / 3.0) + bb * bb / std::pow(dabs, 0.25));
    r.hypothesis_ok = (ipow(r.delta_bad, 20) <= Int(b));
    return r;
}

// ---------------------------------------------------------------------------
// Random forms

struct ExperimentConfig {
    uint64_t seed = 1;
    int64_t coeff_bound = 5;
    int num_forms = 10;
    std::vector<int64_t> b_grid{5, 10, 20};
    std::string constraint = "any";  // any | square | nonsquare | squarefree
    bool classical = true;
    uint64_t budget = kDefaultBudget;
    int workers = 1;
    std::string out;
    double epsilon = 1e-3;
    std::string methods = "both";  // brute | sliced | both
    int max_rejects = 20000;

    void validate() const {
        if (coeff_bound < 1) throw InvalidInput("coeff_bound must be >= 1");
        if (num_forms < 1) throw InvalidInput("num_forms must be >= 1");
        if (b_grid.empty()) throw InvalidInput("B grid must be nonempty");
        for (size_t i = 0; i < b_grid.size(); ++i) {
            if (b_grid[i] < 1) throw InvalidInput("B grid entries must be positive");
            if (i > 0 && b_grid[i] <= b_grid[i - 1]) throw InvalidInput("B grid must be strictly increasing");
        }
        if (constraint != "any" && constraint != "square" && constraint != "nonsquare" && constraint != "squarefree")
            throw InvalidInput("unknown constraint: " + constraint);
        if (methods != "both" && methods != "brute" && methods != "sliced")
            throw InvalidInput("unknown methods value: " + methods);
        if (workers < 1) throw InvalidInput("workers must be >= 1");
    }
};

inline ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
    if (j.contains("coeff_bound")) c.coeff_bound = j.at("coeff_bound").get<int64_t>();
    if (j.contains("num_forms")) c.num_forms = j.at("num_forms").get<int>();
    if (j.contains("B_grid")) c.b_grid = j.at("B_grid").get<std::vector<int64_t>>();
    if (j.contains("constraint")) c.constraint = j.at("constraint").get<std::string>();
    if (j.contains("classical")) c.classical = j.at("classical").get<bool>();
    if (j.contains("budget")) c.budget = j.at("budget").get<uint64_t>();
    if (j.contains("workers")) c.workers = j.at("workers").get<int>();
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
    if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
    if (j.contains("methods")) c.methods = j.at("methods").get<std::string>();
    c.validate();
    return c;
}

/// Deterministic rejection sampler for a nonsingular quaternary form subject
/// to the configured discriminant constraint.
inline QuadraticForm random_form(const ExperimentConfig& cfg, uint64_t salt = 0) {
    Rng rng(cfg.seed * 0x9e3779b97f4a7c15ull + salt + 1);
    if (cfg.constraint == "squarefree" && !cfg.classical)
        throw InvalidInput("squarefree constraint needs classical forms");
    for (int attempt = 0; attempt < cfg.max_rejects; ++attempt) {
        std::map<std::pair<int, int>, Int> coeffs;
        for (int i = 1; i <= 4; ++i)
            for (int j = i; j <= 4; ++j) {
                int64_t v;
                if (i == j || !cfg.classical) {
                    v = rng.range(-cfg.coeff_bound, cfg.coeff_bound);
                } else {
                    int64_t half = cfg.coeff_bound / 2;
                    v = 2 * rng.range(-half, half);
                }
                if (v != 0) coeffs[{i, j}] = Int(static_cast<long>(v));
            }
        std::optional<QuadraticForm> q;
        try {
            q = QuadraticForm::build(4, coeffs);
        } catch (const SingularForm&) {
            continue;
        }
        if (cfg.constraint == "square" && !rat_is_square(q->disc())) continue;
        if (cfg.constraint == "nonsquare" && rat_is_square(q->disc())) continue;
        if (cfg.constraint == "squarefree" && squarefull_part(q->disc_int()) != 1) continue;
        return *q;
    }
    throw ConstraintUnsatisfiable("no admissible form after " + std::to_string(cfg.max_rejects) + " samples");
}

// ---------------------------------------------------------------------------
// Growth experiment

struct ExperimentRow {
    int form_id = 0;
    Int delta;
    Int delta_bad;
    Int height;
    int64_t b = 0;
    std::optional<Int> count;
    double rhs = 0;
    std::string method;
    double elapsed = 0;
    bool skipped = false;
    std::string skip_reason;
};

struct ExperimentResult {
    std::vector<ExperimentRow> rows;
    double max_n_over_b2_nonsquare = 0;    // empirical constant for the B^2 law
    double max_n_over_b2logb_square = 0;   // empirical constant, square discriminant
    double max_n_over_rhs = 0;             // empirical constant for the full bound
};

inline ExperimentResult growth_experiment(const std::vector<QuadraticForm>& forms,
                                          const std::vector<int64_t>& b_grid,
                                          const ExperimentConfig& cfg) {
    // Cells (form, B) are independent tasks; rows are assembled in cell
    // order afterwards, so the table is identical for any worker count.
    struct Cell {
        size_t fi;
        int64_t b;
    };
    std::vector<Cell> cells;
    for (size_t fi = 0; fi < forms.size(); ++fi)
        for (int64_t b : b_grid) cells.push_back({fi, b});

    auto run_cell = [&](const Cell& cell) -> std::vector<ExperimentRow> {
        const QuadraticForm& q = forms[cell.fi];
        Int delta = q.classical() ? q.disc_int() : Int(0);
        Int dbad = q.classical() ? squarefull_part(delta) : Int(0);
        std::vector<std::pair<std::string, std::function<CountReport()>>> runs;
        if (cfg.methods == "brute" || cfg.methods == "both")
            runs.emplace_back("brute", [&] { return brute_force_count(q, cell.b, cfg.budget, 1); });
        if (cfg.methods == "sliced" || cfg.methods == "both")
            runs.emplace_back("sliced", [&] { return sliced_count(q, cell.b, cfg.budget, 1); });
        std::vector<ExperimentRow> rows;
        std::optional<Int> first_count;
        for (auto& [name, run] : runs) {
            ExperimentRow row;
            row.form_id = static_cast<int>(cell.fi);
            row.delta = delta;
            row.delta_bad = dbad;
            row.height = q.height();
            row.b = cell.b;
            row.method = name;
            try {
                CountReport rep = run();
                row.count = rep.count;
                row.elapsed = rep.elapsed;
                if (first_count && *first_count != rep.count)
                    throw InvariantViolation("counting methods disagree on form " + std::to_string(cell.fi) +
                                             " at B = " + std::to_string(cell.b));
                first_count = rep.count;
            } catch (const TooLarge& e) {
                row.skipped = true;
                row.skip_reason = e.what();
            }
            if (!row.skipped && q.classical() && cell.b >= 2)
                row.rhs = theorem_rhs(q, cell.b, cfg.epsilon).rhs;
            rows.push_back(std::move(row));
        }
        return rows;
    };

    using RowBlocks = std::vector<std::vector<ExperimentRow>>;
    auto body = [&](int64_t lo, int64_t hi) -> RowBlocks {
        RowBlocks blocks;
        for (int64_t i = lo; i < hi; ++i) blocks.push_back(run_cell(cells[static_cast<size_t>(i)]));
        return blocks;
    };
    RowBlocks all = parallel_chunks<RowBlocks>(
        0, static_cast<int64_t>(cells.size()), cfg.workers, RowBlocks{}, body,
        [](RowBlocks acc, RowBlocks part) {
            for (auto& b : part) acc.push_back(std::move(b));
            return acc;
        });

    ExperimentResult res;
    for (auto& block : all)
        for (auto& row : block) {
            if (!row.skipped && row.count) {
                double n = to_double(*row.count);
                double bb = static_cast<double>(row.b);
                bool square_disc = rat_is_square(forms[static_cast<size_t>(row.form_id)].disc());
                if (row.rhs > 0) res.max_n_over_rhs = std::max(res.max_n_over_rhs, n / row.rhs);
                if (square_disc) {
                    if (row.b >= 2)
                        res.max_n_over_b2logb_square =
                            std::max(res.max_n_over_b2logb_square, n / (bb * bb * std::log(bb)));
                } else {
                    res.max_n_over_b2_nonsquare = std::max(res.max_n_over_b2_nonsquare, n / (bb * bb));
                }
            }
            res.rows.push_back(std::move(row));
        }
    return res;
}

inline std::string fmt_g12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// UTF-8 CSV with a header row; exact integers unquoted, floats with 12
/// significant digits. The elapsed column can be suppressed for byte-exact
/// comparisons.
inline std::string experiment_csv(const ExperimentResult& res, bool include_elapsed = true) {
    std::ostringstream out;
    out << "form_id,delta,delta_bad,height,B,N,N_over_B2,N_over_B2logB,rhs,N_over_rhs,method";
    if (include_elapsed) out << ",elapsed";
    out << "\n";
    for (const ExperimentRow& r : res.rows) {
        out << r.form_id << "," << r.delta.get_str() << "," << r.delta_bad.get_str() << ","
            << r.height.get_str() << "," << r.b << ",";
        if (r.skipped) {
            out << "skipped,,,,," << r.method;
            if (include_elapsed) out << ",";
            out << "\n";
            continue;
        }
        double n = to_double(*r.count);
        double bb = static_cast<double>(r.b);
        out << r.count->get_str() << "," << fmt_g12(n / (bb * bb)) << ","
            << fmt_g12(r.b >= 2 ? n / (bb * bb * std::log(bb)) : 0.0) << ",";
        if (r.rhs > 0)
            out << fmt_g12(r.rhs) << "," << fmt_g12(n / r.rhs);
        else
            out << ",";
        out << "," << r.method;
        if (include_elapsed) out << "," << fmt_g12(r.elapsed);
        out << "\n";
    }
    return out.str();
}

}  // namespace quadrics
