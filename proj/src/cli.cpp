#include "ashjb/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "ashjb/boundary_values.hpp"
#include "ashjb/credible_band.hpp"
#include "ashjb/errors.hpp"

namespace ashjb {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---- config parsing ----

double num(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
    return v;
}

int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
    return j.get<int>();
}

std::string str(const json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path, "expected a string");
    return j.get<std::string>();
}

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
}

void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }))
            throw ConfigError(path + "." + it.key(), "unknown field");
    }
}

QuadraticCost parse_cost(const json& j, const std::string& path) {
    require_object(j, path);
    reject_unknown(j, path, {"curvature", "linear", "constant"});
    QuadraticCost c;
    if (j.contains("curvature")) c.curvature = num(j["curvature"], path + ".curvature");
    if (j.contains("linear")) c.linear = num(j["linear"], path + ".linear");
    if (j.contains("constant")) c.constant = num(j["constant"], path + ".constant");
    return c;
}

void parse_model(const json& j, RunConfig& rc) {
    const std::string P = "model";
    require_object(j, P);
    reject_unknown(j, P,
                   {"cost_kind", "kappa", "horizon_T", "a_upper", "a_lower", "action_min", "action_max", "cost_params",
                    "r_pooled", "r_type", "prior_p0"});
    const CostKind kind = j.contains("cost_kind") ? cost_kind_from_string(str(j["cost_kind"], P + ".cost_kind"))
                                                  : CostKind::dominated;
    const double kappa = j.contains("kappa") ? num(j["kappa"], P + ".kappa") : 0.1;
    const double T = j.contains("horizon_T") ? num(j["horizon_T"], P + ".horizon_T") : 2.0;
    ModelSpec s;
    if (kind == CostKind::custom_quadratic) {
        for (const char* k : {"a_upper", "a_lower"})
            if (j.contains(k)) throw ConfigError(P + "." + k, "only used by the preset cost kinds");
        s.cost_kind = kind;
        s.kappa = kappa;
        s.horizon_T = T;
        if (!j.contains("cost_params")) throw ConfigError(P + ".cost_params", "required for custom_quadratic");
        const json& cp = j["cost_params"];
        if (!cp.is_array() || cp.size() != 2) throw ConfigError(P + ".cost_params", "expected an array of two costs");
        for (int th = 0; th < 2; ++th) s.cost_params[th] = parse_cost(cp[th], P + ".cost_params[" + std::to_string(th) + "]");
        for (const char* k : {"action_min", "action_max"})
            if (!j.contains(k)) throw ConfigError(P + "." + k, "required for custom_quadratic");
        s.action_min = num(j["action_min"], P + ".action_min");
        s.action_max = num(j["action_max"], P + ".action_max");
    } else {
        for (const char* k : {"action_min", "action_max", "cost_params"})
            if (j.contains(k)) throw ConfigError(P + "." + k, "fixed by cost_kind " + to_string(kind));
        rc.a_upper = j.contains("a_upper") ? num(j["a_upper"], P + ".a_upper") : 1.0;
        if (!(rc.a_upper > 0.0)) throw ConfigError(P + ".a_upper", "must be > 0");
        if (kind == CostKind::dominated) {
            if (j.contains("a_lower")) throw ConfigError(P + ".a_lower", "the dominated family has a_lower = 0");
            rc.a_lower = 0.0;
            s = ModelSpec::dominated(rc.a_upper, kappa, T);
        } else {
            rc.a_lower = j.contains("a_lower") ? num(j["a_lower"], P + ".a_lower") : -1.0;
            if (!(rc.a_lower < 0.0)) throw ConfigError(P + ".a_lower", "must be < 0");
            s = ModelSpec::nondominated(rc.a_upper, rc.a_lower, kappa, T);
        }
    }
    if (j.contains("r_pooled")) s.r_pooled = num(j["r_pooled"], P + ".r_pooled");
    if (j.contains("r_type")) {
        const json& r = j["r_type"];
        if (!r.is_array() || r.size() != 2) throw ConfigError(P + ".r_type", "expected [R0, R1]");
        s.r_type = {num(r[0], P + ".r_type[0]"), num(r[1], P + ".r_type[1]")};
    }
    if (j.contains("prior_p0")) s.prior_p0 = num(j["prior_p0"], P + ".prior_p0");
    s.validate();
    rc.model = s;
}

void parse_grid(const json& j, RunConfig& rc) {
    const std::string P = "grid";
    require_object(j, P);
    reject_unknown(j, P,
                   {"n_time", "n_gap", "n_belief", "control_trunc_K", "n_control", "refine_iters",
                    "terminal_layer_eps", "cfl_safety"});
    GridSpec& g = rc.grid;
    if (j.contains("n_time")) g.n_time = integer(j["n_time"], P + ".n_time");
    if (j.contains("n_gap")) g.n_gap = integer(j["n_gap"], P + ".n_gap");
    if (j.contains("n_belief")) g.n_belief = integer(j["n_belief"], P + ".n_belief");
    if (j.contains("control_trunc_K")) g.control_trunc_K = num(j["control_trunc_K"], P + ".control_trunc_K");
    if (j.contains("n_control")) g.n_control = integer(j["n_control"], P + ".n_control");
    if (j.contains("refine_iters")) g.refine_iters = integer(j["refine_iters"], P + ".refine_iters");
    if (j.contains("terminal_layer_eps")) g.terminal_layer_eps = num(j["terminal_layer_eps"], P + ".terminal_layer_eps");
    if (j.contains("cfl_safety")) g.cfl_safety = num(j["cfl_safety"], P + ".cfl_safety");
}

void parse_sim(const json& j, RunConfig& rc) {
    const std::string P = "sim";
    require_object(j, P);
    reject_unknown(j, P, {"n_paths", "dt", "seed", "clamp_eps", "initial", "n_export"});
    SimConfig& s = rc.sim;
    if (j.contains("n_paths")) s.n_paths = integer(j["n_paths"], P + ".n_paths");
    if (j.contains("dt")) s.dt = num(j["dt"], P + ".dt");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ConfigError(P + ".seed", "expected a non-negative integer");
        s.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("clamp_eps")) s.clamp_eps = num(j["clamp_eps"], P + ".clamp_eps");
    if (j.contains("n_export")) rc.n_export = integer(j["n_export"], P + ".n_export");
    if (j.contains("initial")) {
        const json& in = j["initial"];
        const std::string Q = P + ".initial";
        require_object(in, Q);
        reject_unknown(in, Q, {"x0", "y0", "y1", "p0", "promises"});
        if (in.contains("x0")) s.x0 = num(in["x0"], Q + ".x0");
        if (in.contains("p0")) s.p0 = num(in["p0"], Q + ".p0");
        const bool has_y = in.contains("y0") || in.contains("y1");
        std::string mode = in.contains("promises") ? str(in["promises"], Q + ".promises") : (has_y ? "given" : "argmax");
        if (mode != "argmax" && mode != "given") throw ConfigError(Q + ".promises", "expected 'argmax' or 'given'");
        rc.sim_at_argmax = mode == "argmax";
        if (rc.sim_at_argmax && has_y) throw ConfigError(Q + ".promises", "'argmax' conflicts with explicit y0/y1");
        if (!rc.sim_at_argmax) {
            if (!in.contains("y0") || !in.contains("y1")) throw ConfigError(Q, "given promises need both y0 and y1");
            s.y0 = num(in["y0"], Q + ".y0");
            s.y1 = num(in["y1"], Q + ".y1");
        }
    }
    s.validate();
    if (rc.n_export < 0 || rc.n_export > s.n_paths) throw ConfigError(P + ".n_export", "must lie in [0, n_paths]");
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set", "expected key=value, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    json* cur = &doc;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t n = 0; n < parts.size(); ++n) {
        const std::string& p = parts[n];
        if (p.empty()) throw ConfigError(key, "empty path component");
        if (cur->is_array()) {
            std::size_t idx = 0;
            try {
                idx = std::stoul(p);
            } catch (const std::exception&) {
                throw ConfigError(key, "array index expected at '" + p + "'");
            }
            if (idx >= cur->size()) throw ConfigError(key, "array index out of range");
            cur = &(*cur)[idx];
        } else {
            if (cur->is_null()) *cur = json::object();
            if (!cur->is_object()) throw ConfigError(key, "'" + p + "' indexes into a scalar");
            cur = &(*cur)[p];
        }
    }
    *cur = value;
}

// ---- output helpers ----

class CsvWriter {
public:
    CsvWriter(const std::string& path, std::initializer_list<const char*> header) : out_(path, std::ios::binary) {
        if (!out_) throw SolverError("cannot write " + path);
        bool first = true;
        for (const char* h : header) {
            if (!first) out_ << ',';
            out_ << h;
            first = false;
        }
        out_ << '\n';
    }
    CsvWriter& row(std::initializer_list<double> values) {
        bool first = true;
        for (double v : values) {
            if (!first) out_ << ',';
            out_ << format_number(v);
            first = false;
        }
        out_ << '\n';
        return *this;
    }
    void close() {
        out_.close();
        if (!out_) throw SolverError("write failed");
    }

private:
    std::ofstream out_;
};

// Rounds to the printed precision so that summary values agree with the CSVs.
double rounded(double v) { return std::isfinite(v) ? std::stod(format_number(v)) : v; }

bool wants(const RunConfig& c, const char* name) { return c.emit.count(name) > 0; }

void add_check(RunResult& r, ojson& checks, const std::string& name, bool pass, const std::string& detail,
               ojson extra = ojson::object()) {
    r.checks.push_back({name, pass, detail});
    extra["pass"] = pass;
    extra["detail"] = detail;
    checks[name] = std::move(extra);
}

std::string fmt(const char* f, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

ojson constants_json(const ModelSpec& spec) {
    const auto [a_lo, a_hi] = extremal_gaps(spec);
    const StructuralConstants k = structural_constants(spec);
    const AprioriConstants ac = apriori_constants(spec);
    ojson c;
    c["a_lower"] = rounded(a_lo);
    c["a_upper"] = rounded(a_hi);
    c["C0"] = rounded(saturation_threshold(spec));
    c["N0"] = rounded(k.n0);
    c["C"] = rounded(k.growth);
    c["rho"] = rounded(k.rho);
    c["C_upper"] = rounded(ac.c_upper);
    c["C_lower"] = rounded(ac.c_lower);
    return c;
}

ojson model_json(const RunConfig& rc) {
    const ModelSpec& s = rc.model;
    ojson m;
    m["cost_kind"] = to_string(s.cost_kind);
    m["kappa"] = s.kappa;
    m["horizon_T"] = s.horizon_T;
    m["action_min"] = rounded(s.action_min);
    m["action_max"] = rounded(s.action_max);
    m["cost_params"] = ojson::array();
    for (const auto& c : s.cost_params)
        m["cost_params"].push_back({{"curvature", c.curvature}, {"linear", c.linear}, {"constant", c.constant}});
    m["r_pooled"] = s.r_pooled;
    m["r_type"] = {s.r_type[0], s.r_type[1]};
    m["prior_p0"] = s.prior_p0;
    return m;
}

ojson grid_json(const ModelSpec& spec, const GridSpec& g) {
    ojson j;
    j["n_time"] = g.n_time;
    j["n_gap"] = g.n_gap;
    j["n_belief"] = g.n_belief;
    j["control_trunc_K"] = g.control_trunc_K;
    j["n_control"] = g.n_control;
    j["refine_iters"] = g.refine_iters;
    j["terminal_layer_eps"] = g.terminal_layer_eps;
    j["cfl_safety"] = g.cfl_safety;
    j["dt"] = rounded(g.time_step(spec));
    return j;
}

ojson cfl_json(const ModelSpec& spec, const GridSpec& g) {
    ojson j;
    j["max_abs_action"] = rounded(std::max(std::abs(spec.action_min), std::abs(spec.action_max)));
    j["dt"] = rounded(g.time_step(spec));
    j["max_admissible_dt"] = rounded(max_admissible_dt(spec, g));
    j["pass"] = g.time_step(spec) <= max_admissible_dt(spec, g);
    return j;
}

struct FieldChecks {
    AprioriReport apriori;
    double min_convexity;
    double boundary_mismatch;
};

FieldChecks field_checks(const ValueField& field, const BoundaryValues& bvals) {
    FieldChecks fc{check_apriori(field.spec, field), 0.0, 0.0};
    const int nb = field.n_belief(), ng = field.n_gap();
    for (int k = 0; k < field.n_time(); ++k) {
        const double t = field.times[k];
        for (int i = 0; i < ng; ++i)
            for (int j = 1; j + 1 < nb; ++j)
                fc.min_convexity =
                    std::min(fc.min_convexity, field.at(k, i, j + 1) - 2.0 * field.at(k, i, j) + field.at(k, i, j - 1));
        for (int j = 0; j < nb; ++j) {
            const double p = field.p(j);
            fc.boundary_mismatch = std::max({fc.boundary_mismatch, std::abs(field.at(k, 0, j) - bvals.wunder(t, p)),
                                             std::abs(field.at(k, ng - 1, j) - bvals.wbar(t, p))});
        }
    }
    return fc;
}

constexpr double kConvexityTol = 1e-3;

void record_field_checks(RunResult& r, ojson& checks, ojson& tol, const ValueField& field, const BoundaryValues& bvals) {
    const FieldChecks fc = field_checks(field, bvals);
    const double btol = 1e-6 * (1.0 + field.max_abs());
    tol["apriori"] = rounded(fc.apriori.tolerance);
    tol["convexity"] = kConvexityTol;
    tol["boundary_columns"] = rounded(btol);
    tol["scheme_resolution"] = rounded(field.resolution());
    add_check(r, checks, "apriori_sandwich", fc.apriori.pass,
              fmt("worst excess above %.3g, below %.3g", fc.apriori.worst_upper, fc.apriori.worst_lower),
              {{"worst_upper", rounded(fc.apriori.worst_upper)}, {"worst_lower", rounded(fc.apriori.worst_lower)}});
    add_check(r, checks, "convexity_in_belief", fc.min_convexity >= -kConvexityTol,
              fmt("min second difference %.3g", fc.min_convexity), {{"min_second_difference", rounded(fc.min_convexity)}});
    add_check(r, checks, "boundary_columns", fc.boundary_mismatch <= btol, fmt("max mismatch %.3g", fc.boundary_mismatch),
              {{"max_mismatch", rounded(fc.boundary_mismatch)}});
}

void ordering_check(RunResult& r, ojson& checks, const std::vector<PrincipalReport>& values,
                    const std::vector<ScreeningReport>& screening, double tol) {
    double worst = -1e300;
    int bad = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double lo = values[i].v_conditional - screening[i].value;
        const double hi = screening[i].value - values[i].v_unconditional;
        worst = std::max({worst, lo, hi});
        if (lo > tol || hi > tol) ++bad;
    }
    add_check(r, checks, "ordering", bad == 0,
              fmt("%.0f of the priors violate v_c <= v_s <= v_uc; worst excess %.3g", bad, worst),
              {{"violations", bad}, {"worst_excess", rounded(worst)}});
}

void write_json(const std::string& path, const ojson& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SolverError("cannot write " + path);
    out << j.dump(2) << '\n';
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

template <class T>
std::vector<T> read_rows(const std::string& path, const std::string& header, std::size_t ncol,
                         T (*make)(const std::vector<double>&)) {
    std::ifstream in(path);
    if (!in) throw SolverError("missing upstream output " + path);
    std::string line;
    if (!std::getline(in, line) || line != header) throw SolverError(path + ": unexpected header");
    std::vector<T> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != ncol) throw SolverError(path + ": wrong column count");
        std::vector<double> v(ncol);
        for (std::size_t c = 0; c < ncol; ++c) v[c] = std::stod(cells[c]);
        rows.push_back(make(v));
    }
    return rows;
}

const char* kFieldHeader = "t,s,p,y,w,z0_star,z1_star,boundary_flag";
const char* kValuesHeader = "p0,v_c,y0_c,y1_c,v_uc,y0_uc,y1_uc";
const char* kScreeningHeader = "p0,v_s,y0,y1c,y0c,y1";

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void run_impl(const RunConfig& rc, std::ostream& log, RunResult& res) {
    const ModelSpec& spec = rc.model;
    spec.validate();
    rc.grid.validate(spec);
    rc.sim.validate();
    for (std::size_t i = 0; i < rc.sweep.size(); ++i)
        if (!(rc.sweep[i] > 0.0 && rc.sweep[i] < 1.0))
            throw ConfigError("sweep[" + std::to_string(i) + "]", "prior must lie strictly inside (0,1)");
    std::error_code ec;
    fs::create_directories(rc.output_dir, ec);
    if (ec || !fs::is_directory(rc.output_dir)) throw ConfigError("output_dir", "cannot create '" + rc.output_dir + "'");
    auto out_path = [&](const char* name) {
        const std::string p = (fs::path(rc.output_dir) / name).string();
        res.outputs.push_back(p);
        return p;
    };

    const bool want_band = wants(rc, "band"), want_boundary = wants(rc, "boundary"), want_field = wants(rc, "field");
    const bool want_values = wants(rc, "values"), want_screen = wants(rc, "screening"), want_cmp = wants(rc, "compare");
    const bool want_traj = wants(rc, "trajectories"), want_sim = wants(rc, "simulate") || want_traj;
    const bool need_field = want_field || want_values || want_cmp || want_sim;
    const bool need_values = want_values || want_cmp;
    const bool need_screen = want_screen || want_cmp;
    const bool need_bvals = want_boundary || need_field || need_screen;

    ojson summary;
    summary["model"] = model_json(rc);
    summary["grid"] = grid_json(spec, rc.grid);
    summary["constants"] = constants_json(spec);
    summary["cfl"] = cfl_json(spec, rc.grid);
    ojson tol, checks = ojson::object(), runtime = ojson::object();
    tol["ordering"] = rc.ordering_tol;

    const CredibleBand band = make_band(spec, rc.grid.control_trunc_K);
    {
        const auto [a_lo, a_hi] = extremal_gaps(spec);
        if (spec.cost_kind != CostKind::custom_quadratic) {
            const double d = std::max(std::abs(a_lo - rc.a_lower), std::abs(a_hi - rc.a_upper));
            add_check(res, checks, "extremal_gaps_match_input", d <= 1e-9 * (1.0 + rc.a_upper - rc.a_lower),
                      fmt("max deviation %.3g", d));
        }
    }
    if (want_band) {
        const auto t0 = Clock::now();
        write_band_csv(out_path("band.csv"), spec, band, rc.band_samples);
        const double wT = std::max(std::abs(band.lower(spec.horizon_T)), std::abs(band.upper(spec.horizon_T)));
        add_check(res, checks, "band_terminal_collapse", wT <= 1e-12, fmt("max |W(T)| %.3g", wT));
        runtime["band"] = rounded(seconds_since(t0));
        log << "[band] wrote band.csv\n";
    }

    std::optional<BoundaryValues> bvals;
    if (need_bvals) {
        const auto t0 = Clock::now();
        bvals = make_boundary_values(spec, rc.grid);
        runtime["boundary"] = rounded(seconds_since(t0));
        if (want_boundary) {
            write_boundary_csv(out_path("boundary.csv"), *bvals, rc.band_samples, spec.prior_p0);
            double wT = 0.0;
            for (int j = 0; j <= 10; ++j)
                wT = std::max({wT, std::abs(bvals->wbar(spec.horizon_T, 0.1 * j)),
                               std::abs(bvals->wunder(spec.horizon_T, 0.1 * j))});
            add_check(res, checks, "boundary_terminal_zero", wT <= 1e-12, fmt("max |w(T)| %.3g", wT));
            log << "[boundary] wrote boundary.csv\n";
        }
    }

    std::optional<InteriorSolution> sol;
    if (need_field) {
        log << "[solve] interior " << rc.grid.n_time << "x" << rc.grid.n_gap << "x" << rc.grid.n_belief << "\n";
        sol = solve_interior(spec, rc.grid, *bvals);
        runtime["solve"] = rounded(sol->runtime_seconds);
        record_field_checks(res, checks, tol, sol->field, *bvals);
        if (want_field) {
            write_field_csv(out_path("field.csv"), *sol);
            log << "[solve] wrote field.csv\n";
        }
    }

    std::vector<PrincipalReport> values;
    if (need_values) {
        const auto t0 = Clock::now();
        values = sweep_prior(spec, sol->field, rc.sweep);
        runtime["values"] = rounded(seconds_since(t0));
        int bad = 0;
        for (const auto& v : values)
            if (v.v_conditional > v.v_unconditional + rc.ordering_tol) ++bad;
        add_check(res, checks, "conditional_below_unconditional", bad == 0, fmt("%.0f violations", bad));
        if (want_values) {
            write_values_csv(out_path("values.csv"), values);
            log << "[values] wrote values.csv\n";
        }
    }

    std::vector<ScreeningReport> screening;
    if (need_screen) {
        const auto t0 = Clock::now();
        const ScreeningSolution ss = solve_screening(spec, rc.grid, *bvals);
        screening.reserve(rc.sweep.size());
        for (double p0 : rc.sweep) screening.push_back(v_screening(spec, ss, p0));
        runtime["screen"] = rounded(seconds_since(t0));
        if (want_screen) {
            write_screening_csv(out_path("screening.csv"), screening);
            log << "[screen] wrote screening.csv\n";
        }
    }

    if (want_sim) {
        const auto t0 = Clock::now();
        SimConfig sim = rc.sim;
        if (rc.sim_at_argmax) {
            const GapOptimum g = v_conditional(spec, sol->field, sim.p0);
            sim.y0 = g.y0;
            sim.y1 = g.y1;
        }
        const PathBundle b = rollout_policy(spec, sol->field, sol->policy, sim);
        const double v_pde = value_sc(sol->field, 0.0, sim.x0, sim.y0, sim.y1, sim.p0);
        const double scale = std::max(1.0, sol->field.max_abs());
        const double mc_tol = 3.0 * b.payoff_se + 5.0 * sol->field.resolution() * scale;
        tol["pde_mc"] = rounded(mc_tol);
        tol["large_violation_fraction"] = 0.01;
        ojson sj;
        sj["p0"] = sim.p0;
        sj["y0"] = rounded(sim.y0);
        sj["y1"] = rounded(sim.y1);
        sj["n_paths"] = b.n_paths;
        sj["n_steps"] = b.n_steps;
        sj["payoff_mean"] = rounded(b.payoff_mean);
        sj["payoff_se"] = rounded(b.payoff_se);
        sj["pde_value"] = rounded(v_pde);
        sj["max_excursion"] = rounded(b.max_excursion);
        sj["violation_fraction"] = rounded(b.violation_fraction);
        sj["large_violation_fraction"] = rounded(b.large_violation_fraction);
        sj["hit_fraction"] = rounded(b.hit_fraction);
        sj["terminal_gap_mean"] = rounded(b.terminal_gap_mean);
        sj["terminal_gap_max"] = rounded(b.terminal_gap_max);
        sj["belief_min"] = rounded(b.belief_min);
        sj["belief_max"] = rounded(b.belief_max);
        sj["terminal_belief_mean"] = rounded(b.terminal_belief_mean);
        sj["terminal_belief_se"] = rounded(b.terminal_belief_se);
        summary["simulate"] = sj;
        const double dev = std::abs(b.payoff_mean - v_pde);
        add_check(res, checks, "pde_mc_agreement", dev <= mc_tol, fmt("|MC - PDE| = %.3g, tolerance %.3g", dev, mc_tol));
        add_check(res, checks, "constraint_soundness", b.large_violation_fraction < 0.01,
                  fmt("large excursion fraction %.3g", b.large_violation_fraction));
        add_check(res, checks, "belief_interior", b.belief_min > 0.0 && b.belief_max < 1.0,
                  fmt("belief range [%.3g, %.3g]", b.belief_min, b.belief_max));
        if (want_traj && rc.n_export > 0) {
            write_trajectories_csv(out_path("trajectories.csv"), trajectory_export(spec, sol->field, sol->policy, sim, rc.n_export));
            log << "[simulate] wrote trajectories.csv\n";
        }
        runtime["simulate"] = rounded(seconds_since(t0));
    }

    if (want_cmp) {
        ordering_check(res, checks, values, screening, rc.ordering_tol);
        write_compare_csv(out_path("compare.csv"), values, screening, rc.ordering_tol);
        log << "[compare] wrote compare.csv\n";
    }

    summary["tolerances"] = tol;
    summary["runtime_seconds"] = runtime;
    summary["checks"] = checks;
    bool all = true;
    for (const auto& c : res.checks) all = all && c.pass;
    summary["all_checks_pass"] = all;
    if (wants(rc, "summary")) write_json(out_path("summary.json"), summary);
    for (const auto& c : res.checks) log << (c.pass ? "[pass] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
    if (!all) {
        res.exit_code = kExitCheck;
        res.message = "acceptance checks failed";
    }
}

template <class F>
RunResult guarded(F&& body, std::ostream& log) {
    RunResult res;
    try {
        body(res);
    } catch (const ConfigError& e) {
        res.exit_code = kExitConfig;
        res.message = std::string("config error at ") + e.what();
    } catch (const std::exception& e) {
        res.exit_code = kExitSolver;
        res.message = e.what();
    }
    if (!res.message.empty() && res.exit_code != kExitOk) log << "error: " << res.message << "\n";
    return res;
}

}  // namespace

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

const std::set<std::string>& known_emits() {
    static const std::set<std::string> names{"band",      "boundary", "field",        "values", "screening",
                                             "compare",   "simulate", "trajectories", "summary"};
    return names;
}

RunConfig parse_config(const std::string& json_text, const std::vector<std::string>& overrides) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("<root>", "expected an object");
    for (const auto& o : overrides) apply_override(doc, o);
    reject_unknown(doc, "<root>", {"model", "grid", "sim", "sweep", "output_dir", "emit", "tolerances"});
    RunConfig rc;
    if (doc.contains("model")) parse_model(doc["model"], rc);
    else rc.model.validate();
    if (doc.contains("grid")) parse_grid(doc["grid"], rc);
    rc.grid.validate(rc.model);
    rc.sim.p0 = rc.model.prior_p0;
    if (doc.contains("sim")) parse_sim(doc["sim"], rc);
    if (doc.contains("sweep")) {
        const json& s = doc["sweep"];
        if (!s.is_array() || s.empty()) throw ConfigError("sweep", "expected a non-empty array of priors");
        rc.sweep.clear();
        for (std::size_t i = 0; i < s.size(); ++i) {
            const std::string p = "sweep[" + std::to_string(i) + "]";
            const double v = num(s[i], p);
            if (!(v > 0.0 && v < 1.0)) throw ConfigError(p, "prior must lie strictly inside (0,1)");
            rc.sweep.push_back(v);
        }
    }
    if (doc.contains("output_dir")) rc.output_dir = str(doc["output_dir"], "output_dir");
    if (doc.contains("emit")) {
        const json& e = doc["emit"];
        if (!e.is_array()) throw ConfigError("emit", "expected an array of names");
        rc.emit.clear();
        for (std::size_t i = 0; i < e.size(); ++i) {
            const std::string p = "emit[" + std::to_string(i) + "]";
            const std::string name = str(e[i], p);
            if (!known_emits().count(name)) throw ConfigError(p, "unknown output '" + name + "'");
            rc.emit.insert(name);
        }
    }
    if (doc.contains("tolerances")) {
        const json& t = doc["tolerances"];
        require_object(t, "tolerances");
        reject_unknown(t, "tolerances", {"ordering"});
        if (t.contains("ordering")) {
            rc.ordering_tol = num(t["ordering"], "tolerances.ordering");
            if (!(rc.ordering_tol >= 0.0)) throw ConfigError("tolerances.ordering", "must be >= 0");
        }
    }
    return rc;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), overrides);
}

std::string preset_config(const std::string& name) {
    if (name == "dominated")
        return R"({
  "model": {"cost_kind": "dominated", "kappa": 0.1, "horizon_T": 2.0, "a_upper": 1.0,
            "r_pooled": 0.0, "r_type": [0.0, 0.0], "prior_p0": 0.5},
  "grid": {"n_time": 100, "n_gap": 80, "n_belief": 40, "control_trunc_K": 6.0, "n_control": 41,
           "refine_iters": 20, "terminal_layer_eps": 0.01, "cfl_safety": 0.5},
  "sim": {"n_paths": 10000, "dt": 0.001, "seed": 20240601, "clamp_eps": 1e-12, "n_export": 5,
          "initial": {"x0": 0.0, "p0": 0.5, "promises": "argmax"}},
  "output_dir": "out/dominated"
}
)";
    if (name == "nondominated")
        return R"({
  "model": {"cost_kind": "nondominated", "kappa": 0.1, "horizon_T": 2.0, "a_upper": 1.0, "a_lower": -1.0,
            "r_pooled": 0.0, "r_type": [0.0, 0.0], "prior_p0": 0.5},
  "grid": {"n_time": 100, "n_gap": 80, "n_belief": 40, "control_trunc_K": 6.0, "n_control": 41,
           "refine_iters": 20, "terminal_layer_eps": 0.01, "cfl_safety": 0.5},
  "sim": {"n_paths": 10000, "dt": 0.001, "seed": 20240601, "clamp_eps": 1e-12, "n_export": 5,
          "initial": {"x0": 0.0, "p0": 0.5, "promises": "argmax"}},
  "output_dir": "out/nondominated"
}
)";
    throw ConfigError("preset", "unknown preset '" + name + "'");
}

RunResult run(const RunConfig& config, std::ostream& log) {
    return guarded([&](RunResult& r) { run_impl(config, log, r); }, log);
}

RunResult check_only(const RunConfig& rc, std::ostream& log) {
    return guarded(
        [&](RunResult& res) {
            const ModelSpec& spec = rc.model;
            spec.validate();
            rc.grid.validate(spec);
            const std::string dir = rc.output_dir;
            const ValueField field = read_field_csv((fs::path(dir) / "field.csv").string(), spec, rc.grid);
            const BoundaryValues bvals = make_boundary_values(spec, rc.grid);
            ojson summary, tol, checks = ojson::object();
            summary["check_only"] = true;
            summary["model"] = model_json(rc);
            summary["grid"] = grid_json(spec, rc.grid);
            summary["constants"] = constants_json(spec);
            tol["ordering"] = rc.ordering_tol;
            record_field_checks(res, checks, tol, field, bvals);
            const fs::path vpath = fs::path(dir) / "values.csv", spath = fs::path(dir) / "screening.csv";
            if (fs::exists(vpath) && fs::exists(spath)) {
                const auto values = read_rows<PrincipalReport>(vpath.string(), kValuesHeader, 7, [](const std::vector<double>& v) {
                    PrincipalReport r;
                    r.prior_p0 = v[0];
                    r.v_conditional = v[1];
                    r.v_unconditional = v[4];
                    return r;
                });
                const auto screening = read_rows<ScreeningReport>(spath.string(), kScreeningHeader, 6, [](const std::vector<double>& v) {
                    ScreeningReport r;
                    r.prior_p0 = v[0];
                    r.value = v[1];
                    return r;
                });
                if (values.size() != screening.size()) throw SolverError("values.csv and screening.csv differ in length");
                for (std::size_t i = 0; i < values.size(); ++i)
                    if (values[i].prior_p0 != screening[i].prior_p0)
                        throw SolverError("values.csv and screening.csv use different priors");
                ordering_check(res, checks, values, screening, rc.ordering_tol);
            }
            summary["tolerances"] = tol;
            summary["checks"] = checks;
            bool all = true;
            for (const auto& c : res.checks) all = all && c.pass;
            summary["all_checks_pass"] = all;
            write_json((fs::path(dir) / "check_summary.json").string(), summary);
            res.outputs.push_back((fs::path(dir) / "check_summary.json").string());
            for (const auto& c : res.checks) log << (c.pass ? "[pass] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
            if (!all) {
                res.exit_code = kExitCheck;
                res.message = "acceptance checks failed";
            }
        },
        log);
}

void write_band_csv(const std::string& path, const ModelSpec& spec, const CredibleBand& band, int n_samples) {
    if (n_samples < 2) throw DomainError("write_band_csv: need at least two samples");
    CsvWriter w(path, {"t", "W_lower", "W_upper"});
    for (int k = 0; k < n_samples; ++k) {
        const double t = k == n_samples - 1 ? spec.horizon_T : spec.horizon_T * k / (n_samples - 1);
        w.row({t, band.lower(t), band.upper(t)});
    }
    w.close();
}

void write_boundary_csv(const std::string& path, const BoundaryValues& bvals, int n_samples, double p) {
    if (n_samples < 2) throw DomainError("write_boundary_csv: need at least two samples");
    const double T = bvals.spec.horizon_T;
    CsvWriter w(path, {"t", "wbar", "wunder", "v0_upper", "v0_lower", "v1_upper", "v1_lower"});
    for (int k = 0; k < n_samples; ++k) {
        const double t = k == n_samples - 1 ? T : T * k / (n_samples - 1);
        w.row({t, bvals.wbar(t, p), bvals.wunder(t, p), bvals.screening_upper(TypeId::zero, t),
               bvals.screening_lower(TypeId::zero, t), bvals.screening_upper(TypeId::one, t),
               bvals.screening_lower(TypeId::one, t)});
    }
    w.close();
}

void write_field_csv(const std::string& path, const InteriorSolution& sol) {
    const ValueField& f = sol.field;
    const PolicyField& pol = sol.policy;
    CsvWriter w(path, {"t", "s", "p", "y", "w", "z0_star", "z1_star", "boundary_flag"});
    for (int k = 0; k < f.n_time(); ++k)
        for (int i = 0; i < f.n_gap(); ++i)
            for (int j = 0; j < f.n_belief(); ++j) {
                const std::size_t o = f.offset(k, i, j);
                w.row({f.times[k], f.s(i), f.p(j), f.y(k, i), f.values[o], pol.z0_star[o], pol.z1_star[o],
                       static_cast<double>(static_cast<int>(pol.boundary_flag[i]))});
            }
    w.close();
}

void write_values_csv(const std::string& path, const std::vector<PrincipalReport>& rows) {
    CsvWriter w(path, {"p0", "v_c", "y0_c", "y1_c", "v_uc", "y0_uc", "y1_uc"});
    for (const auto& r : rows)
        w.row({r.prior_p0, r.v_conditional, r.argmax_conditional[0], r.argmax_conditional[1], r.v_unconditional,
               r.argmax_unconditional[0], r.argmax_unconditional[1]});
    w.close();
}

void write_screening_csv(const std::string& path, const std::vector<ScreeningReport>& rows) {
    CsvWriter w(path, {"p0", "v_s", "y0", "y1c", "y0c", "y1"});
    for (const auto& r : rows)
        w.row({r.prior_p0, r.value, r.argmax_quad[0], r.argmax_quad[1], r.argmax_quad[2], r.argmax_quad[3]});
    w.close();
}

void write_compare_csv(const std::string& path, const std::vector<PrincipalReport>& values,
                       const std::vector<ScreeningReport>& screening, double tol) {
    if (values.size() != screening.size()) throw SolverError("compare: value and screening sweeps differ in length");
    CsvWriter w(path, {"p0", "v_c", "v_s", "v_uc", "ordering_violation"});
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto& v = values[i];
        const double vs = screening[i].value;
        const bool bad = v.v_conditional > vs + tol || vs > v.v_unconditional + tol;
        w.row({v.prior_p0, v.v_conditional, vs, v.v_unconditional, bad ? 1.0 : 0.0});
    }
    w.close();
}

void write_trajectories_csv(const std::string& path, const std::vector<TrajectoryRow>& rows) {
    CsvWriter w(path, {"path", "t", "X", "p", "Y0", "Y1", "W_lower", "W_upper", "z0", "z1", "boundary_flag"});
    for (const auto& r : rows)
        w.row({static_cast<double>(r.path), r.t, r.x, r.p, r.y0, r.y1, r.w_lower, r.w_upper, r.z0, r.z1,
               static_cast<double>(static_cast<int>(r.boundary_flag))});
    w.close();
}

ValueField read_field_csv(const std::string& path, const ModelSpec& spec, const GridSpec& grid) {
    std::ifstream in(path);
    if (!in) throw SolverError("missing upstream output " + path);
    std::string line;
    if (!std::getline(in, line) || line != kFieldHeader) throw SolverError(path + ": unexpected header");
    ValueField f;
    f.spec = spec;
    f.grid = grid;
    f.band = make_band(spec, grid.control_trunc_K);
    const std::size_t n = static_cast<std::size_t>(grid.n_time) * grid.n_gap * grid.n_belief;
    f.values.reserve(n);
    f.times.reserve(grid.n_time);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 8) throw SolverError(path + ": wrong column count");
        if (f.values.size() % (static_cast<std::size_t>(grid.n_gap) * grid.n_belief) == 0)
            f.times.push_back(std::stod(cells[0]));
        f.values.push_back(std::stod(cells[4]));
    }
    if (f.values.size() != n)
        throw ConfigError("grid", "field.csv has " + std::to_string(f.values.size()) + " rows, grid expects " +
                                      std::to_string(n));
    return f;
}

}  // namespace ashjb
