#include "ashjb/boundary_values.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ashjb/errors.hpp"
#include "ashjb/generator.hpp"

namespace ashjb {

namespace {

constexpr double kGolden = 0.6180339887498949;

double golden_max(const std::function<double(double)>& f, double a, double b, double& best_x) {
    double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 80 && b - a > 1e-13 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = f(x1);
        }
    }
    best_x = f1 >= f2 ? x1 : x2;
    return std::max(f1, f2);
}

constexpr int kScreeningIntervals = 2048;

// Cumulative Simpson from T backward; returns values at the nodes t_k = k·T/M.
std::vector<double> cumulative_from_T(const std::function<double(double)>& rate, double T, int M) {
    const double h = T / M;
    std::vector<double> out(M + 1, 0.0);
    double prev = rate(T);
    for (int k = M - 1; k >= 0; --k) {
        const double a = k * h;
        const double fa = rate(a), fm = rate(a + 0.5 * h);
        out[k] = out[k + 1] + h / 6.0 * (fa + 4.0 * fm + prev);
        prev = fa;
    }
    return out;
}

double linear_lookup(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const double h = xs[1] - xs[0];
    const auto i = std::min<std::size_t>(static_cast<std::size_t>((x - xs.front()) / h), xs.size() - 2);
    const double w = (x - xs[i]) / h;
    return (1.0 - w) * ys[i] + w * ys[i + 1];
}

double boundary_reward(const ModelSpec& spec, double z, double p, double discount) {
    return running_reward(control_response(spec, z, z), p, discount);
}

void fill_screening_tables(BoundaryValues& bv) {
    const double T = bv.spec.horizon_T;
    bv.screening_times.resize(kScreeningIntervals + 1);
    for (int k = 0; k <= kScreeningIntervals; ++k) bv.screening_times[k] = T * k / kScreeningIntervals;
    for (TypeId th : {TypeId::zero, TypeId::one}) {
        const int i = index(th);
        bv.screening_upper_table[i] = cumulative_from_T(
            [&](double s) { return screening_boundary_rate(bv.spec, bv.band.level_upper, th, s); }, T,
            kScreeningIntervals);
        bv.screening_lower_table[i] = cumulative_from_T(
            [&](double s) { return screening_boundary_rate(bv.spec, bv.band.level_lower, th, s); }, T,
            kScreeningIntervals);
    }
}

}  // namespace

LevelMax maximize_on_level_set(const IntervalSet& set, const std::function<double(double)>& f, int n_scan) {
    if (set.empty()) throw Error("maximize_on_level_set: empty level set");
    double total = 0.0;
    for (const auto& iv : set) total += iv.hi - iv.lo;

    LevelMax best{0.0, -std::numeric_limits<double>::infinity()};
    double bracket_lo = 0.0, bracket_hi = 0.0;
    for (const auto& iv : set) {
        const double len = iv.hi - iv.lo;
        const int k = std::max(1, total > 0.0 ? static_cast<int>(std::lround(n_scan * len / total)) : 1);
        const double h = k > 1 ? len / (k - 1) : 0.0;
        for (int i = 0; i < k; ++i) {
            const double z = k > 1 ? iv.lo + h * i : iv.lo;
            const double v = f(z);
            if (v > best.value + 1e-14 * (1.0 + std::abs(v))) {
                best = {z, v};
                bracket_lo = std::max(iv.lo, z - h);
                bracket_hi = std::min(iv.hi, z + h);
            }
        }
    }
    if (bracket_hi > bracket_lo) {
        double zg = best.z;
        const double vg = golden_max(f, bracket_lo, bracket_hi, zg);
        if (vg > best.value + 1e-14 * (1.0 + std::abs(vg))) best = {zg, vg};
    }
    return best;
}

std::pair<double, double> boundary_closed_form(const ModelSpec& spec, double t) {
    if (spec.cost_kind == CostKind::custom_quadratic)
        throw UnsupportedError("boundary_closed_form: no closed form for custom costs; use boundary_pde_solve");
    if (!(t >= 0.0 && t <= spec.horizon_T)) throw DomainError("boundary_closed_form: t outside [0, T]");
    const auto [a_lo, a_hi] = extremal_gaps(spec);
    const double tau = spec.horizon_T - t;
    const double growth = std::expm1(spec.kappa * tau) / spec.kappa;
    if (spec.cost_kind == CostKind::dominated) {
        return {std::sqrt(2.0 * a_hi) * tau - 1.5 * a_hi * growth, 0.0};
    }
    auto w = [&](double a) { return 0.5 * a * tau - a * a / 8.0 * growth; };
    return {w(a_hi), w(a_lo)};
}

double screening_boundary_rate(const ModelSpec& spec, const IntervalSet& level, TypeId theta, double s) {
    const double e = discount_factor(spec, s);
    auto f = [&](double z) {
        const Response r = respond(spec, theta, z);
        return r.action + e * (r.hamiltonian - z * r.action);
    };
    return maximize_on_level_set(level, f).value;
}

std::pair<double, double> screening_boundary_values(const ModelSpec& spec, TypeId theta, double t, int n_sub,
                                                    double control_trunc_K) {
    if (!(t >= 0.0 && t <= spec.horizon_T)) throw DomainError("screening_boundary_values: t outside [0, T]");
    if (n_sub < 2) n_sub = 2;
    if (n_sub % 2) ++n_sub;
    const CredibleBand b = make_band(spec, control_trunc_K);
    auto simpson = [&](const IntervalSet& level) {
        const double h = (spec.horizon_T - t) / n_sub;
        if (h == 0.0) return 0.0;
        double acc = 0.0;
        for (int i = 0; i <= n_sub; ++i) {
            const double w = (i == 0 || i == n_sub) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            acc += w * screening_boundary_rate(spec, level, theta, t + h * i);
        }
        return acc * h / 3.0;
    };
    return {simpson(b.level_upper), simpson(b.level_lower)};
}

void boundary_step(const ModelSpec& spec, const IntervalSet& level, double t, double t_next,
                   const std::vector<double>& u_next, std::vector<double>& u_out) {
    const int np = static_cast<int>(u_next.size());
    const double dt = t_next - t;
    const double dp = 1.0 / (np - 1);
    const double e = discount_factor(spec, 0.5 * (t + t_next));
    u_out.resize(np);
    for (int j = 0; j < np; ++j) {
        const double p = j * dp;
        const double gamma =
            (j == 0 || j == np - 1) ? 0.0 : (u_next[j + 1] - 2.0 * u_next[j] + u_next[j - 1]) / (dp * dp);
        auto f = [&](double z) {
            const ControlResponse c = control_response(spec, z, z);
            const double sp = belief_volatility(c, p);
            return 0.5 * sp * sp * gamma + running_reward(c, p, e);
        };
        u_out[j] = u_next[j] + dt * maximize_on_level_set(level, f).value;
    }
}

double BoundaryValues::table_lookup(const std::vector<double>& table, double t, double p) const {
    const int nt = static_cast<int>(times.size()), np = static_cast<int>(beliefs.size());
    const double ht = times[1] - times[0];
    const double tt = std::clamp((t - times[0]) / ht, 0.0, double(nt - 1));
    const double pp = std::clamp(p, 0.0, 1.0) * (np - 1);
    const int i = std::min(static_cast<int>(tt), nt - 2), j = std::min(static_cast<int>(pp), np - 2);
    const double a = tt - i, b = pp - j;
    const double* r0 = &table[static_cast<std::size_t>(i) * np];
    const double* r1 = r0 + np;
    return (1 - a) * ((1 - b) * r0[j] + b * r0[j + 1]) + a * ((1 - b) * r1[j] + b * r1[j + 1]);
}

double BoundaryValues::wbar(double t, double p) const {
    if (mode == BoundaryMode::closed_form) return boundary_closed_form(spec, std::clamp(t, 0.0, spec.horizon_T)).first;
    return table_lookup(upper_table, t, p);
}

double BoundaryValues::wunder(double t, double p) const {
    if (mode == BoundaryMode::closed_form) return boundary_closed_form(spec, std::clamp(t, 0.0, spec.horizon_T)).second;
    return table_lookup(lower_table, t, p);
}

double BoundaryValues::screening_upper(TypeId theta, double t) const {
    return linear_lookup(screening_times, screening_upper_table[index(theta)], t);
}

double BoundaryValues::screening_lower(TypeId theta, double t) const {
    return linear_lookup(screening_times, screening_lower_table[index(theta)], t);
}

double BoundaryValues::matched_control(Side side, double t, double p) const {
    const IntervalSet& level = side == Side::upper ? band.level_upper : band.level_lower;
    const double e = discount_factor(spec, t);
    return maximize_on_level_set(level, [&](double z) { return boundary_reward(spec, z, p, e); }).z;
}

BoundaryValues closed_form_boundary(const ModelSpec& spec, double control_trunc_K) {
    if (spec.cost_kind == CostKind::custom_quadratic)
        throw UnsupportedError("closed_form_boundary: no closed form for custom costs");
    BoundaryValues bv;
    bv.mode = BoundaryMode::closed_form;
    bv.spec = spec;
    bv.band = make_band(spec, control_trunc_K);
    fill_screening_tables(bv);
    return bv;
}

BoundaryValues boundary_pde_solve(const ModelSpec& spec, const GridSpec& grid) {
    if (grid.n_time < 4 || grid.n_belief < 4)
        throw ConfigError("grid", "boundary solve needs at least 4 time and 4 belief nodes");
    BoundaryValues bv;
    bv.mode = BoundaryMode::pde_solved;
    bv.spec = spec;
    bv.band = make_band(spec, grid.control_trunc_K);

    const int nt = grid.n_time, np = grid.n_belief;
    const double T = spec.horizon_T, dt = T / (nt - 1), dp = 1.0 / (np - 1);

    // Explicit stability: Δt·max σ_p²/Δp² ≤ cfl_safety, with max p(1−p) = 1/4.
    double max_da2 = 0.0;
    for (const IntervalSet* level : {&bv.band.level_lower, &bv.band.level_upper}) {
        maximize_on_level_set(*level, [&](double z) {
            const double da = optimal_action(spec, TypeId::zero, z) - optimal_action(spec, TypeId::one, z);
            max_da2 = std::max(max_da2, da * da);
            return 0.0;
        });
    }
    const double diff_max = max_da2 / 16.0;
    if (diff_max > 0.0 && dt * diff_max / (dp * dp) > grid.cfl_safety) {
        const double dt_max = grid.cfl_safety * dp * dp / diff_max;
        throw SolverError("boundary_pde_solve: CFL violated; max admissible dt = " + std::to_string(dt_max));
    }

    bv.times.resize(nt);
    bv.beliefs.resize(np);
    for (int k = 0; k < nt; ++k) bv.times[k] = dt * k;
    for (int j = 0; j < np; ++j) bv.beliefs[j] = dp * j;
    bv.upper_table.assign(static_cast<std::size_t>(nt) * np, 0.0);
    bv.lower_table.assign(static_cast<std::size_t>(nt) * np, 0.0);

    for (Side side : {Side::lower, Side::upper}) {
        const IntervalSet& level = side == Side::upper ? bv.band.level_upper : bv.band.level_lower;
        auto& table = side == Side::upper ? bv.upper_table : bv.lower_table;
        std::vector<double> next(np, 0.0), cur(np);
        for (int k = nt - 2; k >= 0; --k) {
            boundary_step(spec, level, bv.times[k], bv.times[k + 1], next, cur);
            std::copy(cur.begin(), cur.end(), table.begin() + static_cast<std::ptrdiff_t>(k) * np);
            next.swap(cur);
        }
    }
    fill_screening_tables(bv);
    return bv;
}

BoundaryValues make_boundary_values(const ModelSpec& spec, const GridSpec& grid) {
    if (spec.cost_kind == CostKind::custom_quadratic) {
        GridSpec g = grid;
        g.n_time = std::max(4 * grid.n_time, 400);
        return boundary_pde_solve(spec, g);
    }
    return closed_form_boundary(spec, grid.control_trunc_K);
}

}  // namespace ashjb
