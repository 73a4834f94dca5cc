#include "ashjb/hjb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <vector>

#include "ashjb/errors.hpp"
#include "ashjb/generator.hpp"
#include "detail/chain_step.hpp"

namespace ashjb {

double ValueField::interpolate_slice(int k, double y, double p) const {
    const double t = times[k];
    const double w = band.width(t);
    const double s = w > 0.0 ? std::clamp((y - band.lower(t)) / w, 0.0, 1.0) : 0.5;
    return detail::Slice2D{slice(k), grid.n_gap, grid.n_belief}(s, std::clamp(p, 0.0, 1.0));
}

double ValueField::interpolate(double t, double y, double p) const {
    if (t >= times.back()) return terminal_layer_value(spec, std::min(t, spec.horizon_T), y, p);
    if (t <= times.front()) return interpolate_slice(0, y, p);
    const double h = dt();
    const int k = std::min(static_cast<int>(t / h), n_time() - 2);
    const double a = (t - times[k]) / h;
    const double w = band.width(t);
    const double s = w > 0.0 ? std::clamp((y - band.lower(t)) / w, 0.0, 1.0) : 0.5;
    const double pc = std::clamp(p, 0.0, 1.0);
    const detail::Slice2D s0{slice(k), grid.n_gap, grid.n_belief}, s1{slice(k + 1), grid.n_gap, grid.n_belief};
    return (1.0 - a) * s0(s, pc) + a * s1(s, pc);
}

double ValueField::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double generator_eval(const ModelSpec& spec, double t, double y, double p, double q,
                      const std::array<double, 3>& N, double z0, double z1) {
    const ControlResponse c = control_response(spec, z0, z1);
    const double sy = z0 - z1, sp = belief_volatility(c, p);
    const double diffusion = 0.5 * (sy * sy * N[0] + 2.0 * sy * sp * N[1] + sp * sp * N[2]);
    return gap_drift(c, spec.kappa, y, p) * q + diffusion + running_reward(c, p, discount_factor(spec, t));
}

double max_admissible_dt(const ModelSpec& spec, const GridSpec& grid) {
    const double amax = std::max(std::abs(spec.action_min), std::abs(spec.action_max));
    return amax > 0.0 ? std::pow(grid.cfl_safety / amax, 2) : spec.horizon_T;
}

namespace {

void check_step_sizes(const ModelSpec& spec, const GridSpec& grid, const CredibleBand& band) {
    const double dt = grid.time_step(spec);
    const double dt_max = max_admissible_dt(spec, grid);
    if (dt > dt_max)
        throw SolverError("CFL violated: dt = " + std::to_string(dt) +
                          " exceeds max admissible dt = " + std::to_string(dt_max) + "; increase n_time");
    const double dy = band.width(grid.terminal_time(spec)) / (grid.n_gap - 1);
    if (!(dy > 1e-10 * (1.0 + band.width(0.0))))
        throw SolverError("band too thin near t* for n_gap = " + std::to_string(grid.n_gap) +
                          "; increase terminal_layer_eps");
}

}  // namespace

namespace detail {

void interior_step(const ModelSpec& spec, const GridSpec& grid, const CredibleBand& band, const BoundaryValues& bvals,
                   double t, double t_next, const double* next, double* out, double* z0_out, double* z1_out) {
    const ChainStep step(spec, band, t, t_next);
    const ControlLattice lat(spec, grid.control_trunc_K, grid.n_control);
    const Slice2D slice{next, grid.n_gap, grid.n_belief};
    auto edge = [&](Side side, double te, double pe) {
        return side == Side::lower ? bvals.wunder(te, pe) : bvals.wbar(te, pe);
    };
    const int ng = grid.n_gap, nb = grid.n_belief;
    const int n_nodes = (ng - 2) * nb;
    std::vector<double> z0(static_cast<std::size_t>(ng) * nb, 0.0), z1(z0.size(), 0.0);
#pragma omp parallel for schedule(dynamic, 4)
    for (int idx = 0; idx < n_nodes; ++idx) {
        const int i = 1 + idx / nb, j = idx % nb;
        const double y = band.gap_at(t, static_cast<double>(i) / (ng - 1));
        const double p = static_cast<double>(j) / (nb - 1);
        const NodeOptimum opt = step.optimize(lat, grid.control_trunc_K, grid.refine_iters,
                                              [&](const ControlResponse& c) { return step.evaluate(slice, edge, y, p, c); });
        const std::size_t o = static_cast<std::size_t>(i) * nb + j;
        out[o] = opt.value;
        z0[o] = opt.z0;
        z1[o] = opt.z1;
    }
    // The continuation of a fixed control is convex in p, so a neighbour's optimal control is a
    // valid candidate here; passing controls between nodes repairs local search misses.
    std::vector<double> v_new(out + nb, out + (ng - 1) * nb), z0_new(z0.begin() + nb, z0.end() - nb),
        z1_new(z1.begin() + nb, z1.end() - nb);
    for (int sweep = 0; sweep < 50; ++sweep) {
        int improved = 0;
#pragma omp parallel for schedule(dynamic, 4) reduction(+ : improved)
        for (int idx = 0; idx < n_nodes; ++idx) {
            const int i = 1 + idx / nb, j = idx % nb;
            const double y = band.gap_at(t, static_cast<double>(i) / (ng - 1));
            const double p = static_cast<double>(j) / (nb - 1);
            const std::size_t o = static_cast<std::size_t>(i) * nb + j;
            double best = out[o], b0 = z0[o], b1 = z1[o];
            for (int di = -1; di <= 1; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    const int ii = i + di, jj = j + dj;
                    if ((di == 0 && dj == 0) || ii < 1 || ii > ng - 2 || jj < 0 || jj >= nb) continue;
                    const std::size_t q = static_cast<std::size_t>(ii) * nb + jj;
                    const double v = step.evaluate(slice, edge, y, p, control_response(spec, z0[q], z1[q]));
                    if (v > best) {
                        best = v;
                        b0 = z0[q];
                        b1 = z1[q];
                    }
                }
            if (best > out[o]) ++improved;
            v_new[idx] = best;
            z0_new[idx] = b0;
            z1_new[idx] = b1;
        }
        for (int idx = 0; idx < n_nodes; ++idx) {
            const std::size_t o = static_cast<std::size_t>(1 + idx / nb) * nb + idx % nb;
            out[o] = v_new[idx];
            z0[o] = z0_new[idx];
            z1[o] = z1_new[idx];
        }
        if (improved == 0) break;
    }
    if (z0_out)
        for (int idx = 0; idx < n_nodes; ++idx) {
            const std::size_t o = static_cast<std::size_t>(1 + idx / nb) * nb + idx % nb;
            z0_out[o] = z0[o];
            z1_out[o] = z1[o];
        }
}

}  // namespace detail

InteriorSolution solve_interior(const ModelSpec& spec, const GridSpec& grid, const BoundaryValues& bvals) {
    const auto start = std::chrono::steady_clock::now();
    spec.validate();
    grid.validate(spec);
    const CredibleBand band = make_band(spec, grid.control_trunc_K);
    check_step_sizes(spec, grid, band);

    InteriorSolution sol;
    ValueField& f = sol.field;
    f.spec = spec;
    f.grid = grid;
    f.band = band;
    const int nt = grid.n_time, ng = grid.n_gap, nb = grid.n_belief;
    const double t_star = grid.terminal_time(spec);
    f.times.resize(nt);
    for (int k = 0; k < nt; ++k) f.times[k] = k == nt - 1 ? t_star : t_star * k / (nt - 1);
    const std::size_t total = static_cast<std::size_t>(nt) * ng * nb;
    f.values.assign(total, 0.0);

    PolicyField& pol = sol.policy;
    pol.n_gap = ng;
    pol.n_belief = nb;
    pol.z0_star.assign(total, 0.0);
    pol.z1_star.assign(total, 0.0);
    pol.boundary_flag.assign(ng, NodeKind::interior);
    pol.boundary_flag.front() = NodeKind::lower;
    pol.boundary_flag.back() = NodeKind::upper;
    pol.extrapolated.assign(nt, 0);
    pol.extrapolated.back() = 1;

    // Dirichlet columns and matched boundary controls.
    for (int k = 0; k < nt; ++k) {
        const double t = f.times[k];
        for (int j = 0; j < nb; ++j) {
            const double p = f.p(j);
            f.at(k, 0, j) = bvals.wunder(t, p);
            f.at(k, ng - 1, j) = bvals.wbar(t, p);
            const double zl = bvals.matched_control(Side::lower, t, p);
            const double zu = bvals.matched_control(Side::upper, t, p);
            pol.z0_star[pol.offset(k, 0, j)] = pol.z1_star[pol.offset(k, 0, j)] = zl;
            pol.z0_star[pol.offset(k, ng - 1, j)] = pol.z1_star[pol.offset(k, ng - 1, j)] = zu;
        }
    }
    // Terminal layer.
    for (int i = 1; i < ng - 1; ++i) {
        const double y = f.y(nt - 1, i);
        for (int j = 0; j < nb; ++j) f.at(nt - 1, i, j) = terminal_layer_value(spec, t_star, y, f.p(j));
    }

    for (int k = nt - 2; k >= 0; --k) {
        const std::size_t o = f.offset(k, 0, 0);
        detail::interior_step(spec, grid, band, bvals, f.times[k], f.times[k + 1], f.slice(k + 1), f.values.data() + o,
                              pol.z0_star.data() + o, pol.z1_star.data() + o);
    }
    // Inside the terminal layer the policy is carried over from the last solved slice.
    for (int i = 1; i < ng - 1; ++i)
        for (int j = 0; j < nb; ++j) {
            pol.z0_star[pol.offset(nt - 1, i, j)] = pol.z0_star[pol.offset(nt - 2, i, j)];
            pol.z1_star[pol.offset(nt - 1, i, j)] = pol.z1_star[pol.offset(nt - 2, i, j)];
        }

    sol.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return sol;
}

AprioriConstants apriori_constants(const ModelSpec& spec) {
    const auto [a_lo, a_hi] = extremal_gaps(spec);
    const StructuralConstants k = structural_constants(spec);
    const double C = k.growth, N0 = k.n0, T = spec.horizon_T, kap = spec.kappa;
    const double A = a_hi + std::abs(a_lo);
    const double e = std::exp(kap * T);
    const double c_upper = std::max(0.0, (C + N0) * (C + N0) - 2.0 * kap) * A * A * T * T +
                           (2.0 * C + 0.5 * (C + N0) * C * e) * A * T + 0.5 * C * e + C * C / 16.0 * e * e +
                           N0 + 1.0;
    const double c_lower = -(2.0 * kap * A * A * T * T + 2.0 * C * A * T + 0.5 * e * C + N0 + 1.0);
    return {c_upper, c_lower};
}

AprioriReport check_apriori(const ModelSpec& spec, const ValueField& field) {
    const AprioriConstants c = apriori_constants(spec);
    AprioriReport r{c.c_upper, c.c_lower, 0.0, -1e300, -1e300, true};
    // Slack scales with the bounds themselves so that a corrupted field cannot widen it.
    double scale = 1.0;
    for (int k = 0; k < field.n_time(); ++k) {
        const double tau = spec.horizon_T - field.times[k];
        for (int i = 0; i < field.n_gap(); ++i) {
            const double y2 = field.y(k, i) * field.y(k, i);
            scale = std::max({scale, std::abs(c.c_upper * tau - y2), std::abs(c.c_lower * tau - y2)});
        }
    }
    r.tolerance = 10.0 * field.resolution() * scale;
    for (int k = 0; k < field.n_time(); ++k) {
        const double tau = spec.horizon_T - field.times[k];
        for (int i = 0; i < field.n_gap(); ++i) {
            const double y = field.y(k, i);
            for (int j = 0; j < field.n_belief(); ++j) {
                const double w = field.at(k, i, j);
                r.worst_upper = std::max(r.worst_upper, w - (c.c_upper * tau - y * y));
                r.worst_lower = std::max(r.worst_lower, (c.c_lower * tau - y * y) - w);
            }
        }
    }
    r.pass = r.worst_upper <= r.tolerance && r.worst_lower <= r.tolerance;
    return r;
}

ResidualReport residual_probe(const ModelSpec& spec, const GridSpec& grid, TestFunction which, int n_nodes,
                              std::uint64_t seed) {
    grid.validate(spec);
    const CredibleBand band = make_band(spec, grid.control_trunc_K);
    const AprioriConstants ac = apriori_constants(spec);
    const double C = which == TestFunction::phi ? ac.c_upper : ac.c_lower;
    const int nt = grid.n_time, ng = grid.n_gap, nb = grid.n_belief;
    const double t_star = grid.terminal_time(spec), dt = t_star / (nt - 1);
    auto fn = [&](double t, double y) { return C * (spec.horizon_T - t) - y * y; };

    ResidualReport rep{which, n_nodes, 1e300, -1e300, 0.0, -1e300, true};
    const double dy0 = band.width(0.0) / (ng - 1), dp = 1.0 / (nb - 1);
    // Interpolating −y² linearly adds at most Δy²/4 per step.
    rep.tolerance = 10.0 * (dt + dy0 * dy0 / (4.0 * dt) + dp * dp);

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> kd(0, nt - 2), id(1, ng - 2), jd(0, nb - 1);
    std::vector<double> next(static_cast<std::size_t>(ng) * nb);
    const detail::ControlLattice lat(spec, grid.control_trunc_K, grid.n_control);
    for (int n = 0; n < n_nodes; ++n) {
        const int k = kd(rng), i = id(rng), j = jd(rng);
        const double t = t_star * k / (nt - 1), tn = t_star * (k + 1) / (nt - 1);
        for (int ii = 0; ii < ng; ++ii) {
            const double y = band.gap_at(tn, static_cast<double>(ii) / (ng - 1));
            for (int jj = 0; jj < nb; ++jj) next[static_cast<std::size_t>(ii) * nb + jj] = fn(tn, y);
        }
        const detail::ChainStep step(spec, band, t, tn);
        const detail::Slice2D slice{next.data(), ng, nb};
        auto edge = [&](Side side, double te, double) {
            return fn(te, side == Side::lower ? band.lower(te) : band.upper(te));
        };
        const double y = band.gap_at(t, static_cast<double>(i) / (ng - 1));
        const double p = static_cast<double>(j) / (nb - 1);
        const double s = step.optimize(lat, grid.control_trunc_K, grid.refine_iters,
                                       [&](const ControlResponse& c) { return step.evaluate(slice, edge, y, p, c); })
                             .value;
        const double r = (fn(t, y) - s) / dt;
        rep.min_residual = std::min(rep.min_residual, r);
        rep.max_residual = std::max(rep.max_residual, r);
        if (which == TestFunction::psi) {
            const std::array<double, 3> N{-2.0, 0.0, 0.0};
            const double zc = C + (-generator_eval(spec, t, y, p, -2.0 * y, N, 0.0, 0.0));
            rep.zero_control_max = std::max(rep.zero_control_max, zc);
        }
    }
    rep.pass = which == TestFunction::phi ? rep.min_residual >= -rep.tolerance
                                          : (rep.max_residual <= rep.tolerance && rep.zero_control_max <= 0.0);
    return rep;
}

}  // namespace ashjb
