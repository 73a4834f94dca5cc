#include "ashjb/screening.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ashjb/errors.hpp"
#include "ashjb/generator.hpp"
#include "ashjb/hjb.hpp"
#include "detail/chain_step.hpp"
#include "detail/gap_search.hpp"

namespace ashjb {

double TypeField::interpolate_slice(int k, double g) const {
    const double t = times[k];
    const double w = band.width(t);
    const double s = w > 0.0 ? std::clamp((g - band.lower(t)) / w, 0.0, 1.0) : 0.5;
    return detail::Slice1D{values.data() + static_cast<std::size_t>(k) * grid.n_gap, grid.n_gap}(s);
}

TypeField solve_v_theta(const ModelSpec& spec, const GridSpec& grid, const BoundaryValues& bvals, TypeId theta) {
    spec.validate();
    grid.validate(spec);
    TypeField f;
    f.theta = theta;
    f.spec = spec;
    f.grid = grid;
    f.band = make_band(spec, grid.control_trunc_K);
    const int nt = grid.n_time, ng = grid.n_gap;
    const double t_star = grid.terminal_time(spec);
    if (t_star / (nt - 1) > max_admissible_dt(spec, grid))
        throw SolverError("CFL violated: max admissible dt = " + std::to_string(max_admissible_dt(spec, grid)));
    f.times.resize(nt);
    for (int k = 0; k < nt; ++k) f.times[k] = k == nt - 1 ? t_star : t_star * k / (nt - 1);
    f.values.assign(static_cast<std::size_t>(nt) * ng, 0.0);
    f.z0_star.assign(f.values.size(), 0.0);
    f.z1_star.assign(f.values.size(), 0.0);

    // The scheme runs on u = v_θ ∓ e^{κ(T−t)}g/2, whose running reward is the interior reward at
    // the degenerate belief p_θ (1 for type 0, 0 for type 1).
    const double p_theta = theta == TypeId::zero ? 1.0 : 0.0;
    const double sign = theta == TypeId::zero ? 1.0 : -1.0;
    auto shift = [&](double t, double g) { return sign * 0.5 * discount_factor(spec, t) * g; };
    std::vector<double>& u = f.values;
    for (int k = 0; k < nt; ++k) {
        const double t = f.times[k];
        u[static_cast<std::size_t>(k) * ng] = bvals.screening_lower(theta, t) - shift(t, f.band.lower(t));
        u[static_cast<std::size_t>(k) * ng + ng - 1] = bvals.screening_upper(theta, t) - shift(t, f.band.upper(t));
    }
    for (int i = 1; i < ng - 1; ++i) u[static_cast<std::size_t>(nt - 1) * ng + i] = -shift(t_star, f.y(nt - 1, i));
    auto edge = [&](Side side, double t, double) {
        return side == Side::lower ? bvals.screening_lower(theta, t) - shift(t, f.band.lower(t))
                                   : bvals.screening_upper(theta, t) - shift(t, f.band.upper(t));
    };

    const detail::ControlLattice lat(spec, grid.control_trunc_K, grid.n_control);
    for (int k = nt - 2; k >= 0; --k) {
        const detail::ChainStep step(spec, f.band, f.times[k], f.times[k + 1]);
        const detail::Slice1D next{u.data() + static_cast<std::size_t>(k + 1) * ng, ng};
#pragma omp parallel for schedule(dynamic, 2)
        for (int i = 1; i < ng - 1; ++i) {
            const double y = f.y(k, i);
            const auto opt = step.optimize(lat, grid.control_trunc_K, grid.refine_iters, [&](const ControlResponse& c) {
                return step.evaluate(next, edge, y, p_theta, c);
            });
            const std::size_t o = static_cast<std::size_t>(k) * ng + i;
            u[o] = opt.value;
            f.z0_star[o] = opt.z0;
            f.z1_star[o] = opt.z1;
        }
        // Same neighbour control passing as the interior solver, so both agree at p ∈ {0, 1}.
        const std::size_t row = static_cast<std::size_t>(k) * ng;
        std::vector<double> v_new(ng), z0_new(ng), z1_new(ng);
        for (int sweep = 0; sweep < 50; ++sweep) {
            int improved = 0;
            for (int i = 1; i < ng - 1; ++i) {
                const double y = f.y(k, i);
                double best = u[row + i], b0 = f.z0_star[row + i], b1 = f.z1_star[row + i];
                for (int ii : {i - 1, i + 1}) {
                    if (ii < 1 || ii > ng - 2) continue;
                    const double v = step.evaluate(next, edge, y, p_theta,
                                                   control_response(spec, f.z0_star[row + ii], f.z1_star[row + ii]));
                    if (v > best) {
                        best = v;
                        b0 = f.z0_star[row + ii];
                        b1 = f.z1_star[row + ii];
                    }
                }
                if (best > u[row + i]) ++improved;
                v_new[i] = best;
                z0_new[i] = b0;
                z1_new[i] = b1;
            }
            for (int i = 1; i < ng - 1; ++i) {
                u[row + i] = v_new[i];
                f.z0_star[row + i] = z0_new[i];
                f.z1_star[row + i] = z1_new[i];
            }
            if (improved == 0) break;
        }
    }
    for (int k = 0; k < nt; ++k)
        for (int i = 0; i < ng; ++i) u[static_cast<std::size_t>(k) * ng + i] += shift(f.times[k], f.y(k, i));
    for (int k = 0; k < nt; ++k) {
        f.at(k, 0) = bvals.screening_lower(theta, f.times[k]);
        f.at(k, ng - 1) = bvals.screening_upper(theta, f.times[k]);
    }
    return f;
}

ScreeningSolution solve_screening(const ModelSpec& spec, const GridSpec& grid, const BoundaryValues& bvals) {
    return {solve_v_theta(spec, grid, bvals, TypeId::zero), solve_v_theta(spec, grid, bvals, TypeId::one)};
}

double screening_contract_value(const ScreeningSolution& sol, TypeId theta, double y0, double y1) {
    const TypeField& f = sol.field(theta);
    const double g = y0 - y1;
    const double lo = f.band.lower(0.0), hi = f.band.upper(0.0);
    const double tol = 1e-12 * (1.0 + std::abs(lo) + std::abs(hi));
    if (g < lo - tol || g > hi + tol) throw DomainError("screening_contract_value: gap outside the band");
    const double e = discount_factor(f.spec, 0.0);
    return -e * (theta == TypeId::zero ? y0 : y1) + f.interpolate_slice(0, g);
}

ScreeningReport v_screening(const ModelSpec& spec, const ScreeningSolution& sol, double p0) {
    if (!(p0 > 0.0 && p0 < 1.0)) throw DomainError("v_screening: prior must lie in (0,1)");
    const TypeField& f0 = sol.v0_field;
    const TypeField& f1 = sol.v1_field;
    const double lo = f0.band.lower(0.0), hi = f0.band.upper(0.0);
    const double e = discount_factor(spec, 0.0);
    const double R0 = spec.r_type[0], R1 = spec.r_type[1];

    auto F0 = [&](double g0) { return -e * (1.0 - p0) * std::max(R1, R0 - g0) + p0 * f0.interpolate_slice(0, g0); };
    auto F1 = [&](double g1) { return -e * p0 * std::max(R0, R1 + g1) + (1.0 - p0) * f1.interpolate_slice(0, g1); };

    std::vector<double> gs = detail::gap_search_points(lo, hi, f0.grid.n_gap, {R0 - R1});
    const int n = static_cast<int>(gs.size());
    std::vector<double> v1(n);
    for (int i = 0; i < n; ++i) v1[i] = F1(gs[i]);
    // Best g₁ ≤ g₀ for each g₀ via a running maximum.
    double best = -std::numeric_limits<double>::infinity();
    int best_g0 = 0, best_g1 = 0, run = 0;
    for (int i = 0; i < n; ++i) {
        if (v1[i] > v1[run]) run = i;
        const double v = F0(gs[i]) + v1[run];
        if (v > best) {
            best = v;
            best_g0 = i;
            best_g1 = run;
        }
    }
    ScreeningReport r;
    r.prior_p0 = p0;
    r.value = best;
    r.gap0 = gs[best_g0];
    r.gap1 = gs[best_g1];
    const double y0 = std::max(R0, R1 + r.gap1), y1 = std::max(R1, R0 - r.gap0);
    r.argmax_quad = {y0, y0 - r.gap0, y1 + r.gap1, y1};
    return r;
}

}  // namespace ashjb
