#include "ashjb/principal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "ashjb/errors.hpp"
#include "ashjb/generator.hpp"
#include "detail/gap_search.hpp"

namespace ashjb {

namespace {

// Objective is piecewise linear between field nodes and kinks, so the candidate set is exact.
GapOptimum maximize_gap(const ValueField& field, double kink, const std::function<double(double)>& objective,
                        const std::function<std::array<double, 2>(double)>& promises) {
    const double lo = field.band.lower(0.0), hi = field.band.upper(0.0);
    const std::vector<double> gs = detail::gap_search_points(lo, hi, field.grid.n_gap, {kink});
    std::vector<double> v(gs.size());
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < gs.size(); ++i) {
        v[i] = objective(gs[i]);
        if (v[i] > best) {
            best = v[i];
            arg = i;
        }
    }
    if (!std::isfinite(best)) throw SolverError("gap maximization produced a non-finite value");
    const double tol = 1e-10 * (1.0 + std::abs(best));
    std::size_t last = arg;
    while (last + 1 < gs.size() && v[last + 1] >= best - tol) ++last;
    GapOptimum r;
    r.value = best;
    r.gap = gs[arg];
    r.plateau_width = gs[last] - gs[arg];
    const auto y = promises(r.gap);
    r.y0 = y[0];
    r.y1 = y[1];
    return r;
}

void check_prior(double p0) {
    if (!(p0 > 0.0 && p0 < 1.0)) throw DomainError("prior must lie in (0,1)");
}

}  // namespace

double value_sc(const ValueField& field, double t, double x, double y0, double y1, double p) {
    if (!contains(field.spec, t, y0, y1)) throw DomainError("value_sc: gap outside the credible band");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("value_sc: belief outside [0,1]");
    return x - 0.5 * discount_factor(field.spec, t) * (y0 + y1) + field.interpolate(t, y0 - y1, p);
}

GapOptimum v_conditional(const ModelSpec& spec, const ValueField& field, double p0) {
    check_prior(p0);
    const double e = discount_factor(spec, 0.0);
    const double R0 = spec.r_type[0], R1 = spec.r_type[1];
    auto promises = [&](double g) -> std::array<double, 2> {
        const double y0 = std::max(R0, R1 + g);
        return {y0, y0 - g};
    };
    auto objective = [&](double g) {
        const auto y = promises(g);
        return -0.5 * e * (y[0] + y[1]) + field.interpolate_slice(0, g, p0);
    };
    return maximize_gap(field, R0 - R1, objective, promises);
}

GapOptimum v_unconditional(const ModelSpec& spec, const ValueField& field, double p0) {
    check_prior(p0);
    const double e = discount_factor(spec, 0.0);
    const double R = spec.r_pooled;
    auto promises = [&](double g) -> std::array<double, 2> { return {R + (1.0 - p0) * g, R - p0 * g}; };
    auto objective = [&](double g) {
        return -0.5 * e * (2.0 * R + (1.0 - 2.0 * p0) * g) + field.interpolate_slice(0, g, p0);
    };
    return maximize_gap(field, field.band.lower(0.0), objective, promises);
}

PrincipalReport principal_report(const ModelSpec& spec, const ValueField& field, double p0) {
    const GapOptimum c = v_conditional(spec, field, p0);
    const GapOptimum u = v_unconditional(spec, field, p0);
    PrincipalReport r;
    r.prior_p0 = p0;
    r.v_conditional = c.value;
    r.v_unconditional = u.value;
    r.argmax_conditional = {c.y0, c.y1};
    r.argmax_unconditional = {u.y0, u.y1};
    r.plateau_conditional = c.plateau_width;
    r.plateau_unconditional = u.plateau_width;
    return r;
}

std::vector<PrincipalReport> sweep_prior(const ModelSpec& spec, const ValueField& field,
                                         const std::vector<double>& p0_list) {
    std::vector<PrincipalReport> out(p0_list.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(p0_list.size()); ++i) out[i] = principal_report(spec, field, p0_list[i]);
    return out;
}

std::vector<double> default_prior_sweep() {
    std::vector<double> p(19);
    for (int i = 0; i < 19; ++i) p[i] = 0.05 * (i + 1);
    return p;
}

}  // namespace ashjb
