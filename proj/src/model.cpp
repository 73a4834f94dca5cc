#include "ashjb/model.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "ashjb/errors.hpp"
#include "detail/gap_extremes.hpp"

namespace ashjb {

std::string to_string(CostKind kind) {
    switch (kind) {
        case CostKind::dominated: return "dominated";
        case CostKind::nondominated: return "nondominated";
        case CostKind::custom_quadratic: return "custom_quadratic";
    }
    return "custom_quadratic";
}

CostKind cost_kind_from_string(const std::string& name) {
    if (name == "dominated") return CostKind::dominated;
    if (name == "nondominated") return CostKind::nondominated;
    if (name == "custom_quadratic" || name == "custom-quadratic") return CostKind::custom_quadratic;
    throw ConfigError("model.cost_kind", "unknown cost kind '" + name + "'");
}

ModelSpec ModelSpec::dominated(double a_upper, double kappa, double horizon_T) {
    ModelSpec s;
    s.kappa = kappa;
    s.horizon_T = horizon_T;
    s.cost_kind = CostKind::dominated;
    s.action_min = 0.0;
    s.action_max = std::sqrt(2.0 * a_upper);
    s.cost_params = {QuadraticCost{1.0, 0.0, 0.0}, QuadraticCost{2.0, 0.0, 0.0}};
    return s;
}

ModelSpec ModelSpec::nondominated(double a_upper, double a_lower, double kappa, double horizon_T) {
    ModelSpec s;
    s.kappa = kappa;
    s.horizon_T = horizon_T;
    s.cost_kind = CostKind::nondominated;
    s.action_min = 0.5 * a_lower;
    s.action_max = 0.5 * a_upper;
    s.cost_params = {QuadraticCost{1.0, -1.0, 0.0}, QuadraticCost{1.0, 1.0, 0.0}};
    return s;
}

void ModelSpec::validate() const {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ConfigError("model.kappa", "must be > 0");
    if (!(horizon_T > 0.0) || !std::isfinite(horizon_T))
        throw ConfigError("model.horizon_T", "must be > 0");
    if (!(action_min < action_max) || !std::isfinite(action_min) || !std::isfinite(action_max))
        throw ConfigError("model.action_min", "action interval must satisfy action_min < action_max");
    if (!(prior_p0 > 0.0 && prior_p0 < 1.0))
        throw ConfigError("model.prior_p0", "prior must lie strictly inside (0,1)");
    for (int th = 0; th < 2; ++th) {
        const auto& c = cost_params[th];
        const std::string base = "model.cost_params[" + std::to_string(th) + "]";
        if (!(c.curvature > 0.0) || !std::isfinite(c.curvature))
            throw ConfigError(base + ".curvature", "cost must be strongly convex (curvature > 0)");
        if (!std::isfinite(c.linear) || !std::isfinite(c.constant))
            throw ConfigError(base, "coefficients must be finite");
    }
    // c(0,·) − c(1,·) must vary on the action interval.
    const int n = 64;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int i = 0; i <= n; ++i) {
        const double a = action_min + (action_max - action_min) * i / n;
        const double d = cost(*this, TypeId::zero, a) - cost(*this, TypeId::one, a);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    if (hi - lo <= 1e-12 * (1.0 + std::abs(hi)))
        throw ConfigError("model.cost_params", "c(0,.) - c(1,.) is constant; the two types are indistinguishable");
}

double cost(const ModelSpec& spec, TypeId theta, double alpha) {
    const double tol = 1e-12 * (1.0 + std::abs(spec.action_max) + std::abs(spec.action_min));
    if (!(alpha >= spec.action_min - tol && alpha <= spec.action_max + tol))
        throw DomainError("cost: action " + std::to_string(alpha) + " outside [" +
                          std::to_string(spec.action_min) + ", " + std::to_string(spec.action_max) + "]");
    const auto& c = spec.cost_of(theta);
    return 0.5 * c.curvature * alpha * alpha + c.linear * alpha + c.constant;
}

double saturation_threshold(const ModelSpec& spec) {
    double c0 = 0.0;
    for (TypeId th : {TypeId::zero, TypeId::one}) {
        c0 = std::max(c0, std::abs(cost_derivative(spec, th, spec.action_min)));
        c0 = std::max(c0, std::abs(cost_derivative(spec, th, spec.action_max)));
    }
    return c0;
}

double max_abs_cost(const ModelSpec& spec) {
    // Convex quadratic: the maximum of |c| is at an endpoint or at the vertex.
    double m = 0.0;
    for (TypeId th : {TypeId::zero, TypeId::one}) {
        const auto& c = spec.cost_of(th);
        std::vector<double> pts{spec.action_min, spec.action_max};
        const double vertex = -c.linear / c.curvature;
        if (vertex > spec.action_min && vertex < spec.action_max) pts.push_back(vertex);
        for (double a : pts) m = std::max(m, std::abs(0.5 * c.curvature * a * a + c.linear * a + c.constant));
    }
    return m;
}

StructuralConstants structural_constants(const ModelSpec& spec) {
    StructuralConstants k{};
    k.n0 = 0.0;
    k.rho = std::numeric_limits<double>::infinity();
    for (TypeId th : {TypeId::zero, TypeId::one}) {
        for (double a : {spec.action_min, spec.action_max})
            k.n0 = std::max(k.n0, std::abs(cost_derivative(spec, th, a)) + std::abs(a));
        k.rho = std::min(k.rho, spec.cost_of(th).curvature);
    }
    const auto [a_lo, a_hi] = detail::gap_extremes(spec);
    k.growth = std::max({k.n0, std::max(std::abs(a_lo), std::abs(a_hi)), 2.0 * saturation_threshold(spec),
                         2.0 * max_abs_cost(spec)});
    return k;
}

}  // namespace ashjb
