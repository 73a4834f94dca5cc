/**
 * @file model.hpp
 * @brief Problem data and agent-side primitives: costs, best responses, Hamiltonians.
 *
 * Costs are quadratic per type, c(θ,α) = ½qα² + lα + m on a common action
 * interval. Best responses and Hamiltonians are closed-form projections.
 */
#pragma once

#include <algorithm>
#include <array>
#include <string>

namespace ashjb {

enum class CostKind { dominated, nondominated, custom_quadratic };

/// Agent type Θ ∈ {0, 1}.
enum class TypeId : int { zero = 0, one = 1 };

inline int index(TypeId theta) { return static_cast<int>(theta); }

std::string to_string(CostKind kind);
CostKind cost_kind_from_string(const std::string& name);

/// c(α) = ½·curvature·α² + linear·α + constant.
struct QuadraticCost {
    double curvature = 1.0;
    double linear = 0.0;
    double constant = 0.0;
};

struct ModelSpec {
    double kappa = 0.1;
    double horizon_T = 2.0;
    double action_min = 0.0;
    double action_max = 1.0;
    CostKind cost_kind = CostKind::custom_quadratic;
    std::array<QuadraticCost, 2> cost_params{};
    double r_pooled = 0.0;                ///< unconditional reservation utility R
    std::array<double, 2> r_type{0.0, 0.0};  ///< per-type reservation utilities (R₀, R₁)
    double prior_p0 = 0.5;

    /// Quadratic costs j_θα²/2 with j = (1, 2) on A = [0, √(2ā)].
    static ModelSpec dominated(double a_upper = 1.0, double kappa = 0.1, double horizon_T = 2.0);
    /// Costs α²/2 ∓ α on A = [a̲/2, ā/2].
    static ModelSpec nondominated(double a_upper = 1.0, double a_lower = -1.0, double kappa = 0.1,
                                  double horizon_T = 2.0);

    /// Throws ConfigError naming the first violated invariant.
    void validate() const;

    const QuadraticCost& cost_of(TypeId theta) const { return cost_params[index(theta)]; }
};

/// c(θ, α); throws DomainError when α is outside the action interval.
double cost(const ModelSpec& spec, TypeId theta, double alpha);

/// ∂_α c(θ, α), no domain check.
inline double cost_derivative(const ModelSpec& spec, TypeId theta, double alpha) {
    const auto& c = spec.cost_of(theta);
    return c.curvature * alpha + c.linear;
}

/// A^θ(z): maximizer of zα − c(θ,α) over the action interval.
inline double optimal_action(const ModelSpec& spec, TypeId theta, double z) {
    const auto& c = spec.cost_of(theta);
    return std::clamp((z - c.linear) / c.curvature, spec.action_min, spec.action_max);
}

/// H^θ(z) = z·A^θ(z) − c(θ, A^θ(z)).
inline double hamiltonian(const ModelSpec& spec, TypeId theta, double z) {
    const auto& c = spec.cost_of(theta);
    const double a = optimal_action(spec, theta, z);
    return z * a - (0.5 * c.curvature * a * a + c.linear * a + c.constant);
}

/// Action and Hamiltonian evaluated together.
struct Response {
    double action;
    double hamiltonian;
};

inline Response respond(const ModelSpec& spec, TypeId theta, double z) {
    const auto& c = spec.cost_of(theta);
    const double a = optimal_action(spec, theta, z);
    return {a, z * a - (0.5 * c.curvature * a * a + c.linear * a + c.constant)};
}

/// H⁰(z) − H¹(z).
inline double gap_function(const ModelSpec& spec, double z) {
    return hamiltonian(spec, TypeId::zero, z) - hamiltonian(spec, TypeId::one, z);
}

/// C₀: both best responses are saturated for |z| ≥ C₀.
double saturation_threshold(const ModelSpec& spec);

struct StructuralConstants {
    double n0;      ///< max over types and α of |∂_α c| + |α|
    double growth;  ///< generic constant C of the growth estimate
    double rho;     ///< strong-convexity modulus
};

StructuralConstants structural_constants(const ModelSpec& spec);

/// sup over α ∈ A and both types of |c(θ, α)|.
double max_abs_cost(const ModelSpec& spec);

}  // namespace ashjb
