/**
 * @file screening.hpp
 * @brief Screening value: per-type gap HJBs and the static menu program.
 *
 * Under the type-θ measure the principal's value of contract ξ is
 * V_θ(t, x, y) = x − e^{κ(T−t)}·y_θ + v_θ(t, y⁰ − y¹), where v_θ solves a
 * one-dimensional gap HJB with running reward
 * ρ_θ = A^θ(z_θ) + e^{κ(T−t)}(H^θ(z_θ) − z_θ·A^θ(z_θ)).
 */
#pragma once

#include <array>
#include <vector>

#include "ashjb/boundary_values.hpp"
#include "ashjb/credible_band.hpp"
#include "ashjb/grid.hpp"
#include "ashjb/model.hpp"

namespace ashjb {

/// v_θ on (time slice, s), row-major, with the maximizing sensitivities.
class TypeField {
public:
    TypeId theta = TypeId::zero;
    ModelSpec spec;
    GridSpec grid;
    CredibleBand band;
    std::vector<double> times;
    std::vector<double> values;
    std::vector<double> z0_star;
    std::vector<double> z1_star;

    double& at(int k, int i) { return values[static_cast<std::size_t>(k) * grid.n_gap + i]; }
    double at(int k, int i) const { return values[static_cast<std::size_t>(k) * grid.n_gap + i]; }
    double s(int i) const { return static_cast<double>(i) / (grid.n_gap - 1); }
    double y(int k, int i) const { return band.gap_at(times[k], s(i)); }

    /// Linear interpolation in the gap at slice k.
    double interpolate_slice(int k, double g) const;
};

struct ScreeningSolution {
    TypeField v0_field;
    TypeField v1_field;
    const TypeField& field(TypeId theta) const { return theta == TypeId::zero ? v0_field : v1_field; }
};

struct ScreeningReport {
    double prior_p0 = 0.0;
    double value = 0.0;
    /// (y₀, y₁ᶜ, y₀ᶜ, y₁): type-0 contract promises (y₀, y₁ᶜ), type-1 contract promises (y₀ᶜ, y₁).
    std::array<double, 4> argmax_quad{};
    double gap0 = 0.0;  ///< y₀ − y₁ᶜ
    double gap1 = 0.0;  ///< y₀ᶜ − y₁
};

TypeField solve_v_theta(const ModelSpec& spec, const GridSpec& grid, const BoundaryValues& bvals, TypeId theta);

ScreeningSolution solve_screening(const ModelSpec& spec, const GridSpec& grid, const BoundaryValues& bvals);

/// V_θ(0, 0, y) for a contract promising y = (y⁰, y¹).
double screening_contract_value(const ScreeningSolution& sol, TypeId theta, double y0, double y1);

/**
 * @brief Static menu program at prior p₀.
 *
 * With gaps g₀ = y₀ − y₁ᶜ and g₁ = y₀ᶜ − y₁, incentive compatibility
 * (y₀ ≥ y₀ᶜ, y₁ ≥ y₁ᶜ) holds iff y₀ − y₁ ∈ [g₁, g₀]; the cheapest promises
 * are y₀ = max(R₀, R₁ + g₁), y₁ = max(R₁, R₀ − g₀). The objective then
 * separates in (g₀, g₁) subject to g₁ ≤ g₀.
 */
ScreeningReport v_screening(const ModelSpec& spec, const ScreeningSolution& sol, double p0);

}  // namespace ashjb
