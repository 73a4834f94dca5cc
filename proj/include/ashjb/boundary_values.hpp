/**
 * @file boundary_values.hpp
 * @brief Continuation values on the lateral boundaries of the credible band.
 *
 * On a boundary the sensitivities are matched, z⁰ = z¹ = z in the level set,
 * so the gap rides the boundary and only the belief diffuses (with
 * coefficient p(1−p)(A⁰(z) − A¹(z))).
 */
#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "ashjb/credible_band.hpp"
#include "ashjb/grid.hpp"
#include "ashjb/model.hpp"

namespace ashjb {

enum class Side { lower, upper };

enum class BoundaryMode { closed_form, pde_solved };

/// Maximizer of f over an interval union: 512-point scan plus golden-section polish.
struct LevelMax {
    double z;
    double value;
};

LevelMax maximize_on_level_set(const IntervalSet& set, const std::function<double(double)>& f,
                               int n_scan = 512);

/// (w̄(t), w̲(t)) for the dominated and nondominated examples.
std::pair<double, double> boundary_closed_form(const ModelSpec& spec, double t);

/// (v̄_θ(t), v̲_θ(t)) by composite Simpson with `n_sub` subintervals on [t, T].
std::pair<double, double> screening_boundary_values(const ModelSpec& spec, TypeId theta, double t,
                                                    int n_sub = 512, double control_trunc_K = 6.0);

/// Integrand sup over the level set of A^θ(z) + e^{κ(T−s)}(H^θ(z) − z·A^θ(z)).
double screening_boundary_rate(const ModelSpec& spec, const IntervalSet& level, TypeId theta, double s);

/**
 * @brief One explicit step of the boundary equation from t_next back to t.
 *
 * u(t, p_j) = u(t_next, p_j) + Δt·sup_{z∈V}[½σ_p(z)²·D²u + ℓ(t_mid, z, z, p_j)].
 */
void boundary_step(const ModelSpec& spec, const IntervalSet& level, double t, double t_next,
                   const std::vector<double>& u_next, std::vector<double>& u_out);

class BoundaryValues {
public:
    BoundaryMode mode = BoundaryMode::closed_form;
    ModelSpec spec;
    CredibleBand band;

    double wbar(double t, double p) const;
    double wunder(double t, double p) const;
    double value(Side side, double t, double p) const {
        return side == Side::upper ? wbar(t, p) : wunder(t, p);
    }

    /// Screening boundary values, tabulated on a fine time grid.
    double screening_upper(TypeId theta, double t) const;
    double screening_lower(TypeId theta, double t) const;

    /// Level-set sensitivity maximizing the boundary reward at (t, p).
    double matched_control(Side side, double t, double p) const;

    // pde_solved tables, row-major (time, belief)
    std::vector<double> times;
    std::vector<double> beliefs;
    std::vector<double> upper_table;
    std::vector<double> lower_table;

    // screening tables on a uniform grid over [0, T]: [theta][k]
    std::vector<double> screening_times;
    std::vector<double> screening_upper_table[2];
    std::vector<double> screening_lower_table[2];

private:
    double table_lookup(const std::vector<double>& table, double t, double p) const;
};

/// Closed-form boundary values (examples only); throws UnsupportedError for custom costs.
BoundaryValues closed_form_boundary(const ModelSpec& spec, double control_trunc_K = 6.0);

/// Solves both boundary equations on an (n_time × n_belief) grid over [0, T].
BoundaryValues boundary_pde_solve(const ModelSpec& spec, const GridSpec& grid);

/// Closed forms when available, otherwise the PDE solve.
BoundaryValues make_boundary_values(const ModelSpec& spec, const GridSpec& grid);

}  // namespace ashjb
