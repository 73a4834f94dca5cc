/**
 * @file hjb.hpp
 * @brief Interior gap-belief HJB on the moving band: solver, policy extraction and a-priori checks.
 *
 * The solution w(t, y, p) is stored on the rescaled rectangle
 * s = (y − W̲(t))/width(t) ∈ [0,1], p ∈ [0,1], for t ∈ [0, T − ε_T].
 */
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ashjb/boundary_values.hpp"
#include "ashjb/credible_band.hpp"
#include "ashjb/generator.hpp"
#include "ashjb/grid.hpp"
#include "ashjb/model.hpp"

namespace ashjb {

enum class NodeKind : std::uint8_t { interior = 0, lower = 1, upper = 2 };

/**
 * @brief Value field w on (time slice, s, p), row-major.
 */
class ValueField {
public:
    ModelSpec spec;
    GridSpec grid;
    CredibleBand band;
    std::vector<double> times;   ///< t_0 = 0, ..., t_{n−1} = T − ε_T
    std::vector<double> values;  ///< [k][i][j]

    int n_time() const { return grid.n_time; }
    int n_gap() const { return grid.n_gap; }
    int n_belief() const { return grid.n_belief; }
    double s(int i) const { return static_cast<double>(i) / (grid.n_gap - 1); }
    double p(int j) const { return static_cast<double>(j) / (grid.n_belief - 1); }
    double y(int k, int i) const { return band.gap_at(times[k], s(i)); }

    std::size_t offset(int k, int i, int j) const {
        return (static_cast<std::size_t>(k) * grid.n_gap + i) * grid.n_belief + j;
    }
    double& at(int k, int i, int j) { return values[offset(k, i, j)]; }
    double at(int k, int i, int j) const { return values[offset(k, i, j)]; }
    const double* slice(int k) const { return values.data() + offset(k, 0, 0); }

    /// Bilinear interpolation at slice k.
    double interpolate_slice(int k, double y, double p) const;
    /// Interpolation in (t, y, p); beyond the last slice the terminal layer value is used.
    double interpolate(double t, double y, double p) const;

    double dt() const { return times[1] - times[0]; }
    double ds() const { return 1.0 / (grid.n_gap - 1); }
    double dp() const { return 1.0 / (grid.n_belief - 1); }
    /// Scheme tolerance unit Δt + Δs² + Δp².
    double resolution() const { return dt() + ds() * ds() + dp() * dp(); }
    double max_abs() const;
};

class PolicyField {
public:
    std::vector<double> z0_star;
    std::vector<double> z1_star;
    std::vector<NodeKind> boundary_flag;  ///< per s index
    std::vector<std::uint8_t> extrapolated;  ///< per slice; 1 inside the terminal layer
    int n_gap = 0;
    int n_belief = 0;

    std::size_t offset(int k, int i, int j) const {
        return (static_cast<std::size_t>(k) * n_gap + i) * n_belief + j;
    }
};

struct InteriorSolution {
    ValueField field;
    PolicyField policy;
    double runtime_seconds = 0.0;
};

/// Terminal layer e^{κ(T−t)}·y·(1 − 2p)/2: no production is left, so the principal pays the
/// expected promise p·y⁰ + (1−p)·y¹. At p ∈ {0, 1} this matches the per-type gap fields, which
/// vanish on the layer.
inline double terminal_layer_value(const ModelSpec& spec, double t, double y, double p) {
    return 0.5 * discount_factor(spec, t) * y * (1.0 - 2.0 * p);
}

/// L^{z⁰,z¹}(t, y, p; q, N) with N = [[N_yy, N_yp], [N_yp, N_pp]].
double generator_eval(const ModelSpec& spec, double t, double y, double p, double q,
                      const std::array<double, 3>& N, double z0, double z1);

/// Step-size admissibility: max|α|·√Δt ≤ cfl_safety. Returns the max admissible Δt.
double max_admissible_dt(const ModelSpec& spec, const GridSpec& grid);

InteriorSolution solve_interior(const ModelSpec& spec, const GridSpec& grid, const BoundaryValues& bvals);

/// C̄ and C̲ of the a-priori bound C̲(T−t) − y² ≤ w ≤ C̄(T−t) − y².
struct AprioriConstants {
    double c_upper;
    double c_lower;
};

AprioriConstants apriori_constants(const ModelSpec& spec);

struct AprioriReport {
    double c_upper;
    double c_lower;
    double tolerance;
    double worst_upper;  ///< max over nodes of w − (C̄(T−t) − y²)
    double worst_lower;  ///< max over nodes of (C̲(T−t) − y²) − w
    bool pass;
};

AprioriReport check_apriori(const ModelSpec& spec, const ValueField& field);

enum class TestFunction { phi, psi };

struct ResidualReport {
    TestFunction which;
    int n_nodes;
    double min_residual;
    double max_residual;
    double tolerance;
    double zero_control_max;  ///< max of −∂_tψ − L^{0,0}ψ (ψ only; ≤ 0 in the bound chain)
    bool pass;
};

/// Applies one discrete step to φ = C̄(T−t) − y² or ψ = C̲(T−t) − y² at random interior nodes.
ResidualReport residual_probe(const ModelSpec& spec, const GridSpec& grid, TestFunction which, int n_nodes,
                              std::uint64_t seed);

namespace detail {
/// One backward step of the interior scheme for all interior nodes of slice k.
void interior_step(const ModelSpec& spec, const GridSpec& grid, const CredibleBand& band, const BoundaryValues& bvals,
                   double t, double t_next, const double* next, double* out, double* z0_out, double* z1_out);
}  // namespace detail

}  // namespace ashjb
