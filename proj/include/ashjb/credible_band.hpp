/**
 * @file credible_band.hpp
 * @brief Extremal gaps, the time-dependent credible band and its boundary level sets.
 */
#pragma once

#include <utility>
#include <vector>

#include "ashjb/model.hpp"

namespace ashjb {

/// Closed interval [lo, hi] of sensitivities.
struct Interval {
    double lo;
    double hi;
    bool contains(double z) const { return z >= lo && z <= hi; }
};

using IntervalSet = std::vector<Interval>;

bool contains(const IntervalSet& set, double z);

/// Level sets {z : gap(z) = a̲} and {z : gap(z) = ā}, clipped to a window.
struct LevelSets {
    IntervalSet lower;
    IntervalSet upper;
};

/**
 * @brief Credible band W̲(t) ≤ y⁰ − y¹ ≤ W̄(t).
 *
 * Each boundary solves W' = κW − a with W(T) = 0, i.e.
 * W(t) = (a/κ)(1 − e^{−κ(T−t)}). Accessors do not range-check t.
 */
class CredibleBand {
public:
    double a_lower = 0.0;
    double a_upper = 0.0;
    double kappa = 0.0;
    double horizon_T = 0.0;
    IntervalSet level_lower;
    IntervalSet level_upper;
    double level_tol = 0.0;
    double level_window = 0.0;

    double boundary(double a, double t) const;
    double lower(double t) const { return boundary(a_lower, t); }
    double upper(double t) const { return boundary(a_upper, t); }
    double width(double t) const { return boundary(a_upper - a_lower, t); }
    double lower_derivative(double t) const { return kappa * lower(t) - a_lower; }
    double upper_derivative(double t) const { return kappa * upper(t) - a_upper; }
    double width_derivative(double t) const { return kappa * width(t) - (a_upper - a_lower); }

    /// y = W̲(t) + s·width(t).
    double gap_at(double t, double s) const { return lower(t) + s * width(t); }
};

/// (a̲, ā) = (inf, sup) of the gap function; throws DomainError when degenerate.
std::pair<double, double> extremal_gaps(const ModelSpec& spec);

/// (W̲(t), W̄(t)); throws DomainError outside [0, T].
std::pair<double, double> band(const ModelSpec& spec, double t);

double band_width(const ModelSpec& spec, double t);

/// max(2·C₀, K_control).
double level_window(const ModelSpec& spec, double control_trunc_K);

/// Scans the window for z with |gap(z) − extreme| ≤ tol and refines the interval ends by bisection.
LevelSets level_sets(const ModelSpec& spec, double tol, double window);

/// Band with level sets computed on the window max(2·C₀, control_trunc_K).
CredibleBand make_band(const ModelSpec& spec, double control_trunc_K, double tol = 1e-12);

/// W̲(t) ≤ y⁰ − y¹ ≤ W̄(t), with a relative roundoff allowance.
bool contains(const ModelSpec& spec, double t, double y0, double y1);

}  // namespace ashjb
