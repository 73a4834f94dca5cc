/**
 * @file principal.hpp
 * @brief Principal's single-contract values under conditional and unconditional participation.
 *
 * V_sc(t, x, y⁰, y¹, p) = x − (e^{κ(T−t)}/2)(y⁰ + y¹) + w(t, y⁰ − y¹, p).
 * Values are reported with X₀ = 0.
 */
#pragma once

#include <array>
#include <vector>

#include "ashjb/hjb.hpp"
#include "ashjb/model.hpp"

namespace ashjb {

/// Result of a one-dimensional maximization over the initial gap.
struct GapOptimum {
    double value = 0.0;
    double y0 = 0.0;
    double y1 = 0.0;
    double gap = 0.0;            ///< smallest maximizing gap
    double plateau_width = 0.0;  ///< extent of the contiguous set within tolerance of the maximum
};

struct PrincipalReport {
    double prior_p0 = 0.0;
    double v_conditional = 0.0;
    double v_unconditional = 0.0;
    std::array<double, 2> argmax_conditional{};
    std::array<double, 2> argmax_unconditional{};
    double plateau_conditional = 0.0;
    double plateau_unconditional = 0.0;
    double x0_offset = 0.0;
};

/// Throws DomainError when the gap lies outside the band at t.
double value_sc(const ValueField& field, double t, double x, double y0, double y1, double p);

GapOptimum v_conditional(const ModelSpec& spec, const ValueField& field, double p0);
GapOptimum v_unconditional(const ModelSpec& spec, const ValueField& field, double p0);

PrincipalReport principal_report(const ModelSpec& spec, const ValueField& field, double p0);
std::vector<PrincipalReport> sweep_prior(const ModelSpec& spec, const ValueField& field,
                                         const std::vector<double>& p0_list);

/// {0.05, 0.10, ..., 0.95}.
std::vector<double> default_prior_sweep();

}  // namespace ashjb
