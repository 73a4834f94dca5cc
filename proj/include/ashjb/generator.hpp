/**
 * @file generator.hpp
 * @brief Coefficients of the controlled (gap, belief) system and its running reward.
 *
 * For sensitivities (z⁰, z¹) at belief p:
 *   λ̄ = p·A⁰(z⁰) + (1−p)·A¹(z¹),  Δα = A⁰(z⁰) − A¹(z¹),
 *   gap drift  b = −H⁰(z⁰) + H¹(z¹) + κy + λ̄(z⁰ − z¹),
 *   Σ = (z⁰ − z¹, p(1−p)Δα),
 *   ℓ = λ̄ + (e^{κ(T−t)}/2)·[H⁰(z⁰) + H¹(z¹) − λ̄(z⁰ + z¹)].
 */
#pragma once

#include <cmath>

#include "ashjb/model.hpp"

namespace ashjb {

struct ControlResponse {
    double z0, z1;
    double a0, a1;  ///< A⁰(z⁰), A¹(z¹)
    double h0, h1;  ///< H⁰(z⁰), H¹(z¹)
};

inline ControlResponse control_response(const ModelSpec& spec, double z0, double z1) {
    const Response r0 = respond(spec, TypeId::zero, z0);
    const Response r1 = respond(spec, TypeId::one, z1);
    return {z0, z1, r0.action, r1.action, r0.hamiltonian, r1.hamiltonian};
}

inline double mean_action(const ControlResponse& c, double p) { return p * c.a0 + (1.0 - p) * c.a1; }

/// ℓ with discount factor e = e^{κ(T−t)} supplied by the caller.
inline double running_reward(const ControlResponse& c, double p, double discount) {
    const double lam = mean_action(c, p);
    return lam + 0.5 * discount * (c.h0 + c.h1 - lam * (c.z0 + c.z1));
}

/// Per-type pieces of ℓ: ℓ = p·ℓ₀ + (1−p)·ℓ₁.
inline double running_reward_type(const ControlResponse& c, double action, double discount) {
    return action + 0.5 * discount * (c.h0 + c.h1 - action * (c.z0 + c.z1));
}

inline double gap_drift(const ControlResponse& c, double kappa, double y, double p) {
    return -c.h0 + c.h1 + kappa * y + mean_action(c, p) * (c.z0 - c.z1);
}

inline double belief_volatility(const ControlResponse& c, double p) {
    return p * (1.0 - p) * (c.a0 - c.a1);
}

inline double discount_factor(const ModelSpec& spec, double t) {
    return std::exp(spec.kappa * (spec.horizon_T - t));
}

}  // namespace ashjb
