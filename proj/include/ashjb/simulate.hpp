/**
 * @file simulate.hpp
 * @brief Monte Carlo rollouts of the filtered state system under a feedback policy.
 *
 * Under the innovation Brownian motion B:
 *   dX   = λ̄ dt + dB,
 *   dYᶿ  = (−Hᶿ(Zᶿ) + κYᶿ + λ̄Zᶿ) dt + Zᶿ dB,
 *   dl   = Δλ dB − ½(1 − 2p)Δλ² dt,   l = log(p/(1−p)),
 * with λ̄ = pA⁰(Z⁰) + (1−p)A¹(Z¹) and Δλ = A⁰(Z⁰) − A¹(Z¹).
 */
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "ashjb/boundary_values.hpp"
#include "ashjb/hjb.hpp"
#include "ashjb/model.hpp"

namespace ashjb {

struct SimConfig {
    int n_paths = 10000;
    double dt = 1e-3;
    std::uint64_t seed = 20240601;
    double clamp_eps = 1e-12;  ///< log-odds are kept within ±log((1−ε)/ε)
    double x0 = 0.0;
    double y0 = 0.0;
    double y1 = 0.0;
    double p0 = 0.5;

    /// Throws ConfigError with "sim.*" paths.
    void validate() const;
};

struct PathBundle {
    int n_paths = 0;
    int n_steps = 0;
    double payoff_mean = 0.0;
    double payoff_se = 0.0;
    double max_excursion = 0.0;             ///< largest outward band excursion before clamping
    double violation_fraction = 0.0;        ///< fraction of steps with any outward excursion
    double large_violation_fraction = 0.0;  ///< fraction with excursion > 5·√dt·|z⁰ − z¹|
    double hit_fraction = 0.0;              ///< paths that reached a band edge before T
    double terminal_gap_mean = 0.0;         ///< mean |Y⁰_T − Y¹_T|
    double terminal_gap_max = 0.0;
    double belief_min = 1.0;
    double belief_max = 0.0;
    double terminal_belief_mean = 0.0;
    double terminal_belief_se = 0.0;
};

/// Feedback law (t, gap, p) ↦ (z⁰, z¹).
using ControlLaw = std::function<std::array<double, 2>(double t, double gap, double p)>;

/// Sensitivities read from a solved policy: slice k with t_k ≤ t, bilinear in (s, p).
std::array<double, 2> policy_control(const ValueField& field, const PolicyField& policy, double t, double gap, double p);

/// Matched boundary control from the policy's boundary column at the nearest belief node.
double boundary_control(const ValueField& field, const PolicyField& policy, Side side, double t, double p);

PathBundle rollout_policy(const ModelSpec& spec, const ValueField& field, const PolicyField& policy,
                          const SimConfig& sim);

/// Rollout under an arbitrary law. With switch_on_hit the law is replaced by the matched
/// boundary controls once the gap reaches a band edge, and the gap then follows the edge.
PathBundle rollout_law(const ModelSpec& spec, const ValueField& field, const PolicyField& policy, const ControlLaw& law,
                       bool switch_on_hit, const SimConfig& sim);

struct TrajectoryRow {
    int path = 0;
    double t = 0.0;
    double x = 0.0;
    double p = 0.0;
    double y0 = 0.0;
    double y1 = 0.0;
    double w_lower = 0.0;
    double w_upper = 0.0;
    double z0 = 0.0;
    double z1 = 0.0;
    NodeKind boundary_flag = NodeKind::interior;
};

/// Per-step records of the first n_export paths; the controls in a row are those applied on
/// the step that starts at t.
std::vector<TrajectoryRow> trajectory_export(const ModelSpec& spec, const ValueField& field, const PolicyField& policy,
                                             const SimConfig& sim, int n_export);

struct FilterCheckConfig {
    int n_paths = 10000;
    double dt = 1e-3;
    double horizon_T = 2.0;
    double p0 = 0.5;
    std::uint64_t seed = 7;
    double quantile = 0.95;
};

struct FilterReport {
    double quantile_max_dev = 0.0;       ///< quantile of per-path max |p_Kushner − p_Bayes|
    double quantile_max_dev_half = 0.0;  ///< same with dt/2 on the same Brownian paths
    double halving_ratio = 0.0;
    double quantile_max_dev_euler = 0.0;  ///< plain Euler–Maruyama Kushner path, for reference
    double mean_terminal_dev = 0.0;
    double terminal_mean_bayes = 0.0;
    double terminal_se_bayes = 0.0;
    double terminal_mean_kushner = 0.0;
    double terminal_se_kushner = 0.0;
};

/// Fixed actions (A⁰(t), A¹(t)) under which the observation is generated.
using ActionPath = std::function<std::array<double, 2>(double t)>;

/**
 * @brief Kushner–Stratonovich path against the exact Bayes posterior.
 *
 * Θ is drawn from the prior and X is simulated with the true-type drift. The Bayes
 * posterior uses the likelihood ratio of the observed increments; the Kushner path is a
 * Milstein discretization driven by the innovation increments dX − λ̄ dt.
 */
FilterReport filter_oracle_check(const ActionPath& actions, const FilterCheckConfig& cfg);

}  // namespace ashjb
