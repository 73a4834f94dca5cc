/**
 * @file grid.hpp
 * @brief Discretization parameters shared by the boundary, interior and screening solvers.
 */
#pragma once

#include "ashjb/model.hpp"

namespace ashjb {

struct GridSpec {
    int n_time = 100;    ///< time slices on [0, T − ε_T]
    int n_gap = 80;      ///< nodes in the rescaled gap s ∈ [0, 1]
    int n_belief = 40;   ///< nodes in p ∈ [0, 1]
    double control_trunc_K = 6.0;  ///< sensitivities restricted to [−K, K]
    int n_control = 41;            ///< control lattice points per axis
    int refine_iters = 20;         ///< pattern-search refinements per node
    double terminal_layer_eps = 0.01;  ///< ε_T
    double cfl_safety = 0.5;

    /// Throws ConfigError on the first violated invariant.
    void validate(const ModelSpec& spec) const;

    double terminal_time(const ModelSpec& spec) const { return spec.horizon_T - terminal_layer_eps; }
    double time_step(const ModelSpec& spec) const { return terminal_time(spec) / (n_time - 1); }
};

}  // namespace ashjb
