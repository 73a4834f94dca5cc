#pragma once

// Small grids and cached solves shared by the unit tests.

#include "ashjb/boundary_values.hpp"
#include "ashjb/grid.hpp"
#include "ashjb/hjb.hpp"
#include "ashjb/model.hpp"
#include "ashjb/screening.hpp"

namespace fixture {

inline ashjb::GridSpec small_grid() {
    ashjb::GridSpec g;
    g.n_time = 24;
    g.n_gap = 17;
    g.n_belief = 9;
    g.n_control = 15;
    g.refine_iters = 10;
    return g;
}

struct Solved {
    ashjb::ModelSpec spec;
    ashjb::GridSpec grid;
    ashjb::BoundaryValues bvals;
    ashjb::InteriorSolution sol;
    ashjb::ScreeningSolution screening;
};

inline Solved make(const ashjb::ModelSpec& spec) {
    Solved s;
    s.spec = spec;
    s.grid = small_grid();
    s.bvals = ashjb::make_boundary_values(spec, s.grid);
    s.sol = ashjb::solve_interior(spec, s.grid, s.bvals);
    s.screening = ashjb::solve_screening(spec, s.grid, s.bvals);
    return s;
}

inline const Solved& dominated() {
    static const Solved s = make(ashjb::ModelSpec::dominated());
    return s;
}

inline const Solved& nondominated() {
    static const Solved s = make(ashjb::ModelSpec::nondominated());
    return s;
}

}  // namespace fixture
