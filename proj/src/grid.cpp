#include "ashjb/grid.hpp"

#include <cmath>

#include "ashjb/errors.hpp"

namespace ashjb {

void GridSpec::validate(const ModelSpec& spec) const {
    if (n_time < 8) throw ConfigError("grid.n_time", "must be >= 8");
    if (n_gap < 8) throw ConfigError("grid.n_gap", "must be >= 8");
    if (n_belief < 8) throw ConfigError("grid.n_belief", "must be >= 8");
    if (n_control < 3) throw ConfigError("grid.n_control", "must be >= 3");
    if (refine_iters < 0) throw ConfigError("grid.refine_iters", "must be >= 0");
    if (!(control_trunc_K > saturation_threshold(spec)))
        throw ConfigError("grid.control_trunc_K", "must exceed the saturation threshold C0 = " +
                                                      std::to_string(saturation_threshold(spec)));
    if (!(terminal_layer_eps > 0.0 && terminal_layer_eps < spec.horizon_T / 10.0))
        throw ConfigError("grid.terminal_layer_eps", "must lie in (0, T/10)");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw ConfigError("grid.cfl_safety", "must lie in (0, 1]");
}

}  // namespace ashjb
