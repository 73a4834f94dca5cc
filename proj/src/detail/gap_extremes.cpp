#include "detail/gap_extremes.hpp"

#include <algorithm>
#include <limits>

namespace ashjb::detail {

std::vector<double> gap_candidates(const ModelSpec& spec) {
    std::vector<double> kinks;
    for (TypeId th : {TypeId::zero, TypeId::one})
        for (double a : {spec.action_min, spec.action_max}) kinks.push_back(cost_derivative(spec, th, a));
    std::sort(kinks.begin(), kinks.end());

    std::vector<double> out = kinks;
    auto slope = [&](double z) {
        return optimal_action(spec, TypeId::zero, z) - optimal_action(spec, TypeId::one, z);
    };
    for (std::size_t k = 0; k + 1 < kinks.size(); ++k) {
        const double fa = slope(kinks[k]), fb = slope(kinks[k + 1]);
        if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0))
            out.push_back(kinks[k] + (kinks[k + 1] - kinks[k]) * fa / (fa - fb));
    }
    return out;
}

std::pair<double, double> gap_extremes(const ModelSpec& spec) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double z : gap_candidates(spec)) {
        const double g = gap_function(spec, z);
        lo = std::min(lo, g);
        hi = std::max(hi, g);
    }
    return {lo, hi};
}

}  // namespace ashjb::detail
