#pragma once

#include <utility>
#include <vector>

#include "ashjb/model.hpp"

namespace ashjb::detail {

/// Points where z ↦ H⁰(z) − H¹(z) can attain its extremes: the kinks of the
/// piecewise-linear slope A⁰ − A¹ and its sign changes between kinks.
std::vector<double> gap_candidates(const ModelSpec& spec);

/// Exact (inf, sup) of the gap function for quadratic costs.
std::pair<double, double> gap_extremes(const ModelSpec& spec);

}  // namespace ashjb::detail
