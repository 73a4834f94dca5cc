#pragma once

#include <algorithm>
#include <initializer_list>
#include <vector>

namespace ashjb::detail {

/// Sorted search points on [lo, hi]: a dense uniform grid, the n_nodes field nodes and any
/// kinks that fall inside the interval. Objectives that are piecewise linear between field
/// nodes attain their maximum on this set.
inline std::vector<double> gap_search_points(double lo, double hi, int n_nodes, std::initializer_list<double> kinks,
                                             int n_dense = 4001) {
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(n_dense + n_nodes) + kinks.size());
    for (int i = 0; i < n_dense; ++i) g.push_back(lo + (hi - lo) * i / (n_dense - 1));
    for (int i = 0; i < n_nodes; ++i) g.push_back(lo + (hi - lo) * i / (n_nodes - 1));
    for (double k : kinks)
        if (k > lo && k < hi) g.push_back(k);
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

}  // namespace ashjb::detail
