#pragma once

#include <vector>

#include "gegcn/graph.hpp"

namespace gegcn {

// Sparse node-indexed mass vector; entries unique, masses positive,
// total mass 1 within 1e-12. Zero-mass support points are dropped.
struct ProbabilityMeasure {
    std::vector<NodeId> support;
    std::vector<double> mass;

    double total() const {
        double s = 0.0;
        for (double m : mass) s += m;
        return s;
    }
    std::size_t size() const noexcept { return support.size(); }
};

// Lazy random walk centred at u: mass alpha at u, (1-alpha) * w_uv / sum_z w_uz
// at each non-loop neighbor v. Self-loops contribute only through alpha.
ProbabilityMeasure random_walk_measure(const WeightedGraph& g, NodeId u, double alpha);

}  // namespace gegcn
