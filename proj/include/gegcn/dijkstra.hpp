#pragma once

#include <memory>
#include <vector>

#include "gegcn/graph.hpp"

namespace gegcn {

// Exact single-source shortest paths; unreachable nodes map to +inf.
// Self-loops never participate in relaxation.
std::vector<double> dijkstra(const WeightedGraph& g, NodeId source);

// Per-source distance cache tied to the weight vector it was computed from.
// Lazy per-source fill is single-threaded; call warm_all() before concurrent
// reads.
class DistanceOracle {
public:
    explicit DistanceOracle(const WeightedGraph& g)
        : g_(&g), token_(g.weights_token()), rows_(static_cast<std::size_t>(g.node_count())) {}

    const std::vector<double>& distances_from(NodeId s);
    void warm_all(unsigned workers = 0);
    double distance(NodeId a, NodeId b) { return distances_from(a)[static_cast<std::size_t>(b)]; }
    bool fresh_for(const WeightedGraph& g) const noexcept { return token_ == g.weights_token(); }
    const WeightedGraph& graph() const noexcept { return *g_; }

private:
    const WeightedGraph* g_;
    std::uint64_t token_;
    std::vector<std::unique_ptr<std::vector<double>>> rows_;
};

// rho_e for every canonical edge: shortest-path distance between endpoints
// for ordinary edges, the constant 1 for self-loops. Throws StalenessError
// when the oracle was built from different weights.
std::vector<double> edge_distances(const WeightedGraph& g, DistanceOracle& oracle);

}  // namespace gegcn
