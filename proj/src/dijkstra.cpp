#include "gegcn/dijkstra.hpp"

#include <limits>
#include <queue>

#include "gegcn/errors.hpp"
#include "gegcn/parallel.hpp"

namespace gegcn {

std::vector<double> dijkstra(const WeightedGraph& g, NodeId source) {
    if (source < 0 || source >= g.node_count()) throw ValidationError("dijkstra: source out of range");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(static_cast<std::size_t>(g.node_count()), inf);
    dist[static_cast<std::size_t>(source)] = 0.0;

    using Item = std::pair<double, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[static_cast<std::size_t>(u)]) continue;  // stale entry
        for (const auto& [v, e] : g.neighbors(u)) {
            const double nd = d + g.weight(e);
            if (nd < dist[static_cast<std::size_t>(v)]) {
                dist[static_cast<std::size_t>(v)] = nd;
                heap.emplace(nd, v);
            }
        }
    }
    return dist;
}

const std::vector<double>& DistanceOracle::distances_from(NodeId s) {
    auto& slot = rows_[static_cast<std::size_t>(s)];
    if (!slot) slot = std::make_unique<std::vector<double>>(dijkstra(*g_, s));
    return *slot;
}

void DistanceOracle::warm_all(unsigned workers) {
    parallel_for(rows_.size(), workers, [this](std::size_t s) {
        auto& slot = rows_[s];
        if (!slot) slot = std::make_unique<std::vector<double>>(dijkstra(*g_, static_cast<NodeId>(s)));
    });
}

std::vector<double> edge_distances(const WeightedGraph& g, DistanceOracle& oracle) {
    if (!oracle.fresh_for(g)) {
        throw StalenessError("distance oracle is stale for the supplied weight vector");
    }
    std::vector<double> rho(static_cast<std::size_t>(g.edge_count()));
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        const Edge& ed = g.edge(e);
        rho[static_cast<std::size_t>(e)] = ed.is_loop() ? 1.0 : oracle.distance(ed.u, ed.v);
    }
    return rho;
}

}  // namespace gegcn
