#include "gegcn/measure.hpp"

#include "gegcn/errors.hpp"

namespace gegcn {

ProbabilityMeasure random_walk_measure(const WeightedGraph& g, NodeId u, double alpha) {
    if (u < 0 || u >= g.node_count()) throw ValidationError("measure: node out of range");
    if (alpha < 0.0 || alpha > 1.0) throw ValidationError("random walk parameter must lie in [0,1]");
    const auto& nb = g.neighbors(u);
    if (nb.empty() && alpha < 1.0) {
        throw DegenerateMeasureError("node " + std::to_string(u) + " is isolated and alpha < 1");
    }

    ProbabilityMeasure m;
    if (alpha > 0.0) {
        m.support.push_back(u);
        m.mass.push_back(alpha);
    }
    if (alpha < 1.0) {
        const double wsum = g.weighted_degree(u);
        for (const auto& [v, e] : nb) {
            m.support.push_back(v);
            m.mass.push_back((1.0 - alpha) * g.weight(e) / wsum);
        }
    }
    return m;
}

}  // namespace gegcn
