#include "gegcn/curvature.hpp"

#include <string>

#include "gegcn/errors.hpp"
#include "gegcn/measure.hpp"
#include "gegcn/parallel.hpp"
#include "gegcn/transport.hpp"

namespace gegcn {

TransportMethod parse_transport_method(const std::string& name) {
    if (name == "exact") return TransportMethod::exact;
    if (name == "sinkhorn") return TransportMethod::sinkhorn;
    throw ValidationError("unknown transport method '" + name + "'");
}

std::string method_name(TransportMethod m) {
    return m == TransportMethod::exact ? "exact" : "sinkhorn";
}

namespace {

double edge_curvature(const WeightedGraph& g, DistanceOracle& oracle, EdgeId e, const CurvatureOptions& opts) {
    const Edge& ed = g.edge(e);
    if (ed.is_loop()) throw ValidationError("curvature of a self-loop is fixed at 0, not computed");
    const double rho = oracle.distance(ed.u, ed.v);
    if (!(rho > 0.0)) throw ValidationError("curvature: rho must be positive for edge (" + std::to_string(ed.u) +
                                            "," + std::to_string(ed.v) + ")");
    const ProbabilityMeasure mu = random_walk_measure(g, ed.u, opts.alpha);
    const ProbabilityMeasure mv = random_walk_measure(g, ed.v, opts.alpha);
    const GroundDistance dist = [&oracle](NodeId a, NodeId b) { return oracle.distance(a, b); };

    double w1 = 0.0;
    if (opts.method == TransportMethod::exact) {
        w1 = wasserstein_exact(mu, mv, dist).cost;
    } else {
        w1 = wasserstein_sinkhorn(mu, mv, dist, opts.sinkhorn_eps, opts.sinkhorn_max_iter, opts.sinkhorn_tol).cost;
    }
    return 1.0 - w1 / rho;
}

}  // namespace

double ollivier_ricci_edge(const WeightedGraph& g, DistanceOracle& oracle, EdgeId e,
                           const CurvatureOptions& opts) {
    if (!oracle.fresh_for(g)) throw StalenessError("curvature: oracle is stale for this graph");
    return edge_curvature(g, oracle, e, opts);
}

CurvatureField curvature_all_edges(const WeightedGraph& g, DistanceOracle& oracle,
                                   const CurvatureOptions& opts, unsigned workers) {
    if (!oracle.fresh_for(g)) throw StalenessError("curvature: oracle is stale for this graph");
    // distances computed once up front so the parallel section is read-only
    oracle.warm_all(workers);

    CurvatureField field;
    field.kappa.assign(static_cast<std::size_t>(g.edge_count()), 0.0);
    field.method = opts.method;
    field.alpha = opts.alpha;
    field.weights_token = g.weights_token();

    std::vector<std::string> failures(static_cast<std::size_t>(g.edge_count()));
    parallel_for(static_cast<std::size_t>(g.edge_count()), workers, [&](std::size_t i) {
        const EdgeId e = static_cast<EdgeId>(i);
        if (g.edge(e).is_loop()) return;  // stays 0
        try {
            field.kappa[i] = edge_curvature(g, oracle, e, opts);
        } catch (const std::exception& ex) {
            failures[i] = ex.what();
        }
    });

    std::string aggregated;
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        if (!failures[static_cast<std::size_t>(e)].empty()) {
            aggregated += "edge (" + std::to_string(g.edge(e).u) + "," + std::to_string(g.edge(e).v) +
                          "): " + failures[static_cast<std::size_t>(e)] + "; ";
        }
    }
    if (!aggregated.empty()) throw ValidationError("curvature failures: " + aggregated);
    return field;
}

}  // namespace gegcn
