#pragma once

#include <cstdint>
#include <vector>

#include "gegcn/dijkstra.hpp"
#include "gegcn/graph.hpp"

namespace gegcn {

enum class TransportMethod { exact, sinkhorn };

TransportMethod parse_transport_method(const std::string& name);
std::string method_name(TransportMethod m);

struct CurvatureOptions {
    double alpha = 0.5;
    TransportMethod method = TransportMethod::sinkhorn;
    double sinkhorn_eps = 0.1;
    int sinkhorn_max_iter = 200;
    double sinkhorn_tol = 1e-6;
};

// kappa indexed by EdgeId; self-loop entries are exactly 0 by convention.
struct CurvatureField {
    std::vector<double> kappa;
    TransportMethod method = TransportMethod::exact;
    double alpha = 0.5;
    std::uint64_t weights_token = 0;  // weights the field was computed from
};

// kappa_e = 1 - W1(m_u, m_v) / rho_e with rho_e the current weighted
// shortest-path distance between the endpoints.
double ollivier_ricci_edge(const WeightedGraph& g, DistanceOracle& oracle, EdgeId e,
                           const CurvatureOptions& opts);

// One kappa per edge from a single distance snapshot; embarrassingly parallel
// over edges, merged in EdgeId order (deterministic).
CurvatureField curvature_all_edges(const WeightedGraph& g, DistanceOracle& oracle,
                                   const CurvatureOptions& opts, unsigned workers = 0);

}  // namespace gegcn
