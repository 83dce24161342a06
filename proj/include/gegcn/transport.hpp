#pragma once

#include <functional>

#include "gegcn/measure.hpp"
#include "gegcn/tensor.hpp"

namespace gegcn {

using GroundDistance = std::function<double(NodeId, NodeId)>;

// Coupling between two measures: plan[i][j] moves mass from mu.support[i]
// to mv.support[j]; cost is the plan's linear transport cost.
struct TransportPlan {
    int rows = 0;
    int cols = 0;
    Tensor plan;
    double cost = 0.0;
};

// Globally optimal W1 via successive shortest paths with node potentials on
// the bipartite support graph. Serves as the exact oracle for Sinkhorn.
// Throws ValidationError when total masses disagree beyond 1e-9 or any
// support distance is non-finite.
TransportPlan wasserstein_exact(const ProbabilityMeasure& mu, const ProbabilityMeasure& mv,
                                const GroundDistance& dist);

struct SinkhornResult {
    double cost = 0.0;          // linear cost <plan, dist>, entropy excluded
    bool converged = false;     // marginal residual < tol before max_iter
    int iterations = 0;
    double marginal_residual = 0.0;  // L1 distance of plan marginals to (a, b)
};

// Entropically regularized transport, alternating marginal scaling in the
// log domain (stable for eps down to ~1e-4 at these support sizes).
SinkhornResult wasserstein_sinkhorn(const ProbabilityMeasure& mu, const ProbabilityMeasure& mv,
                                    const GroundDistance& dist, double eps, int max_iter, double tol);

}  // namespace gegcn
