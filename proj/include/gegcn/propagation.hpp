#pragma once

#include <memory>
#include <vector>

#include "gegcn/graph.hpp"
#include "gegcn/tape.hpp"

namespace gegcn {

// Fixed sparsity layout for symmetric degree normalization of a
// graph-with-self-loops. Both the static (all-ones) and the learned
// normalization run through this one structure, so the two paths differ only
// in the score vector they feed in.
struct PropagationIndex {
    NodeId n = 0;
    EdgeId canonical_count = 0;
    // directed expansion: two entries per ordinary edge, one per loop
    std::shared_ptr<const std::vector<int>> dir_rows;
    std::shared_ptr<const std::vector<int>> dir_cols;
    std::shared_ptr<const std::vector<int>> dir_canon;  // directed entry -> canonical EdgeId
    // n x E' incidence: degree vector = incidence * scores
    std::shared_ptr<const CsrMatrix> incidence;
    // E' x n selector with a 1 at (loop edge row, node): adds a per-node bias
    // onto self-loop score logits
    std::shared_ptr<const CsrMatrix> loop_selector;

    static PropagationIndex build(const WeightedGraph& g_with_loops);
};

// scores [E' x 1] with positive entries -> normalized directed values
// a_e / sqrt(deg_u deg_v), differentiable in every score.
Var normalized_adjacency_values(Tape& tape, const PropagationIndex& prop, Var scores);

// Y = A_hat * X given the normalized directed values.
Var propagate(Tape& tape, const PropagationIndex& prop, Var values, Var x);

// Dense reference: D^-1/2 A D^-1/2 for a symmetric nonnegative matrix with
// positive row sums.
Tensor normalize_dense(const Tensor& adj);

}  // namespace gegcn
