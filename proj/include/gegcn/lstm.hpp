#pragma once

#include <utility>
#include <vector>

#include "gegcn/flow.hpp"
#include "gegcn/graph.hpp"
#include "gegcn/tape.hpp"

namespace gegcn {

// Shared LSTM encoder over per-edge (kappa, w) trajectories plus the scoring
// head. One parameter set serves every edge, so the parameter count is
// independent of the number of edges.
struct LstmParams {
    int input_dim = 2;
    int hidden = 16;
    Parameter Wf, Wi, Wo, Wc;  // input_dim x hidden
    Parameter Uf, Ui, Uo, Uc;  // hidden x hidden
    Parameter bf, bi, bo, bc;  // 1 x hidden; forget bias initialized to +1
    Parameter Ws;              // hidden x 1 scoring head
    Parameter bs;              // 1 x 1

    static LstmParams init(int input_dim, int hidden, Rng& rng);
    std::vector<Parameter*> all();
    long param_count() const;
};

// Tape-bound handles for one forward build.
struct LstmVars {
    Var Wf, Wi, Wo, Wc, Uf, Ui, Uo, Uc, bf, bi, bo, bc, Ws, bs;
};

LstmVars bind_lstm(Tape& tape, LstmParams& params);

// One gated step over a batch: x [B x input_dim], h/c [B x hidden].
std::pair<Var, Var> lstm_cell(Tape& tape, const LstmVars& p, Var x, Var h_prev, Var c_prev);

// Left-to-right scan from zero initial states; steps[t] is the B x input_dim
// input at step t. Returns the final hidden state [B x hidden].
Var encode_sequences(Tape& tape, const LstmVars& p, const std::vector<Var>& steps);

// Single-edge convenience: series is (T+1) x input_dim, returns [1 x hidden].
Var encode_edge_sequence(Tape& tape, const LstmVars& p, const Tensor& series);

// Pre-sigmoid scoring head: W_s h + b_s, [B x 1].
Var score_logits(Tape& tape, const LstmVars& p, Var h_final);
// a*_e = sigmoid(W_s h + b_s), strictly inside (0,1).
Var edge_scores(Tape& tape, const LstmVars& p, Var h_final);

// LSTM inputs from a flow sequence: steps[t] is an E' x 2 matrix of
// [kappa_e(t), w_e(t)] rows in canonical edge order. Optional per-feature
// z-scoring over all edges and steps (weights can grow large for big T).
std::vector<Tensor> sequence_inputs(const GeometricSequence& seq, bool standardize);

// Symmetric sparse importance matrix with entries on edges and self-loops.
struct ImportanceMatrix {
    NodeId n = 0;
    std::vector<Edge> entries;   // canonical order, self-loops included
    std::vector<double> scores;  // parallel to entries, strictly in (0,1)

    Tensor to_dense() const;
};

// One score per canonical edge of a graph-with-self-loops.
ImportanceMatrix build_importance_matrix(const std::vector<double>& scores, const WeightedGraph& g_with_loops);

// Non-learned score maps for the ablation variants: sigmoid of the first /
// last / mean curvature of each edge's trajectory.
enum class AblationVariant { first, last, mean };
AblationVariant parse_ablation(const std::string& name);
std::vector<double> ablation_scores(const GeometricSequence& seq, AblationVariant variant);

}  // namespace gegcn
