#include "gegcn/propagation.hpp"

#include <cmath>

#include "gegcn/errors.hpp"

namespace gegcn {

PropagationIndex PropagationIndex::build(const WeightedGraph& g) {
    for (NodeId u = 0; u < g.node_count(); ++u) {
        if (!g.has_self_loop(u)) {
            throw ValidationError("propagation: node " + std::to_string(u) +
                                  " lacks a self-loop; normalize after add_self_loops");
        }
    }
    PropagationIndex p;
    p.n = g.node_count();
    p.canonical_count = g.edge_count();

    auto rows = std::make_shared<std::vector<int>>();
    auto cols = std::make_shared<std::vector<int>>();
    auto canon = std::make_shared<std::vector<int>>();
    std::vector<int> inc_rows, inc_cols;
    std::vector<double> inc_vals;
    std::vector<int> loop_rows, loop_cols;
    std::vector<double> loop_vals;

    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        const Edge& ed = g.edge(e);
        rows->push_back(ed.u);
        cols->push_back(ed.v);
        canon->push_back(e);
        inc_rows.push_back(ed.u);
        inc_cols.push_back(e);
        inc_vals.push_back(1.0);
        if (ed.is_loop()) {
            loop_rows.push_back(e);
            loop_cols.push_back(ed.u);
            loop_vals.push_back(1.0);
        } else {
            rows->push_back(ed.v);
            cols->push_back(ed.u);
            canon->push_back(e);
            inc_rows.push_back(ed.v);
            inc_cols.push_back(e);
            inc_vals.push_back(1.0);
        }
    }

    p.dir_rows = std::move(rows);
    p.dir_cols = std::move(cols);
    p.dir_canon = std::move(canon);
    p.incidence = std::make_shared<const CsrMatrix>(
        CsrMatrix::from_coo(g.node_count(), g.edge_count(), inc_rows, inc_cols, inc_vals));
    p.loop_selector = std::make_shared<const CsrMatrix>(
        CsrMatrix::from_coo(g.edge_count(), g.node_count(), loop_rows, loop_cols, loop_vals));
    return p;
}

Var normalized_adjacency_values(Tape& t, const PropagationIndex& prop, Var scores) {
    const Tensor& sv = t.value(scores);
    if (sv.cols() != 1 || sv.rows() != prop.canonical_count) {
        throw DimensionError("normalize: expected [" + std::to_string(prop.canonical_count) + " x 1] scores, got " +
                             sv.shape_str());
    }
    Var degree = t.spmm(prop.incidence, scores);
    Var dinv = t.rsqrt(degree);
    Var gu = t.gather_rows(dinv, prop.dir_rows);
    Var gv = t.gather_rows(dinv, prop.dir_cols);
    Var svals = t.gather_rows(scores, prop.dir_canon);
    return t.mul(t.mul(svals, gu), gv);
}

Var propagate(Tape& t, const PropagationIndex& prop, Var values, Var x) {
    return t.spmm_coo(prop.dir_rows, prop.dir_cols, prop.n, values, x);
}

Tensor normalize_dense(const Tensor& adj) {
    if (adj.rows() != adj.cols()) throw DimensionError("normalize_dense: matrix must be square, got " + adj.shape_str());
    const int n = adj.rows();
    std::vector<double> degree(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double a = adj.at(i, j);
            if (a < 0.0) throw ValidationError("normalize_dense: entries must be nonnegative");
            if (std::abs(a - adj.at(j, i)) > 1e-12) throw ValidationError("normalize_dense: matrix must be symmetric");
            degree[static_cast<std::size_t>(i)] += a;
        }
    }
    for (double d : degree) {
        if (!(d > 0.0)) throw ValidationError("normalize_dense: degenerate zero-degree row");
    }
    Tensor out(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            out.at(i, j) = adj.at(i, j) / std::sqrt(degree[static_cast<std::size_t>(i)] * degree[static_cast<std::size_t>(j)]);
        }
    }
    return out;
}

}  // namespace gegcn
