#include "gegcn/lstm.hpp"

#include <cmath>

#include "gegcn/errors.hpp"

namespace gegcn {

LstmParams LstmParams::init(int input_dim, int hidden, Rng& rng) {
    LstmParams p;
    p.input_dim = input_dim;
    p.hidden = hidden;
    p.Wf = Parameter::glorot(input_dim, hidden, rng);
    p.Wi = Parameter::glorot(input_dim, hidden, rng);
    p.Wo = Parameter::glorot(input_dim, hidden, rng);
    p.Wc = Parameter::glorot(input_dim, hidden, rng);
    p.Uf = Parameter::glorot(hidden, hidden, rng);
    p.Ui = Parameter::glorot(hidden, hidden, rng);
    p.Uo = Parameter::glorot(hidden, hidden, rng);
    p.Uc = Parameter::glorot(hidden, hidden, rng);
    p.bf = Parameter::constant(1, hidden, 1.0);  // open forget gates at the start
    p.bi = Parameter::zeros(1, hidden);
    p.bo = Parameter::zeros(1, hidden);
    p.bc = Parameter::zeros(1, hidden);
    p.Ws = Parameter::glorot(hidden, 1, rng);
    p.bs = Parameter::zeros(1, 1);
    return p;
}

std::vector<Parameter*> LstmParams::all() {
    return {&Wf, &Wi, &Wo, &Wc, &Uf, &Ui, &Uo, &Uc, &bf, &bi, &bo, &bc, &Ws, &bs};
}

long LstmParams::param_count() const {
    long n = 0;
    for (const Parameter* p : const_cast<LstmParams*>(this)->all()) n += static_cast<long>(p->value.size());
    return n;
}

LstmVars bind_lstm(Tape& tape, LstmParams& p) {
    LstmVars v;
    v.Wf = tape.param(p.Wf);
    v.Wi = tape.param(p.Wi);
    v.Wo = tape.param(p.Wo);
    v.Wc = tape.param(p.Wc);
    v.Uf = tape.param(p.Uf);
    v.Ui = tape.param(p.Ui);
    v.Uo = tape.param(p.Uo);
    v.Uc = tape.param(p.Uc);
    v.bf = tape.param(p.bf);
    v.bi = tape.param(p.bi);
    v.bo = tape.param(p.bo);
    v.bc = tape.param(p.bc);
    v.Ws = tape.param(p.Ws);
    v.bs = tape.param(p.bs);
    return v;
}

std::pair<Var, Var> lstm_cell(Tape& t, const LstmVars& p, Var x, Var h_prev, Var c_prev) {
    auto gate = [&](Var W, Var U, Var b) {
        return t.add_rowvec(t.add(t.matmul(x, W), t.matmul(h_prev, U)), b);
    };
    Var f = t.sigmoid(gate(p.Wf, p.Uf, p.bf));
    Var i = t.sigmoid(gate(p.Wi, p.Ui, p.bi));
    Var o = t.sigmoid(gate(p.Wo, p.Uo, p.bo));
    Var c_tilde = t.tanh(gate(p.Wc, p.Uc, p.bc));
    Var c = t.add(t.mul(f, c_prev), t.mul(i, c_tilde));
    Var h = t.mul(o, t.tanh(c));
    return {h, c};
}

Var encode_sequences(Tape& t, const LstmVars& p, const std::vector<Var>& steps) {
    if (steps.empty()) throw ValidationError("encode: empty sequence");
    const int batch = t.value(steps.front()).rows();
    const int hidden = t.value(p.Uf).rows();
    Var h = t.constant(Tensor(batch, hidden));
    Var c = t.constant(Tensor(batch, hidden));
    for (Var x : steps) {
        auto [h2, c2] = lstm_cell(t, p, x, h, c);
        h = h2;
        c = c2;
    }
    return h;
}

Var encode_edge_sequence(Tape& t, const LstmVars& p, const Tensor& series) {
    if (series.rows() < 1) throw ValidationError("encode: empty sequence");
    std::vector<Var> steps;
    steps.reserve(static_cast<std::size_t>(series.rows()));
    for (int r = 0; r < series.rows(); ++r) {
        Tensor step(1, series.cols());
        for (int j = 0; j < series.cols(); ++j) step.at(0, j) = series.at(r, j);
        steps.push_back(t.constant(std::move(step)));
    }
    return encode_sequences(t, p, steps);
}

Var score_logits(Tape& t, const LstmVars& p, Var h_final) {
    return t.add_rowvec(t.matmul(h_final, p.Ws), p.bs);
}

Var edge_scores(Tape& t, const LstmVars& p, Var h_final) { return t.sigmoid(score_logits(t, p, h_final)); }

std::vector<Tensor> sequence_inputs(const GeometricSequence& seq, bool standardize) {
    const int steps = seq.T + 1;
    const EdgeId ne = seq.edge_count();
    double mean_k = 0.0, mean_w = 0.0;
    double sd_k = 1.0, sd_w = 1.0;
    if (standardize) {
        const double count = static_cast<double>(ne) * steps;
        double sk = 0.0, sw = 0.0, sk2 = 0.0, sw2 = 0.0;
        for (EdgeId e = 0; e < ne; ++e) {
            for (int t = 0; t < steps; ++t) {
                const double k = seq.kappa[static_cast<std::size_t>(e)][static_cast<std::size_t>(t)];
                const double w = seq.weight[static_cast<std::size_t>(e)][static_cast<std::size_t>(t)];
                sk += k;
                sw += w;
                sk2 += k * k;
                sw2 += w * w;
            }
        }
        mean_k = sk / count;
        mean_w = sw / count;
        sd_k = std::sqrt(std::max(sk2 / count - mean_k * mean_k, 0.0));
        sd_w = std::sqrt(std::max(sw2 / count - mean_w * mean_w, 0.0));
        if (sd_k < 1e-12) sd_k = 1.0;
        if (sd_w < 1e-12) sd_w = 1.0;
    }

    std::vector<Tensor> out;
    out.reserve(static_cast<std::size_t>(steps));
    for (int t = 0; t < steps; ++t) {
        Tensor x(ne, 2);
        for (EdgeId e = 0; e < ne; ++e) {
            x.at(e, 0) = (seq.kappa[static_cast<std::size_t>(e)][static_cast<std::size_t>(t)] - mean_k) / sd_k;
            x.at(e, 1) = (seq.weight[static_cast<std::size_t>(e)][static_cast<std::size_t>(t)] - mean_w) / sd_w;
        }
        out.push_back(std::move(x));
    }
    return out;
}

Tensor ImportanceMatrix::to_dense() const {
    Tensor a(n, n);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        a.at(entries[i].u, entries[i].v) = scores[i];
        a.at(entries[i].v, entries[i].u) = scores[i];
    }
    return a;
}

ImportanceMatrix build_importance_matrix(const std::vector<double>& scores, const WeightedGraph& g) {
    if (scores.size() != static_cast<std::size_t>(g.edge_count())) {
        throw ValidationError("importance matrix: expected one score per canonical edge (" +
                              std::to_string(g.edge_count()) + "), got " + std::to_string(scores.size()));
    }
    for (NodeId u = 0; u < g.node_count(); ++u) {
        if (!g.has_self_loop(u)) {
            throw ValidationError("importance matrix: node " + std::to_string(u) + " lacks a self-loop score");
        }
    }
    for (double s : scores) {
        if (!(s > 0.0) || !(s < 1.0)) {
            throw ValidationError("importance scores must lie strictly inside (0,1), got " + std::to_string(s));
        }
    }
    ImportanceMatrix m;
    m.n = g.node_count();
    m.entries = g.edges();
    m.scores = scores;
    return m;
}

AblationVariant parse_ablation(const std::string& name) {
    if (name == "first") return AblationVariant::first;
    if (name == "last") return AblationVariant::last;
    if (name == "mean") return AblationVariant::mean;
    throw ValidationError("unknown ablation variant '" + name + "'");
}

std::vector<double> ablation_scores(const GeometricSequence& seq, AblationVariant variant) {
    std::vector<double> out(static_cast<std::size_t>(seq.edge_count()));
    for (EdgeId e = 0; e < seq.edge_count(); ++e) {
        const auto& k = seq.kappa[static_cast<std::size_t>(e)];
        double x = 0.0;
        switch (variant) {
            case AblationVariant::first: x = k.front(); break;
            case AblationVariant::last: x = k.back(); break;
            case AblationVariant::mean: {
                double s = 0.0;
                for (double v : k) s += v;
                x = s / static_cast<double>(k.size());
                break;
            }
        }
        out[static_cast<std::size_t>(e)] = 1.0 / (1.0 + std::exp(-x));
    }
    return out;
}

}  // namespace gegcn
