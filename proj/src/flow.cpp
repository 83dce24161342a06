#include "gegcn/flow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "gegcn/errors.hpp"

namespace gegcn {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

FlowKernel parse_flow_kernel(const std::string& name) {
    if (name == "ma-yang") return FlowKernel::ma_yang;
    if (name == "ollivier") return FlowKernel::ollivier;
    throw ValidationError("unknown flow kernel '" + name + "'");
}

std::string kernel_name(FlowKernel k) { return k == FlowKernel::ma_yang ? "ma-yang" : "ollivier"; }

void FlowConfig::validate() const {
    if (T < 1) throw ValidationError("flow: T must be >= 1");
    if (!(delta > 0.0)) throw ValidationError("flow: step size must be positive");
    if (alpha < 0.0 || alpha > 1.0) throw ValidationError("flow: alpha must lie in [0,1]");
    if (!(eps > 0.0)) throw ValidationError("flow: Sinkhorn eps must be positive");
    if (!(w_min > 0.0)) throw ValidationError("flow: w_min must be positive");
}

CurvatureOptions FlowConfig::curvature_options() const {
    CurvatureOptions o;
    o.alpha = alpha;
    o.method = method;
    o.sinkhorn_eps = eps;
    o.sinkhorn_max_iter = sinkhorn_max_iter;
    o.sinkhorn_tol = sinkhorn_tol;
    return o;
}

std::vector<double> flow_step(const WeightedGraph& g, const CurvatureField& curvatures,
                              const std::vector<double>& rho, const FlowConfig& cfg) {
    if (curvatures.weights_token != g.weights_token()) {
        throw StalenessError("flow_step: curvature snapshot does not match current weights");
    }
    if (curvatures.kappa.size() != static_cast<std::size_t>(g.edge_count()) ||
        rho.size() != static_cast<std::size_t>(g.edge_count())) {
        throw ValidationError("flow_step: field sizes do not match edge count");
    }

    std::vector<double> next(static_cast<std::size_t>(g.edge_count()));
    double total_before = 0.0, total_after = 0.0;
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        const std::size_t i = static_cast<std::size_t>(e);
        const double w = g.weight(e);
        if (g.edge(e).is_loop()) {
            next[i] = w;
            continue;
        }
        const double driver = cfg.kernel == FlowKernel::ma_yang ? rho[i] : w;
        next[i] = std::max(cfg.w_min, w - cfg.delta * curvatures.kappa[i] * driver);
        total_before += w;
        total_after += next[i];
    }
    if (cfg.renormalize_total_weight && total_after > 0.0) {
        const double scale = total_before / total_after;
        for (EdgeId e = 0; e < g.edge_count(); ++e) {
            if (!g.edge(e).is_loop()) {
                const std::size_t i = static_cast<std::size_t>(e);
                next[i] = std::max(cfg.w_min, next[i] * scale);
            }
        }
    }
    return next;
}

GeometricSequence run_flow(const WeightedGraph& g, const FlowConfig& cfg) {
    cfg.validate();
    for (NodeId u = 0; u < g.node_count(); ++u) {
        if (!g.has_self_loop(u)) {
            throw ValidationError("run_flow: node " + std::to_string(u) + " lacks a self-loop (add_self_loops first)");
        }
        const auto loop = g.find_edge(u, u);
        if (g.weight(*loop) != 1.0) throw ValidationError("run_flow: self-loop weights must be exactly 1");
    }

    GeometricSequence seq;
    seq.T = cfg.T;
    seq.edges = g.edges();
    seq.kappa.assign(seq.edges.size(), std::vector<double>(static_cast<std::size_t>(cfg.T) + 1, 0.0));
    seq.weight.assign(seq.edges.size(), std::vector<double>(static_cast<std::size_t>(cfg.T) + 1, 1.0));
    seq.graph_sha256 = g.content_hash();
    seq.delta = cfg.delta;
    seq.alpha = cfg.alpha;
    seq.eps = cfg.eps;
    seq.w_min = cfg.w_min;
    seq.method = method_name(cfg.method);
    seq.kernel = kernel_name(cfg.kernel);

    WeightedGraph current = g;
    for (int t = 0; t <= cfg.T; ++t) {
        DistanceOracle oracle(current);
        std::vector<double> rho;
        CurvatureField field;
        try {
            rho = edge_distances(current, oracle);
            field = curvature_all_edges(current, oracle, cfg.curvature_options(), cfg.workers);
        } catch (const Error& e) {
            throw Error("run_flow: step " + std::to_string(t) + ": " + e.what());
        }
        for (EdgeId e = 0; e < current.edge_count(); ++e) {
            const std::size_t i = static_cast<std::size_t>(e);
            seq.kappa[i][static_cast<std::size_t>(t)] = field.kappa[i];
            seq.weight[i][static_cast<std::size_t>(t)] = current.weight(e);
        }
        if (t < cfg.T) {
            current = current.with_weights(flow_step(current, field, rho, cfg));
        }
    }
    return seq;
}

void save_sequence(const GeometricSequence& seq, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());

    ordered_json manifest;
    manifest["magic"] = "gegcn-seq";
    manifest["version"] = 1;
    manifest["graph_sha256"] = seq.graph_sha256;
    manifest["T"] = seq.T;
    manifest["delta"] = seq.delta;
    manifest["alpha"] = seq.alpha;
    manifest["eps"] = seq.eps;
    manifest["method"] = seq.method;
    manifest["kernel"] = seq.kernel;
    manifest["w_min"] = seq.w_min;
    out << manifest.dump() << "\n";

    for (EdgeId e = 0; e < seq.edge_count(); ++e) {
        const std::size_t i = static_cast<std::size_t>(e);
        ordered_json rec;
        rec["u"] = seq.edges[i].u;
        rec["v"] = seq.edges[i].v;
        rec["kappa"] = seq.kappa[i];
        rec["weight"] = seq.weight[i];
        out << rec.dump() << "\n";
    }
}

GeometricSequence load_sequence(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty sequence file");

    json manifest;
    try {
        manifest = json::parse(line);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("bad manifest: ") + e.what(), 1);
    }
    if (!manifest.is_object() || manifest.value("magic", "") != "gegcn-seq") {
        throw FormatError("not a gegcn-seq file", 1);
    }
    if (manifest.value("version", -1) != 1) {
        throw FormatError("unsupported sequence version " + std::to_string(manifest.value("version", -1)), 1);
    }

    GeometricSequence seq;
    seq.T = manifest.at("T").get<int>();
    seq.graph_sha256 = manifest.at("graph_sha256").get<std::string>();
    seq.delta = manifest.at("delta").get<double>();
    seq.alpha = manifest.at("alpha").get<double>();
    seq.eps = manifest.at("eps").get<double>();
    seq.w_min = manifest.at("w_min").get<double>();
    seq.method = manifest.at("method").get<std::string>();
    seq.kernel = manifest.at("kernel").get<std::string>();
    if (seq.T < 1) throw FormatError("manifest T must be >= 1", 1);

    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw FormatError(std::string("bad edge record (truncated file?): ") + e.what(), line_no);
        }
        Edge edge{rec.at("u").get<NodeId>(), rec.at("v").get<NodeId>()};
        if (edge.u > edge.v) throw FormatError("edge not in canonical order", line_no);
        auto kappa = rec.at("kappa").get<std::vector<double>>();
        auto weight = rec.at("weight").get<std::vector<double>>();
        if (kappa.size() != static_cast<std::size_t>(seq.T) + 1 ||
            weight.size() != static_cast<std::size_t>(seq.T) + 1) {
            throw FormatError("corrupt sequence: expected " + std::to_string(seq.T + 1) + " samples per edge, got " +
                                  std::to_string(kappa.size()) + "/" + std::to_string(weight.size()),
                              line_no);
        }
        if (!seq.edges.empty() && !(seq.edges.back() < edge)) {
            throw FormatError("edges out of order or duplicated", line_no);
        }
        seq.edges.push_back(edge);
        seq.kappa.push_back(std::move(kappa));
        seq.weight.push_back(std::move(weight));
    }
    if (seq.edges.empty()) throw FormatError("sequence file has no edge records");
    return seq;
}

void validate_sequence(const GeometricSequence& seq, const WeightedGraph& g) {
    if (seq.graph_sha256 != g.content_hash()) {
        throw ValidationError("sequence/graph hash mismatch: sequence was computed for a different graph");
    }
    if (seq.edges != g.edges()) {
        throw ValidationError("sequence edge list does not match the graph's canonical edges");
    }
}

std::vector<StepStats> sequence_stats(const GeometricSequence& seq) {
    // summaries cover ordinary edges; constant self-loop rows would only
    // dilute them (edgeless sequences fall back to the loop rows)
    std::vector<EdgeId> used;
    for (EdgeId e = 0; e < seq.edge_count(); ++e) {
        if (!seq.edges[static_cast<std::size_t>(e)].is_loop()) used.push_back(e);
    }
    if (used.empty()) {
        for (EdgeId e = 0; e < seq.edge_count(); ++e) used.push_back(e);
    }

    std::vector<StepStats> stats;
    stats.reserve(static_cast<std::size_t>(seq.T) + 1);
    for (int t = 0; t <= seq.T; ++t) {
        StepStats s;
        s.t = t;
        s.kappa_min = s.weight_min = std::numeric_limits<double>::infinity();
        s.kappa_max = s.weight_max = -std::numeric_limits<double>::infinity();
        double ksum = 0.0, wsum = 0.0;
        for (EdgeId e : used) {
            const double k = seq.kappa[static_cast<std::size_t>(e)][static_cast<std::size_t>(t)];
            const double w = seq.weight[static_cast<std::size_t>(e)][static_cast<std::size_t>(t)];
            s.kappa_min = std::min(s.kappa_min, k);
            s.kappa_max = std::max(s.kappa_max, k);
            s.weight_min = std::min(s.weight_min, w);
            s.weight_max = std::max(s.weight_max, w);
            ksum += k;
            wsum += w;
            if (!seq.edges[static_cast<std::size_t>(e)].is_loop() && w == seq.w_min) ++s.clamped;
        }
        s.kappa_mean = ksum / static_cast<double>(used.size());
        s.weight_mean = wsum / static_cast<double>(used.size());
        stats.push_back(s);
    }
    return stats;
}

}  // namespace gegcn
