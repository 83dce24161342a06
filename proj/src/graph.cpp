#include "gegcn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "gegcn/hash.hpp"

namespace gegcn {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void append_bytes(std::vector<unsigned char>& buf, const void* p, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(p);
    buf.insert(buf.end(), b, b + len);
}

std::vector<unsigned char> content_bytes(NodeId n, const std::vector<Edge>& edges,
                                         const std::vector<double>& weights) {
    std::vector<unsigned char> buf;
    buf.reserve(16 + edges.size() * 24);
    const std::int64_t n64 = n;
    const std::int64_t e64 = static_cast<std::int64_t>(edges.size());
    append_bytes(buf, &n64, sizeof(n64));
    append_bytes(buf, &e64, sizeof(e64));
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const std::int64_t u = edges[i].u, v = edges[i].v;
        append_bytes(buf, &u, sizeof(u));
        append_bytes(buf, &v, sizeof(v));
        append_bytes(buf, &weights[i], sizeof(double));
    }
    return buf;
}

}  // namespace

GraphFormat parse_graph_format(const std::string& name) {
    if (name == "planetoid-raw") return GraphFormat::planetoid_raw;
    if (name == "webkb-raw") return GraphFormat::webkb_raw;
    if (name == "normalized-json") return GraphFormat::normalized_json;
    throw ValidationError("unknown graph format '" + name + "'");
}

std::string format_name(GraphFormat f) {
    switch (f) {
        case GraphFormat::planetoid_raw: return "planetoid-raw";
        case GraphFormat::webkb_raw: return "webkb-raw";
        case GraphFormat::normalized_json: return "normalized-json";
    }
    return "?";
}

WeightedGraph WeightedGraph::build(NodeId n, std::vector<EdgeInput> edge_inputs,
                                   std::shared_ptr<const Tensor> features,
                                   std::shared_ptr<const std::vector<int>> labels) {
    if (n < 0) throw ValidationError("negative node count");
    for (auto& e : edge_inputs) {
        if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n) {
            throw ValidationError("dangling edge endpoint (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                                  ") with node count " + std::to_string(n));
        }
        if (!(e.w > 0.0) || !std::isfinite(e.w)) {
            throw ValidationError("edge weight must be strictly positive and finite, got " + std::to_string(e.w));
        }
        if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edge_inputs.begin(), edge_inputs.end(), [](const EdgeInput& a, const EdgeInput& b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });

    WeightedGraph g;
    g.n_ = n;
    for (std::size_t i = 0; i < edge_inputs.size(); ++i) {
        const auto& e = edge_inputs[i];
        if (!g.edges_.empty() && g.edges_.back().u == e.u && g.edges_.back().v == e.v) {
            if (g.weights_.back() != e.w) {
                throw ValidationError("duplicate edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                                      ") with conflicting weights");
            }
            continue;
        }
        g.edges_.push_back(Edge{e.u, e.v});
        g.weights_.push_back(e.w);
    }

    if (features) {
        if (features->rows() != n) {
            throw ValidationError("feature matrix has " + std::to_string(features->rows()) + " rows for " +
                                  std::to_string(n) + " nodes");
        }
        g.features_ = std::move(features);
    }
    if (labels) {
        if (static_cast<NodeId>(labels->size()) != n) {
            throw ValidationError("label vector has " + std::to_string(labels->size()) + " entries for " +
                                  std::to_string(n) + " nodes");
        }
        g.labels_ = std::move(labels);
    }

    g.build_index();
    return g;
}

void WeightedGraph::build_index() {
    adj_.assign(static_cast<std::size_t>(n_), {});
    self_loop_.assign(static_cast<std::size_t>(n_), -1);
    for (EdgeId e = 0; e < edge_count(); ++e) {
        const Edge& ed = edges_[static_cast<std::size_t>(e)];
        if (ed.is_loop()) {
            self_loop_[static_cast<std::size_t>(ed.u)] = e;
        } else {
            adj_[static_cast<std::size_t>(ed.u)].emplace_back(ed.v, e);
            adj_[static_cast<std::size_t>(ed.v)].emplace_back(ed.u, e);
        }
    }
    for (auto& nb : adj_) {
        std::sort(nb.begin(), nb.end());
    }
    const auto bytes = content_bytes(n_, edges_, weights_);
    weights_token_ = fnv1a64(bytes.data(), bytes.size());
}

std::optional<EdgeId> WeightedGraph::find_edge(NodeId u, NodeId v) const {
    if (u > v) std::swap(u, v);
    const Edge key{u, v};
    auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
    if (it != edges_.end() && *it == key) return static_cast<EdgeId>(it - edges_.begin());
    return std::nullopt;
}

double WeightedGraph::weighted_degree(NodeId u) const {
    double s = 0.0;
    for (const auto& [v, e] : adj_[static_cast<std::size_t>(u)]) s += weights_[static_cast<std::size_t>(e)];
    return s;
}

int WeightedGraph::num_classes() const {
    if (!labels_) return 0;
    int m = 0;
    for (int y : *labels_) m = std::max(m, y + 1);
    return m;
}

WeightedGraph WeightedGraph::with_weights(std::vector<double> w) const {
    if (w.size() != weights_.size()) {
        throw ValidationError("weight vector size " + std::to_string(w.size()) + " does not match edge count " +
                              std::to_string(weights_.size()));
    }
    for (double x : w) {
        if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError("weights must stay strictly positive");
    }
    WeightedGraph g = *this;
    g.weights_ = std::move(w);
    const auto bytes = content_bytes(g.n_, g.edges_, g.weights_);
    g.weights_token_ = fnv1a64(bytes.data(), bytes.size());
    return g;
}

std::string WeightedGraph::content_hash() const {
    const auto bytes = content_bytes(n_, edges_, weights_);
    return sha256_hex(bytes);
}

WeightedGraph add_self_loops(const WeightedGraph& g) {
    std::vector<EdgeInput> inputs;
    inputs.reserve(g.edges().size() + static_cast<std::size_t>(g.node_count()));
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        inputs.push_back(EdgeInput{g.edge(e).u, g.edge(e).v, g.weight(e)});
    }
    for (NodeId u = 0; u < g.node_count(); ++u) {
        if (!g.has_self_loop(u)) inputs.push_back(EdgeInput{u, u, 1.0});
    }
    return WeightedGraph::build(g.node_count(), std::move(inputs), g.features_ptr(), g.labels_ptr());
}

namespace {

// ---- largest connected component (raw-format benchmark convention) ----

struct RawGraph {
    NodeId n = 0;
    std::vector<std::pair<NodeId, NodeId>> edges;  // symmetrized, loop-free, deduped
    Tensor features;
    std::vector<int> labels;
};

WeightedGraph finish_raw(RawGraph raw) {
    // component labelling by BFS
    std::vector<int> comp(static_cast<std::size_t>(raw.n), -1);
    std::vector<std::vector<NodeId>> adj(static_cast<std::size_t>(raw.n));
    for (const auto& [u, v] : raw.edges) {
        adj[static_cast<std::size_t>(u)].push_back(v);
        adj[static_cast<std::size_t>(v)].push_back(u);
    }
    int ncomp = 0;
    std::vector<NodeId> queue;
    for (NodeId s = 0; s < raw.n; ++s) {
        if (comp[static_cast<std::size_t>(s)] >= 0) continue;
        comp[static_cast<std::size_t>(s)] = ncomp;
        queue.assign(1, s);
        while (!queue.empty()) {
            NodeId u = queue.back();
            queue.pop_back();
            for (NodeId v : adj[static_cast<std::size_t>(u)]) {
                if (comp[static_cast<std::size_t>(v)] < 0) {
                    comp[static_cast<std::size_t>(v)] = ncomp;
                    queue.push_back(v);
                }
            }
        }
        ++ncomp;
    }
    std::vector<NodeId> comp_size(static_cast<std::size_t>(ncomp), 0);
    for (NodeId u = 0; u < raw.n; ++u) comp_size[static_cast<std::size_t>(comp[static_cast<std::size_t>(u)])]++;
    const int keep = static_cast<int>(std::max_element(comp_size.begin(), comp_size.end()) - comp_size.begin());

    std::vector<NodeId> remap(static_cast<std::size_t>(raw.n), -1);
    NodeId kept = 0;
    for (NodeId u = 0; u < raw.n; ++u) {
        if (comp[static_cast<std::size_t>(u)] == keep) remap[static_cast<std::size_t>(u)] = kept++;
    }

    std::vector<EdgeInput> inputs;
    inputs.reserve(raw.edges.size());
    for (const auto& [u, v] : raw.edges) {
        const NodeId nu = remap[static_cast<std::size_t>(u)], nv = remap[static_cast<std::size_t>(v)];
        if (nu >= 0 && nv >= 0) inputs.push_back(EdgeInput{nu, nv, 1.0});
    }

    auto features = std::make_shared<Tensor>(kept, raw.features.cols());
    auto labels = std::make_shared<std::vector<int>>(static_cast<std::size_t>(kept), 0);
    for (NodeId u = 0; u < raw.n; ++u) {
        const NodeId nu = remap[static_cast<std::size_t>(u)];
        if (nu < 0) continue;
        for (int c = 0; c < raw.features.cols(); ++c) features->at(nu, c) = raw.features.at(u, c);
        (*labels)[static_cast<std::size_t>(nu)] = raw.labels[static_cast<std::size_t>(u)];
    }
    return WeightedGraph::build(kept, std::move(inputs), std::move(features), std::move(labels));
}

void add_raw_edge(RawGraph& raw, std::unordered_map<std::int64_t, bool>& seen, NodeId u, NodeId v) {
    if (u == v) return;  // raw self-citations dropped
    if (u > v) std::swap(u, v);
    const std::int64_t key = static_cast<std::int64_t>(u) * (raw.n + 1) + v;
    if (seen.emplace(key, true).second) raw.edges.emplace_back(u, v);
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

double parse_double(const std::string& tok, long line_no, const char* what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw FormatError(std::string("cannot parse ") + what + " '" + tok + "'", line_no);
    }
}

// ---- planetoid raw: <stem>.content + <stem>.cites ----

std::pair<std::filesystem::path, std::filesystem::path> planetoid_files(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    if (fs::is_directory(path)) {
        for (const auto& entry : fs::directory_iterator(path)) {
            if (entry.path().extension() == ".content") {
                fs::path cites = entry.path();
                cites.replace_extension(".cites");
                return {entry.path(), cites};
            }
        }
        throw ValidationError("no .content file found in " + path.string());
    }
    if (path.extension() == ".content") {
        fs::path cites = path;
        cites.replace_extension(".cites");
        return {path, cites};
    }
    throw ValidationError("planetoid-raw path must be a directory or a .content file: " + path.string());
}

WeightedGraph load_planetoid_raw(const std::filesystem::path& path) {
    const auto [content_path, cites_path] = planetoid_files(path);
    std::ifstream content(content_path);
    if (!content) throw ValidationError("cannot open " + content_path.string());

    std::unordered_map<std::string, NodeId> id_of;
    std::vector<std::vector<double>> feats;
    std::vector<std::string> label_strs;
    std::string line;
    long line_no = 0;
    int dim = -1;
    while (std::getline(content, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto toks = split_ws(line);
        if (toks.size() < 2) throw FormatError("expected <id> <features...> <label>", line_no);
        const int this_dim = static_cast<int>(toks.size()) - 2;
        if (dim < 0) dim = this_dim;
        if (this_dim != dim) {
            throw FormatError("inconsistent feature count (" + std::to_string(this_dim) + " vs " +
                                  std::to_string(dim) + ")",
                              line_no);
        }
        if (!id_of.emplace(toks.front(), static_cast<NodeId>(feats.size())).second) {
            throw FormatError("duplicate node id '" + toks.front() + "'", line_no);
        }
        std::vector<double> row(static_cast<std::size_t>(dim));
        for (int i = 0; i < dim; ++i) row[static_cast<std::size_t>(i)] = parse_double(toks[i + 1], line_no, "feature");
        feats.push_back(std::move(row));
        label_strs.push_back(toks.back());
    }
    if (feats.empty()) throw FormatError("empty .content file", 0);

    // deterministic class ids: sorted unique label strings
    std::vector<std::string> classes = label_strs;
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    std::map<std::string, int> class_of;
    for (std::size_t i = 0; i < classes.size(); ++i) class_of[classes[i]] = static_cast<int>(i);

    RawGraph raw;
    raw.n = static_cast<NodeId>(feats.size());
    raw.features = Tensor(raw.n, dim);
    raw.labels.resize(static_cast<std::size_t>(raw.n));
    for (NodeId u = 0; u < raw.n; ++u) {
        for (int c = 0; c < dim; ++c) raw.features.at(u, c) = feats[static_cast<std::size_t>(u)][static_cast<std::size_t>(c)];
        raw.labels[static_cast<std::size_t>(u)] = class_of[label_strs[static_cast<std::size_t>(u)]];
    }

    std::ifstream cites(cites_path);
    if (!cites) throw ValidationError("cannot open " + cites_path.string());
    std::unordered_map<std::int64_t, bool> seen;
    line_no = 0;
    while (std::getline(cites, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto toks = split_ws(line);
        if (toks.size() != 2) throw FormatError("expected <id> <id>", line_no);
        auto a = id_of.find(toks[0]);
        auto b = id_of.find(toks[1]);
        if (a == id_of.end() || b == id_of.end()) {
            throw ValidationError("dangling edge endpoint '" + (a == id_of.end() ? toks[0] : toks[1]) +
                                  "' at line " + std::to_string(line_no) + " of " + cites_path.string());
        }
        add_raw_edge(raw, seen, a->second, b->second);
    }
    return finish_raw(std::move(raw));
}

// ---- webkb raw: out1_node_feature_label.txt + out1_graph_edges.txt ----

WeightedGraph load_webkb_raw(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    fs::path node_path = path, edge_path = path;
    if (fs::is_directory(path)) {
        node_path = path / "out1_node_feature_label.txt";
        edge_path = path / "out1_graph_edges.txt";
    } else {
        edge_path = path.parent_path() / "out1_graph_edges.txt";
    }
    std::ifstream nodes(node_path);
    if (!nodes) throw ValidationError("cannot open " + node_path.string());

    std::unordered_map<std::string, NodeId> id_of;
    std::vector<std::vector<double>> feats;
    std::vector<int> labels;
    std::string line;
    long line_no = 0;
    int dim = -1;
    while (std::getline(nodes, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::istringstream ss(line);
        std::string col;
        while (std::getline(ss, col, '\t')) cols.push_back(col);
        if (cols.size() != 3) throw FormatError("expected <id>\\t<features>\\t<label>", line_no);
        if (line_no == 1 && cols[2].find_first_not_of("0123456789") != std::string::npos) continue;  // header

        std::vector<double> row;
        std::istringstream fs_ss(cols[1]);
        std::string tok;
        while (std::getline(fs_ss, tok, ',')) row.push_back(parse_double(tok, line_no, "feature"));
        if (dim < 0) dim = static_cast<int>(row.size());
        if (static_cast<int>(row.size()) != dim) {
            throw FormatError("inconsistent feature count (" + std::to_string(row.size()) + " vs " +
                                  std::to_string(dim) + ")",
                              line_no);
        }
        if (!id_of.emplace(cols[0], static_cast<NodeId>(feats.size())).second) {
            throw FormatError("duplicate node id '" + cols[0] + "'", line_no);
        }
        feats.push_back(std::move(row));
        labels.push_back(static_cast<int>(parse_double(cols[2], line_no, "label")));
    }
    if (feats.empty()) throw FormatError("empty node file", 0);

    RawGraph raw;
    raw.n = static_cast<NodeId>(feats.size());
    raw.features = Tensor(raw.n, dim);
    raw.labels = std::move(labels);
    for (NodeId u = 0; u < raw.n; ++u) {
        for (int c = 0; c < dim; ++c) raw.features.at(u, c) = feats[static_cast<std::size_t>(u)][static_cast<std::size_t>(c)];
    }

    std::ifstream edges(edge_path);
    if (!edges) throw ValidationError("cannot open " + edge_path.string());
    std::unordered_map<std::int64_t, bool> seen;
    line_no = 0;
    while (std::getline(edges, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto toks = split_ws(line);
        if (toks.size() != 2) throw FormatError("expected <id> <id>", line_no);
        if (line_no == 1 && id_of.find(toks[0]) == id_of.end() &&
            toks[0].find_first_not_of("0123456789") != std::string::npos) {
            continue;  // header
        }
        auto a = id_of.find(toks[0]);
        auto b = id_of.find(toks[1]);
        if (a == id_of.end() || b == id_of.end()) {
            throw ValidationError("dangling edge endpoint '" + (a == id_of.end() ? toks[0] : toks[1]) +
                                  "' at line " + std::to_string(line_no) + " of " + edge_path.string());
        }
        add_raw_edge(raw, seen, a->second, b->second);
    }
    return finish_raw(std::move(raw));
}

// ---- normalized-json ----

WeightedGraph load_normalized_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("n") || !doc.contains("edges")) {
        throw FormatError("normalized-json requires top-level 'n' and 'edges'");
    }
    const NodeId n = doc.at("n").get<NodeId>();
    std::vector<EdgeInput> inputs;
    for (const auto& e : doc.at("edges")) {
        if (!e.is_array() || e.size() != 3) throw FormatError("edge entries must be [u, v, w]");
        inputs.push_back(EdgeInput{e.at(0).get<NodeId>(), e.at(1).get<NodeId>(), e.at(2).get<double>()});
    }
    std::shared_ptr<const Tensor> features;
    if (doc.contains("features") && !doc.at("features").is_null()) {
        const auto& rows = doc.at("features");
        const int r = static_cast<int>(rows.size());
        const int c = r > 0 ? static_cast<int>(rows.at(0).size()) : 0;
        auto f = std::make_shared<Tensor>(r, c);
        for (int i = 0; i < r; ++i) {
            if (static_cast<int>(rows.at(i).size()) != c) throw FormatError("ragged feature rows");
            for (int j = 0; j < c; ++j) f->at(i, j) = rows.at(i).at(j).get<double>();
        }
        features = std::move(f);
    }
    std::shared_ptr<const std::vector<int>> labels;
    if (doc.contains("labels") && !doc.at("labels").is_null()) {
        auto l = std::make_shared<std::vector<int>>();
        for (const auto& y : doc.at("labels")) l->push_back(y.get<int>());
        labels = std::move(l);
    }
    return WeightedGraph::build(n, std::move(inputs), std::move(features), std::move(labels));
}

}  // namespace

WeightedGraph load_graph(const std::filesystem::path& path, GraphFormat format) {
    if (!std::filesystem::exists(path)) throw ValidationError("no such path: " + path.string());
    switch (format) {
        case GraphFormat::planetoid_raw: return load_planetoid_raw(path);
        case GraphFormat::webkb_raw: return load_webkb_raw(path);
        case GraphFormat::normalized_json: return load_normalized_json(path);
    }
    throw ValidationError("unknown format");
}

void save_graph(const WeightedGraph& g, const std::filesystem::path& path) {
    ordered_json doc;
    doc["n"] = g.node_count();
    auto edges = ordered_json::array();
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        edges.push_back({g.edge(e).u, g.edge(e).v, g.weight(e)});
    }
    doc["edges"] = std::move(edges);
    if (g.features()) {
        auto rows = ordered_json::array();
        for (int i = 0; i < g.features()->rows(); ++i) {
            auto row = ordered_json::array();
            for (int j = 0; j < g.features()->cols(); ++j) row.push_back(g.features()->at(i, j));
            rows.push_back(std::move(row));
        }
        doc["features"] = std::move(rows);
    } else {
        doc["features"] = nullptr;
    }
    if (g.labels()) {
        doc["labels"] = *g.labels();
    } else {
        doc["labels"] = nullptr;
    }
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << doc.dump() << "\n";
}

double homophily_index(const WeightedGraph& g, const std::vector<int>& labels) {
    if (static_cast<NodeId>(labels.size()) != g.node_count()) {
        throw ValidationError("label vector size does not match node count");
    }
    double acc = 0.0;
    NodeId counted = 0;
    for (NodeId v = 0; v < g.node_count(); ++v) {
        const auto& nb = g.neighbors(v);
        if (nb.empty()) continue;
        int same = 0;
        for (const auto& [u, e] : nb) {
            if (labels[static_cast<std::size_t>(u)] == labels[static_cast<std::size_t>(v)]) ++same;
        }
        acc += static_cast<double>(same) / static_cast<double>(nb.size());
        ++counted;
    }
    if (counted == 0) throw UndefinedValueError("homophily undefined: all nodes isolated");
    return acc / static_cast<double>(counted);
}

double homophily_index(const WeightedGraph& g) {
    if (!g.labels()) throw ValidationError("graph has no labels");
    return homophily_index(g, *g.labels());
}

}  // namespace gegcn
