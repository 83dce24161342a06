#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gegcn/tensor.hpp"

namespace gegcn {

using NodeId = std::int32_t;
using EdgeId = std::int32_t;

// Canonical undirected edge: u <= v, equality on the pair. u == v is a
// self-loop.
struct Edge {
    NodeId u = 0;
    NodeId v = 0;
    bool is_loop() const noexcept { return u == v; }
    friend bool operator==(const Edge& a, const Edge& b) noexcept { return a.u == b.u && a.v == b.v; }
    friend bool operator<(const Edge& a, const Edge& b) noexcept {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    }
};

struct EdgeInput {
    NodeId u = 0;
    NodeId v = 0;
    double w = 1.0;
};

enum class GraphFormat { planetoid_raw, webkb_raw, normalized_json };

GraphFormat parse_graph_format(const std::string& name);
std::string format_name(GraphFormat f);

// Immutable weighted undirected graph. Edges are stored canonically sorted;
// EdgeId is the index into that order and is stable across weight updates
// (with_weights keeps the topology). Adjacency lists exclude self-loops:
// path-finding, random-walk measures and homophily all ignore them.
class WeightedGraph {
public:
    WeightedGraph() = default;

    // Canonicalizes endpoint order, sorts, merges duplicate edges (which must
    // agree on weight) and validates endpoints and positivity.
    static WeightedGraph build(NodeId n, std::vector<EdgeInput> edge_inputs,
                               std::shared_ptr<const Tensor> features = nullptr,
                               std::shared_ptr<const std::vector<int>> labels = nullptr);

    NodeId node_count() const noexcept { return n_; }
    EdgeId edge_count() const noexcept { return static_cast<EdgeId>(edges_.size()); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const Edge& edge(EdgeId e) const { return edges_[static_cast<std::size_t>(e)]; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    double weight(EdgeId e) const { return weights_[static_cast<std::size_t>(e)]; }

    std::optional<EdgeId> find_edge(NodeId u, NodeId v) const;
    bool has_self_loop(NodeId u) const { return self_loop_[static_cast<std::size_t>(u)] >= 0; }

    // Non-loop neighbors as (neighbor, edge id), sorted by neighbor id.
    const std::vector<std::pair<NodeId, EdgeId>>& neighbors(NodeId u) const {
        return adj_[static_cast<std::size_t>(u)];
    }
    int degree(NodeId u) const { return static_cast<int>(adj_[static_cast<std::size_t>(u)].size()); }
    double weighted_degree(NodeId u) const;

    const Tensor* features() const noexcept { return features_.get(); }
    const std::vector<int>* labels() const noexcept { return labels_.get(); }
    std::shared_ptr<const Tensor> features_ptr() const noexcept { return features_; }
    std::shared_ptr<const std::vector<int>> labels_ptr() const noexcept { return labels_; }
    int num_classes() const;

    // Same topology/features/labels with a new weight vector (copy-on-write
    // step of the flow).
    WeightedGraph with_weights(std::vector<double> w) const;

    // Staleness token: fingerprint of (n, edges, weights).
    std::uint64_t weights_token() const noexcept { return weights_token_; }
    // Content hash for sequence manifests: SHA-256 over (n, edges, weights).
    std::string content_hash() const;

private:
    void build_index();

    NodeId n_ = 0;
    std::vector<Edge> edges_;
    std::vector<double> weights_;
    std::vector<std::vector<std::pair<NodeId, EdgeId>>> adj_;
    std::vector<EdgeId> self_loop_;
    std::shared_ptr<const Tensor> features_;
    std::shared_ptr<const std::vector<int>> labels_;
    std::uint64_t weights_token_ = 0;
};

// Every node ends up with exactly one self-loop of weight 1; existing loops
// are kept untouched.
WeightedGraph add_self_loops(const WeightedGraph& g);

// planetoid-raw: directory with <stem>.content / <stem>.cites (or path to the
//   .content file). webkb-raw: directory with out1_node_feature_label.txt /
//   out1_graph_edges.txt. Both raw formats symmetrize, drop raw self-loops,
//   merge duplicates, and keep the largest connected component (the benchmark
//   convention behind the published node/edge counts). normalized-json loads
//   the file as-is, isolated nodes included.
WeightedGraph load_graph(const std::filesystem::path& path, GraphFormat format);

// normalized-json writer; load_graph(save_graph(g)) is the identity.
void save_graph(const WeightedGraph& g, const std::filesystem::path& path);

// Mean fraction of same-label non-loop neighbors over non-isolated nodes.
double homophily_index(const WeightedGraph& g, const std::vector<int>& labels);
double homophily_index(const WeightedGraph& g);

}  // namespace gegcn
