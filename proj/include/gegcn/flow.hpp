#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gegcn/curvature.hpp"
#include "gegcn/graph.hpp"

namespace gegcn {

// ma_yang: w(t+1) = w(t) - delta * kappa(t) * rho(t)   (default)
// ollivier: w(t+1) = w(t) - delta * kappa(t) * w(t)
enum class FlowKernel { ma_yang, ollivier };

FlowKernel parse_flow_kernel(const std::string& name);
std::string kernel_name(FlowKernel k);

struct FlowConfig {
    int T = 10;
    double delta = 1.0;
    double alpha = 0.5;
    double eps = 0.1;  // Sinkhorn regularization
    TransportMethod method = TransportMethod::sinkhorn;
    FlowKernel kernel = FlowKernel::ma_yang;
    double w_min = 1e-6;
    // keeps the total non-loop weight constant across steps; off by default
    // (the plain update has no renormalization)
    bool renormalize_total_weight = false;
    int sinkhorn_max_iter = 200;
    double sinkhorn_tol = 1e-6;
    unsigned workers = 0;

    void validate() const;
    CurvatureOptions curvature_options() const;
};

// Per-edge curvature/weight trajectories over T+1 steps, self-loops included
// as constant (kappa=0, w=1) rows. Edges follow the graph's canonical order.
struct GeometricSequence {
    int T = 0;
    std::vector<Edge> edges;
    std::vector<std::vector<double>> kappa;   // [edge][t], t = 0..T
    std::vector<std::vector<double>> weight;  // [edge][t]
    // manifest
    std::string graph_sha256;
    double delta = 0.0, alpha = 0.0, eps = 0.0, w_min = 0.0;
    std::string method, kernel;

    EdgeId edge_count() const { return static_cast<EdgeId>(edges.size()); }
};

// Single Euler step; self-loops untouched, results clamped below at w_min.
// Throws StalenessError unless curvatures/distances match g's weights.
std::vector<double> flow_step(const WeightedGraph& g, const CurvatureField& curvatures,
                              const std::vector<double>& rho, const FlowConfig& cfg);

// Runs T flow iterations, recording (kappa, w) at every step including the
// final weights. g must be canonical with a weight-1 self-loop on every node.
GeometricSequence run_flow(const WeightedGraph& g, const FlowConfig& cfg);

// JSON-lines persistence: manifest line then one record per canonical edge.
void save_sequence(const GeometricSequence& seq, const std::filesystem::path& path);
GeometricSequence load_sequence(const std::filesystem::path& path);

// Refuses sequences whose manifest hash does not match the supplied graph.
void validate_sequence(const GeometricSequence& seq, const WeightedGraph& g);

struct StepStats {
    int t = 0;
    double kappa_min = 0, kappa_mean = 0, kappa_max = 0;
    double weight_min = 0, weight_mean = 0, weight_max = 0;
    int clamped = 0;  // edges sitting at w_min
};

std::vector<StepStats> sequence_stats(const GeometricSequence& seq);

}  // namespace gegcn
