#include "gegcn/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gegcn/errors.hpp"

namespace gegcn {

namespace {

constexpr double kMassTol = 1e-9;
constexpr double kZero = 1e-14;

Tensor cost_matrix(const ProbabilityMeasure& mu, const ProbabilityMeasure& mv, const GroundDistance& dist) {
    const int n = static_cast<int>(mu.size());
    const int m = static_cast<int>(mv.size());
    Tensor c(n, m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            const double d = dist(mu.support[static_cast<std::size_t>(i)], mv.support[static_cast<std::size_t>(j)]);
            if (!std::isfinite(d) || d < 0.0) {
                throw ValidationError("transport: ground distance must be finite and nonnegative");
            }
            c.at(i, j) = d;
        }
    }
    return c;
}

void check_masses(const ProbabilityMeasure& mu, const ProbabilityMeasure& mv) {
    if (mu.size() == 0 || mv.size() == 0) throw ValidationError("transport: empty measure");
    if (std::abs(mu.total() - mv.total()) > kMassTol) {
        throw ValidationError("transport: marginal masses differ by " + std::to_string(mu.total() - mv.total()));
    }
}

}  // namespace

TransportPlan wasserstein_exact(const ProbabilityMeasure& mu, const ProbabilityMeasure& mv,
                                const GroundDistance& dist) {
    check_masses(mu, mv);
    const int n = static_cast<int>(mu.size());
    const int m = static_cast<int>(mv.size());
    const Tensor c = cost_matrix(mu, mv, dist);

    std::vector<double> rem_a = mu.mass;
    std::vector<double> rem_b = mv.mass;
    {
        // equalize totals exactly so the problem is feasible in fp arithmetic
        const double scale = mu.total() / mv.total();
        for (auto& b : rem_b) b *= scale;
    }

    Tensor flow(n, m);
    // node layout: [0, n) supplies, [n, n+m) demands
    const int nn = n + m;
    std::vector<double> pot(static_cast<std::size_t>(nn), 0.0);
    std::vector<double> d(static_cast<std::size_t>(nn));
    std::vector<int> parent(static_cast<std::size_t>(nn));
    std::vector<bool> done(static_cast<std::size_t>(nn));
    const double inf = std::numeric_limits<double>::infinity();

    const int max_rounds = 10 * nn + 100;
    int rounds = 0;
    while (true) {
        double remaining = 0.0;
        for (double a : rem_a) remaining += a;
        if (remaining <= kZero) break;
        if (++rounds > max_rounds) {
            throw Error("wasserstein_exact: augmentation did not terminate");
        }

        // multi-source Dijkstra on the residual bipartite graph with reduced
        // costs (dense O(V^2) scan; supports are small)
        std::fill(d.begin(), d.end(), inf);
        std::fill(parent.begin(), parent.end(), -1);
        std::fill(done.begin(), done.end(), false);
        for (int i = 0; i < n; ++i) {
            if (rem_a[static_cast<std::size_t>(i)] > kZero) d[static_cast<std::size_t>(i)] = 0.0;
        }
        int sink = -1;
        while (true) {
            int x = -1;
            double best = inf;
            for (int v = 0; v < nn; ++v) {
                if (!done[static_cast<std::size_t>(v)] && d[static_cast<std::size_t>(v)] < best) {
                    best = d[static_cast<std::size_t>(v)];
                    x = v;
                }
            }
            if (x < 0) break;
            done[static_cast<std::size_t>(x)] = true;
            if (x >= n && rem_b[static_cast<std::size_t>(x - n)] > kZero) {
                sink = x;
                break;
            }
            if (x < n) {
                const int i = x;
                for (int j = 0; j < m; ++j) {
                    const double rc = c.at(i, j) + pot[static_cast<std::size_t>(i)] - pot[static_cast<std::size_t>(n + j)];
                    const double nd = d[static_cast<std::size_t>(x)] + std::max(rc, 0.0);
                    if (nd < d[static_cast<std::size_t>(n + j)]) {
                        d[static_cast<std::size_t>(n + j)] = nd;
                        parent[static_cast<std::size_t>(n + j)] = x;
                    }
                }
            } else {
                const int j = x - n;
                for (int i = 0; i < n; ++i) {
                    if (flow.at(i, j) <= kZero) continue;
                    const double rc = -c.at(i, j) + pot[static_cast<std::size_t>(x)] - pot[static_cast<std::size_t>(i)];
                    const double nd = d[static_cast<std::size_t>(x)] + std::max(rc, 0.0);
                    if (nd < d[static_cast<std::size_t>(i)]) {
                        d[static_cast<std::size_t>(i)] = nd;
                        parent[static_cast<std::size_t>(i)] = x;
                    }
                }
            }
        }
        if (sink < 0) throw Error("wasserstein_exact: no augmenting path (unbalanced marginals?)");

        // potentials stay dual-feasible
        const double dt = d[static_cast<std::size_t>(sink)];
        for (int v = 0; v < nn; ++v) {
            pot[static_cast<std::size_t>(v)] += std::min(d[static_cast<std::size_t>(v)], dt);
        }

        // bottleneck along the parent chain
        double push = rem_b[static_cast<std::size_t>(sink - n)];
        for (int v = sink; parent[static_cast<std::size_t>(v)] >= 0; v = parent[static_cast<std::size_t>(v)]) {
            const int p = parent[static_cast<std::size_t>(v)];
            if (p < n) {
                // forward arc p -> v
            } else {
                push = std::min(push, flow.at(v, p - n));  // backward arc p -> v reduces flow[v][p-n]
            }
        }
        {
            int head = sink;
            while (parent[static_cast<std::size_t>(head)] >= 0) head = parent[static_cast<std::size_t>(head)];
            push = std::min(push, rem_a[static_cast<std::size_t>(head)]);
        }

        for (int v = sink; parent[static_cast<std::size_t>(v)] >= 0; v = parent[static_cast<std::size_t>(v)]) {
            const int p = parent[static_cast<std::size_t>(v)];
            if (p < n) {
                flow.at(p, v - n) += push;
            } else {
                flow.at(v, p - n) = std::max(0.0, flow.at(v, p - n) - push);
            }
        }
        int head = sink;
        while (parent[static_cast<std::size_t>(head)] >= 0) head = parent[static_cast<std::size_t>(head)];
        rem_a[static_cast<std::size_t>(head)] = std::max(0.0, rem_a[static_cast<std::size_t>(head)] - push);
        rem_b[static_cast<std::size_t>(sink - n)] = std::max(0.0, rem_b[static_cast<std::size_t>(sink - n)] - push);
    }

    TransportPlan out;
    out.rows = n;
    out.cols = m;
    out.cost = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) out.cost += flow.at(i, j) * c.at(i, j);
    }
    out.plan = std::move(flow);
    return out;
}

SinkhornResult wasserstein_sinkhorn(const ProbabilityMeasure& mu, const ProbabilityMeasure& mv,
                                    const GroundDistance& dist, double eps, int max_iter, double tol) {
    if (!(eps > 0.0)) throw ValidationError("sinkhorn: eps must be positive");
    check_masses(mu, mv);
    const int n = static_cast<int>(mu.size());
    const int m = static_cast<int>(mv.size());
    const Tensor c = cost_matrix(mu, mv, dist);

    std::vector<double> a = mu.mass;
    std::vector<double> b = mv.mass;
    {
        const double scale = mu.total() / mv.total();
        for (auto& x : b) x *= scale;
    }
    std::vector<double> log_a(a.size()), log_b(b.size());
    for (int i = 0; i < n; ++i) log_a[static_cast<std::size_t>(i)] = std::log(a[static_cast<std::size_t>(i)]);
    for (int j = 0; j < m; ++j) log_b[static_cast<std::size_t>(j)] = std::log(b[static_cast<std::size_t>(j)]);

    std::vector<double> f(static_cast<std::size_t>(n), 0.0), g(static_cast<std::size_t>(m), 0.0);
    std::vector<double> scratch(static_cast<std::size_t>(std::max(n, m)));

    auto lse = [](const std::vector<double>& xs, int len) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < len; ++k) mx = std::max(mx, xs[static_cast<std::size_t>(k)]);
        double s = 0.0;
        for (int k = 0; k < len; ++k) s += std::exp(xs[static_cast<std::size_t>(k)] - mx);
        return mx + std::log(s);
    };

    SinkhornResult res;
    Tensor plan(n, m);
    auto fill_plan_and_residual = [&]() {
        double residual = 0.0;
        std::vector<double> colsum(static_cast<std::size_t>(m), 0.0);
        for (int i = 0; i < n; ++i) {
            double rowsum = 0.0;
            for (int j = 0; j < m; ++j) {
                const double p = std::exp((f[static_cast<std::size_t>(i)] + g[static_cast<std::size_t>(j)] - c.at(i, j)) / eps);
                plan.at(i, j) = p;
                rowsum += p;
                colsum[static_cast<std::size_t>(j)] += p;
            }
            residual += std::abs(rowsum - a[static_cast<std::size_t>(i)]);
        }
        for (int j = 0; j < m; ++j) residual += std::abs(colsum[static_cast<std::size_t>(j)] - b[static_cast<std::size_t>(j)]);
        return residual;
    };

    for (res.iterations = 1; res.iterations <= max_iter; ++res.iterations) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < m; ++j) scratch[static_cast<std::size_t>(j)] = (g[static_cast<std::size_t>(j)] - c.at(i, j)) / eps;
            f[static_cast<std::size_t>(i)] = eps * (log_a[static_cast<std::size_t>(i)] - lse(scratch, m));
        }
        for (int j = 0; j < m; ++j) {
            for (int i = 0; i < n; ++i) scratch[static_cast<std::size_t>(i)] = (f[static_cast<std::size_t>(i)] - c.at(i, j)) / eps;
            g[static_cast<std::size_t>(j)] = eps * (log_b[static_cast<std::size_t>(j)] - lse(scratch, n));
        }
        res.marginal_residual = fill_plan_and_residual();
        if (res.marginal_residual < tol) {
            res.converged = true;
            break;
        }
    }
    if (res.iterations > max_iter) res.iterations = max_iter;

    res.cost = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) res.cost += plan.at(i, j) * c.at(i, j);
    }
    return res;
}

}  // namespace gegcn
