#include "fot/exact_ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace fot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kResidualEps = 1e-14;

// Successive shortest paths with Johnson potentials on the dense bipartite
// transportation graph. Costs are pre-scaled by their max entry for
// conditioning and rescaled on exit.
ExactSolution solve_transport(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    const std::size_t n0 = a.size();
    const std::size_t n1 = b.size();
    Matrix cost = squared_cost_matrix(a, b);

    double scale = 0.0;
    for (std::size_t i = 0; i < cost.size(); ++i)
        scale = std::max(scale, cost.data()[i]);
    if (scale == 0.0) scale = 1.0;
    for (std::size_t i = 0; i < cost.size(); ++i) cost.data()[i] /= scale;

    std::vector<double> supply = a.weights();
    std::vector<double> demand = b.weights();
    Matrix flow(n0, n1);

    const std::size_t nv = n0 + n1;
    std::vector<double> pi(nv, 0.0), dist(nv);
    std::vector<int> parent(nv);
    std::vector<char> visited(nv);

    // Each augmentation exhausts a supply, a demand, or a residual arc; the
    // guard only trips on a logic error.
    const std::size_t max_aug = 8 * nv + 64;
    for (std::size_t aug = 0;; ++aug) {
        double remaining = 0.0;
        for (double d : demand) remaining += d;
        if (remaining <= kResidualEps * static_cast<double>(n1 ? n1 : 1)) break;
        if (aug >= max_aug)
            throw std::runtime_error("exact OT solver failed to terminate");

        std::fill(dist.begin(), dist.end(), kInf);
        std::fill(visited.begin(), visited.end(), char{0});
        std::fill(parent.begin(), parent.end(), -1);
        for (std::size_t i = 0; i < n0; ++i)
            if (supply[i] > kResidualEps) dist[i] = 0.0;

        std::size_t target = nv;
        while (true) {
            std::size_t u = nv;
            double best = kInf;
            for (std::size_t v = 0; v < nv; ++v)
                if (!visited[v] && dist[v] < best) {
                    best = dist[v];
                    u = v;
                }
            if (u == nv) break;
            visited[u] = 1;
            if (u >= n0 && demand[u - n0] > kResidualEps) {
                target = u;
                break;
            }
            if (u < n0) {
                for (std::size_t j = 0; j < n1; ++j) {
                    const std::size_t v = n0 + j;
                    if (visited[v]) continue;
                    const double rc =
                        std::max(cost(u, j) + pi[u] - pi[v], 0.0);
                    if (dist[u] + rc < dist[v]) {
                        dist[v] = dist[u] + rc;
                        parent[v] = static_cast<int>(u);
                    }
                }
            } else {
                const std::size_t j = u - n0;
                for (std::size_t i = 0; i < n0; ++i) {
                    if (visited[i] || flow(i, j) <= 0.0) continue;
                    const double rc =
                        std::max(-cost(i, j) + pi[u] - pi[i], 0.0);
                    if (dist[u] + rc < dist[i]) {
                        dist[i] = dist[u] + rc;
                        parent[i] = static_cast<int>(u);
                    }
                }
            }
        }
        if (target == nv)
            throw std::runtime_error("exact OT: no augmenting path (infeasible?)");

        // Shift unreached nodes (dist == inf) by dt too: their outgoing
        // forward arcs would otherwise pick up negative reduced costs.
        const double dt = dist[target];
        for (std::size_t v = 0; v < nv; ++v) pi[v] += std::min(dist[v], dt);

        // Trace the path, find the bottleneck, apply the augmentation.
        double delta = demand[target - n0];
        std::size_t v = target;
        while (parent[v] >= 0) {
            const std::size_t u = static_cast<std::size_t>(parent[v]);
            if (u >= n0) delta = std::min(delta, flow(v, u - n0));  // backward arc
            v = u;
        }
        delta = std::min(delta, supply[v]);

        std::size_t w = target;
        while (parent[w] >= 0) {
            const std::size_t u = static_cast<std::size_t>(parent[w]);
            if (u < n0)
                flow(u, w - n0) += delta;
            else
                flow(w, u - n0) -= delta;
            w = u;
        }
        supply[v] -= delta;
        demand[target - n0] -= delta;
    }

    double total = 0.0;
    for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t j = 0; j < n1; ++j) {
            if (flow(i, j) < 0.0) flow(i, j) = 0.0;
            total += flow(i, j) * cost(i, j);
        }
    return ExactSolution{TransportPlan{std::move(flow), a.weights(), b.weights()},
                         total * scale};
}

}  // namespace

ExactSolution solve_exact(const DiscreteMeasure& a, const DiscreteMeasure& b,
                          std::size_t size_cap) {
    if (a.dim() != b.dim()) throw DimensionError("solve_exact: dimension mismatch");
    if (a.size() * b.size() > size_cap)
        throw CapacityError("instance exceeds exact-solver size cap (" +
                            std::to_string(a.size() * b.size()) + " > " +
                            std::to_string(size_cap) + " entries); use sinkhorn");
    return solve_transport(a, b);
}

ExactSolution solve_assignment(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    if (a.dim() != b.dim())
        throw DimensionError("solve_assignment: dimension mismatch");
    if (a.size() != b.size())
        throw std::invalid_argument("solve_assignment requires equal sample sizes");
    const double uw = 1.0 / static_cast<double>(a.size());
    for (double w : a.weights())
        if (std::abs(w - uw) > 1e-12)
            throw std::invalid_argument("solve_assignment requires uniform weights");
    for (double w : b.weights())
        if (std::abs(w - uw) > 1e-12)
            throw std::invalid_argument("solve_assignment requires uniform weights");

    ExactSolution sol = solve_transport(a, b);
    // Uniform supplies make every augmentation a full 1/n unit, so the flow
    // is already a scaled permutation; snap it to remove rounding dust.
    const std::size_t n = a.size();
    Matrix perm(n, n);
    std::vector<char> used(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t arg = n;
        double best = -1.0;
        for (std::size_t j = 0; j < n; ++j)
            if (sol.plan.matrix(i, j) > best) {
                best = sol.plan.matrix(i, j);
                arg = j;
            }
        if (arg == n || used[arg])
            return sol;  // degenerate tie split mass; raw optimum is still valid
        used[arg] = 1;
        perm(i, arg) = uw;
    }
    sol.plan.matrix = std::move(perm);
    double total = 0.0;
    const Matrix cost = squared_cost_matrix(a, b);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            total += sol.plan.matrix(i, j) * cost(i, j);
    sol.cost = total;
    return sol;
}

}  // namespace fot
