#include "workbench/nettomo.hpp"

#include "workbench/common.hpp"
#include "workbench/prng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>

namespace wb {

Graph::Graph(int n_nodes, std::vector<Edge> edges)
    : n_nodes_(n_nodes), edges_(std::move(edges)) {
    if (n_nodes_ < 1) {
        throw Error("Graph: need at least one node");
    }
    std::set<std::pair<int, int>> seen;
    adjacency_.resize(n_nodes_);
    for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
        const auto& ed = edges_[e];
        if (ed.u < 0 || ed.u >= n_nodes_ || ed.v < 0 || ed.v >= n_nodes_) {
            throw UnknownNode("Graph: edge endpoint out of range");
        }
        if (ed.u == ed.v) {
            throw Error("Graph: self-loop on node " + std::to_string(ed.u));
        }
        if (!(ed.weight > 0.0) || !std::isfinite(ed.weight)) {
            throw Error("Graph: edge weights must be positive and finite");
        }
        const auto key = std::minmax(ed.u, ed.v);
        if (!seen.insert(key).second) {
            throw Error("Graph: duplicate edge " + std::to_string(ed.u) + "-" +
                        std::to_string(ed.v));
        }
        adjacency_[ed.u].emplace_back(ed.v, e);
        adjacency_[ed.v].emplace_back(ed.u, e);
    }
    for (auto& nbrs : adjacency_) {
        std::sort(nbrs.begin(), nbrs.end());
    }
    // Connectivity check (BFS from node 0).
    std::vector<char> visited(n_nodes_, 0);
    std::queue<int> q;
    q.push(0);
    visited[0] = 1;
    int reached = 1;
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (const auto& [v, e] : adjacency_[u]) {
            if (!visited[v]) {
                visited[v] = 1;
                ++reached;
                q.push(v);
            }
        }
    }
    if (reached != n_nodes_) {
        throw Error("Graph: not connected");
    }
}

namespace {

std::vector<double> dijkstra(const Graph& g, int source) {
    std::vector<double> dist(g.n_nodes(), std::numeric_limits<double>::infinity());
    dist[source] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.emplace(0.0, source);
    while (!pq.empty()) {
        const auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (const auto& [v, e] : g.neighbors(u)) {
            const double nd = d + g.edges()[e].weight;
            if (nd < dist[v]) {
                dist[v] = nd;
                pq.emplace(nd, v);
            }
        }
    }
    return dist;
}

}  // namespace

RouteMatrix build_route_matrix(const Graph& g,
                               const std::vector<std::pair<int, int>>& od_pairs) {
    RouteMatrix rm;
    rm.n_links = g.n_edges();
    for (const auto& [o, d] : od_pairs) {
        if (o < 0 || o >= g.n_nodes() || d < 0 || d >= g.n_nodes()) {
            throw UnknownNode("build_route_matrix: OD endpoint out of range");
        }
        if (o == d) {
            throw Error("build_route_matrix: OD pair with identical endpoints");
        }
        const auto dist_to_dest = dijkstra(g, d);
        if (!std::isfinite(dist_to_dest[o])) {
            throw DisconnectedPair("build_route_matrix: no path " + std::to_string(o) +
                                   " -> " + std::to_string(d));
        }
        // Walk from the origin, always taking the smallest-indexed neighbor
        // that stays on a shortest path; this is the lexicographically
        // smallest node sequence among shortest paths.
        Route route;
        route.origin = o;
        route.destination = d;
        route.nodes.push_back(o);
        int u = o;
        const double tol = 1e-12 * std::max(1.0, dist_to_dest[o]);
        while (u != d) {
            int next = -1, link = -1;
            for (const auto& [v, e] : g.neighbors(u)) {
                if (std::abs(g.edges()[e].weight + dist_to_dest[v] - dist_to_dest[u]) <= tol) {
                    next = v;
                    link = e;
                    break;  // neighbors sorted by index
                }
            }
            if (next < 0) {
                throw Error("build_route_matrix: shortest-path walk failed");
            }
            route.nodes.push_back(next);
            route.links.push_back(link);
            u = next;
        }
        rm.routes.push_back(std::move(route));
    }
    return rm;
}

LinkCounts simulate_traffic(const RouteMatrix& routes, const Vec& rates, int epochs,
                            std::uint64_t seed) {
    if (rates.size() != static_cast<Eigen::Index>(routes.routes.size())) {
        throw DimensionMismatch("simulate_traffic: one rate per route required");
    }
    for (Eigen::Index r = 0; r < rates.size(); ++r) {
        if (!(rates[r] >= 0.0) || !std::isfinite(rates[r])) {
            throw NegativeRate("simulate_traffic: rates must be finite and >= 0");
        }
    }
    LinkCounts out;
    out.reserve(static_cast<size_t>(epochs));
    for (int ep = 0; ep < epochs; ++ep) {
        SplitMix64Stream rng(seed, static_cast<std::uint64_t>(ep));
        Vec link_counts = Vec::Zero(routes.n_links);
        for (size_t r = 0; r < routes.routes.size(); ++r) {
            const auto volume = static_cast<double>(rng.poisson(rates[static_cast<Eigen::Index>(r)]));
            for (int link : routes.routes[r].links) {
                link_counts[link] += volume;
            }
        }
        out.push_back(std::move(link_counts));
    }
    return out;
}

SystemMatrix route_system_matrix(const RouteMatrix& routes) {
    std::vector<SystemMatrix::Entry> entries;
    for (size_t r = 0; r < routes.routes.size(); ++r) {
        for (int link : routes.routes[r].links) {
            entries.push_back({static_cast<int>(r), link, 1.0});
        }
    }
    return SystemMatrix(static_cast<int>(routes.routes.size()), routes.n_links, entries);
}

EmResult estimate_rates(const RouteMatrix& routes, const LinkCounts& counts,
                        const EmConfig& cfg) {
    if (counts.empty()) {
        throw Error("estimate_rates: need at least one epoch");
    }
    Vec summed = Vec::Zero(routes.n_links);
    for (const auto& epoch : counts) {
        if (epoch.size() != routes.n_links) {
            throw DimensionMismatch("estimate_rates: epoch has wrong link dimension");
        }
        summed += epoch;
    }
    const SystemMatrix A = route_system_matrix(routes);
    EmResult result = run_em(A, summed, cfg);
    result.rates /= static_cast<double>(counts.size());
    return result;
}

}  // namespace wb
