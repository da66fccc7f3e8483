#pragma once

#include "workbench/em.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace wb {

/// Undirected weighted graph; connectivity is checked at construction.
class Graph {
public:
    struct Edge {
        int u;
        int v;
        double weight;
    };

    Graph(int n_nodes, std::vector<Edge> edges);

    int n_nodes() const { return n_nodes_; }
    int n_edges() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }

    /// Neighbors of u as (v, edge index) pairs, sorted by v.
    const std::vector<std::pair<int, int>>& neighbors(int u) const {
        return adjacency_[u];
    }

private:
    int n_nodes_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::pair<int, int>>> adjacency_;
};

struct Route {
    int origin;
    int destination;
    std::vector<int> nodes;  // path node sequence, origin first
    std::vector<int> links;  // edge indices traversed
};

/// 0/1 incidence between routes and links; each route is the weighted
/// shortest path for its OD pair, ties broken by lexicographically
/// smallest node sequence.
struct RouteMatrix {
    int n_links = 0;
    std::vector<Route> routes;
};

RouteMatrix build_route_matrix(const Graph& g,
                               const std::vector<std::pair<int, int>>& od_pairs);

/// One vector of link counts per measurement epoch.
using LinkCounts = std::vector<Vec>;

/// Per epoch, draws route volumes X_r ~ Poisson(rate_r) and sums them onto
/// the links each route traverses. Link counts within an epoch are
/// dependent by construction.
LinkCounts simulate_traffic(const RouteMatrix& routes, const Vec& rates, int epochs,
                            std::uint64_t seed);

/// Maximizes the independent-Poisson pseudo-likelihood of the summed link
/// counts via the EM core, then rescales to traffic-per-epoch units. True
/// link counts are dependent; this deliberately ignores that (the simulator
/// does not), so the approximation's cost is measurable.
EmResult estimate_rates(const RouteMatrix& routes, const LinkCounts& counts,
                        const EmConfig& cfg);

/// Routes-as-sources, links-as-detectors system matrix for the EM core.
SystemMatrix route_system_matrix(const RouteMatrix& routes);

}  // namespace wb
