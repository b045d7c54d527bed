#include "refnet/nullmodels.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "refnet/metrics.hpp"

namespace refnet {
namespace {

RefGraph mutual_edges_graph(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& und) {
    std::vector<std::tuple<NodeId, NodeId, Weight>> edges;
    edges.reserve(und.size() * 2);
    for (auto [u, v] : und) {
        edges.emplace_back(u, v, 1);
        edges.emplace_back(v, u, 1);
    }
    std::sort(edges.begin(), edges.end());
    return RefGraph::from_sorted_edges(n, edges);
}

} // namespace

RefGraph generate_er(std::size_t n, double p, std::uint64_t seed) {
    if (n < 2) throw analysis_error("generate_er: need n >= 2");
    if (p < 0.0 || p > 1.0) throw analysis_error("generate_er: p outside [0,1]");

    std::vector<std::pair<NodeId, NodeId>> und;
    if (p > 0.0) {
        auto rng = make_stream(seed, 0);
        if (p >= 1.0) {
            for (NodeId u = 0; u + 1 < n; ++u)
                for (NodeId v = u + 1; v < n; ++v) und.emplace_back(u, v);
        } else {
            // Walk the lexicographic (u<v) pair sequence with geometric skips.
            auto row_base = [n](std::uint64_t u) {
                return u * (n - 1) - u * (u - 1) / 2; // first index of row u
            };
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            const double log1mp = std::log1p(-p);
            const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
            std::uint64_t pos = 0;
            while (true) {
                double r = unif(rng);
                pos += static_cast<std::uint64_t>(std::floor(std::log(1.0 - r) / log1mp));
                if (pos >= total) break;
                double nn = static_cast<double>(n);
                double rd = (2.0 * nn - 1.0 -
                             std::sqrt((2.0 * nn - 1.0) * (2.0 * nn - 1.0) -
                                       8.0 * static_cast<double>(pos))) /
                            2.0;
                std::uint64_t u = static_cast<std::uint64_t>(std::max(0.0, rd));
                while (u + 1 < n && row_base(u + 1) <= pos) ++u;
                while (u > 0 && row_base(u) > pos) --u;
                std::uint64_t v = u + 1 + (pos - row_base(u));
                und.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
                ++pos;
            }
        }
    }
    return mutual_edges_graph(n, und);
}

RefGraph generate_ws(std::size_t n, std::size_t k, double beta, std::uint64_t seed) {
    if (k == 0 || k % 2 != 0) throw analysis_error("generate_ws: k must be positive and even");
    if (k >= n) throw analysis_error("generate_ws: k must be below n");
    if (beta < 0.0 || beta > 1.0) throw analysis_error("generate_ws: beta outside [0,1]");

    // Neighbor sets; start from the ring lattice.
    std::vector<std::set<NodeId>> adj(n);
    for (NodeId u = 0; u < n; ++u) {
        for (std::size_t d = 1; d <= k / 2; ++d) {
            NodeId v = static_cast<NodeId>((u + d) % n);
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    auto rng = make_stream(seed, 0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    // Rewire each lattice edge (u, u+d) with probability beta, keeping u.
    for (NodeId u = 0; u < n; ++u) {
        for (std::size_t d = 1; d <= k / 2; ++d) {
            NodeId v = static_cast<NodeId>((u + d) % n);
            if (unif(rng) >= beta) continue;
            if (adj[u].size() >= n - 1) continue; // u already saturated
            if (adj[u].count(v) == 0) continue;   // already moved by an earlier rewire
            NodeId w;
            do w = static_cast<NodeId>(pick(rng));
            while (w == u || adj[u].count(w) != 0);
            adj[u].erase(v);
            adj[v].erase(u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    std::vector<std::pair<NodeId, NodeId>> und;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v : adj[u])
            if (u < v) und.emplace_back(u, v);
    return mutual_edges_graph(n, und);
}

SmallWorldVerdict small_world_test(const RefGraph& g, const SmallWorldThresholds& th) {
    if (g.node_count() == 0) throw analysis_error("small_world_test: empty graph");

    ShadowGraph sh = undirected_shadow(g);
    auto comps = weak_components(sh);
    SmallWorldVerdict v;
    v.dominant_coverage =
        static_cast<double>(comps.front().size()) / static_cast<double>(g.node_count());

    const RefGraph* target = &g;
    Subnetwork dominant;
    if (v.dominant_coverage < 0.90) {
        v.restricted_to_dominant_component = true;
        // Rebuild the dominant component as its own graph.
        std::vector<NodeId> remap(g.node_count(), kInvalidNode);
        for (std::size_t i = 0; i < comps.front().size(); ++i)
            remap[comps.front()[i]] = static_cast<NodeId>(i);
        std::vector<std::tuple<NodeId, NodeId, Weight>> edges;
        for (NodeId u = 0; u < g.node_count(); ++u) {
            if (remap[u] == kInvalidNode) continue;
            auto nbrs = g.out_neighbors(u);
            auto wts = g.out_weights(u);
            for (std::size_t i = 0; i < nbrs.size(); ++i)
                if (remap[nbrs[i]] != kInvalidNode)
                    edges.emplace_back(remap[u], remap[nbrs[i]], wts[i]);
        }
        dominant.graph = RefGraph::from_sorted_edges(comps.front().size(), edges);
        target = &dominant.graph;
    }

    const double n = static_cast<double>(target->node_count());
    const double mu = 2.0 * static_cast<double>(target->edge_count()) / n;
    ClusteringReport cl = clustering(*target);
    v.er_expected = cl.er_expected;
    v.local_c = cl.local_c.value_or(0.0);
    v.clustering_ratio = v.er_expected > 0 ? v.local_c / v.er_expected : 0.0;
    v.diameter_bound = approx_diameter(*target, th.diameter_samples, th.seed);
    v.er_path_scale = mu > 1.0 ? std::log(n) / std::log(mu) : std::numeric_limits<double>::infinity();
    v.is_small_world = v.clustering_ratio >= th.min_clustering_ratio &&
                       static_cast<double>(v.diameter_bound) <= th.max_path_factor * v.er_path_scale;
    return v;
}

} // namespace refnet
