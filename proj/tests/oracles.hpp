// Brute-force reference implementations used only by tests. Each oracle is
// written independently of the library path it checks.
#ifndef REFNET_TESTS_ORACLES_HPP
#define REFNET_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "refnet/graph.hpp"

namespace oracles {

using refnet::NodeId;
using refnet::RefGraph;
using refnet::Weight;

// Plain textbook Pearson, two-pass.
inline double naive_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

// Gini straight from the pairwise-difference definition, O(n^2).
inline double naive_gini(const std::vector<double>& x) {
    double sum = 0, mean = 0;
    for (double a : x) mean += a;
    mean /= static_cast<double>(x.size());
    for (double a : x)
        for (double b : x) sum += std::abs(a - b);
    return sum / (2.0 * static_cast<double>(x.size()) * static_cast<double>(x.size()) * mean);
}

// Union-find with path halving; components sorted by size descending.
inline std::vector<std::vector<NodeId>> union_find_components(const RefGraph& g) {
    std::vector<NodeId> parent(g.node_count());
    std::iota(parent.begin(), parent.end(), NodeId{0});
    auto find = [&](NodeId x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (NodeId u = 0; u < g.node_count(); ++u)
        for (NodeId v : g.out_neighbors(u)) {
            NodeId a = find(u), b = find(v);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    std::map<NodeId, std::vector<NodeId>> by_root;
    for (NodeId u = 0; u < g.node_count(); ++u) by_root[find(u)].push_back(u);
    std::vector<std::vector<NodeId>> comps;
    for (auto& [root, members] : by_root) comps.push_back(std::move(members));
    std::stable_sort(comps.begin(), comps.end(),
                     [](const auto& a, const auto& b) { return a.size() > b.size(); });
    return comps;
}

// Exact all-pairs BFS diameter on the undirected view (finite pairs only).
inline int all_pairs_bfs_diameter(const RefGraph& g) {
    const std::size_t n = g.node_count();
    int diameter = 0;
    for (NodeId s = 0; s < n; ++s) {
        std::vector<int> dist(n, -1);
        std::vector<NodeId> queue{s};
        dist[s] = 0;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            NodeId u = queue[qi];
            for (NodeId v : g.undirected_neighbors(u)) {
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    diameter = std::max(diameter, dist[v]);
                    queue.push_back(v);
                }
            }
        }
    }
    return diameter;
}

// Random weighted digraph without self-loops or duplicate pairs.
inline RefGraph random_digraph(std::size_t n, std::size_t m, std::uint64_t seed,
                               Weight max_weight = 9) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(n - 1));
    std::uniform_int_distribution<Weight> wdist(1, max_weight);
    std::set<std::pair<NodeId, NodeId>> seen;
    std::vector<std::tuple<NodeId, NodeId, Weight>> edges;
    while (edges.size() < m && seen.size() < n * (n - 1)) {
        NodeId u = node(rng), v = node(rng);
        if (u == v) continue;
        if (!seen.insert({u, v}).second) continue;
        edges.emplace_back(u, v, wdist(rng));
    }
    std::sort(edges.begin(), edges.end());
    return RefGraph::from_sorted_edges(n, edges);
}

// Directly classify three labeled nodes by brute-force isomorphism:
// canonical form = min over the 6 permutations of the 6-bit code.
inline unsigned triad_canonical_code(bool ab, bool ba, bool ac, bool ca, bool bc, bool cb) {
    bool adj[3][3] = {{false, ab, ac}, {ba, false, bc}, {ca, cb, false}};
    static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                    {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    unsigned best = 64;
    for (const auto& p : perms) {
        unsigned code = 0;
        if (adj[p[0]][p[1]]) code |= 1u;
        if (adj[p[1]][p[0]]) code |= 2u;
        if (adj[p[0]][p[2]]) code |= 4u;
        if (adj[p[2]][p[0]]) code |= 8u;
        if (adj[p[1]][p[2]]) code |= 16u;
        if (adj[p[2]][p[1]]) code |= 32u;
        best = std::min(best, code);
    }
    return best;
}

// O(n^3) triad census by classifying every triple through a classifier fn.
template <typename ClassifyFn>
std::array<std::uint64_t, 16> naive_triad_census(const RefGraph& g, ClassifyFn classify) {
    std::array<std::uint64_t, 16> counts{};
    const std::size_t n = g.node_count();
    for (NodeId a = 0; a < n; ++a)
        for (NodeId b = a + 1; b < n; ++b)
            for (NodeId c = b + 1; c < n; ++c)
                ++counts[static_cast<std::size_t>(classify(a, b, c) - 1)];
    return counts;
}

inline unsigned edge_bits(const RefGraph& g, NodeId a, NodeId b, NodeId c) {
    unsigned bits = 0;
    if (g.has_edge(a, b)) bits |= 1u;
    if (g.has_edge(b, a)) bits |= 2u;
    if (g.has_edge(a, c)) bits |= 4u;
    if (g.has_edge(c, a)) bits |= 8u;
    if (g.has_edge(b, c)) bits |= 16u;
    if (g.has_edge(c, b)) bits |= 32u;
    return bits;
}

// Inverse-CDF sampler for the exact discrete power law, built from an
// explicit pmf table (independent of the library's zeta-based sampler).
class PowerLawTableSampler {
public:
    PowerLawTableSampler(double alpha, std::uint64_t xmin, double tail_eps = 1e-12)
        : xmin_(xmin) {
        // Normalize over a long explicit range; beyond it the mass is eps.
        long double z = 0;
        std::uint64_t x = xmin;
        std::vector<long double> pmf;
        for (;;) {
            long double p = std::pow(static_cast<long double>(x), -static_cast<long double>(alpha));
            pmf.push_back(p);
            z += p;
            if (p / z < tail_eps && pmf.size() > 10) break;
            if (pmf.size() > 20000000) break;
            ++x;
        }
        cdf_.resize(pmf.size());
        long double acc = 0;
        for (std::size_t i = 0; i < pmf.size(); ++i) {
            acc += pmf[i] / z;
            cdf_[i] = static_cast<double>(acc);
        }
        cdf_.back() = 1.0;
    }
    std::uint64_t operator()(std::mt19937_64& rng) const {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        double u = unif(rng);
        auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
        return xmin_ + static_cast<std::uint64_t>(it - cdf_.begin());
    }

private:
    std::uint64_t xmin_;
    std::vector<double> cdf_;
};

} // namespace oracles

#endif
