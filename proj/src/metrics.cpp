#include "refnet/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

#include "refnet/stats.hpp"

namespace refnet {

DegreeStats degree_stats(const RefGraph& g, bool weighted) {
    const std::size_t n = g.node_count();
    DegreeStats st;
    st.in_degrees.resize(n);
    st.out_degrees.resize(n);
    for (NodeId u = 0; u < n; ++u) {
        if (weighted) {
            Weight wi = 0, wo = 0;
            for (Weight w : g.in_weights(u)) wi += w;
            for (Weight w : g.out_weights(u)) wo += w;
            st.in_degrees[u] = static_cast<double>(wi);
            st.out_degrees[u] = static_cast<double>(wo);
        } else {
            st.in_degrees[u] = static_cast<double>(g.in_degree(u));
            st.out_degrees[u] = static_cast<double>(g.out_degree(u));
        }
    }
    st.mean_degree = n == 0 ? 0.0 : 2.0 * static_cast<double>(g.edge_count()) / static_cast<double>(n);
    return st;
}

double gini(std::span<const double> values) {
    if (values.empty()) throw analysis_error("gini: empty input");
    std::vector<double> x(values.begin(), values.end());
    double total = 0;
    for (double v : x) {
        if (v < 0) throw analysis_error("gini: negative value");
        total += v;
    }
    if (total <= 0) throw analysis_error("gini: all-zero input");
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double weighted = 0; // sum of i*x_(i), 1-based rank
    for (std::size_t i = 0; i < x.size(); ++i)
        weighted += (static_cast<double>(i) + 1.0) * x[i];
    return (2.0 * weighted - (n + 1.0) * total) / (n * total);
}

ClusteringReport clustering(const ShadowGraph& sh, double mean_degree) {
    const std::size_t n = sh.node_count();
    ClusteringReport rep;
    rep.er_expected = n > 1 ? mean_degree / (static_cast<double>(n) - 1.0) : 0.0;
    if (n == 0) return rep;

    // Per-node triangle counts via forward-neighbor intersection.
    std::vector<std::uint64_t> tri(n, 0);
    std::vector<std::vector<std::uint64_t>> partials(thread_budget());
    parallel_blocks(n, [&](std::size_t b, std::size_t lo, std::size_t hi) {
        auto& local = partials[b];
        local.assign(n, 0);
        for (NodeId u = static_cast<NodeId>(lo); u < hi; ++u) {
            auto nu = sh.neighbors(u);
            for (NodeId v : nu) {
                if (v <= u) continue;
                auto nv = sh.neighbors(v);
                // intersect nu and nv above v to count each triangle once
                auto it1 = std::lower_bound(nu.begin(), nu.end(), v + 1);
                auto it2 = std::lower_bound(nv.begin(), nv.end(), v + 1);
                while (it1 != nu.end() && it2 != nv.end()) {
                    if (*it1 < *it2) ++it1;
                    else if (*it2 < *it1) ++it2;
                    else {
                        ++local[u];
                        ++local[v];
                        ++local[*it1];
                        ++it1;
                        ++it2;
                    }
                }
            }
        }
    });
    for (const auto& part : partials) {
        if (part.empty()) continue;
        for (std::size_t i = 0; i < n; ++i) tri[i] += part[i];
    }

    std::uint64_t tri_total = 0, triples = 0;
    double local_sum = 0;
    std::uint64_t local_n = 0;
    for (NodeId u = 0; u < n; ++u) {
        std::uint64_t k = sh.degree(u);
        std::uint64_t pairs = k * (k - 1) / 2;
        triples += pairs;
        tri_total += tri[u];
        if (k >= 2) {
            local_sum += static_cast<double>(tri[u]) / static_cast<double>(pairs);
            ++local_n;
        }
    }
    // tri[u] counts triangles at u; each triangle was tallied at 3 nodes.
    rep.triangles = tri_total / 3;
    rep.connected_triples = triples;
    rep.global_c = triples > 0 ? static_cast<double>(tri_total) / static_cast<double>(triples) : 0.0;
    if (local_n > 0) rep.local_c = local_sum / static_cast<double>(local_n);
    return rep;
}

ClusteringReport clustering(const RefGraph& g) {
    double mu = g.node_count() == 0
                    ? 0.0
                    : 2.0 * static_cast<double>(g.edge_count()) / static_cast<double>(g.node_count());
    return clustering(undirected_shadow(g), mu);
}

namespace {

std::optional<double> edge_pearson(const RefGraph& g, std::span<const double> src_deg,
                                   std::span<const double> dst_deg) {
    std::vector<double> x, y;
    x.reserve(g.edge_count());
    y.reserve(g.edge_count());
    for (NodeId u = 0; u < g.node_count(); ++u) {
        for (NodeId v : g.out_neighbors(u)) {
            x.push_back(src_deg[u]);
            y.push_back(dst_deg[v]);
        }
    }
    return pearson(x, y);
}

} // namespace

AssortativityReport assortativity(const RefGraph& g) {
    AssortativityReport rep;
    if (g.edge_count() < 2) return rep;
    DegreeStats st = degree_stats(g, false);
    rep.r_in_in = edge_pearson(g, st.in_degrees, st.in_degrees);
    rep.r_out_out = edge_pearson(g, st.out_degrees, st.out_degrees);
    rep.r_in_out = edge_pearson(g, st.in_degrees, st.out_degrees);
    rep.r_out_in = edge_pearson(g, st.out_degrees, st.in_degrees);
    if (g.edge_count() > 3)
        rep.fisher_se = 1.0 / std::sqrt(static_cast<double>(g.edge_count()) - 3.0);
    return rep;
}

std::optional<double> undirected_assortativity(const RefGraph& g) {
    ShadowGraph sh = undirected_shadow(g);
    std::vector<double> deg(sh.node_count());
    for (NodeId u = 0; u < sh.node_count(); ++u) deg[u] = static_cast<double>(sh.degree(u));
    std::vector<double> x, y;
    x.reserve(sh.nbr.size());
    y.reserve(sh.nbr.size());
    // Each undirected edge appears twice in the shadow (u->v and v->u),
    // which is exactly the symmetrized point set.
    for (NodeId u = 0; u < sh.node_count(); ++u) {
        for (NodeId v : sh.neighbors(u)) {
            x.push_back(deg[u]);
            y.push_back(deg[v]);
        }
    }
    return pearson(x, y);
}

std::optional<double> self_degree_correlation(const RefGraph& g, bool weighted) {
    if (g.node_count() < 2) return std::nullopt;
    DegreeStats st = degree_stats(g, weighted);
    return pearson(st.in_degrees, st.out_degrees);
}

ReciprocityReport reciprocity(const RefGraph& g) {
    ReciprocityReport rep;
    std::vector<double> x, y;
    for (NodeId u = 0; u < g.node_count(); ++u) {
        auto nbrs = g.out_neighbors(u);
        auto wts = g.out_weights(u);
        for (std::size_t i = 0; i < nbrs.size(); ++i) {
            NodeId v = nbrs[i];
            if (v <= u) {
                // Count the pair once, from its smaller endpoint; skip here.
                continue;
            }
            Weight back = g.edge_weight(v, u);
            if (back > 0) {
                ++rep.mutual_pairs;
                // Symmetrized: both orderings enter the correlation.
                x.push_back(static_cast<double>(wts[i]));
                y.push_back(static_cast<double>(back));
                x.push_back(static_cast<double>(back));
                y.push_back(static_cast<double>(wts[i]));
            } else {
                ++rep.asymmetric_pairs;
            }
        }
        // Pairs where only v->u exists (u<v) are picked up from v's list;
        // pairs with only u->v and u<v were handled above. Remaining case:
        // edge v->u alone with v>u, counted when iterating v. Asymmetric
        // pairs with the single edge from the larger id still need counting:
        for (std::size_t i = 0; i < nbrs.size(); ++i) {
            NodeId v = nbrs[i];
            if (v < u && !g.has_edge(v, u)) ++rep.asymmetric_pairs;
        }
    }
    double denom = static_cast<double>(rep.mutual_pairs + rep.asymmetric_pairs);
    rep.bidirectional_fraction =
        denom > 0 ? static_cast<double>(rep.mutual_pairs) / denom : 0.0;
    rep.corr = pearson(x, y);
    if (rep.corr) rep.r_squared = *rep.corr * *rep.corr;
    return rep;
}

} // namespace refnet
