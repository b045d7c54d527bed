#include "refnet/coreperiphery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "refnet/metrics.hpp"
#include "refnet/stats.hpp"

namespace refnet {

double cp_profile(std::size_t pos, std::size_t n, double alpha, double beta) {
    // Two-segment profile: positions 1..floor(beta*n) ramp gently from near 0,
    // the rest ramp from (1+alpha)/2 up to exactly 1 at position n.
    std::size_t split = static_cast<std::size_t>(std::floor(beta * static_cast<double>(n)));
    if (split >= n) split = n - 1;
    if (pos <= split) {
        return static_cast<double>(pos) * (1.0 - alpha) / (2.0 * static_cast<double>(split));
    }
    return static_cast<double>(pos - split) * (1.0 - alpha) /
               (2.0 * static_cast<double>(n - split)) +
           (1.0 + alpha) / 2.0;
}

namespace {

// Undirected weighted adjacency restricted to one component, with local ids.
struct LocalGraph {
    std::size_t n = 0;
    std::vector<std::vector<std::pair<std::uint32_t, double>>> adj;
};

LocalGraph local_graph(const RefGraph& g, const std::vector<NodeId>& nodes, bool weighted) {
    LocalGraph lg;
    lg.n = nodes.size();
    lg.adj.resize(lg.n);
    std::vector<std::uint32_t> local(g.node_count(), static_cast<std::uint32_t>(-1));
    for (std::size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = static_cast<std::uint32_t>(i);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        NodeId u = nodes[i];
        for (NodeId v : g.undirected_neighbors(u)) {
            if (local[v] == static_cast<std::uint32_t>(-1) || v == u) continue;
            double w = 1.0;
            if (weighted)
                w = static_cast<double>(g.edge_weight(u, v) + g.edge_weight(v, u));
            lg.adj[i].emplace_back(local[v], w);
        }
    }
    return lg;
}

struct SettingResult {
    std::vector<double> profile_by_node; // C_i under the optimized order
    double quality = 0.0;                // R at the optimum
    std::uint32_t top_node = 0;          // local id at the most-core position
};

// Simulated annealing over node orders for one (alpha, beta) setting.
SettingResult optimize_setting(const LocalGraph& lg, double alpha, double beta,
                               const CpConfig& cfg, std::uint64_t stream) {
    const std::size_t n = lg.n;
    std::vector<double> profile(n + 1);
    for (std::size_t pos = 1; pos <= n; ++pos) profile[pos] = cp_profile(pos, n, alpha, beta);

    // Warm start: ascending degree/strength so heavy nodes sit in core slots.
    std::vector<std::uint32_t> order(n); // order[pos-1] = node at position pos
    std::iota(order.begin(), order.end(), 0u);
    std::vector<double> strength(n, 0.0);
    for (std::size_t u = 0; u < n; ++u)
        for (auto [v, w] : lg.adj[u]) strength[u] += w;
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return strength[a] != strength[b] ? strength[a] < strength[b] : a < b;
    });
    std::vector<std::uint32_t> pos_of(n);
    for (std::size_t p = 0; p < n; ++p) pos_of[order[p]] = static_cast<std::uint32_t>(p + 1);

    auto node_gain = [&](std::uint32_t u, double cu) {
        double s = 0.0;
        for (auto [v, w] : lg.adj[u]) s += w * profile[pos_of[v]];
        return cu * s;
    };
    double quality = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
        for (auto [v, w] : lg.adj[u])
            if (v > u) quality += w * profile[pos_of[u]] * profile[pos_of[v]];
    }

    if (n > 1 && cfg.sweeps_per_node > 0) {
        auto rng = make_stream(cfg.seed, stream);
        std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(n - 1));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        // Temperature scale anchored to typical single-swap deltas.
        double temp = 0.05 * (quality > 0 ? quality / static_cast<double>(n) : 1.0) + 1e-9;
        const std::uint64_t total = cfg.sweeps_per_node * static_cast<std::uint64_t>(n);
        const std::uint64_t per_sweep = n;
        for (std::uint64_t step = 0; step < total; ++step) {
            std::uint32_t a = pick(rng), b = pick(rng);
            if (a == b) continue;
            std::uint32_t pa = pos_of[a], pb = pos_of[b];
            // Delta from swapping the two positions; the a-b edge (if any)
            // keeps the same product, handled by the symmetric formula.
            double before = node_gain(a, profile[pa]) + node_gain(b, profile[pb]);
            double w_ab = 0.0;
            for (auto [v, w] : lg.adj[a])
                if (v == b) {
                    w_ab = w;
                    break;
                }
            before -= w_ab * profile[pa] * profile[pb];
            pos_of[a] = pb;
            pos_of[b] = pa;
            double after = node_gain(a, profile[pb]) + node_gain(b, profile[pa]);
            after -= w_ab * profile[pa] * profile[pb];
            double delta = after - before;
            if (delta >= 0 || unif(rng) < std::exp(delta / temp)) {
                quality += delta;
                std::swap(order[pa - 1], order[pb - 1]);
            } else {
                pos_of[a] = pa;
                pos_of[b] = pb;
            }
            if ((step + 1) % per_sweep == 0) temp *= cfg.cooling;
        }
    }

    SettingResult res;
    res.profile_by_node.resize(n);
    for (std::size_t u = 0; u < n; ++u) res.profile_by_node[u] = profile[pos_of[u]];
    res.quality = quality;
    res.top_node = order.back();
    return res;
}

} // namespace

CpReport cp_scores(const RefGraph& g, const CpConfig& cfg) {
    const std::size_t n = g.node_count();
    if (n == 0) throw analysis_error("cp_scores: empty graph");
    if (cfg.alpha_grid.empty() || cfg.beta_grid.empty())
        throw analysis_error("cp_scores: empty parameter grid");

    CpReport rep;
    rep.cp_score.assign(n, 0.0);
    if (n == 1) {
        rep.cp_score[0] = 1.0;
        rep.core_node = 0;
        rep.gini_cp = 0.0;
        rep.core_entropy = 0.0;
        return rep;
    }

    auto comps = weak_components(g);
    const std::size_t n_settings = cfg.alpha_grid.size() * cfg.beta_grid.size();
    // Per setting: best core quality seen so far and the node holding the
    // most-core position there (graph ids). Components are visited largest
    // first, so quality ties resolve deterministically.
    std::vector<std::pair<double, NodeId>> setting_top(n_settings, {-1.0, 0});

    for (const auto& comp : comps) {
        if (comp.size() == 1) continue; // isolated node, no core quality
        LocalGraph lg = local_graph(g, comp, cfg.weighted);
        std::vector<SettingResult> results(n_settings);
        parallel_blocks(n_settings, [&](std::size_t, std::size_t lo, std::size_t hi) {
            for (std::size_t s = lo; s < hi; ++s) {
                std::size_t ai = s / cfg.beta_grid.size();
                std::size_t bi = s % cfg.beta_grid.size();
                // Stream id folds in the component's first node so different
                // components do not share annealing randomness.
                std::uint64_t stream = mix64(s) ^ mix64(comp.front());
                results[s] = optimize_setting(lg, cfg.alpha_grid[ai], cfg.beta_grid[bi], cfg, stream);
            }
        });
        for (std::size_t s = 0; s < n_settings; ++s) {
            const auto& r = results[s];
            for (std::size_t i = 0; i < comp.size(); ++i)
                rep.cp_score[comp[i]] += r.profile_by_node[i] * r.quality;
            if (r.quality > setting_top[s].first)
                setting_top[s] = {r.quality, comp[r.top_node]};
        }
    }

    std::vector<std::uint64_t> top_count(n, 0);
    for (const auto& [q, node] : setting_top)
        if (q >= 0.0) ++top_count[node];

    // Normalize so the maximum is exactly 1.0; break ties deterministically
    // by weighted degree, then lower node id.
    DegreeStats wd = degree_stats(g, true);
    NodeId best = 0;
    for (NodeId u = 1; u < n; ++u) {
        double su = rep.cp_score[u], sb = rep.cp_score[best];
        if (su > sb) {
            best = u;
        } else if (su == sb) {
            double du = wd.in_degrees[u] + wd.out_degrees[u];
            double db = wd.in_degrees[best] + wd.out_degrees[best];
            if (du > db) best = u;
        }
    }
    double max_score = rep.cp_score[best];
    if (max_score > 0) {
        for (double& s : rep.cp_score) s /= max_score;
        rep.cp_score[best] = 1.0;
    } else {
        // Edgeless graph: no contrast at all; the tie-broken node is core.
        rep.cp_score[best] = 1.0;
    }
    rep.core_node = best;
    rep.gini_cp = gini(rep.cp_score);
    rep.core_entropy = entropy(top_count);
    return rep;
}

double gini_of_cp(const CpReport& report) { return gini(report.cp_score); }

CoreCrossState core_cross_state(NodeId core_in_national, const RefGraph& national,
                                const PhysicianRegistry& registry) {
    CoreCrossState res;
    StateId home = registry.state_of(core_in_national);
    std::vector<bool> seen_state(64, false);
    auto visit = [&](NodeId v, Weight w) {
        StateId s = registry.state_of(v);
        if (s == kNoState) {
            ++res.unlabeled_neighbors;
            return;
        }
        if (s == home) return;
        res.n_cross_referrals += w;
        if (!seen_state[static_cast<std::size_t>(s)]) {
            seen_state[static_cast<std::size_t>(s)] = true;
            ++res.n_states_reached;
        }
    };
    auto on = national.out_neighbors(core_in_national);
    auto ow = national.out_weights(core_in_national);
    for (std::size_t i = 0; i < on.size(); ++i) visit(on[i], ow[i]);
    auto in = national.in_neighbors(core_in_national);
    auto iw = national.in_weights(core_in_national);
    for (std::size_t i = 0; i < in.size(); ++i) visit(in[i], iw[i]);
    return res;
}

} // namespace refnet
