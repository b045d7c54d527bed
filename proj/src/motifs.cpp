#include "refnet/motifs.hpp"

#include <algorithm>
#include <cmath>

namespace refnet {
namespace {

// Bits: 0 a->b, 1 b->a, 2 a->c, 3 c->a, 4 b->c, 5 c->b.
int classify_bits(unsigned bits) {
    auto dyad = [&](int fwd, int rev) {
        bool f = bits & (1u << fwd), r = bits & (1u << rev);
        return f && r ? 2 : (f || r ? 1 : 0); // 2 mutual, 1 asymmetric, 0 null
    };
    int ab = dyad(0, 1), ac = dyad(2, 3), bc = dyad(4, 5);
    int mutual = (ab == 2) + (ac == 2) + (bc == 2);
    int asym = (ab == 1) + (ac == 1) + (bc == 1);

    auto out_deg = [&](int node) {
        switch (node) {
            case 0: return int(bool(bits & 1u)) + int(bool(bits & 4u));       // a->b, a->c
            case 1: return int(bool(bits & 2u)) + int(bool(bits & 16u));      // b->a, b->c
            default: return int(bool(bits & 8u)) + int(bool(bits & 32u));     // c->a, c->b
        }
    };
    auto in_deg = [&](int node) {
        switch (node) {
            case 0: return int(bool(bits & 2u)) + int(bool(bits & 8u));
            case 1: return int(bool(bits & 1u)) + int(bool(bits & 32u));
            default: return int(bool(bits & 4u)) + int(bool(bits & 16u));
        }
    };

    switch (mutual * 10 + asym) {
        case 0: return 1;   // 003
        case 1: return 2;   // 012
        case 10: return 3;  // 102
        case 2: {           // 021: out-star / in-star / path
            for (int v = 0; v < 3; ++v) {
                if (out_deg(v) == 2) return 4;
                if (in_deg(v) == 2) return 5;
            }
            return 6;
        }
        case 11: {          // 111: arc into the mutual dyad (D) or out of it (U)
            // The non-dyad node is the one not on the mutual pair.
            int third = (ab == 2) ? 2 : (ac == 2 ? 1 : 0);
            return out_deg(third) == 1 ? 7 : 8;
        }
        case 3: {           // 030: transitive unless a 3-cycle
            bool cycle = out_deg(0) == 1 && out_deg(1) == 1 && out_deg(2) == 1;
            return cycle ? 10 : 9;
        }
        case 20: return 11; // 201
        case 12: {          // 120: third node sends both (D), receives both (U), or path (C)
            int third = (ab == 2) ? 2 : (ac == 2 ? 1 : 0);
            if (out_deg(third) == 2) return 12;
            if (in_deg(third) == 2) return 13;
            return 14;
        }
        case 21: return 15; // 210
        case 30: return 16; // 300
    }
    return 0; // unreachable
}

struct TriadTable {
    std::array<std::uint8_t, 64> cls;
    TriadTable() {
        for (unsigned b = 0; b < 64; ++b) cls[b] = static_cast<std::uint8_t>(classify_bits(b));
    }
};

const TriadTable kTriadTable;

} // namespace

TriadClass classify_triad(unsigned edge_bits) {
    return TriadClass{kTriadTable.cls[edge_bits & 63u]};
}

namespace {

unsigned triple_bits(const RefGraph& g, NodeId a, NodeId b, NodeId c) {
    unsigned bits = 0;
    if (g.has_edge(a, b)) bits |= 1u;
    if (g.has_edge(b, a)) bits |= 2u;
    if (g.has_edge(a, c)) bits |= 4u;
    if (g.has_edge(c, a)) bits |= 8u;
    if (g.has_edge(b, c)) bits |= 16u;
    if (g.has_edge(c, b)) bits |= 32u;
    return bits;
}

double choose3(std::uint64_t n) {
    if (n < 3) return 0.0;
    return static_cast<double>(n) * static_cast<double>(n - 1) * static_cast<double>(n - 2) / 6.0;
}

} // namespace

TriadCensus triad_census_exact(const RefGraph& g) {
    const std::uint64_t n = g.node_count();
    if (choose3(n) > 1e9)
        throw analysis_error("triad_census_exact: C(n,3) exceeds the 1e9 guard; use MC");

    TriadCensus census;
    ShadowGraph sh = undirected_shadow(g);

    // Batagelj-Mrvar style: every triad with >= 2 linked dyads is visited
    // through a canonical linked pair; triads with exactly one linked dyad
    // are counted arithmetically.
    std::array<std::uint64_t, 16> counts{};
    std::vector<NodeId> third;
    for (NodeId u = 0; u < n; ++u) {
        auto nu = sh.neighbors(u);
        for (NodeId v : nu) {
            if (v <= u) continue;
            auto nv = sh.neighbors(v);
            third.clear();
            std::set_union(nu.begin(), nu.end(), nv.begin(), nv.end(), std::back_inserter(third));
            std::uint64_t extra = third.size(); // |S| excluding u,v below
            for (NodeId w : third) {
                if (w == u || w == v) {
                    --extra;
                    continue;
                }
                bool w_linked_u = std::binary_search(nu.begin(), nu.end(), w);
                // Count (u,v,w) exactly once across all of its linked pairs.
                if (v < w || (u < w && w < v && !w_linked_u)) {
                    ++counts[static_cast<std::size_t>(
                        kTriadTable.cls[triple_bits(g, u, v, w)] - 1)];
                }
            }
            // Third node linked to neither endpoint: dyad class + isolate.
            std::uint64_t isolated = n - 2 - extra;
            bool mutual = g.has_edge(u, v) && g.has_edge(v, u);
            counts[mutual ? 2 : 1] += isolated;
        }
    }
    double assigned = 0;
    for (std::size_t k = 1; k < 16; ++k) {
        census.counts[k] = static_cast<double>(counts[k]);
        assigned += census.counts[k];
    }
    census.counts[0] = choose3(n) - assigned;
    census.n_samples = 0;
    return census;
}

namespace {

TriadCensus run_mc(const RefGraph& g, std::uint64_t n_samples, std::uint64_t seed,
                   bool dyad_anchored) {
    const std::uint64_t n = g.node_count();
    if (n < 3) throw analysis_error("triad census needs at least 3 nodes");
    if (n_samples < 10000) throw analysis_error("triad_census_mc: need at least 1e4 samples");

    // Connected dyads, for the anchored variant.
    std::vector<std::pair<NodeId, NodeId>> dyads;
    if (dyad_anchored) {
        for (NodeId u = 0; u < n; ++u)
            for (NodeId v : g.out_neighbors(u))
                if (u < v || !g.has_edge(v, u)) dyads.emplace_back(std::min(u, v), std::max(u, v));
        if (dyads.empty()) throw analysis_error("dyad-anchored census: graph has no edges");
    }

    const std::uint64_t block_size = 1 << 16;
    const std::uint64_t n_blocks = (n_samples + block_size - 1) / block_size;
    std::vector<std::array<std::uint64_t, 16>> block_tallies(n_blocks);

    parallel_blocks(n_blocks, [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t blk = lo; blk < hi; ++blk) {
            auto rng = make_stream(seed, blk);
            std::array<std::uint64_t, 16> tally{};
            std::uint64_t begin = blk * block_size;
            std::uint64_t end = std::min(n_samples, begin + block_size);
            std::uniform_int_distribution<std::uint64_t> node(0, n - 1);
            for (std::uint64_t s = begin; s < end; ++s) {
                NodeId a, b, c;
                if (dyad_anchored) {
                    std::uniform_int_distribution<std::size_t> pick(0, dyads.size() - 1);
                    auto [u, v] = dyads[pick(rng)];
                    a = u;
                    b = v;
                    do c = static_cast<NodeId>(node(rng));
                    while (c == a || c == b);
                } else {
                    a = static_cast<NodeId>(node(rng));
                    do b = static_cast<NodeId>(node(rng));
                    while (b == a);
                    do c = static_cast<NodeId>(node(rng));
                    while (c == a || c == b);
                }
                ++tally[static_cast<std::size_t>(kTriadTable.cls[triple_bits(g, a, b, c)] - 1)];
            }
            block_tallies[blk] = tally;
        }
    });

    TriadCensus census;
    census.n_samples = n_samples;
    census.seed = seed;
    for (const auto& t : block_tallies)
        for (std::size_t k = 0; k < 16; ++k) census.tallies[k] += t[k];

    const double total_triples = dyad_anchored ? static_cast<double>(n_samples) : choose3(n);
    const double ns = static_cast<double>(n_samples);
    for (std::size_t k = 0; k < 16; ++k) {
        double p = static_cast<double>(census.tallies[k]) / ns;
        census.counts[k] = p * total_triples;
        census.std_errors[k] = std::sqrt(p * (1.0 - p) / ns) * total_triples;
    }
    return census;
}

} // namespace

TriadCensus triad_census_mc(const RefGraph& g, std::uint64_t n_samples, std::uint64_t seed) {
    return run_mc(g, n_samples, seed, false);
}

TriadCensus triad_census_mc_dyad_anchored(const RefGraph& g, std::uint64_t n_samples,
                                          std::uint64_t seed) {
    return run_mc(g, n_samples, seed, true);
}

DyadCensus dyad_census(const RefGraph& g) {
    DyadCensus d;
    for (NodeId u = 0; u < g.node_count(); ++u) {
        for (NodeId v : g.out_neighbors(u)) {
            if (u < v) {
                if (g.has_edge(v, u)) ++d.mutual;
                else ++d.asymmetric;
            } else if (!g.has_edge(v, u)) {
                ++d.asymmetric; // single edge from the larger id
            }
        }
    }
    std::uint64_t n = g.node_count();
    std::uint64_t pairs = n * (n - 1) / 2;
    d.null_pairs = pairs - d.mutual - d.asymmetric;
    return d;
}

} // namespace refnet
