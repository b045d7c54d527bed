#ifndef REFNET_MOTIFS_HPP
#define REFNET_MOTIFS_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "refnet/graph.hpp"

namespace refnet {

// Directed triad isomorphism classes 1..16, ordered as the standard census:
//  1 empty          2 single arc      3 mutual dyad      4 out-star
//  5 in-star        6 path            7 mutual+arc-in    8 mutual+arc-out
//  9 transitive    10 cycle          11 two mutuals     12 mutual+out-star
// 13 mutual+in-star 14 mutual+path   15 near-complete   16 complete
struct TriadClass {
    int id = 1; // 1..16
};

// Edge bits for an ordered node triple (a,b,c):
// bit0 a->b, bit1 b->a, bit2 a->c, bit3 c->a, bit4 b->c, bit5 c->b.
TriadClass classify_triad(unsigned edge_bits);

struct TriadCensus {
    std::array<double, 16> counts{}; // exact counts, or MC tallies scaled to triples
    std::array<std::uint64_t, 16> tallies{}; // raw MC tallies (MC mode only)
    std::array<double, 16> std_errors{};     // binomial SEs on scaled counts (MC mode)
    std::uint64_t n_samples = 0;             // 0 = exact
    std::uint64_t seed = 0;
};

// Exact census by neighborhood enumeration; the empty class comes from
// subtraction. Guards C(n,3) <= 1e9... of work via the edge-based loop; the
// hard guard below is on the triple count so class-1 arithmetic stays exact.
TriadCensus triad_census_exact(const RefGraph& g);

// Uniform node-triple Monte Carlo; deterministic per seed, block-parallel.
TriadCensus triad_census_mc(const RefGraph& g, std::uint64_t n_samples, std::uint64_t seed);

// Paper-style variant: draws a uniformly random connected dyad plus a
// uniformly random third node, so the empty class nearly vanishes and
// tallies concentrate on classes 2 and 3.
TriadCensus triad_census_mc_dyad_anchored(const RefGraph& g, std::uint64_t n_samples,
                                          std::uint64_t seed);

struct DyadCensus {
    std::uint64_t null_pairs = 0;
    std::uint64_t asymmetric = 0;
    std::uint64_t mutual = 0;
};

DyadCensus dyad_census(const RefGraph& g);

} // namespace refnet

#endif
