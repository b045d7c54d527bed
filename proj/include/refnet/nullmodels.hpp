#ifndef REFNET_NULLMODELS_HPP
#define REFNET_NULLMODELS_HPP

#include <cstdint>

#include "refnet/graph.hpp"

namespace refnet {

// Erdos-Renyi G(n,p), undirected, encoded as mutual directed edges of
// weight 1. Geometric skipping, O(n+m) expected. Deterministic per seed.
RefGraph generate_er(std::size_t n, double p, std::uint64_t seed);

// Watts-Strogatz ring lattice (k even) with rewiring probability beta;
// no duplicate edges or self-loops. Undirected, encoded as mutual edges.
RefGraph generate_ws(std::size_t n, std::size_t k, double beta, std::uint64_t seed);

struct SmallWorldThresholds {
    double min_clustering_ratio = 10.0; // local_c / er_expected
    double max_path_factor = 3.0;       // diameter <= factor * ln n / ln mu
    std::size_t diameter_samples = 64;
    std::uint64_t seed = 0;
};

struct SmallWorldVerdict {
    double local_c = 0.0;
    double er_expected = 0.0;
    double clustering_ratio = 0.0;
    int diameter_bound = 0;
    double er_path_scale = 0.0; // ln(n)/ln(mu)
    bool is_small_world = false;
    bool restricted_to_dominant_component = false; // flag when coverage < 90%
    double dominant_coverage = 1.0;
};

SmallWorldVerdict small_world_test(const RefGraph& g, const SmallWorldThresholds& thresholds = {});

} // namespace refnet

#endif
