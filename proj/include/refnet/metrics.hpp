#ifndef REFNET_METRICS_HPP
#define REFNET_METRICS_HPP

#include <optional>
#include <span>
#include <vector>

#include "refnet/graph.hpp"

namespace refnet {

struct DegreeStats {
    std::vector<double> in_degrees;
    std::vector<double> out_degrees;
    double mean_degree = 0.0; // 2*edges/nodes: referral endpoints per node
};

// weighted=false counts distinct partners; weighted=true sums edge weights.
DegreeStats degree_stats(const RefGraph& g, bool weighted);

// Population Gini: sum_ij |xi-xj| / (2 n^2 mean). Throws on empty or
// all-zero input. Scale-invariant; 0 for a constant vector.
double gini(std::span<const double> values);

struct ClusteringReport {
    double global_c = 0.0;
    std::optional<double> local_c; // unset when no node has degree >= 2
    double er_expected = 0.0;      // mu/(n-1)
    std::uint64_t triangles = 0;
    std::uint64_t connected_triples = 0;
};

// Directed edges collapse to the undirected simple shadow first.
ClusteringReport clustering(const RefGraph& g);
ClusteringReport clustering(const ShadowGraph& shadow, double mean_degree);

struct AssortativityReport {
    std::optional<double> r_in_in;
    std::optional<double> r_out_out;
    std::optional<double> r_in_out;
    std::optional<double> r_out_in;
    double fisher_se = 0.0; // (n_edges - 3)^(-1/2), on the z scale
};

// Pearson over directed edges of (chosen degree of source, chosen degree of
// target), no excess-degree correction. Unset entries had a zero-variance
// margin.
AssortativityReport assortativity(const RefGraph& g);

// Undirected degree assortativity on the shadow: each undirected edge
// contributes both orientations.
std::optional<double> undirected_assortativity(const RefGraph& g);

// Pearson of (in_i, out_i) across nodes.
std::optional<double> self_degree_correlation(const RefGraph& g, bool weighted = false);

struct ReciprocityReport {
    std::optional<double> corr;     // Pearson of (w_uv, w_vu) over mutual pairs, symmetrized
    double r_squared = 0.0;         // corr^2 (simple-regression identity)
    double bidirectional_fraction = 0.0; // mutual / (mutual + asymmetric)
    std::uint64_t mutual_pairs = 0;
    std::uint64_t asymmetric_pairs = 0;
};

ReciprocityReport reciprocity(const RefGraph& g);

} // namespace refnet

#endif
