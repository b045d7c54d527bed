#ifndef REFNET_COREPERIPHERY_HPP
#define REFNET_COREPERIPHERY_HPP

#include <cstdint>
#include <vector>

#include "refnet/graph.hpp"

namespace refnet {

struct CpConfig {
    std::vector<double> alpha_grid = {0.0, 0.25, 0.5, 0.75, 1.0}; // score-gap sharpness
    std::vector<double> beta_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}; // core size
    std::uint64_t sweeps_per_node = 10000; // annealing proposals = sweeps_per_node * n
    double cooling = 0.995;                // geometric temperature decay per sweep
    std::uint64_t seed = 0;
    bool weighted = false; // default: binary adjacency
};

struct CpReport {
    std::vector<double> cp_score; // per node, in [0,1], max exactly 1.0
    double gini_cp = 0.0;
    NodeId core_node = 0;     // deterministic argmax (ties: weighted degree, then id)
    double core_entropy = 0.0; // entropy of the top node across parameter settings
};

// Aggregate core-periphery scores over the (alpha, beta) grid: each setting
// optimizes a node order for core quality R = sum_{u~v} C_u C_v with the
// two-segment transition profile, then scores aggregate as sum of C*R over
// settings, normalized to max 1. Disconnected graphs are scored per weak
// component and merged under one global normalization.
CpReport cp_scores(const RefGraph& g, const CpConfig& config = {});

double gini_of_cp(const CpReport& report);

struct CoreCrossState {
    int n_states_reached = 0;          // distinct external states among neighbors
    std::uint64_t n_cross_referrals = 0; // total weight to/from other-state neighbors
    std::uint64_t unlabeled_neighbors = 0;
};

// Cross-state connectivity of a state's core node, evaluated on the
// national graph. `core_in_national` is the core node's national id.
CoreCrossState core_cross_state(NodeId core_in_national, const RefGraph& national,
                                const PhysicianRegistry& registry);

// Transition profile value for 1-based position `pos` in an order of n
// nodes; exposed for tests.
double cp_profile(std::size_t pos, std::size_t n, double alpha, double beta);

} // namespace refnet

#endif
