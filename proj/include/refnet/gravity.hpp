#ifndef REFNET_GRAVITY_HPP
#define REFNET_GRAVITY_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "refnet/graph.hpp"

namespace refnet {

// Interstate flows over the 50 states, diagonal excluded by construction.
struct StateFlowMatrix {
    std::vector<double> flows;      // 50x50 row-major, flows[i*50+j] = F_ij
    std::vector<double> physicians; // M_i per state (mean across pooled years)
    std::vector<int> years;
    std::uint64_t unlabeled_endpoint_weight = 0; // edge weight skipped

    double flow(std::size_t i, std::size_t j) const { return flows[i * 50 + j]; }
};

// F_ij sums edge weights from i-labeled to j-labeled physicians across the
// supplied year graphs; M_i averages the per-year labeled counts.
StateFlowMatrix aggregate_flows(
    const std::vector<std::pair<const RefGraph*, const PhysicianRegistry*>>& year_graphs,
    const std::vector<int>& years);

struct GravityFit {
    double g_log = 0.0;  // intercept, log G
    double beta_i = 0.0; // origin-mass exponent
    double beta_j = 0.0; // destination-mass exponent
    double beta_d = 0.0; // distance-decay exponent (positive = decay)
    double r_squared = 0.0;
    double residual_se = 0.0;
    double p_value_overall = 0.0; // F test of the full regression
    std::size_t n_pairs = 0;      // positive-flow pairs used
    std::size_t n_zero_excluded = 0;
};

// OLS of log F_ij on (1, log M_i, log M_j, log D_ij) over positive-flow
// pairs; QR factorization. Throws on rank deficiency or < 30 pairs.
GravityFit fit_gravity(const StateFlowMatrix& matrix,
                       const std::vector<double>& distances_km /* 50x50 row-major */);

// Distance matrix from the embedded capital table.
std::vector<double> capital_distance_matrix();

} // namespace refnet

#endif
