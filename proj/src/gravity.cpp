#include "refnet/gravity.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "refnet/stats.hpp"

namespace refnet {

StateFlowMatrix aggregate_flows(
    const std::vector<std::pair<const RefGraph*, const PhysicianRegistry*>>& year_graphs,
    const std::vector<int>& years) {
    if (year_graphs.empty()) throw analysis_error("aggregate_flows: no graphs supplied");
    StateFlowMatrix m;
    m.flows.assign(50 * 50, 0.0);
    m.physicians.assign(50, 0.0);
    m.years = years;

    for (const auto& [graph, registry] : year_graphs) {
        std::array<std::uint64_t, 50> labeled{};
        for (NodeId u = 0; u < graph->node_count(); ++u) {
            StateId su = registry->state_of(u);
            bool u_core = is_core_state(su);
            if (u_core) ++labeled[core_state_index(su)];
            auto nbrs = graph->out_neighbors(u);
            auto wts = graph->out_weights(u);
            for (std::size_t k = 0; k < nbrs.size(); ++k) {
                StateId sv = registry->state_of(nbrs[k]);
                if (!u_core || !is_core_state(sv)) {
                    m.unlabeled_endpoint_weight += wts[k];
                    continue;
                }
                std::size_t i = core_state_index(su), j = core_state_index(sv);
                if (i == j) continue; // intrastate flow, not part of F
                m.flows[i * 50 + j] += static_cast<double>(wts[k]);
            }
        }
        for (std::size_t i = 0; i < 50; ++i) m.physicians[i] += static_cast<double>(labeled[i]);
    }
    const double ny = static_cast<double>(year_graphs.size());
    for (double& p : m.physicians) p /= ny;
    return m;
}

GravityFit fit_gravity(const StateFlowMatrix& matrix, const std::vector<double>& distances_km) {
    if (distances_km.size() != 50 * 50)
        throw analysis_error("fit_gravity: distance matrix must be 50x50");

    std::vector<double> y;
    std::vector<std::array<double, 4>> rows;
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < 50; ++i) {
        for (std::size_t j = 0; j < 50; ++j) {
            if (i == j) continue;
            double f = matrix.flow(i, j);
            if (f <= 0.0) {
                ++zeros;
                continue;
            }
            if (matrix.physicians[i] < 1.0 || matrix.physicians[j] < 1.0) {
                ++zeros;
                continue;
            }
            double d = distances_km[i * 50 + j];
            if (d <= 0.0) throw analysis_error("fit_gravity: nonpositive distance for a used pair");
            rows.push_back({1.0, std::log(matrix.physicians[i]), std::log(matrix.physicians[j]),
                            std::log(d)});
            y.push_back(std::log(f));
        }
    }
    if (rows.size() < 30)
        throw analysis_error("fit_gravity: need at least 30 positive-flow pairs, have " +
                             std::to_string(rows.size()));

    const std::size_t n = rows.size(), p = 4;
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd Y(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < p; ++c) X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        Y(static_cast<Eigen::Index>(r)) = y[r];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < static_cast<Eigen::Index>(p))
        throw analysis_error("fit_gravity: rank-deficient design matrix");
    Eigen::VectorXd beta = qr.solve(Y);
    Eigen::VectorXd resid = Y - X * beta;

    double ss_res = resid.squaredNorm();
    double y_mean = Y.mean();
    double ss_tot = (Y.array() - y_mean).square().sum();

    GravityFit fit;
    fit.g_log = beta(0);
    fit.beta_i = beta(1);
    fit.beta_j = beta(2);
    fit.beta_d = -beta(3); // decay convention: positive means flows fall with distance
    fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    fit.n_pairs = n;
    fit.n_zero_excluded = zeros;
    double dof = static_cast<double>(n - p);
    fit.residual_se = dof > 0 ? std::sqrt(ss_res / dof) : 0.0;
    if (dof > 0 && ss_res > 0) {
        double f_stat = (ss_tot - ss_res) / static_cast<double>(p - 1) / (ss_res / dof);
        fit.p_value_overall = f_dist_sf(f_stat, static_cast<double>(p - 1), dof);
    }
    return fit;
}

std::vector<double> capital_distance_matrix() {
    auto codes = core_state_codes();
    std::vector<double> d(50 * 50, 0.0);
    for (std::size_t i = 0; i < 50; ++i)
        for (std::size_t j = 0; j < 50; ++j)
            d[i * 50 + j] = i == j ? 0.0 : capital_distance_km(codes[i], codes[j]);
    return d;
}

} // namespace refnet
