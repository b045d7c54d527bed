#include "refnet/statelab.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "refnet/metrics.hpp"
#include "refnet/stats.hpp"

namespace refnet {

const char* feature_name(std::size_t k) {
    static const char* names[kFeatureCount] = {
        "average degree of intra-state network",
        "alpha of in-degree power law of intra-state network",
        "gini of in-degree distribution of intra-state network",
        "alpha of out-degree power law of intra-state network",
        "gini of out-degree distribution of intra-state network",
        "diameter of intra-state network",
        "global clustering coefficient of intra-state network",
        "local clustering coefficient of intra-state network",
        "nodes in intra-state network",
        "edges in intra-state network",
        "undirected assortativity of intra-state network",
        "(in,in) assortativity of intra-state network",
        "(out,out) assortativity of intra-state network",
        "(in,out) assortativity of intra-state network",
        "(out,in) assortativity of intra-state network",
        "gini of component size distribution of induced network",
        "size of dominant component of induced network",
        "diameter of induced network",
        "global clustering coefficient of induced network",
        "local clustering coefficient of induced network",
        "nodes in induced network",
        "edges in induced network",
        "undirected assortativity of induced network",
        "(in,in) assortativity of induced network",
        "(out,out) assortativity of induced network",
        "(in,out) assortativity of induced network",
        "(out,in) assortativity of induced network",
        "gini of CP scores",
        "entropy of core node distribution across parameter settings",
        "states reached by the core node",
        "cross-state referrals of the core node",
    };
    if (k < 1 || k > kFeatureCount) throw analysis_error("feature id out of range");
    return names[k - 1];
}

namespace {

void set_missing(StateFeatureVector& v, std::size_t k /*1-based*/, const std::string& reason) {
    v.missing_reason[k - 1] = reason;
}

void set_value(StateFeatureVector& v, std::size_t k /*1-based*/, double value) {
    v.f[k - 1] = value;
}

void graph_block(StateFeatureVector& v, const RefGraph& g, std::size_t base_gini_comp,
                 const FeatureConfig& cfg, bool intrastate_block) {
    // Offsets: intrastate block uses f1..f15 slots; induced uses f16..f27.
    const std::size_t n = g.node_count();
    if (intrastate_block) {
        set_value(v, 9, static_cast<double>(n));
        set_value(v, 10, static_cast<double>(g.edge_count()));
        if (n == 0) {
            for (std::size_t k : {1u, 2u, 3u, 4u, 5u, 6u, 7u, 8u, 11u, 12u, 13u, 14u, 15u})
                set_missing(v, k, "empty intrastate network");
            return;
        }
        set_value(v, 1, 2.0 * static_cast<double>(g.edge_count()) / static_cast<double>(n));

        DegreeStats ds = degree_stats(g, false);
        auto fit_dir = [&](const std::vector<double>& deg, std::size_t slot) {
            std::vector<std::uint64_t> positive;
            for (double d : deg)
                if (d > 0) positive.push_back(static_cast<std::uint64_t>(d));
            try {
                set_value(v, slot, fit_powerlaw(positive, cfg.powerlaw).alpha);
            } catch (const analysis_error& e) {
                set_missing(v, slot, e.what());
            }
        };
        fit_dir(ds.in_degrees, 2);
        fit_dir(ds.out_degrees, 4);
        auto gini_dir = [&](const std::vector<double>& deg, std::size_t slot) {
            try {
                set_value(v, slot, gini(deg));
            } catch (const analysis_error& e) {
                set_missing(v, slot, e.what());
            }
        };
        gini_dir(ds.in_degrees, 3);
        gini_dir(ds.out_degrees, 5);
    } else {
        set_value(v, 21, static_cast<double>(n));
        set_value(v, 22, static_cast<double>(g.edge_count()));
        if (n == 0) {
            for (std::size_t k : {16u, 17u, 18u, 19u, 20u, 23u, 24u, 25u, 26u, 27u})
                set_missing(v, k, "empty induced network");
            return;
        }
        auto comps = weak_components(g);
        std::vector<double> sizes;
        sizes.reserve(comps.size());
        for (const auto& c : comps) sizes.push_back(static_cast<double>(c.size()));
        try {
            set_value(v, 16, gini(sizes));
        } catch (const analysis_error& e) {
            set_missing(v, 16, e.what());
        }
        set_value(v, 17, sizes.front());
    }

    const std::size_t diam_slot = intrastate_block ? 6 : 18;
    const std::size_t gclu_slot = intrastate_block ? 7 : 19;
    const std::size_t lclu_slot = intrastate_block ? 8 : 20;
    const std::size_t uass_slot = intrastate_block ? 11 : 23;
    const std::size_t dass_base = intrastate_block ? 12 : 24;

    try {
        set_value(v, diam_slot,
                  static_cast<double>(approx_diameter(g, cfg.diameter_samples, cfg.diameter_seed)));
    } catch (const analysis_error& e) {
        set_missing(v, diam_slot, e.what());
    }

    ClusteringReport cl = clustering(g);
    set_value(v, gclu_slot, cl.global_c);
    if (cl.local_c) set_value(v, lclu_slot, *cl.local_c);
    else set_missing(v, lclu_slot, "no node with degree >= 2");

    if (auto r = undirected_assortativity(g)) set_value(v, uass_slot, *r);
    else set_missing(v, uass_slot, "zero degree variance");

    AssortativityReport ar = assortativity(g);
    auto put = [&](std::size_t slot, const std::optional<double>& val) {
        if (val) set_value(v, slot, *val);
        else set_missing(v, slot, "zero degree variance");
    };
    put(dass_base + 0, ar.r_in_in);
    put(dass_base + 1, ar.r_out_out);
    put(dass_base + 2, ar.r_in_out);
    put(dass_base + 3, ar.r_out_in);
    (void)base_gini_comp;
}

} // namespace

StateFeatureVector build_features(const std::string& state, int year, const Subnetwork& intrastate,
                                  const Subnetwork& induced, const RefGraph& national,
                                  const PhysicianRegistry& registry, const FeatureConfig& cfg) {
    StateFeatureVector v;
    v.state = state;
    v.year = year;

    graph_block(v, intrastate.graph, 0, cfg, true);
    graph_block(v, induced.graph, 0, cfg, false);

    const Subnetwork& cp_net = cfg.cp_on_induced ? induced : intrastate;
    if (cp_net.graph.node_count() == 0) {
        for (std::size_t k : {28u, 29u, 30u, 31u}) set_missing(v, k, "empty network for CP scoring");
        return v;
    }
    try {
        CpReport cp = cp_scores(cp_net.graph, cfg.cp);
        set_value(v, 28, cp.gini_cp);
        set_value(v, 29, cp.core_entropy);
        NodeId core_national = cp_net.to_parent[cp.core_node];
        CoreCrossState cross = core_cross_state(core_national, national, registry);
        set_value(v, 30, static_cast<double>(cross.n_states_reached));
        set_value(v, 31, static_cast<double>(cross.n_cross_referrals));
    } catch (const analysis_error& e) {
        for (std::size_t k : {28u, 29u, 30u, 31u}) set_missing(v, k, e.what());
    }
    return v;
}

std::vector<PearsonCell> pearson_table(const std::vector<StateFeatureVector>& features,
                                       const std::vector<StateHealthRecord>& attributes) {
    // attribute -> (state, year) -> value
    std::map<std::string, std::map<std::pair<std::string, int>, double>> attr;
    for (const auto& a : attributes) attr[a.attribute_name][{a.state, a.year}] = a.value;

    std::vector<PearsonCell> table;
    for (std::size_t k = 1; k <= kFeatureCount; ++k) {
        for (const auto& [name, values] : attr) {
            std::vector<double> x, y;
            for (const auto& fv : features) {
                auto fval = fv.get(k);
                if (!fval) continue;
                auto it = values.find({fv.state, fv.year});
                if (it == values.end()) continue;
                x.push_back(*fval);
                y.push_back(it->second);
            }
            if (x.size() < 3) continue;
            auto r = pearson(x, y);
            if (!r) continue;
            PearsonCell cell;
            cell.feature = "f" + std::to_string(k);
            cell.attribute = name;
            cell.r = *r;
            cell.r_squared = *r * *r;
            cell.n = x.size();
            table.push_back(cell);
        }
    }
    return table;
}

FactorLoadings factor_analysis(const std::vector<std::vector<double>>& corr, std::size_t n_factors,
                               std::size_t max_iter, double tol) {
    const std::size_t p = corr.size();
    if (p < 2) throw analysis_error("factor_analysis: need at least 2 variables");
    for (const auto& row : corr)
        if (row.size() != p) throw analysis_error("factor_analysis: correlation matrix not square");
    if (n_factors < 1 || n_factors >= p)
        throw analysis_error("factor_analysis: n_factors out of range");

    Eigen::MatrixXd R(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) R(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = corr[i][j];

    // Initial communalities: squared multiple correlations when R inverts
    // cleanly, else the largest absolute off-diagonal correlation.
    Eigen::VectorXd h2(p);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(R);
    if (lu.isInvertible()) {
        Eigen::MatrixXd Rinv = lu.inverse();
        for (std::size_t j = 0; j < p; ++j)
            h2(static_cast<Eigen::Index>(j)) = 1.0 - 1.0 / Rinv(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
    } else {
        for (std::size_t j = 0; j < p; ++j) {
            double m = 0;
            for (std::size_t i = 0; i < p; ++i)
                if (i != j) m = std::max(m, std::abs(corr[j][i]));
            h2(static_cast<Eigen::Index>(j)) = m;
        }
    }
    h2 = h2.cwiseMax(0.0).cwiseMin(1.0);

    FactorLoadings out;
    out.n_factors = n_factors;
    Eigen::MatrixXd L(p, n_factors);
    std::size_t iter = 0;
    bool converged = false;
    for (; iter < max_iter; ++iter) {
        Eigen::MatrixXd Rstar = R;
        for (std::size_t j = 0; j < p; ++j) Rstar(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = h2(static_cast<Eigen::Index>(j));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Rstar);
        // Eigen sorts ascending; take the top n_factors.
        for (std::size_t f = 0; f < n_factors; ++f) {
            Eigen::Index col = static_cast<Eigen::Index>(p - 1 - f);
            double lambda = std::max(0.0, eig.eigenvalues()(col));
            L.col(static_cast<Eigen::Index>(f)) = eig.eigenvectors().col(col) * std::sqrt(lambda);
        }
        Eigen::VectorXd h2_new = L.rowwise().squaredNorm().cwiseMin(1.0);
        double delta = (h2_new - h2).cwiseAbs().maxCoeff();
        h2 = h2_new;
        if (delta < tol) {
            converged = true;
            ++iter;
            break;
        }
    }
    out.converged = converged;
    out.iterations = iter;

    // Sign convention: the largest-|loading| entry of each factor is positive.
    for (std::size_t f = 0; f < n_factors; ++f) {
        Eigen::Index arg = 0;
        L.col(static_cast<Eigen::Index>(f)).cwiseAbs().maxCoeff(&arg);
        if (L(arg, static_cast<Eigen::Index>(f)) < 0) L.col(static_cast<Eigen::Index>(f)) *= -1.0;
    }

    out.loadings.assign(p, std::vector<double>(n_factors));
    out.communalities.assign(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t f = 0; f < n_factors; ++f) out.loadings[j][f] = L(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(f));
        out.communalities[j] = std::clamp(h2(static_cast<Eigen::Index>(j)), 0.0, 1.0);
    }
    Eigen::MatrixXd recon = L * L.transpose();
    double max_resid = 0.0;
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            if (i != j) max_resid = std::max(max_resid, std::abs(R(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - recon(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
    out.max_residual = max_resid;
    return out;
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

KMeansResult lloyd_once(const std::vector<std::vector<double>>& pts, std::size_t k,
                        std::mt19937_64& rng) {
    const std::size_t n = pts.size(), d = pts.front().size();
    // k-means++ seeding.
    std::vector<std::vector<double>> centroids;
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    centroids.push_back(pts[first(rng)]);
    std::vector<double> dist2(n);
    while (centroids.size() < k) {
        double total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = sq_dist(pts[i], centroids[0]);
            for (std::size_t c = 1; c < centroids.size(); ++c)
                best = std::min(best, sq_dist(pts[i], centroids[c]));
            dist2[i] = best;
            total += best;
        }
        if (total <= 0) {
            centroids.push_back(pts[first(rng)]);
            continue;
        }
        std::uniform_real_distribution<double> unif(0.0, total);
        double target = unif(rng), acc = 0;
        std::size_t chosen = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            acc += dist2[i];
            if (acc >= target) {
                chosen = i;
                break;
            }
        }
        centroids.push_back(pts[chosen]);
    }

    std::vector<std::size_t> assign(n, 0);
    for (std::size_t iter = 0; iter < 300; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double bd = sq_dist(pts[i], centroids[0]);
            for (std::size_t c = 1; c < k; ++c) {
                double dd = sq_dist(pts[i], centroids[c]);
                if (dd < bd) {
                    bd = dd;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        std::vector<std::vector<double>> sums(k, std::vector<double>(d, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[assign[i]];
            for (std::size_t j = 0; j < d; ++j) sums[assign[i]][j] += pts[i][j];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // Re-seed the empty centroid at the point farthest from its
                // current centroid.
                std::size_t far = 0;
                double fd = -1;
                for (std::size_t i = 0; i < n; ++i) {
                    double dd = sq_dist(pts[i], centroids[assign[i]]);
                    if (dd > fd) {
                        fd = dd;
                        far = i;
                    }
                }
                centroids[c] = pts[far];
                changed = true;
            } else {
                for (std::size_t j = 0; j < d; ++j)
                    centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
            }
        }
        if (!changed && iter > 0) break;
    }

    KMeansResult res;
    res.assignments = assign;
    res.centroids = centroids;
    res.sse = 0;
    for (std::size_t i = 0; i < n; ++i) res.sse += sq_dist(pts[i], centroids[assign[i]]);
    res.nearest_point.assign(k, 0);
    for (std::size_t c = 0; c < k; ++c) {
        double bd = sq_dist(pts[0], centroids[c]);
        for (std::size_t i = 1; i < n; ++i) {
            double dd = sq_dist(pts[i], centroids[c]);
            if (dd < bd) {
                bd = dd;
                res.nearest_point[c] = i;
            }
        }
    }
    return res;
}

} // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& points, std::size_t k,
                    std::uint64_t seed, std::size_t n_restarts) {
    if (points.empty()) throw analysis_error("kmeans: no points");
    if (k == 0 || k > points.size()) throw analysis_error("kmeans: k out of range");
    KMeansResult best;
    bool have = false;
    for (std::size_t r = 0; r < std::max<std::size_t>(1, n_restarts); ++r) {
        auto rng = make_stream(seed, r);
        KMeansResult res = lloyd_once(points, k, rng);
        if (!have || res.sse < best.sse) {
            best = std::move(res);
            have = true;
        }
    }
    return best;
}

MdsResult classical_mds(const std::vector<std::vector<double>>& distances, std::size_t dim) {
    const std::size_t n = distances.size();
    if (n < 2) throw analysis_error("classical_mds: need at least 2 points");
    for (std::size_t i = 0; i < n; ++i) {
        if (distances[i].size() != n) throw analysis_error("classical_mds: matrix not square");
        if (std::abs(distances[i][i]) > 1e-12)
            throw analysis_error("classical_mds: nonzero diagonal");
        for (std::size_t j = 0; j < n; ++j)
            if (std::abs(distances[i][j] - distances[j][i]) > 1e-9)
                throw analysis_error("classical_mds: matrix not symmetric");
    }

    Eigen::MatrixXd D2(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            D2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                distances[i][j] * distances[i][j];
    Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n, n) -
                        Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
    Eigen::MatrixXd B = -0.5 * J * D2 * J;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(B);

    double max_ev = std::max(1.0e-300, eig.eigenvalues().cwiseAbs().maxCoeff());
    std::vector<std::pair<double, Eigen::Index>> positive;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
        double ev = eig.eigenvalues()(i);
        if (ev > 1e-9 * max_ev) positive.push_back({ev, i});
    }
    std::sort(positive.rbegin(), positive.rend());

    MdsResult res;
    res.dim = std::min(dim, positive.size());
    res.reduced = res.dim < dim;
    res.coords.assign(n, std::vector<double>(res.dim, 0.0));
    for (std::size_t f = 0; f < res.dim; ++f) {
        Eigen::VectorXd col = eig.eigenvectors().col(positive[f].second) * std::sqrt(positive[f].first);
        // Orientation: first point's coordinate non-negative (first nonzero
        // entry decides when the literal first entry is zero).
        double pivot = 0.0;
        for (Eigen::Index i = 0; i < col.size(); ++i) {
            if (std::abs(col(i)) > 1e-12) {
                pivot = col(i);
                break;
            }
        }
        if (pivot < 0) col *= -1.0;
        for (std::size_t i = 0; i < n; ++i) res.coords[i][f] = col(static_cast<Eigen::Index>(i));
    }
    return res;
}

namespace {

struct MixedDesign {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::vector<std::size_t>> groups; // row indices per state
    std::vector<int> year_levels;
    std::size_t p_fixed = 0;
    std::size_t first_beta1 = 0; // column of the first main effect
    std::size_t first_beta2 = 0;
};

struct ProfilePoint {
    double loglik = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd beta;
    double sigma2 = 0.0;
    Eigen::MatrixXd xtvx_inv;
};

ProfilePoint eval_gamma(const MixedDesign& d, double gamma) {
    const std::size_t n = d.groups.empty() ? 0 : static_cast<std::size_t>(d.y.size());
    const Eigen::Index p = d.X.cols();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    double logdet = 0.0;
    for (const auto& rows : d.groups) {
        const double ng = static_cast<double>(rows.size());
        const double c = gamma / (1.0 + gamma * ng);
        Eigen::MatrixXd Xg(rows.size(), p);
        Eigen::VectorXd yg(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            Xg.row(static_cast<Eigen::Index>(r)) = d.X.row(static_cast<Eigen::Index>(rows[r]));
            yg(static_cast<Eigen::Index>(r)) = d.y(static_cast<Eigen::Index>(rows[r]));
        }
        Eigen::VectorXd xs = Xg.colwise().sum();
        double ys = yg.sum();
        A += Xg.transpose() * Xg - c * (xs * xs.transpose());
        b += Xg.transpose() * yg - c * xs * ys;
        logdet += std::log1p(gamma * ng);
    }
    ProfilePoint pt;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    if (ldlt.info() != Eigen::Success) return pt;
    pt.beta = ldlt.solve(b);
    // Quadratic form r' V^-1 r via the same per-group identity.
    double q = 0.0;
    for (const auto& rows : d.groups) {
        const double ng = static_cast<double>(rows.size());
        const double c = gamma / (1.0 + gamma * ng);
        double rr = 0.0, rs = 0.0;
        for (std::size_t r : rows) {
            double res = d.y(static_cast<Eigen::Index>(r)) -
                         d.X.row(static_cast<Eigen::Index>(r)).dot(pt.beta);
            rr += res * res;
            rs += res;
        }
        q += rr - c * rs * rs;
    }
    if (q <= 0.0 || n == 0) return pt;
    pt.sigma2 = q / static_cast<double>(n);
    constexpr double kLog2Pi = 1.8378770664093453;
    pt.loglik = -0.5 * (static_cast<double>(n) * (kLog2Pi + std::log(pt.sigma2)) + logdet +
                        static_cast<double>(n));
    pt.xtvx_inv = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
    return pt;
}

MixedDesign build_design(const std::vector<MixedModelObs>& data,
                         const std::vector<std::string>& names,
                         const std::vector<bool>& interaction_mask) {
    if (data.empty()) throw analysis_error("mixed model: no observations");
    const std::size_t p_main = names.size();
    for (const auto& obs : data)
        if (obs.x.size() != p_main)
            throw analysis_error("mixed model: predictor width mismatch");

    MixedDesign d;
    std::set<int> yrs;
    for (const auto& obs : data) yrs.insert(obs.year);
    d.year_levels.assign(yrs.begin(), yrs.end());
    const int t0 = d.year_levels.front();
    const std::size_t n = data.size();
    std::size_t n_inter = 0;
    for (bool m : interaction_mask) n_inter += m ? 1 : 0;

    const std::size_t p = 1 + (d.year_levels.size() - 1) + p_main + n_inter;
    d.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    d.y.resize(static_cast<Eigen::Index>(n));
    d.p_fixed = p;
    d.first_beta1 = 1 + (d.year_levels.size() - 1);
    d.first_beta2 = d.first_beta1 + p_main;

    // Standardize predictors over the estimation rows.
    std::vector<std::vector<double>> cols(p_main, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < p_main; ++k) cols[k][i] = data[i].x[k];
    for (auto& colv : cols) standardize(colv);

    std::map<std::string, std::vector<std::size_t>> by_state;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& obs = data[i];
        Eigen::Index row = static_cast<Eigen::Index>(i);
        d.y(row) = obs.y;
        d.X(row, 0) = 1.0;
        for (std::size_t yl = 1; yl < d.year_levels.size(); ++yl)
            d.X(row, static_cast<Eigen::Index>(yl)) = obs.year == d.year_levels[yl] ? 1.0 : 0.0;
        for (std::size_t k = 0; k < p_main; ++k)
            d.X(row, static_cast<Eigen::Index>(d.first_beta1 + k)) = cols[k][i];
        std::size_t slot = 0;
        double t = static_cast<double>(obs.year - t0);
        for (std::size_t k = 0; k < p_main; ++k) {
            if (k < interaction_mask.size() && interaction_mask[k])
                d.X(row, static_cast<Eigen::Index>(d.first_beta2 + slot++)) = cols[k][i] * t;
        }
        by_state[obs.state].push_back(i);
    }
    for (auto& [state, rows] : by_state) d.groups.push_back(std::move(rows));
    return d;
}

} // namespace

MixedModelFit fit_mixed_model(const std::vector<MixedModelObs>& data,
                              const std::vector<std::string>& predictor_names,
                              const std::vector<bool>& interaction_mask) {
    std::vector<bool> mask = interaction_mask;
    mask.resize(predictor_names.size(), false);
    MixedDesign d = build_design(data, predictor_names, mask);

    auto value = [&](double gamma) { return eval_gamma(d, gamma); };

    // Bracket the variance-ratio maximum, then golden-section to 1e-8.
    double hi = 1.0;
    ProfilePoint at_zero = value(0.0);
    if (!std::isfinite(at_zero.loglik))
        throw analysis_error("mixed model: singular design at gamma=0");
    double prev = at_zero.loglik;
    while (hi < 1e8) {
        double cur = value(hi).loglik;
        if (cur < prev) break;
        prev = cur;
        hi *= 4.0;
    }
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = hi;
    double c1 = b - invphi * (b - a), c2 = a + invphi * (b - a);
    double f1 = value(c1).loglik, f2 = value(c2).loglik;
    while (b - a > 1e-8 * std::max(1.0, b)) {
        if (f1 < f2) {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + invphi * (b - a);
            f2 = value(c2).loglik;
        } else {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - invphi * (b - a);
            f1 = value(c1).loglik;
        }
    }
    double gamma_hat = 0.5 * (a + b);
    ProfilePoint best = value(gamma_hat);
    if (at_zero.loglik >= best.loglik) {
        gamma_hat = 0.0;
        best = at_zero;
    }
    if (!std::isfinite(best.loglik)) throw analysis_error("mixed model: likelihood not finite");

    MixedModelFit fit;
    fit.n_obs = data.size();
    fit.predictors = predictor_names;
    for (std::size_t k = 0; k < predictor_names.size(); ++k)
        if (mask[k]) fit.interactions.push_back(predictor_names[k]);
    fit.sigma2 = best.sigma2;
    fit.tau2 = gamma_hat * best.sigma2;
    fit.loglik = best.loglik;
    fit.beta0 = best.beta(0);
    fit.year_levels = d.year_levels;
    fit.lambda.assign(d.year_levels.size(), 0.0);
    for (std::size_t yl = 1; yl < d.year_levels.size(); ++yl)
        fit.lambda[yl] = best.beta(static_cast<Eigen::Index>(yl));
    Eigen::MatrixXd cov = best.sigma2 * best.xtvx_inv;
    for (std::size_t k = 0; k < predictor_names.size(); ++k) {
        Eigen::Index col = static_cast<Eigen::Index>(d.first_beta1 + k);
        fit.beta1.push_back(best.beta(col));
        fit.beta1_se.push_back(std::sqrt(std::max(0.0, cov(col, col))));
    }
    for (std::size_t k = 0; k < fit.interactions.size(); ++k) {
        Eigen::Index col = static_cast<Eigen::Index>(d.first_beta2 + k);
        fit.beta2.push_back(best.beta(col));
        fit.beta2_se.push_back(std::sqrt(std::max(0.0, cov(col, col))));
    }
    return fit;
}

StepwiseResult stepwise_select(const std::vector<MixedModelObs>& data,
                               const std::vector<std::string>& candidate_names,
                               double alpha) {
    // Complete cases only: a row missing any candidate would make the
    // likelihoods of nested models incomparable.
    std::vector<MixedModelObs> rows;
    for (const auto& obs : data) {
        bool ok = std::isfinite(obs.y);
        for (double v : obs.x) ok = ok && std::isfinite(v);
        if (ok) rows.push_back(obs);
    }
    if (rows.empty()) throw analysis_error("stepwise_select: no complete-case rows");

    auto subset_obs = [&](const std::vector<std::size_t>& keep) {
        std::vector<MixedModelObs> out = rows;
        for (auto& obs : out) {
            std::vector<double> x;
            for (std::size_t k : keep) x.push_back(obs.x[k]);
            obs.x = std::move(x);
        }
        return out;
    };
    auto names_of = [&](const std::vector<std::size_t>& keep) {
        std::vector<std::string> out;
        for (std::size_t k : keep) out.push_back(candidate_names[k]);
        return out;
    };

    StepwiseResult result;
    std::vector<std::size_t> selected;
    MixedModelFit current = fit_mixed_model(subset_obs(selected), names_of(selected));

    std::vector<std::size_t> remaining(candidate_names.size());
    std::iota(remaining.begin(), remaining.end(), std::size_t{0});

    // Forward: add the strongest candidate while its LRT clears alpha.
    while (!remaining.empty()) {
        double best_p = 2.0;
        std::size_t best_idx = 0;
        MixedModelFit best_fit;
        for (std::size_t ri = 0; ri < remaining.size(); ++ri) {
            std::vector<std::size_t> trial = selected;
            trial.push_back(remaining[ri]);
            MixedModelFit fit = fit_mixed_model(subset_obs(trial), names_of(trial));
            double stat = 2.0 * (fit.loglik - current.loglik);
            double p = chi2_sf(std::max(0.0, stat), 1.0);
            if (p < best_p) {
                best_p = p;
                best_idx = ri;
                best_fit = fit;
            }
        }
        result.trace.emplace_back(candidate_names[remaining[best_idx]], best_p);
        if (best_p >= alpha) break;
        selected.push_back(remaining[best_idx]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_idx));
        current = std::move(best_fit);
    }

    result.selected = names_of(selected);
    if (selected.empty()) {
        result.fit = current; // intercept-plus-year model
        return result;
    }

    // Interactions: add all, then drop the least significant one at a time.
    std::vector<bool> mask(selected.size(), true);
    auto fit_masked = [&](const std::vector<bool>& m) {
        return fit_mixed_model(subset_obs(selected), names_of(selected), m);
    };
    MixedModelFit full = fit_masked(mask);
    while (std::count(mask.begin(), mask.end(), true) > 0) {
        double worst_p = -1.0;
        std::size_t worst = 0;
        MixedModelFit worst_fit;
        for (std::size_t k = 0; k < mask.size(); ++k) {
            if (!mask[k]) continue;
            std::vector<bool> reduced = mask;
            reduced[k] = false;
            MixedModelFit fit = fit_masked(reduced);
            double stat = 2.0 * (full.loglik - fit.loglik);
            double p = chi2_sf(std::max(0.0, stat), 1.0);
            if (p > worst_p) {
                worst_p = p;
                worst = k;
                worst_fit = fit;
            }
        }
        if (worst_p < alpha) break; // everything remaining is significant
        mask[worst] = false;
        full = std::move(worst_fit);
    }
    result.fit = full;
    for (std::size_t k = 0; k < mask.size(); ++k)
        if (mask[k]) result.retained_interactions.push_back(candidate_names[selected[k]]);
    return result;
}

} // namespace refnet
