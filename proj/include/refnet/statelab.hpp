#ifndef REFNET_STATELAB_HPP
#define REFNET_STATELAB_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "refnet/coreperiphery.hpp"
#include "refnet/graph.hpp"
#include "refnet/ingest.hpp"
#include "refnet/powerlaw.hpp"

namespace refnet {

constexpr std::size_t kFeatureCount = 31;

// Human-readable name of feature fk (k in 1..31).
const char* feature_name(std::size_t k);

struct StateFeatureVector {
    std::string state;
    int year = 0;
    // f1..f31 at indices 0..30; unset = missing, never zero-filled.
    std::array<std::optional<double>, kFeatureCount> f{};
    std::map<std::size_t, std::string> missing_reason; // keyed by 0-based index

    std::optional<double> get(std::size_t k) const { return f.at(k - 1); } // 1-based
};

struct FeatureConfig {
    std::uint64_t diameter_seed = 7;
    std::size_t diameter_samples = 64;
    PowerLawOptions powerlaw;
    CpConfig cp;
    bool cp_on_induced = false; // default: CP features from the intrastate network
};

// Assembles one state-year vector from the intrastate and induced
// subnetworks plus the national graph (for core cross-state reach).
StateFeatureVector build_features(const std::string& state, int year,
                                  const Subnetwork& intrastate, const Subnetwork& induced,
                                  const RefGraph& national, const PhysicianRegistry& registry,
                                  const FeatureConfig& config = {});

struct PearsonCell {
    std::string feature;
    std::string attribute;
    double r = 0.0;
    double r_squared = 0.0;
    std::size_t n = 0;
};

// Pairwise-complete Pearson between every feature column and every
// attribute over state-years; cells with < 3 paired observations are
// omitted.
std::vector<PearsonCell> pearson_table(const std::vector<StateFeatureVector>& features,
                                       const std::vector<StateHealthRecord>& attributes);

struct FactorLoadings {
    std::size_t n_factors = 0;
    std::vector<std::vector<double>> loadings; // [variable][factor]
    std::vector<double> communalities;
    bool converged = true;
    std::size_t iterations = 0;
    double max_residual = 0.0; // max |R - (LL' + diag(uniqueness))| off-diagonal
};

// Principal-axis factoring with iterated communalities, unrotated; each
// factor's largest-|loading| is made positive.
FactorLoadings factor_analysis(const std::vector<std::vector<double>>& corr, std::size_t n_factors,
                               std::size_t max_iter = 100, double tol = 1e-6);

struct KMeansResult {
    std::vector<std::size_t> assignments;
    std::vector<std::vector<double>> centroids;
    std::vector<std::size_t> nearest_point; // index of the point closest to each centroid
    double sse = 0.0;
};

// Lloyd's algorithm with k-means++ seeding, best of n_restarts by SSE.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, std::size_t k,
                    std::uint64_t seed, std::size_t n_restarts = 10);

struct MdsResult {
    std::vector<std::vector<double>> coords; // [point][dim]
    std::size_t dim = 0;                     // may be below the request
    bool reduced = false;                    // too few positive eigenvalues
};

MdsResult classical_mds(const std::vector<std::vector<double>>& distances, std::size_t dim = 2);

// Random-intercept mixed model, Eq-style: outcome = grand intercept +
// year effects + beta1'X + beta2'(X restricted to interactions)*t +
// state intercept + noise. ML via profiled likelihood on tau^2/sigma^2.
struct MixedModelObs {
    std::string state;
    int year = 0;
    double y = 0.0;
    std::vector<double> x; // main-effect predictors, one per name
};

struct MixedModelFit {
    double beta0 = 0.0;
    double tau2 = 0.0;
    double sigma2 = 0.0;
    std::vector<double> lambda;      // per-year effects, first year = 0
    std::vector<int> year_levels;    // sorted years; lambda[i] matches year_levels[i]
    std::vector<double> beta1;       // main effects
    std::vector<double> beta1_se;
    std::vector<double> beta2;       // time interactions
    std::vector<double> beta2_se;
    std::vector<std::string> predictors;
    std::vector<std::string> interactions;
    double loglik = 0.0;
    std::size_t n_obs = 0;
};

// `interaction_mask[k]` adds predictor k's linear-time interaction.
// Predictors are standardized internally (mean 0, sd 1).
MixedModelFit fit_mixed_model(const std::vector<MixedModelObs>& data,
                              const std::vector<std::string>& predictor_names,
                              const std::vector<bool>& interaction_mask = {});

struct StepwiseResult {
    std::vector<std::string> selected;              // main effects, in inclusion order
    std::vector<std::string> retained_interactions; // after backward drop
    MixedModelFit fit;
    std::vector<std::pair<std::string, double>> trace; // (candidate, p) decisions
};

// Forward selection by chi-squared LRT at `alpha`, then all linear-time
// interactions added and backward-dropped least-significant-first.
StepwiseResult stepwise_select(const std::vector<MixedModelObs>& data,
                               const std::vector<std::string>& candidate_names,
                               double alpha = 0.05);

} // namespace refnet

#endif
