#ifndef REFNET_POWERLAW_HPP
#define REFNET_POWERLAW_HPP

#include <cstdint>
#include <vector>

#include "refnet/common.hpp"

namespace refnet {

struct PowerLawFit {
    double alpha = 0.0;       // exponent, > 1
    std::uint64_t xmin = 1;   // tail cutoff
    std::uint64_t n_tail = 0; // observations >= xmin
    double ks_stat = 0.0;     // sup |empirical - fitted| tail CDF distance
    double normalization = 0.0; // 1 / hurwitz_zeta(alpha, xmin)
};

struct PowerLawOptions {
    std::size_t min_samples = 50;
    double alpha_lo = 1.01;
    double alpha_hi = 6.0;
    double alpha_tol = 1e-8;
    double xmin_quantile = 0.90; // candide xmins drawn from values up to this quantile
};

// Discrete MLE with KS-minimizing xmin selection. Deterministic.
// Throws analysis_error on too-few or degenerate (all-equal) samples.
PowerLawFit fit_powerlaw(const std::vector<std::uint64_t>& samples,
                         const PowerLawOptions& options = {});

// MLE at a fixed xmin (used by the bootstrap refits and tests).
PowerLawFit fit_powerlaw_fixed_xmin(const std::vector<std::uint64_t>& samples,
                                    std::uint64_t xmin, const PowerLawOptions& options = {});

struct GofResult {
    double p_value = 0.0;
    std::uint64_t n_bootstrap = 0;
    std::uint64_t seed = 0;
    double observed_ks = 0.0;
};

// Semiparametric bootstrap: body values resampled from the empirical
// below-xmin part, tail values drawn from the fitted law; each replicate
// refit with a full xmin search. Deterministic per seed, replicate-parallel.
GofResult gof_pvalue(const std::vector<std::uint64_t>& samples, const PowerLawFit& fit,
                     std::uint64_t n_bootstrap, std::uint64_t seed,
                     const PowerLawOptions& options = {});

// One-sample KS test of p-values against U(0,1).
struct UniformityResult {
    double ks_stat = 0.0;
    double p_value = 0.0;
};
UniformityResult uniformity_test(const std::vector<double>& p_values);

// Exact sampler for the discrete power law p(x) ~ x^(-alpha), x >= xmin.
class DiscretePowerLawSampler {
public:
    DiscretePowerLawSampler(double alpha, std::uint64_t xmin);
    std::uint64_t operator()(std::mt19937_64& rng) const;

private:
    double alpha_;
    std::uint64_t xmin_;
    double zeta_xmin_;
    std::vector<double> cdf_; // CDF table over [xmin, xmin+len)
};

} // namespace refnet

#endif
