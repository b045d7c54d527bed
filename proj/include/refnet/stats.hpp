#ifndef REFNET_STATS_HPP
#define REFNET_STATS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace refnet {

// Pearson correlation; nullopt when either margin has zero variance or
// fewer than two points are given.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> x);
double sample_sd(std::span<const double> x); // n-1 denominator

// Standardize in place to mean 0, sd 1 (no-op on zero-variance columns).
void standardize(std::vector<double>& x);

// One-sample Kolmogorov-Smirnov test against U(0,1).
struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};
KsResult ks_uniform(std::vector<double> values);

// Asymptotic Kolmogorov distribution survival Q(lambda)=P(D>lambda-ish),
// with Stephens' small-sample effective-n adjustment applied by callers.
double kolmogorov_sf(double lambda);

// Regularized incomplete gamma P(a,x) and chi-squared survival function.
double gamma_p(double a, double x);
double chi2_sf(double x, double dof);

// Regularized incomplete beta I_x(a,b) and F-distribution survival function.
double betai(double a, double b, double x);
double f_dist_sf(double f, double d1, double d2);

// Hurwitz zeta and its derivative in s, for s in (1, ~8], a >= 1.
// Euler-Maclaurin; accurate to ~1e-12 relative.
double hurwitz_zeta(double s, double a);
std::pair<double, double> hurwitz_zeta_with_ds(double s, double a);

// Shannon entropy (natural log) of a count distribution.
double entropy(std::span<const std::uint64_t> counts);

} // namespace refnet

#endif
