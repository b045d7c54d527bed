#include "refnet/powerlaw.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "refnet/stats.hpp"

namespace refnet {
namespace {

struct TailStats {
    std::vector<std::uint64_t> values; // distinct, ascending
    std::vector<std::uint64_t> count_ge; // suffix counts: #samples >= values[i]
    std::vector<double> sum_log_ge;      // suffix sums of log x
};

TailStats tail_stats(std::vector<std::uint64_t> sorted) {
    TailStats ts;
    const std::size_t n = sorted.size();
    std::size_t i = 0;
    std::vector<std::uint64_t> run_count;
    std::vector<double> run_log;
    while (i < n) {
        std::size_t j = i;
        while (j < n && sorted[j] == sorted[i]) ++j;
        ts.values.push_back(sorted[i]);
        run_count.push_back(j - i);
        run_log.push_back(static_cast<double>(j - i) *
                          std::log(static_cast<double>(sorted[i])));
        i = j;
    }
    ts.count_ge.assign(ts.values.size(), 0);
    ts.sum_log_ge.assign(ts.values.size(), 0.0);
    std::uint64_t c = 0;
    double s = 0;
    for (std::size_t k = ts.values.size(); k-- > 0;) {
        c += run_count[k];
        s += run_log[k];
        ts.count_ge[k] = c;
        ts.sum_log_ge[k] = s;
    }
    return ts;
}

// Solves E_model[ln X] = mean_log by bisection; the model mean-log is
// -dzeta/ds / zeta, strictly decreasing in alpha.
double solve_alpha(double mean_log, std::uint64_t xmin, const PowerLawOptions& opt) {
    auto model_mean_log = [&](double a) {
        auto [z, dz] = hurwitz_zeta_with_ds(a, static_cast<double>(xmin));
        return -dz / z;
    };
    double lo = opt.alpha_lo, hi = opt.alpha_hi;
    double f_lo = model_mean_log(lo) - mean_log;
    double f_hi = model_mean_log(hi) - mean_log;
    if (f_lo <= 0.0) return lo; // heavier tail than the lowest alpha can express
    if (f_hi >= 0.0) return hi; // lighter than the highest alpha
    while (hi - lo > opt.alpha_tol) {
        double mid = 0.5 * (lo + hi);
        if (model_mean_log(mid) - mean_log > 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// KS distance between the empirical tail CDF and the fitted law, evaluated
// at the distinct tail values.
double tail_ks(const TailStats& ts, std::size_t first, double alpha, double zeta_xmin) {
    const double n_tail = static_cast<double>(ts.count_ge[first]);
    double ks = 0.0;
    for (std::size_t k = first; k < ts.values.size(); ++k) {
        double emp_ccdf_next =
            (k + 1 < ts.values.size()) ? static_cast<double>(ts.count_ge[k + 1]) / n_tail : 0.0;
        double emp_cdf = 1.0 - emp_ccdf_next; // P(X <= values[k]) within the tail
        double fit_cdf =
            1.0 - hurwitz_zeta(alpha, static_cast<double>(ts.values[k] + 1)) / zeta_xmin;
        ks = std::max(ks, std::abs(emp_cdf - fit_cdf));
    }
    return ks;
}

PowerLawFit fit_at(const TailStats& ts, std::size_t first, const PowerLawOptions& opt) {
    PowerLawFit fit;
    fit.xmin = ts.values[first];
    fit.n_tail = ts.count_ge[first];
    double mean_log = ts.sum_log_ge[first] / static_cast<double>(fit.n_tail);
    // Guard: a degenerate tail (single distinct value) has mean_log equal to
    // log(xmin); the score equation still brackets, alpha pegs near alpha_hi.
    fit.alpha = solve_alpha(mean_log, fit.xmin, opt);
    double z = hurwitz_zeta(fit.alpha, static_cast<double>(fit.xmin));
    fit.normalization = 1.0 / z;
    fit.ks_stat = tail_ks(ts, first, fit.alpha, z);
    return fit;
}

} // namespace

PowerLawFit fit_powerlaw(const std::vector<std::uint64_t>& samples, const PowerLawOptions& opt) {
    if (samples.size() < opt.min_samples)
        throw analysis_error("fit_powerlaw: need at least " + std::to_string(opt.min_samples) +
                             " samples, got " + std::to_string(samples.size()));
    std::vector<std::uint64_t> sorted(samples);
    for (std::uint64_t v : sorted)
        if (v == 0) throw analysis_error("fit_powerlaw: samples must be positive");
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back())
        throw analysis_error("fit_powerlaw: degenerate sample (all values equal)");

    std::uint64_t q90 = sorted[static_cast<std::size_t>(
        opt.xmin_quantile * static_cast<double>(sorted.size() - 1))];
    TailStats ts = tail_stats(std::move(sorted));

    PowerLawFit best;
    bool have_best = false;
    for (std::size_t first = 0; first < ts.values.size(); ++first) {
        if (ts.values[first] > q90 && have_best) break;
        if (ts.count_ge[first] < 2) break;
        if (first + 1 >= ts.values.size()) break; // single distinct tail value
        PowerLawFit fit = fit_at(ts, first, opt);
        if (!have_best || fit.ks_stat < best.ks_stat) {
            best = fit;
            have_best = true;
        }
    }
    if (!have_best) throw analysis_error("fit_powerlaw: no admissible xmin candidate");
    return best;
}

PowerLawFit fit_powerlaw_fixed_xmin(const std::vector<std::uint64_t>& samples, std::uint64_t xmin,
                                    const PowerLawOptions& opt) {
    std::vector<std::uint64_t> sorted(samples);
    std::sort(sorted.begin(), sorted.end());
    TailStats ts = tail_stats(std::move(sorted));
    auto it = std::lower_bound(ts.values.begin(), ts.values.end(), xmin);
    if (it == ts.values.end())
        throw analysis_error("fit_powerlaw_fixed_xmin: no samples at or above xmin");
    std::size_t first = static_cast<std::size_t>(it - ts.values.begin());
    if (ts.count_ge[first] < 2)
        throw analysis_error("fit_powerlaw_fixed_xmin: tail too small");
    // The cutoff snaps to the smallest observed value >= xmin so the
    // normalization and KS distance stay mutually consistent.
    return fit_at(ts, first, opt);
}

DiscretePowerLawSampler::DiscretePowerLawSampler(double alpha, std::uint64_t xmin)
    : alpha_(alpha), xmin_(xmin) {
    if (alpha <= 1.0) throw analysis_error("power-law sampler: alpha must exceed 1");
    if (xmin < 1) throw analysis_error("power-law sampler: xmin must be >= 1");
    zeta_xmin_ = hurwitz_zeta(alpha_, static_cast<double>(xmin_));
    // CDF table covering all but ~1e-4 of the mass (capped); the rare far
    // tail falls back to an exact zeta-based search.
    const std::size_t cap = 1 << 20;
    double cum = 0.0;
    for (std::size_t i = 0; i < cap; ++i) {
        double x = static_cast<double>(xmin_ + i);
        cum += std::pow(x, -alpha_) / zeta_xmin_;
        cdf_.push_back(cum);
        if (1.0 - cum < 1e-4) break;
    }
}

std::uint64_t DiscretePowerLawSampler::operator()(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng);
    if (u <= cdf_.back()) {
        auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
        return xmin_ + static_cast<std::uint64_t>(it - cdf_.begin());
    }
    // Far tail: find smallest x with CDF(x) >= u via doubling + bisection on
    // CCDF(x) = zeta(alpha, x+1)/zeta(alpha, xmin).
    double target_ccdf = 1.0 - u;
    std::uint64_t lo = xmin_ + cdf_.size() - 1; // CDF(lo) < u
    std::uint64_t hi = std::max<std::uint64_t>(2 * lo, lo + 1);
    auto ccdf_above = [&](std::uint64_t x) {
        return hurwitz_zeta(alpha_, static_cast<double>(x + 1)) / zeta_xmin_;
    };
    while (ccdf_above(hi) > target_ccdf) {
        lo = hi;
        if (hi > (1ULL << 62)) break;
        hi *= 2;
    }
    while (hi - lo > 1) {
        std::uint64_t mid = lo + (hi - lo) / 2;
        if (ccdf_above(mid) > target_ccdf) lo = mid;
        else hi = mid;
    }
    return hi;
}

GofResult gof_pvalue(const std::vector<std::uint64_t>& samples, const PowerLawFit& fit,
                     std::uint64_t n_bootstrap, std::uint64_t seed, const PowerLawOptions& opt) {
    if (n_bootstrap < 100) throw analysis_error("gof_pvalue: need at least 100 replicates");

    std::vector<std::uint64_t> body;
    for (std::uint64_t v : samples)
        if (v < fit.xmin) body.push_back(v);
    std::sort(body.begin(), body.end());
    const double p_tail = static_cast<double>(fit.n_tail) / static_cast<double>(samples.size());
    DiscretePowerLawSampler tail_sampler(fit.alpha, fit.xmin);

    std::vector<std::uint8_t> exceed(n_bootstrap, 0);
    parallel_blocks(n_bootstrap, [&](std::size_t, std::size_t lo, std::size_t hi) {
        std::vector<std::uint64_t> replicate(samples.size());
        for (std::size_t r = lo; r < hi; ++r) {
            auto rng = make_stream(seed, r);
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            std::uniform_int_distribution<std::size_t> body_pick(0, body.empty() ? 0 : body.size() - 1);
            for (std::size_t i = 0; i < replicate.size(); ++i) {
                if (body.empty() || unif(rng) < p_tail) replicate[i] = tail_sampler(rng);
                else replicate[i] = body[body_pick(rng)];
            }
            try {
                PowerLawFit refit = fit_powerlaw(replicate, opt);
                exceed[r] = refit.ks_stat >= fit.ks_stat ? 1 : 0;
            } catch (const analysis_error&) {
                // Degenerate replicate (can only happen on tiny inputs):
                // treat as non-exceeding.
                exceed[r] = 0;
            }
        }
    });

    GofResult res;
    res.n_bootstrap = n_bootstrap;
    res.seed = seed;
    res.observed_ks = fit.ks_stat;
    std::uint64_t count = std::accumulate(exceed.begin(), exceed.end(), std::uint64_t{0});
    res.p_value = static_cast<double>(count) / static_cast<double>(n_bootstrap);
    return res;
}

UniformityResult uniformity_test(const std::vector<double>& p_values) {
    KsResult ks = ks_uniform(p_values);
    return {ks.statistic, ks.p_value};
}

} // namespace refnet
