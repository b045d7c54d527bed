#include "refnet/stats.hpp"

#include <algorithm>
#include <cmath>

#include "refnet/common.hpp"

namespace refnet {

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) return std::nullopt;
    double mx = mean(x), my = mean(y);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0 || syy <= 0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

double mean(std::span<const double> x) {
    double s = 0;
    for (double v : x) s += v;
    return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    double m = mean(x), s = 0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size() - 1));
}

void standardize(std::vector<double>& x) {
    double m = mean(x);
    double sd = sample_sd(x);
    if (sd <= 0) return;
    for (double& v : x) v = (v - m) / sd;
}

double kolmogorov_sf(double lambda) {
    if (lambda < 0.1) return 1.0;
    double sum = 0;
    for (int k = 1; k <= 100; ++k) {
        double term = 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-14) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

KsResult ks_uniform(std::vector<double> values) {
    if (values.size() < 5) throw analysis_error("ks_uniform: need at least 5 values");
    for (double v : values)
        if (!(v >= 0.0 && v <= 1.0)) throw analysis_error("ks_uniform: value outside [0,1]");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double d = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double hi = (static_cast<double>(i) + 1.0) / n - values[i];
        double lo = values[i] - static_cast<double>(i) / n;
        d = std::max({d, hi, lo});
    }
    // Stephens' effective-n correction.
    double en = std::sqrt(n);
    double lambda = (en + 0.12 + 0.11 / en) * d;
    return {d, kolmogorov_sf(lambda)};
}

namespace {

// Regularized incomplete gamma via series / continued fraction (Lentz).
double gamma_p_series(double a, double x) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_cf(double a, double x) {
    const double eps = 1e-15, fpmin = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / fpmin, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < fpmin) d = fpmin;
        c = b + an / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace

double gamma_p(double a, double x) {
    if (x < 0 || a <= 0) throw analysis_error("gamma_p: bad arguments");
    if (x == 0) return 0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double chi2_sf(double x, double dof) {
    if (x <= 0) return 1.0;
    return std::clamp(1.0 - gamma_p(dof / 2.0, x / 2.0), 0.0, 1.0);
}

namespace {

double betacf(double a, double b, double x) {
    const double eps = 1e-15, fpmin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

} // namespace

double betai(double a, double b, double x) {
    if (x < 0 || x > 1) throw analysis_error("betai: x outside [0,1]");
    if (x == 0) return 0;
    if (x == 1) return 1;
    double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double f_dist_sf(double f, double d1, double d2) {
    if (f <= 0) return 1.0;
    return std::clamp(betai(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f)), 0.0, 1.0);
}

namespace {

// Bernoulli numbers B_2, B_4, ..., B_16 over (2j)!.
constexpr double kB2jOverFact[8] = {
    1.0 / 12.0,           // B2/2!
    -1.0 / 720.0,         // B4/4!
    1.0 / 30240.0,        // B6/6!
    -1.0 / 1209600.0,     // B8/8!
    1.0 / 47900160.0,     // B10/10!
    -691.0 / 1307674368000.0,   // B12/12!
    7.0 / 523069747200.0,       // B14/14!
    -3617.0 / 10670622842880000.0, // B16/16!
};

} // namespace

std::pair<double, double> hurwitz_zeta_with_ds(double s, double a) {
    if (s <= 1.0) throw analysis_error("hurwitz_zeta: s must exceed 1");
    if (a < 1.0) throw analysis_error("hurwitz_zeta: a must be >= 1");
    const int N = 18;
    double z = 0, dz = 0;
    for (int k = 0; k < N; ++k) {
        double t = a + k;
        double p = std::pow(t, -s);
        z += p;
        dz -= std::log(t) * p;
    }
    double t = a + N;
    double lt = std::log(t);
    double p1s = std::pow(t, 1.0 - s); // t^(1-s)
    double ps = p1s / t;               // t^(-s)
    // Integral term t^(1-s)/(s-1) and half-correction t^(-s)/2.
    z += p1s / (s - 1.0) + 0.5 * ps;
    dz += p1s * (-lt / (s - 1.0) - 1.0 / ((s - 1.0) * (s - 1.0))) - 0.5 * lt * ps;
    // Euler-Maclaurin tail: sum_j B2j/(2j)! * (s)_{2j-1} * t^{-s-2j+1}.
    double poch = s;        // rising factorial s(s+1)...(s+2j-2)
    double dpoch = 1.0;     // derivative of poch wrt s
    double tp = ps / t;     // t^{-s-1}
    for (int j = 0; j < 8; ++j) {
        if (j > 0) {
            // extend (s)_{2j-1} to (s)_{2j+1}
            double f1 = s + 2.0 * j - 1.0, f2 = s + 2.0 * j;
            dpoch = dpoch * f1 * f2 + poch * (f1 + f2);
            poch = poch * f1 * f2;
            tp /= t * t; // t^{-s-2j+1}
        }
        double term = kB2jOverFact[j] * poch * tp;
        z += term;
        dz += kB2jOverFact[j] * (dpoch * tp - poch * lt * tp);
        if (std::abs(term) < 1e-16 * std::abs(z)) break;
    }
    return {z, dz};
}

double hurwitz_zeta(double s, double a) { return hurwitz_zeta_with_ds(s, a).first; }

double entropy(std::span<const std::uint64_t> counts) {
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) return 0.0;
    double h = 0;
    for (auto c : counts) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log(p);
    }
    return h;
}

} // namespace refnet
