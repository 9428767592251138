#include "snvsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace snvsim {

double mean_of(const std::vector<double>& xs) {
    double s = 0;
    for (double x : xs) s += x;
    return xs.empty() ? 0.0 : s / double(xs.size());
}

double variance_of(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double s = 0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / double(xs.size() - 1);
}

double fano_factor(const std::vector<std::int64_t>& counts) {
    std::vector<double> xs(counts.begin(), counts.end());
    const double m = mean_of(xs);
    if (m <= 0) throw std::invalid_argument("fano_factor: zero mean");
    return variance_of(xs) / m;
}

CenterStats center_statistics(const std::vector<double>& centers) {
    if (centers.size() < 3) throw std::invalid_argument("center_statistics: need n >= 3");
    CenterStats st;
    st.n = centers.size();
    st.mean_mhz = mean_of(centers);
    st.std_mhz = std::sqrt(variance_of(centers));
    st.stderr_of_std_mhz = st.std_mhz / std::sqrt(2.0 * double(centers.size() - 1));
    return st;
}

CorrelationMetrics correlation_metrics(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs, std::int64_t threshold,
    double hist_bin) {
    if (pairs.size() < 2) throw std::invalid_argument("correlation_metrics: need n >= 2");
    CorrelationMetrics cm;
    cm.threshold = threshold;

    double sx = 0, sy = 0;
    std::int64_t max_c = 0;
    for (auto [a, b] : pairs) {
        sx += double(a);
        sy += double(b);
        max_c = std::max({max_c, a, b});
    }
    const double mx = sx / double(pairs.size()), my = sy / double(pairs.size());
    double vxx = 0, vyy = 0, vxy = 0;
    for (auto [a, b] : pairs) {
        vxx += (a - mx) * (a - mx);
        vyy += (b - my) * (b - my);
        vxy += (a - mx) * (b - my);
    }
    if (vxx > 0 && vyy > 0) cm.pearson_r = vxy / std::sqrt(vxx * vyy);

    cm.hist.x_lo = 0;
    cm.hist.bin = hist_bin;
    const int nb = int(double(max_c) / hist_bin) + 1;
    cm.hist.counts.assign(nb, std::vector<std::int64_t>(nb, 0));
    for (auto [a, b] : pairs) {
        ++cm.hist.counts[int(double(a) / hist_bin)][int(double(b) / hist_bin)];
        if (a >= threshold)
            ++cm.cond_above[b];
        else
            ++cm.cond_below[b];
    }
    return cm;
}

std::vector<std::pair<std::int64_t, double>> pass_probability_curve(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs, std::int64_t theta_max) {
    std::vector<std::int64_t> firsts;
    firsts.reserve(pairs.size());
    for (auto [a, b] : pairs) firsts.push_back(a);
    std::sort(firsts.begin(), firsts.end());
    std::vector<std::pair<std::int64_t, double>> curve;
    for (std::int64_t theta = 0; theta <= theta_max; ++theta) {
        const auto it = std::lower_bound(firsts.begin(), firsts.end(), theta);
        curve.emplace_back(theta, double(firsts.end() - it) / double(firsts.size()));
    }
    return curve;
}

namespace {

// regularized incomplete gamma by series / continued fraction (Numerical
// Recipes style)
double gamma_p_series(double a, double x) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
    if (x < 0 || a <= 0) throw std::invalid_argument("gamma_p: bad arguments");
    if (x == 0) return 0.0;
    return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_contfrac(a, x);
}

double chi2_sf(double chi2, int dof) {
    if (dof <= 0) throw std::invalid_argument("chi2_sf: dof must be > 0");
    return 1.0 - gamma_p(0.5 * dof, 0.5 * chi2);
}

double poisson_gof_pvalue(const std::vector<std::int64_t>& samples, double mean) {
    if (samples.empty()) throw std::invalid_argument("poisson_gof: empty sample");
    const double n = double(samples.size());
    std::int64_t max_k = *std::max_element(samples.begin(), samples.end());

    std::vector<double> expected;  // pooled so that each bin expects >= 5
    std::vector<double> observed;
    std::vector<std::int64_t> obs_by_k(std::size_t(max_k) + 1, 0);
    for (auto s : samples) ++obs_by_k[std::size_t(s)];

    double log_p = -mean;  // pmf(0)
    double acc_e = 0, acc_o = 0, tail_p = 1.0;
    for (std::int64_t k = 0; k <= max_k; ++k) {
        const double pk = std::exp(log_p);
        tail_p -= pk;
        acc_e += n * pk;
        acc_o += double(obs_by_k[std::size_t(k)]);
        if (acc_e >= 5.0) {
            expected.push_back(acc_e);
            observed.push_back(acc_o);
            acc_e = acc_o = 0;
        }
        log_p += std::log(mean) - std::log(double(k + 1));
    }
    // remaining tail of the pmf in one bin
    acc_e += n * std::max(tail_p, 0.0);
    if (acc_e > 0 || acc_o > 0) {
        if (!expected.empty() && acc_e < 5.0) {
            expected.back() += acc_e;
            observed.back() += acc_o;
        } else {
            expected.push_back(acc_e);
            observed.push_back(acc_o);
        }
    }
    if (expected.size() < 2) return 1.0;

    double chi2 = 0;
    for (size_t i = 0; i < expected.size(); ++i) {
        const double d = observed[i] - expected[i];
        chi2 += d * d / expected[i];
    }
    return chi2_sf(chi2, int(expected.size()) - 1);
}

double ks2_pvalue(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks2: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        // step over tied runs together (counts are discrete)
        if (a[i] < b[j]) {
            const double v = a[i];
            while (i < a.size() && a[i] == v) ++i;
        } else if (b[j] < a[i]) {
            const double v = b[j];
            while (j < b.size() && b[j] == v) ++j;
        } else {
            const double v = a[i];
            while (i < a.size() && a[i] == v) ++i;
            while (j < b.size() && b[j] == v) ++j;
        }
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    const double ne = double(a.size()) * double(b.size()) / double(a.size() + b.size());
    const double lam = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    double p = 0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * lam * lam);
        p += term;
        if (std::abs(term) < 1e-12) break;
    }
    return std::clamp(p, 0.0, 1.0);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace snvsim
