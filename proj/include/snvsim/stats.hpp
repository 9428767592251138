#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace snvsim {

struct CenterStats {
    double std_mhz = 0.0;
    double stderr_of_std_mhz = 0.0;  // std / sqrt(2 (n-1)), normal approximation
    double mean_mhz = 0.0;
    std::size_t n = 0;
};

// Sample standard deviation of fitted line centers with its standard error.
// Requires n >= 3; permutation invariant.
CenterStats center_statistics(const std::vector<double>& centers_mhz);

struct Hist2d {
    double x_lo = 0, bin = 1;
    std::vector<std::vector<std::int64_t>> counts;  // [ix][iy]
};

struct CorrelationMetrics {
    std::optional<double> pearson_r;  // empty when a margin has zero variance
    Hist2d hist;
    // conditional histograms of the second count given first >=/< threshold
    std::map<std::int64_t, std::int64_t> cond_above;
    std::map<std::int64_t, std::int64_t> cond_below;
    std::int64_t threshold = 0;
};

CorrelationMetrics correlation_metrics(const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs,
                                       std::int64_t threshold, double hist_bin = 5.0);

// P(first count >= theta) for each theta on a grid; non-increasing by construction.
std::vector<std::pair<std::int64_t, double>> pass_probability_curve(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs, std::int64_t theta_max);

double mean_of(const std::vector<double>& xs);
double variance_of(const std::vector<double>& xs);  // unbiased
double fano_factor(const std::vector<std::int64_t>& counts);

// regularized incomplete gamma P(a, x) and chi-square survival function
double gamma_p(double a, double x);
double chi2_sf(double chi2, int dof);

// Pearson chi-square goodness of fit of integer samples against the exact
// Poisson pmf (bins with small expectation pooled); returns the p-value.
double poisson_gof_pvalue(const std::vector<std::int64_t>& samples, double mean);

// two-sample Kolmogorov-Smirnov p-value (asymptotic)
double ks2_pvalue(std::vector<double> a, std::vector<double> b);

double normal_cdf(double z);

}  // namespace snvsim
