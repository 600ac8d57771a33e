#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace msle {

double normal_cdf(double x);

// Kolmogorov-Smirnov distance between the empirical CDF of `samples` and the
// model CDF. Sorts a copy of the samples.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

// Two-sample KS distance.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

struct Summary {
    std::size_t count = 0;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;

    void add(double x);
    static Summary of(const std::vector<double>& xs);
};

double sample_mean(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs); // unbiased

// Standard error of a Bernoulli frequency estimate p_hat over n trials.
double frequency_se(double p_hat, std::size_t n);

// Least-squares slope of y against x.
double regression_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace msle
