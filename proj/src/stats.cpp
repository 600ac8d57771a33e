#include "msle/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "msle/errors.hpp"

namespace msle {

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw EmptySet("KS distance of an empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
        d = std::max(d, std::abs(static_cast<double>(i) / n - f));
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw EmptySet("KS distance of an empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

void Summary::add(double x) {
    if (count == 0) {
        min = max = x;
        mean = x;
    } else {
        min = std::min(min, x);
        max = std::max(max, x);
        mean += (x - mean) / static_cast<double>(count + 1);
    }
    ++count;
}

Summary Summary::of(const std::vector<double>& xs) {
    Summary s;
    // index-ordered accumulation keeps the result independent of threading
    for (double x : xs) s.add(x);
    return s;
}

double sample_mean(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = sample_mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

double frequency_se(double p_hat, std::size_t n) {
    if (n == 0) return std::numeric_limits<double>::infinity();
    return std::sqrt(std::max(p_hat * (1.0 - p_hat), 0.0) / static_cast<double>(n));
}

double regression_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double mx = sample_mean(x);
    const double my = sample_mean(y);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    return num / den;
}

} // namespace msle
