#include "psqr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace psqr {

namespace {
constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kSqrt2Pi = 2.5066282746310005024;
}  // namespace

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / kSqrt2Pi; }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("normal_quantile: p must lie in (0,1)");

    // Acklam's rational approximation
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;

    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // one Halley refinement against the exact CDF
    const double e = normal_cdf(x) - p;
    const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

double sample_quantile(std::vector<double> v, double p) {
    if (v.empty()) throw std::invalid_argument("sample_quantile: empty sample");
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("sample_quantile: p must lie in [0,1]");
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * p;
    const size_t lo = static_cast<size_t>(std::floor(h));
    const size_t hi = std::min(lo + 1, v.size() - 1);
    const double w = h - static_cast<double>(lo);
    return (1.0 - w) * v[lo] + w * v[hi];
}

double interquartile_range(const std::vector<double>& v) {
    return sample_quantile(v, 0.75) - sample_quantile(v, 0.25);
}

double interquartile_range(const Eigen::VectorXd& v) {
    return interquartile_range(std::vector<double>(v.data(), v.data() + v.size()));
}

double mean(const Eigen::VectorXd& v) {
    if (v.size() == 0) throw std::invalid_argument("mean: empty sample");
    return v.mean();
}

double stddev(const Eigen::VectorXd& v) {
    const int n = static_cast<int>(v.size());
    if (n < 2) throw std::invalid_argument("stddev: need at least 2 points");
    const double m = v.mean();
    return std::sqrt((v.array() - m).square().sum() / (n - 1));
}

double ks_to_standard_normal(std::vector<double> sample) {
    if (sample.empty()) throw std::invalid_argument("ks_to_standard_normal: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (size_t i = 0; i < sample.size(); ++i) {
        const double f = normal_cdf(sample[i]);
        const double up = (static_cast<double>(i) + 1.0) / n - f;
        const double lo = f - static_cast<double>(i) / n;
        d = std::max(d, std::max(up, lo));
    }
    return d;
}

Eigen::VectorXd gaussian_kde(const Eigen::VectorXd& sample, double bandwidth,
                             const Eigen::VectorXd& grid) {
    if (sample.size() == 0) throw std::invalid_argument("gaussian_kde: empty sample");
    if (!(bandwidth > 0.0)) throw std::invalid_argument("gaussian_kde: bandwidth must be > 0");
    Eigen::VectorXd out(grid.size());
    const double inv = 1.0 / (static_cast<double>(sample.size()) * bandwidth);
    for (int g = 0; g < grid.size(); ++g) {
        double s = 0.0;
        for (int i = 0; i < sample.size(); ++i) s += normal_pdf((sample[i] - grid[g]) / bandwidth);
        out[g] = s * inv;
    }
    return out;
}

}  // namespace psqr
