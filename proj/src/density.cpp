#include "psqr/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "psqr/stats.hpp"

namespace psqr {

namespace {

constexpr double kCutoff = 10.0;  // kernel argument beyond which terms are dropped

double phi4(double u) {
    const double u2 = u * u;
    return ((u2 - 6.0) * u2 + 3.0) * normal_pdf(u);
}

double phi6(double u) {
    const double u2 = u * u;
    return (((u2 - 15.0) * u2 + 45.0) * u2 - 15.0) * normal_pdf(u);
}

// Unordered-pair counts by binned lag, the standard binning device for the
// solve-the-equation sums: cnt[k] = #{i<j : |bin_i - bin_j| = k}.
struct BinnedPairs {
    double width = 0.0;
    std::vector<double> cnt;
};

BinnedPairs bin_pairs(const std::vector<double>& xs, int nbins) {
    const double lo = xs.front();
    const double hi = xs.back();
    BinnedPairs bp;
    bp.width = (hi - lo) * 1.01 / nbins;
    std::vector<double> hist(static_cast<size_t>(nbins), 0.0);
    for (double x : xs) {
        int b = static_cast<int>((x - lo) / bp.width);
        if (b >= nbins) b = nbins - 1;
        hist[static_cast<size_t>(b)] += 1.0;
    }
    bp.cnt.assign(static_cast<size_t>(nbins), 0.0);
    for (int k = 0; k < nbins; ++k) {
        double s = 0.0;
        for (int b = 0; b + k < nbins; ++b) s += hist[static_cast<size_t>(b)] * hist[static_cast<size_t>(b + k)];
        bp.cnt[static_cast<size_t>(k)] = (k == 0) ? 0.5 * (s - static_cast<double>(xs.size())) : s;
    }
    return bp;
}

// sum over all pairs i != j of g(|x_i - x_j|/h) plus the n diagonal terms
template <typename F>
double pair_sum(const BinnedPairs& bp, double n, double h, F g) {
    double s = 0.0;
    for (size_t k = 0; k < bp.cnt.size(); ++k) {
        const double u = static_cast<double>(k) * bp.width / h;
        if (u > kCutoff) break;
        if (bp.cnt[k] != 0.0) s += bp.cnt[k] * g(u);
    }
    return 2.0 * s + n * g(0.0);
}

}  // namespace

double sj_bandwidth(const Eigen::VectorXd& sample) {
    const int n = static_cast<int>(sample.size());
    if (n < 10) throw std::invalid_argument("sj_bandwidth: need at least 10 observations");

    std::vector<double> xs(sample.data(), sample.data() + n);
    std::sort(xs.begin(), xs.end());

    const double sd = stddev(sample);
    const double iqr = interquartile_range(sample);
    double scale = (iqr > 0.0) ? std::min(sd, iqr / 1.349) : sd;
    if (!(scale > 0.0)) throw std::invalid_argument("sj_bandwidth: degenerate (zero-spread) sample");

    const BinnedPairs bp = bin_pairs(xs, 1000);
    const double nn = static_cast<double>(n);
    const double a = 0.920 * scale * std::pow(nn, -1.0 / 7.0);
    const double b = 0.912 * scale * std::pow(nn, -1.0 / 9.0);

    const double sda = pair_sum(bp, nn, a, phi4) / (nn * (nn - 1.0) * std::pow(a, 5.0));
    const double tdb = -pair_sum(bp, nn, b, phi6) / (nn * (nn - 1.0) * std::pow(b, 7.0));
    if (!(sda > 0.0) || !(tdb > 0.0))
        throw std::invalid_argument("sj_bandwidth: sample too sparse for the plug-in equations");

    const double rk = 1.0 / (2.0 * std::sqrt(M_PI));
    const double ratio = std::pow(sda / tdb, 1.0 / 7.0);

    auto fixed_point_gap = [&](double h) {
        const double alpha2 = 1.357 * ratio * std::pow(h, 5.0 / 7.0);
        const double sd_h =
            pair_sum(bp, nn, alpha2, phi4) / (nn * (nn - 1.0) * std::pow(alpha2, 5.0));
        if (!(sd_h > 0.0)) return -h;  // treat as oversmoothed
        return std::pow(rk / (nn * sd_h), 0.2) - h;
    };

    const double h0 = 1.06 * scale * std::pow(nn, -0.2);
    double lo = 0.05 * h0, hi = 2.0 * h0;
    int guard = 0;
    while (fixed_point_gap(hi) > 0.0 && guard++ < 20) hi *= 2.0;
    guard = 0;
    while (fixed_point_gap(lo) < 0.0 && guard++ < 20) lo *= 0.5;
    if (fixed_point_gap(lo) < 0.0 || fixed_point_gap(hi) > 0.0)
        throw std::invalid_argument("sj_bandwidth: no solution bracketed");

    for (int it = 0; it < 48; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (fixed_point_gap(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

ConditionalDensityEstimate::ConditionalDensityEstimate(Dataset sample, double x_bandwidth,
                                                       double y_bandwidth)
    : data_(std::move(sample)), hx_(x_bandwidth), hy_(y_bandwidth) {
    if (!(hx_ > 0.0) || !(hy_ > 0.0))
        throw std::invalid_argument("ConditionalDensityEstimate: bandwidths must be > 0");
    if (data_.size() < 1)
        throw std::invalid_argument("ConditionalDensityEstimate: empty sample");
    std::vector<int> order(static_cast<size_t>(data_.size()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return data_.x[a] < data_.x[b]; });
    xs_.reserve(order.size());
    ys_.reserve(order.size());
    for (int i : order) {
        xs_.push_back(data_.x[i]);
        ys_.push_back(data_.y[i]);
    }
}

double ConditionalDensityEstimate::operator()(double x, double y) const {
    const double lox = x - kCutoff * hx_;
    const double hix = x + kCutoff * hx_;
    const auto begin = std::lower_bound(xs_.begin(), xs_.end(), lox);
    const auto end = std::upper_bound(xs_.begin(), xs_.end(), hix);
    double num = 0.0, den = 0.0;
    for (auto it = begin; it != end; ++it) {
        const size_t i = static_cast<size_t>(it - xs_.begin());
        const double kx = normal_pdf((xs_[i] - x) / hx_);
        den += kx;
        num += kx * normal_pdf((ys_[i] - y) / hy_);
    }
    if (!(den > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return num / (den * hy_);
}

ConditionalDensityEstimate make_conditional_density(const Dataset& data,
                                                    const Eigen::VectorXd& residuals) {
    if (residuals.size() != data.size())
        throw std::invalid_argument("make_conditional_density: residual length mismatch");
    return ConditionalDensityEstimate(data, sj_bandwidth(data.x), sj_bandwidth(residuals));
}

double conditional_density(const ConditionalDensityEstimate& est, double x, double y) {
    return est(x, y);
}

}  // namespace psqr
