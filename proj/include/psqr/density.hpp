#pragma once

#include <vector>

#include <Eigen/Core>

#include "psqr/types.hpp"

namespace psqr {

// Sheather-Jones solve-the-equation plug-in bandwidth for a Gaussian kernel.
// Requires n >= 10 and positive spread.
double sj_bandwidth(const Eigen::VectorXd& sample);

// Nadaraya-Watson style conditional density
//   f(y|x) = sum_i K_hx(x_i - x) K_hy(y_i - y) / sum_i K_hx(x_i - x)
// with Gaussian kernels. Immutable after construction.
class ConditionalDensityEstimate {
public:
    ConditionalDensityEstimate(Dataset sample, double x_bandwidth, double y_bandwidth);

    double x_bandwidth() const { return hx_; }
    double y_bandwidth() const { return hy_; }
    const Dataset& sample() const { return data_; }

    // NaN when the x-window carries no kernel mass (unevaluable point)
    double operator()(double x, double y) const;

private:
    Dataset data_;
    double hx_, hy_;
    std::vector<double> xs_;  // x sorted ascending
    std::vector<double> ys_;  // y in the same order
};

// x-bandwidth from the x sample, y-bandwidth from the residual sample.
ConditionalDensityEstimate make_conditional_density(const Dataset& data,
                                                    const Eigen::VectorXd& residuals);

double conditional_density(const ConditionalDensityEstimate& est, double x, double y);

}  // namespace psqr
