#pragma once

#include <vector>

#include <Eigen/Core>

namespace psqr {

double normal_pdf(double z);
double normal_cdf(double z);

// Inverse standard normal CDF: rational approximation refined by one Halley
// step against erfc, absolute error well below 1e-8.
double normal_quantile(double p);

// Linear-interpolation sample quantile (the common "type 7" rule).
double sample_quantile(std::vector<double> v, double p);
double interquartile_range(const std::vector<double>& v);
double interquartile_range(const Eigen::VectorXd& v);

double mean(const Eigen::VectorXd& v);
double stddev(const Eigen::VectorXd& v);

// Kolmogorov-Smirnov distance between the sample and N(0,1).
double ks_to_standard_normal(std::vector<double> sample);

// Gaussian kernel density estimate of the sample at the grid points.
Eigen::VectorXd gaussian_kde(const Eigen::VectorXd& sample, double bandwidth,
                             const Eigen::VectorXd& grid);

}  // namespace psqr
