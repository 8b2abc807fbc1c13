#pragma once

#include <memory>
#include <string>

#include <Eigen/Core>

#include "psqr/basis.hpp"
#include "psqr/density.hpp"
#include "psqr/penalty.hpp"
#include "psqr/solver.hpp"
#include "psqr/types.hpp"

namespace psqr {

struct InferenceReport {
    Eigen::VectorXd grid;
    Eigen::VectorXd eta_hat;
    Eigen::VectorXd b_a_hat;
    Eigen::VectorXd b_lambda_hat;
    Eigen::VectorXd phi_hat;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    Eigen::VectorXd lower_uncorrected;
    Eigen::VectorXd upper_uncorrected;
    double alpha_level = 0.05;

    // columns: x, eta_hat, b_a_hat, b_lambda_hat, phi_hat, lower, upper;
    // unevaluable points serialize as empty fields
    std::string to_csv() const;
};

// Plug-in machinery shared across grid points: the density-weighted normal
// matrix is factorized once, the pilot fit for the approximation bias is
// computed once. A negative pilot_lambda skips the pilot fit, leaving only
// variance and shrinkage_bias available.
class InferenceEngine {
public:
    InferenceEngine(const QuantileFit& fit, const DesignMatrix& Z, const PenaltyOperator* penalty,
                    double lambda, const ConditionalDensityEstimate& density,
                    double pilot_lambda, const IRLSConfig& cfg = {});
    ~InferenceEngine();
    InferenceEngine(InferenceEngine&&) noexcept;

    double variance(double x) const;        // Phi-hat, >= 0
    double shrinkage_bias(double x) const;  // b-hat^lambda
    double approx_bias(double x) const;     // b-hat^a via the pilot fit

    const QuantileFit& pilot_fit() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// tau(1-tau) B(x)' (Z'RZ + lambda D'D)^{-1} Z'Z (Z'RZ + lambda D'D)^{-1} B(x)
// with R the floored conditional-density diagonal.
double variance_estimate(const QuantileFit& fit, const DesignMatrix& Z,
                         const PenaltyOperator* penalty, double lambda,
                         const ConditionalDensityEstimate& density, double x);

// -lambda B(x)' (Z'RZ + lambda D'D)^{-1} D'D b-hat
double shrinkage_bias_estimate(const QuantileFit& fit, const DesignMatrix& Z,
                               const PenaltyOperator* penalty, double lambda,
                               const ConditionalDensityEstimate& density, double x);

// bias of representing the curve in the degree-p spline space, from a supplied
// (p+1)-th derivative value at x
double approx_bias_from_derivative(double deriv_value, int degree, int interior_count, double x);

// same, with the derivative taken from a degree-(p+2) pilot fit
double approx_bias_estimate(const Dataset& data, double tau, const BasisSpec& spec, double x,
                            double pilot_lambda, int penalty_order, const IRLSConfig& cfg = {});

InferenceReport confidence_band(const QuantileFit& fit, const DesignMatrix& Z,
                                const PenaltyOperator* penalty, double lambda,
                                const ConditionalDensityEstimate& density,
                                const Eigen::VectorXd& grid, double alpha_level,
                                double pilot_lambda, const IRLSConfig& cfg = {});

}  // namespace psqr
