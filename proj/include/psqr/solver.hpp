#pragma once

#include <vector>

#include <Eigen/Core>

#include "psqr/basis.hpp"
#include "psqr/penalty.hpp"
#include "psqr/types.hpp"

namespace psqr {

// rho_tau(u) = u * (tau - 1{u<0})
double check_loss(double u, double tau);
// psi_tau(u) = tau - 1{u<0}, the subgradient selection used throughout
double check_subgradient(double u, double tau);

enum class WeightMode {
    capped,          // psi/(2r) outside [-alpha, alpha], continuous cap inside
    paper_verbatim,  // the printed three-branch formula, kept for fidelity runs
};

enum class InitMode { penalized_least_squares, given };

struct IRLSConfig {
    // smoothing radius for the weights; <= 0 selects 1e-4 x IQR(y)
    double alpha = 0.0;
    // sup-norm coefficient change declaring convergence
    double tol = 1e-8;
    int max_iter = 200;
    WeightMode weight_mode = WeightMode::capped;
    InitMode init = InitMode::penalized_least_squares;
    Eigen::VectorXd init_coef;  // used when init == given
    // refine the IRLS solution by shrinking alpha and then exact
    // coordinate-wise minimization of the true objective
    bool polish = true;
};

double irls_weight_single(double r, double tau, double alpha, WeightMode mode);
Eigen::VectorXd irls_weights(const Eigen::VectorXd& residuals, double tau,
                             const IRLSConfig& cfg);

struct QuantileFit {
    BasisSpec spec;
    Eigen::VectorXd coef;
    double tau = 0.5;
    double lambda = 0.0;
    int penalty_order = 0;  // 0 when fitted without a penalty operator
    int iterations = 0;
    bool converged = false;
    Eigen::VectorXd final_weights;  // IRLS weights at the returned coef
    double objective = 0.0;
    double alpha = 0.0;  // resolved smoothing radius
    // penalized objective of the accepted iterate, one entry per IRLS step
    std::vector<double> objective_trace;

    double value(double x) const { return spline_value(spec, coef, x); }
};

// Minimizes sum_i rho_tau(y_i - B(x_i)^T b) + (lambda/2) b^T D_m^T D_m b by
// iteratively reweighted ridge solves on the banded normal equations,
// followed (by default) by an exact coordinate-descent polish. penalty may
// be null only when lambda == 0.
QuantileFit fit_penalized_quantile(const Dataset& data, double tau, const BasisSpec& spec,
                                   const PenaltyOperator* penalty, double lambda,
                                   const IRLSConfig& cfg = {});

// Closed-form penalized least squares b = (Z^T Z + mu D_m^T D_m)^{-1} Z^T y.
Eigen::VectorXd fit_penalized_mean(const Dataset& data, const BasisSpec& spec,
                                   const PenaltyOperator* penalty, double mu);

struct LocalLinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    bool converged = false;
    double alpha = 0.0;  // resolved smoothing radius
    // (X^T Omega X)^{-1}(0,0) at convergence, with Omega the combined
    // kernel and IRLS weights; used by bandwidth selection
    double inv00 = 0.0;
};

// Local linear check-loss fit at x0 with Gaussian kernel weights
// exp(-((x_i-x0)/h)^2 / 2).
LocalLinearFit fit_local_linear_quantile_full(const Dataset& data, double tau, double x0,
                                              double h, const IRLSConfig& cfg = {});

// Convenience: the fitted value a-hat at x0.
double fit_local_linear_quantile(const Dataset& data, double tau, double x0, double h,
                                 const IRLSConfig& cfg = {});

}  // namespace psqr
