#pragma once

#include <vector>

#include <Eigen/Core>

#include "psqr/basis.hpp"
#include "psqr/penalty.hpp"
#include "psqr/solver.hpp"
#include "psqr/types.hpp"

namespace psqr {

// trace of the weighted hat operator Z (Z^T W Z + lambda D'D)^{-1} Z^T W at
// the converged IRLS weights; lies in [order, K+p].
double effective_df(const QuantileFit& fit, const DesignMatrix& Z, const PenaltyOperator* penalty,
                    double lambda);

// df of the mean-fit smoother Z (Z^T Z + mu D'D)^{-1} Z^T.
double effective_df_mean(const DesignMatrix& Z, const PenaltyOperator* penalty, double mu);

// sum_i rho_tau(y_i - eta(x_i)) / (n - df) for an already computed fit
double gacv_from_fit(const Dataset& data, const QuantileFit& fit, const DesignMatrix& Z,
                     const PenaltyOperator* penalty, double lambda);

// fits at the given (spec, lambda) and scores it
double gacv_score(const Dataset& data, double tau, const BasisSpec& spec,
                  const PenaltyOperator* penalty, double lambda, const IRLSConfig& cfg = {});

// n * RSS / (n - df)^2 for the penalized mean fit
double gcv_score(const Dataset& data, const BasisSpec& spec, const PenaltyOperator* penalty,
                 double mu);

struct SelectionGrid {
    std::vector<int> K_values;
    std::vector<double> lambda_values;
    Eigen::MatrixXd scores;  // K x lambda; NaN marks excluded cells
    int best_K = 0;
    double best_lambda = 0.0;
    double best_score = 0.0;
    int best_K_index = -1;
    int best_lambda_index = -1;
};

// GACV sweep over (K, lambda); failed cells are excluded, ties break toward
// smaller K then smaller lambda. Sweep fits skip the polish stage and warm
// start across lambda within each K column.
SelectionGrid select_model(const Dataset& data, double tau, const std::vector<int>& K_values,
                           const std::vector<double>& lambda_values, int degree,
                           int penalty_order, const IRLSConfig& cfg = {});

// Refit of the selected cell at full accuracy.
QuantileFit fit_selected(const Dataset& data, double tau, const SelectionGrid& grid, int degree,
                         int penalty_order, const IRLSConfig& cfg = {});

// GACV bandwidth choice for the local linear quantile estimator.
struct BandwidthSelection {
    std::vector<double> h_values;
    std::vector<double> scores;
    double best_h = 0.0;
    int best_index = -1;
};
BandwidthSelection select_local_linear_bandwidth(const Dataset& data, double tau,
                                                 const std::vector<double>& h_values,
                                                 const IRLSConfig& cfg = {});

// GCV sweep for the mean-fit smoothing parameter.
double select_mean_mu(const Dataset& data, const BasisSpec& spec, const PenaltyOperator* penalty,
                      const std::vector<double>& mu_values);

std::vector<int> default_knot_grid();         // {5, 10, 20, 40}
std::vector<double> default_lambda_grid();    // 30 log-spaced in [1e-6, 1e3]
std::vector<double> default_bandwidth_grid();  // 8 log-spaced in [0.02, 0.5]

}  // namespace psqr
