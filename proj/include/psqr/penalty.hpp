#pragma once

#include <Eigen/Core>

#include "psqr/types.hpp"

namespace psqr {

// m-th order difference operator on coefficient vectors of length dim,
// together with its Gram form D_m^T D_m used by the roughness penalty.
struct PenaltyOperator {
    int order = 0;
    int dim = 0;
    Eigen::MatrixXd matrix;  // (dim-order) x dim, alternating binomial band
    Eigen::MatrixXd gram;    // dim x dim, symmetric PSD, semibandwidth = order
};

// D_m as the m-fold composition of first differences; entries assembled in
// integer arithmetic and cast to double.
PenaltyOperator difference_matrix(int order, int dim);

// (lambda/2) * coef^T D_m^T D_m coef
double penalty_value(const PenaltyOperator& op, const Eigen::VectorXd& coef, double lambda);

}  // namespace psqr
