#include "psqr/penalty.hpp"

#include <stdexcept>

namespace psqr {

PenaltyOperator difference_matrix(int order, int dim) {
    if (order < 1) throw std::invalid_argument("difference_matrix: order must be >= 1");
    if (order >= dim) throw std::invalid_argument("difference_matrix: order must be < dim");

    using IntMat = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;
    IntMat D = IntMat::Identity(dim, dim);
    for (int m = 0; m < order; ++m) {
        const int r = static_cast<int>(D.rows()) - 1;
        IntMat step = IntMat::Zero(r, D.rows());
        for (int i = 0; i < r; ++i) {
            step(i, i) = -1;
            step(i, i + 1) = 1;
        }
        D = (step * D).eval();
    }
    IntMat G = D.transpose() * D;

    PenaltyOperator op;
    op.order = order;
    op.dim = dim;
    op.matrix = D.cast<double>();
    op.gram = G.cast<double>();
    return op;
}

double penalty_value(const PenaltyOperator& op, const Eigen::VectorXd& coef, double lambda) {
    if (coef.size() != op.dim)
        throw std::invalid_argument("penalty_value: coefficient length must equal dim");
    if (lambda < 0.0) throw std::invalid_argument("penalty_value: lambda must be >= 0");
    if (lambda == 0.0) return 0.0;
    return 0.5 * lambda * coef.dot(op.gram * coef);
}

}  // namespace psqr
