#pragma once

#include <Eigen/Core>

#include "psqr/types.hpp"

namespace psqr {

// Symmetric band matrix in lower storage: stor(r, j) = A(j+r, j) for
// 0 <= r <= bandwidth. Supports in-place Cholesky factorization and
// triangular solves; assembled once per IRLS step by the solvers.
class BandSym {
public:
    BandSym(int dim, int bandwidth);

    int dim() const { return dim_; }
    int bandwidth() const { return bw_; }

    void clear();

    // i, j with |i-j| <= bandwidth; symmetric access
    double& entry(int i, int j);
    double entry(int i, int j) const;
    void add(int i, int j, double v) { entry(i, j) += v; }

    // adds s * A over the band; A is assumed banded within bandwidth
    void add_scaled(const Eigen::MatrixXd& a, double s);

    Eigen::MatrixXd dense() const;

    // Banded Cholesky A = L L^T in place. Returns false when a pivot drops
    // below pivot_rel times the largest original diagonal entry.
    bool factorize(double pivot_rel = 1e-13);

    // Solve A x = b using the factorization (throws if not factorized).
    Eigen::VectorXd solve(Eigen::VectorXd b) const;

    bool factorized() const { return factored_; }

private:
    int dim_;
    int bw_;
    bool factored_ = false;
    Eigen::MatrixXd stor_;  // (bw+1) x dim
};

}  // namespace psqr
