#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "psqr/types.hpp"

namespace psqr {

// Equidistant B-spline space on [0,1]: degree p, K interior intervals,
// knots at k/K for k = -p, ..., K+p. The model basis consists of the K+p
// functions B_{-p+1}, ..., B_K; coefficient vectors index them 0-based,
// so slot g corresponds to B_{g-p+1}.
class BasisSpec {
public:
    BasisSpec() : BasisSpec(0, 1) {}  // the trivial one-bin space
    BasisSpec(int degree, int interior_count);

    int degree() const { return degree_; }
    int interior_count() const { return interior_count_; }
    int dim() const { return interior_count_ + degree_; }

    // knot position for index k in [-p, K+p]
    double knot(int k) const { return knots_[static_cast<size_t>(k + degree_)]; }
    const std::vector<double>& knots() const { return knots_; }

    // 1-based index of the interval (kappa_{j-1}, kappa_j] containing x;
    // the first interval is closed at 0 so that x=0 belongs to interval 1.
    int interval_index(double x) const;

private:
    int degree_;
    int interior_count_;
    std::vector<double> knots_;
};

BasisSpec build_basis(int degree, int interior_count);

// The degree+1 basis values that can be nonzero at x, starting at
// coefficient slot `first`.
struct LocalBasis {
    int first = 0;
    int count = 0;
    std::array<double, 12> values{};
};

LocalBasis eval_basis_local(const BasisSpec& spec, double x);

// Full vector (B_{-p+1}(x), ..., B_K(x)); x must lie in [0,1].
Eigen::VectorXd eval_basis(const BasisSpec& spec, double x);

// Value of the spline with the given coefficients at x, or its
// deriv_order-th derivative (0 <= deriv_order <= degree). Derivatives use
// the lower-degree basis of the same knot grid together with iterated
// coefficient differences scaled by K per order.
double spline_value(const BasisSpec& spec, const Eigen::VectorXd& coef, double x,
                    int deriv_order = 0);

// Bernoulli polynomial Br_n(x): Br_0 = 1, Br_n' = n Br_{n-1}, int_0^1 Br_n = 0.
double bernoulli_poly(int degree, double x);

// Row-compressed design matrix Z[i,g] = B_{g-p+1}(x_i). Each row has
// band = degree+1 stored entries beginning at column first[i].
struct DesignMatrix {
    int rows = 0;
    int cols = 0;
    int band = 0;
    std::vector<int> first;
    Eigen::MatrixXd values;  // rows x band

    Eigen::MatrixXd dense() const;
    Eigen::VectorXd multiply(const Eigen::VectorXd& coef) const;
    double row_value(int i, const Eigen::VectorXd& coef) const;
};

DesignMatrix design_matrix(const BasisSpec& spec, const Eigen::VectorXd& x);

}  // namespace psqr
