#include "psqr/band.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace psqr {

BandSym::BandSym(int dim, int bandwidth) : dim_(dim), bw_(bandwidth) {
    if (dim < 1) throw std::invalid_argument("BandSym: dim must be >= 1");
    if (bandwidth < 0 || bandwidth >= dim)
        bw_ = std::max(0, std::min(bandwidth, dim - 1));
    stor_ = Eigen::MatrixXd::Zero(bw_ + 1, dim_);
}

void BandSym::clear() {
    stor_.setZero();
    factored_ = false;
}

double& BandSym::entry(int i, int j) {
    if (j > i) std::swap(i, j);
    return stor_(i - j, j);
}

double BandSym::entry(int i, int j) const {
    if (j > i) std::swap(i, j);
    return stor_(i - j, j);
}

void BandSym::add_scaled(const Eigen::MatrixXd& a, double s) {
    for (int j = 0; j < dim_; ++j)
        for (int r = 0; r <= bw_ && j + r < dim_; ++r) stor_(r, j) += s * a(j + r, j);
}

Eigen::MatrixXd BandSym::dense() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim_, dim_);
    for (int j = 0; j < dim_; ++j)
        for (int r = 0; r <= bw_ && j + r < dim_; ++r) {
            a(j + r, j) = stor_(r, j);
            a(j, j + r) = stor_(r, j);
        }
    return a;
}

bool BandSym::factorize(double pivot_rel) {
    double max_diag = 0.0;
    for (int j = 0; j < dim_; ++j) max_diag = std::max(max_diag, std::abs(stor_(0, j)));
    const double floor = pivot_rel * std::max(max_diag, 1e-300);

    for (int j = 0; j < dim_; ++j) {
        double d = stor_(0, j);
        const int kmin = std::max(0, j - bw_);
        for (int k = kmin; k < j; ++k) {
            const double l = stor_(j - k, k);
            d -= l * l;
        }
        if (!(d > floor)) {
            factored_ = false;
            return false;
        }
        const double ljj = std::sqrt(d);
        stor_(0, j) = ljj;
        const int imax = std::min(dim_ - 1, j + bw_);
        for (int i = j + 1; i <= imax; ++i) {
            double v = stor_(i - j, j);
            const int k0 = std::max(0, i - bw_);
            for (int k = std::max(kmin, k0); k < j; ++k) v -= stor_(i - k, k) * stor_(j - k, k);
            stor_(i - j, j) = v / ljj;
        }
    }
    factored_ = true;
    return true;
}

Eigen::VectorXd BandSym::solve(Eigen::VectorXd b) const {
    if (!factored_) throw std::logic_error("BandSym::solve: factorize first");
    if (b.size() != dim_) throw std::invalid_argument("BandSym::solve: size mismatch");
    // forward: L y = b
    for (int j = 0; j < dim_; ++j) {
        double v = b[j];
        const int kmin = std::max(0, j - bw_);
        for (int k = kmin; k < j; ++k) v -= stor_(j - k, k) * b[k];
        b[j] = v / stor_(0, j);
    }
    // backward: L^T x = y
    for (int j = dim_ - 1; j >= 0; --j) {
        double v = b[j];
        const int imax = std::min(dim_ - 1, j + bw_);
        for (int i = j + 1; i <= imax; ++i) v -= stor_(i - j, j) * b[i];
        b[j] = v / stor_(0, j);
    }
    return b;
}

}  // namespace psqr
