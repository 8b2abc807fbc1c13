#include "psqr/basis.hpp"

#include <cmath>
#include <stdexcept>

namespace psqr {

namespace {
constexpr int kMaxDegree = 10;  // recursion is exact; higher degrees are unused

void check_unit_interval(double x) {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("basis: x must lie in [0,1]");
}
}  // namespace

BasisSpec::BasisSpec(int degree, int interior_count)
    : degree_(degree), interior_count_(interior_count) {
    if (degree < 0 || degree > kMaxDegree)
        throw std::invalid_argument("BasisSpec: degree must be in [0,10]");
    if (interior_count < 1)
        throw std::invalid_argument("BasisSpec: interior knot count must be >= 1");
    // kappa_k = k/K for k = -p..K+p, computed once from the integer index
    knots_.resize(static_cast<size_t>(interior_count + 2 * degree + 1));
    for (int k = -degree; k <= interior_count + degree; ++k)
        knots_[static_cast<size_t>(k + degree)] =
            static_cast<double>(k) / static_cast<double>(interior_count);
}

int BasisSpec::interval_index(double x) const {
    check_unit_interval(x);
    if (x <= 0.0) return 1;
    int j = static_cast<int>(std::ceil(x * interior_count_));
    if (j < 1) j = 1;
    if (j > interior_count_) j = interior_count_;
    return j;
}

BasisSpec build_basis(int degree, int interior_count) {
    return BasisSpec(degree, interior_count);
}

LocalBasis eval_basis_local(const BasisSpec& spec, double x) {
    check_unit_interval(x);
    const int p = spec.degree();
    const int j = spec.interval_index(x);

    // de Boor triangle over the active window: after stage q the slots
    // r = 0..q hold B_{j-q+r}^[q](x).
    LocalBasis out;
    out.first = j - 1;
    out.count = p + 1;
    std::array<double, 12>& N = out.values;
    N[0] = 1.0;
    for (int q = 1; q <= p; ++q) {
        for (int r = q; r >= 0; --r) {
            const int k = j - q + r;
            double acc = 0.0;
            if (r > 0) {
                const double den = spec.knot(k + q - 1) - spec.knot(k - 1);
                acc += (x - spec.knot(k - 1)) / den * N[static_cast<size_t>(r - 1)];
            }
            if (r < q) {
                const double den = spec.knot(k + q) - spec.knot(k);
                acc += (spec.knot(k + q) - x) / den * N[static_cast<size_t>(r)];
            }
            N[static_cast<size_t>(r)] = acc;
        }
    }
    return out;
}

Eigen::VectorXd eval_basis(const BasisSpec& spec, double x) {
    const LocalBasis lb = eval_basis_local(spec, x);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(spec.dim());
    for (int r = 0; r < lb.count; ++r) b[lb.first + r] = lb.values[static_cast<size_t>(r)];
    return b;
}

double spline_value(const BasisSpec& spec, const Eigen::VectorXd& coef, double x,
                    int deriv_order) {
    const int p = spec.degree();
    const int K = spec.interior_count();
    if (coef.size() != spec.dim())
        throw std::invalid_argument("spline_value: coefficient length must equal K+p");
    if (deriv_order < 0 || deriv_order > p)
        throw std::invalid_argument("spline_value: derivative order must be in [0, degree]");
    check_unit_interval(x);

    Eigen::VectorXd c = coef;
    for (int m = 0; m < deriv_order; ++m) {
        Eigen::VectorXd next(c.size() - 1);
        for (int i = 0; i + 1 < c.size(); ++i) next[i] = (c[i + 1] - c[i]) * K;
        c.swap(next);
    }

    const BasisSpec low = (deriv_order == 0) ? spec : BasisSpec(p - deriv_order, K);
    const LocalBasis lb = eval_basis_local(low, x);
    double v = 0.0;
    for (int r = 0; r < lb.count; ++r) v += lb.values[static_cast<size_t>(r)] * c[lb.first + r];
    return v;
}

double bernoulli_poly(int degree, double x) {
    if (degree < 0) throw std::invalid_argument("bernoulli_poly: degree must be >= 0");
    // Build ascending coefficients through integration of the recurrence,
    // fixing the constant by the zero-mean condition on [0,1].
    std::vector<double> c{1.0};
    for (int n = 1; n <= degree; ++n) {
        std::vector<double> next(static_cast<size_t>(n + 1), 0.0);
        for (int j = 1; j <= n; ++j)
            next[static_cast<size_t>(j)] = n * c[static_cast<size_t>(j - 1)] / j;
        double mean = 0.0;
        for (int j = 1; j <= n; ++j) mean += next[static_cast<size_t>(j)] / (j + 1);
        next[0] = -mean;
        c.swap(next);
    }
    double v = 0.0;
    for (size_t j = c.size(); j-- > 0;) v = v * x + c[j];
    return v;
}

Eigen::MatrixXd DesignMatrix::dense() const {
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int r = 0; r < band; ++r) Z(i, first[static_cast<size_t>(i)] + r) = values(i, r);
    return Z;
}

Eigen::VectorXd DesignMatrix::multiply(const Eigen::VectorXd& coef) const {
    Eigen::VectorXd out(rows);
    for (int i = 0; i < rows; ++i) out[i] = row_value(i, coef);
    return out;
}

double DesignMatrix::row_value(int i, const Eigen::VectorXd& coef) const {
    const int f = first[static_cast<size_t>(i)];
    double v = 0.0;
    for (int r = 0; r < band; ++r) v += values(i, r) * coef[f + r];
    return v;
}

DesignMatrix design_matrix(const BasisSpec& spec, const Eigen::VectorXd& x) {
    DesignMatrix Z;
    Z.rows = static_cast<int>(x.size());
    Z.cols = spec.dim();
    Z.band = spec.degree() + 1;
    Z.first.resize(static_cast<size_t>(Z.rows));
    Z.values.resize(Z.rows, Z.band);
    for (int i = 0; i < Z.rows; ++i) {
        const LocalBasis lb = eval_basis_local(spec, x[i]);
        Z.first[static_cast<size_t>(i)] = lb.first;
        for (int r = 0; r < Z.band; ++r) Z.values(i, r) = lb.values[static_cast<size_t>(r)];
    }
    return Z;
}

}  // namespace psqr
