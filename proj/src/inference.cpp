#include "psqr/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "psqr/band.hpp"
#include "psqr/csv.hpp"
#include "psqr/stats.hpp"

namespace psqr {

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

Eigen::VectorXd density_diagonal(const QuantileFit& fit,
                                 const ConditionalDensityEstimate& density) {
    const Dataset& data = density.sample();
    const int n = data.size();
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) r[i] = density(data.x[i], fit.value(data.x[i]));
    std::vector<double> vals(r.data(), r.data() + n);
    const double med = sample_quantile(vals, 0.5);
    if (!(med > 0.0))
        throw SingularSystem("inference: conditional density vanished over the sample");
    // floor keeps the sandwich invertible where the density estimate is tiny
    const double floor = 1e-3 * med;
    for (int i = 0; i < n; ++i)
        r[i] = (std::isfinite(r[i]) && r[i] > floor) ? r[i] : floor;
    return r;
}

BandSym weighted_gram(const DesignMatrix& Z, const Eigen::VectorXd& w,
                      const PenaltyOperator* penalty, double s) {
    const int bw = std::max(Z.band - 1, (penalty != nullptr && s > 0.0) ? penalty->order : 0);
    BandSym M(Z.cols, bw);
    for (int i = 0; i < Z.rows; ++i) {
        const int f = Z.first[static_cast<size_t>(i)];
        for (int a = 0; a < Z.band; ++a) {
            const double wza = w[i] * Z.values(i, a);
            if (wza == 0.0) continue;
            for (int b = a; b < Z.band; ++b) M.add(f + b, f + a, wza * Z.values(i, b));
        }
    }
    if (penalty != nullptr && s > 0.0) M.add_scaled(penalty->gram, s);
    return M;
}

}  // namespace

struct InferenceEngine::Impl {
    QuantileFit fit;
    DesignMatrix Z;
    const PenaltyOperator* penalty;
    double lambda;
    double tau;
    BandSym sandwich;   // Z'RZ + lambda D'D, factorized
    BandSym plain_gram;  // Z'Z, unfactorized
    Eigen::VectorXd gram_coef;  // D'D b-hat (zero when no penalty)
    bool has_pilot = false;
    QuantileFit pilot;

    // pilot_lambda < 0 skips the pilot fit; approx_bias is then unavailable
    Impl(const QuantileFit& f, const DesignMatrix& z, const PenaltyOperator* pen, double lam,
         const ConditionalDensityEstimate& density, double pilot_lambda, const IRLSConfig& cfg)
        : fit(f),
          Z(z),
          penalty(pen),
          lambda(lam),
          tau(f.tau),
          sandwich(weighted_gram(z, density_diagonal(f, density), pen, lam)),
          plain_gram(weighted_gram(z, Eigen::VectorXd::Ones(z.rows), nullptr, 0.0)) {
        if (lam > 0.0 && pen == nullptr)
            throw std::invalid_argument("inference: lambda > 0 requires a penalty");
        if (!sandwich.factorize())
            throw SingularSystem("inference: density-weighted normal matrix is singular");
        if (penalty != nullptr)
            gram_coef = penalty->gram * fit.coef;
        else
            gram_coef = Eigen::VectorXd::Zero(fit.coef.size());
        if (pilot_lambda >= 0.0) {
            pilot = make_pilot(f, density.sample(), pilot_lambda, cfg);
            has_pilot = true;
        }
    }

    static QuantileFit make_pilot(const QuantileFit& f, const Dataset& data, double pilot_lambda,
                                  const IRLSConfig& cfg) {
        const int p = f.spec.degree();
        const int K = f.spec.interior_count();
        const BasisSpec pilot_spec(p + 2, K);
        const int order = f.penalty_order > 0 ? f.penalty_order : 2;
        if (pilot_lambda > 0.0) {
            const PenaltyOperator pen = difference_matrix(order, pilot_spec.dim());
            return fit_penalized_quantile(data, f.tau, pilot_spec, &pen, pilot_lambda, cfg);
        }
        return fit_penalized_quantile(data, f.tau, pilot_spec, nullptr, 0.0, cfg);
    }

    Eigen::VectorXd solve_basis(double x) const {
        return sandwich.solve(eval_basis(fit.spec, x));
    }
};

InferenceEngine::InferenceEngine(const QuantileFit& fit, const DesignMatrix& Z,
                                 const PenaltyOperator* penalty, double lambda,
                                 const ConditionalDensityEstimate& density, double pilot_lambda,
                                 const IRLSConfig& cfg)
    : impl_(std::make_unique<Impl>(fit, Z, penalty, lambda, density, pilot_lambda, cfg)) {}

InferenceEngine::~InferenceEngine() = default;
InferenceEngine::InferenceEngine(InferenceEngine&&) noexcept = default;

double InferenceEngine::variance(double x) const {
    const Eigen::VectorXd u = impl_->solve_basis(x);
    double quad = 0.0;
    // u' (Z'Z) u through the band storage
    const BandSym& g = impl_->plain_gram;
    const int d = g.dim();
    for (int j = 0; j < d; ++j) {
        quad += g.entry(j, j) * u[j] * u[j];
        for (int r = 1; r <= g.bandwidth() && j + r < d; ++r)
            quad += 2.0 * g.entry(j + r, j) * u[j + r] * u[j];
    }
    const double tau = impl_->tau;
    return std::max(0.0, tau * (1.0 - tau) * quad);
}

double InferenceEngine::shrinkage_bias(double x) const {
    if (impl_->lambda == 0.0) return 0.0;
    const Eigen::VectorXd u = impl_->solve_basis(x);
    return -impl_->lambda * u.dot(impl_->gram_coef);
}

double InferenceEngine::approx_bias(double x) const {
    if (!impl_->has_pilot)
        throw std::logic_error("InferenceEngine: constructed without a pilot fit");
    const int p = impl_->fit.spec.degree();
    const double deriv = spline_value(impl_->pilot.spec, impl_->pilot.coef, x, p + 1);
    return approx_bias_from_derivative(deriv, p, impl_->fit.spec.interior_count(), x);
}

const QuantileFit& InferenceEngine::pilot_fit() const {
    if (!impl_->has_pilot)
        throw std::logic_error("InferenceEngine: constructed without a pilot fit");
    return impl_->pilot;
}

double variance_estimate(const QuantileFit& fit, const DesignMatrix& Z,
                         const PenaltyOperator* penalty, double lambda,
                         const ConditionalDensityEstimate& density, double x) {
    return InferenceEngine(fit, Z, penalty, lambda, density, -1.0).variance(x);
}

double shrinkage_bias_estimate(const QuantileFit& fit, const DesignMatrix& Z,
                               const PenaltyOperator* penalty, double lambda,
                               const ConditionalDensityEstimate& density, double x) {
    return InferenceEngine(fit, Z, penalty, lambda, density, -1.0).shrinkage_bias(x);
}

double approx_bias_from_derivative(double deriv_value, int degree, int interior_count, double x) {
    const BasisSpec spec(degree, interior_count);
    const int j = spec.interval_index(x);
    const double frac = (x - spec.knot(j - 1)) * interior_count;
    const double scale =
        std::pow(static_cast<double>(interior_count), degree + 1) * factorial(degree + 1);
    return -deriv_value / scale * bernoulli_poly(degree + 1, frac);
}

double approx_bias_estimate(const Dataset& data, double tau, const BasisSpec& spec, double x,
                            double pilot_lambda, int penalty_order, const IRLSConfig& cfg) {
    const int p = spec.degree();
    const BasisSpec pilot_spec(p + 2, spec.interior_count());
    QuantileFit pilot;
    if (pilot_lambda > 0.0) {
        const PenaltyOperator pen = difference_matrix(penalty_order, pilot_spec.dim());
        pilot = fit_penalized_quantile(data, tau, pilot_spec, &pen, pilot_lambda, cfg);
    } else {
        pilot = fit_penalized_quantile(data, tau, pilot_spec, nullptr, 0.0, cfg);
    }
    const double deriv = spline_value(pilot.spec, pilot.coef, x, p + 1);
    return approx_bias_from_derivative(deriv, p, spec.interior_count(), x);
}

InferenceReport confidence_band(const QuantileFit& fit, const DesignMatrix& Z,
                                const PenaltyOperator* penalty, double lambda,
                                const ConditionalDensityEstimate& density,
                                const Eigen::VectorXd& grid, double alpha_level,
                                double pilot_lambda, const IRLSConfig& cfg) {
    if (!(alpha_level > 0.0 && alpha_level < 1.0))
        throw std::invalid_argument("confidence_band: alpha must lie in (0,1)");

    InferenceEngine engine(fit, Z, penalty, lambda, density, pilot_lambda, cfg);
    const double z = normal_quantile(1.0 - alpha_level / 2.0);

    const int g = static_cast<int>(grid.size());
    InferenceReport rep;
    rep.alpha_level = alpha_level;
    rep.grid = grid;
    rep.eta_hat.resize(g);
    rep.b_a_hat.resize(g);
    rep.b_lambda_hat.resize(g);
    rep.phi_hat.resize(g);
    rep.lower.resize(g);
    rep.upper.resize(g);
    rep.lower_uncorrected.resize(g);
    rep.upper_uncorrected.resize(g);

    for (int i = 0; i < g; ++i) {
        const double x = grid[i];
        rep.eta_hat[i] = fit.value(x);
        rep.b_a_hat[i] = engine.approx_bias(x);
        rep.b_lambda_hat[i] = engine.shrinkage_bias(x);
        rep.phi_hat[i] = engine.variance(x);
        const double half = z * std::sqrt(rep.phi_hat[i]);
        const double center = rep.eta_hat[i] - rep.b_a_hat[i] - rep.b_lambda_hat[i];
        rep.lower[i] = center - half;
        rep.upper[i] = center + half;
        rep.lower_uncorrected[i] = rep.eta_hat[i] - half;
        rep.upper_uncorrected[i] = rep.eta_hat[i] + half;
    }
    return rep;
}

std::string InferenceReport::to_csv() const {
    std::ostringstream out;
    out << "x,eta_hat,b_a_hat,b_lambda_hat,phi_hat,lower,upper\n";
    for (int i = 0; i < grid.size(); ++i) {
        out << format_double(grid[i]) << ',' << format_double(eta_hat[i]) << ','
            << format_double(b_a_hat[i]) << ',' << format_double(b_lambda_hat[i]) << ','
            << format_double(phi_hat[i]) << ',' << format_double(lower[i]) << ','
            << format_double(upper[i]) << '\n';
    }
    return out.str();
}

}  // namespace psqr
