#include "psqr/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "psqr/band.hpp"
#include "psqr/stats.hpp"

namespace psqr {

double check_loss(double u, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("check_loss: tau must be in (0,1)");
    return u * (tau - (u < 0.0 ? 1.0 : 0.0));
}

double check_subgradient(double u, double tau) {
    if (!(tau > 0.0 && tau < 1.0))
        throw std::invalid_argument("check_subgradient: tau must be in (0,1)");
    return tau - (u < 0.0 ? 1.0 : 0.0);
}

double irls_weight_single(double r, double tau, double alpha, WeightMode mode) {
    if (mode == WeightMode::capped) {
        if (r > alpha) return tau / (2.0 * r);
        if (r < -alpha) return (tau - 1.0) / (2.0 * r);
        return (r >= 0.0 ? tau : 1.0 - tau) / (2.0 * alpha);
    }
    // the three branches exactly as printed; the middle ones vanish at r = 0
    if (std::abs(r) > alpha) return check_subgradient(r, tau) / (2.0 * r);
    if (r >= 0.0) return tau * r / alpha;
    return (1.0 - tau) * r / alpha;
}

Eigen::VectorXd irls_weights(const Eigen::VectorXd& residuals, double tau,
                             const IRLSConfig& cfg) {
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("irls_weights: tau must be in (0,1)");
    if (!(cfg.alpha > 0.0)) throw std::invalid_argument("irls_weights: alpha must be > 0");
    Eigen::VectorXd w(residuals.size());
    for (int i = 0; i < residuals.size(); ++i)
        w[i] = irls_weight_single(residuals[i], tau, cfg.alpha, cfg.weight_mode);
    return w;
}

namespace {

double resolve_alpha(const Eigen::VectorXd& y, const IRLSConfig& cfg) {
    if (cfg.alpha > 0.0) return cfg.alpha;
    double spread = interquartile_range(y);
    if (!(spread > 0.0)) spread = std::max(1.0, y.cwiseAbs().maxCoeff());
    return 1e-4 * spread;
}

// Exact minimizer of t -> sum_i k_i rho_tau(c_i - z_i t) + 0.5 A t^2 + Bq t.
// bp holds (t_i, jump_i) with jump_i = k_i |z_i|; s0 is the derivative of the
// rho part below every breakpoint. Returns the smallest minimizer.
double piecewise_line_min(std::vector<std::pair<double, double>>& bp, double s0, double A,
                          double Bq, double fallback) {
    if (bp.empty()) {
        if (A > 0.0) return -Bq / A;
        return fallback;
    }
    std::sort(bp.begin(), bp.end());
    double cum = s0;
    if (A > 0.0) {
        const double root = -(Bq + cum) / A;
        if (root <= bp.front().first) return root;
    }
    for (size_t idx = 0; idx < bp.size(); ++idx) {
        const double t = bp[idx].first;
        const double left = A * t + Bq + cum;
        cum += bp[idx].second;
        const double right = A * t + Bq + cum;
        if (left <= 0.0 && right >= 0.0) return t;
        if (A > 0.0) {
            const double root = -(Bq + cum) / A;
            const double tnext =
                (idx + 1 < bp.size()) ? bp[idx + 1].first : std::numeric_limits<double>::infinity();
            if (root > t && root <= tnext) return root;
        }
    }
    return bp.back().first;
}

struct SplineWork {
    const Dataset& data;
    const BasisSpec& spec;
    const DesignMatrix& Z;
    const PenaltyOperator* pen;
    double lambda;
    double tau;
    WeightMode mode;

    BandSym M;
    Eigen::VectorXd rhs;

    SplineWork(const Dataset& d, const BasisSpec& s, const DesignMatrix& z,
               const PenaltyOperator* pn, double lam, double tau_, WeightMode md)
        : data(d),
          spec(s),
          Z(z),
          pen(pn),
          lambda(lam),
          tau(tau_),
          mode(md),
          M(s.dim(), std::max(s.degree(), (pn != nullptr && lam > 0.0) ? pn->order : 0)),
          rhs(Eigen::VectorXd::Zero(s.dim())) {}

    double objective(const Eigen::VectorXd& resid, const Eigen::VectorXd& coef) const {
        double J = 0.0;
        for (int i = 0; i < resid.size(); ++i) J += check_loss(resid[i], tau);
        if (pen != nullptr && lambda > 0.0) J += penalty_value(*pen, coef, lambda);
        return J;
    }

    // weighted ridge solve (Z^T W Z + lambda D'D) b = Z^T W y
    Eigen::VectorXd weighted_solve(const Eigen::VectorXd& w) {
        M.clear();
        rhs.setZero();
        const int band = Z.band;
        for (int i = 0; i < Z.rows; ++i) {
            const int f = Z.first[static_cast<size_t>(i)];
            const double wi = w[i];
            const double wy = wi * data.y[i];
            for (int a = 0; a < band; ++a) {
                const double za = Z.values(i, a);
                if (za == 0.0) continue;
                rhs[f + a] += wy * za;
                const double wza = wi * za;
                for (int b = a; b < band; ++b) M.add(f + b, f + a, wza * Z.values(i, b));
            }
        }
        if (pen != nullptr && lambda > 0.0) M.add_scaled(pen->gram, lambda);
        if (!M.factorize())
            throw SingularSystem(
                "fit_penalized_quantile: weighted normal matrix is numerically rank-deficient");
        return M.solve(rhs);
    }
};

// column -> rows carrying it; used by the coordinate polish
std::vector<std::vector<int>> column_lists(const DesignMatrix& Z) {
    std::vector<std::vector<int>> cols(static_cast<size_t>(Z.cols));
    for (int i = 0; i < Z.rows; ++i)
        for (int r = 0; r < Z.band; ++r) {
            if (Z.values(i, r) != 0.0)
                cols[static_cast<size_t>(Z.first[static_cast<size_t>(i)] + r)].push_back(i);
        }
    return cols;
}

}  // namespace

QuantileFit fit_penalized_quantile(const Dataset& data, double tau, const BasisSpec& spec,
                                   const PenaltyOperator* penalty, double lambda,
                                   const IRLSConfig& cfg) {
    if (!(tau > 0.0 && tau < 1.0))
        throw std::invalid_argument("fit_penalized_quantile: tau must be in (0,1)");
    if (lambda < 0.0) throw std::invalid_argument("fit_penalized_quantile: lambda must be >= 0");
    if (lambda > 0.0 && penalty == nullptr)
        throw std::invalid_argument("fit_penalized_quantile: lambda > 0 requires a penalty");
    if (penalty != nullptr) {
        if (penalty->dim != spec.dim())
            throw std::invalid_argument("fit_penalized_quantile: penalty dimension mismatch");
        if (penalty->order > spec.degree() + 1)
            throw std::invalid_argument("fit_penalized_quantile: penalty order must be <= degree+1");
    }
    if (data.size() < 1) throw std::invalid_argument("fit_penalized_quantile: empty dataset");
    if (!(cfg.tol > 0.0) || cfg.max_iter < 1)
        throw std::invalid_argument("fit_penalized_quantile: bad IRLS configuration");

    const int d = spec.dim();
    const DesignMatrix Z = design_matrix(spec, data.x);
    const double alpha = resolve_alpha(data.y, cfg);

    SplineWork work(data, spec, Z, penalty, lambda, tau, cfg.weight_mode);

    QuantileFit fit;
    fit.spec = spec;
    fit.coef = Eigen::VectorXd::Zero(d);
    fit.tau = tau;
    fit.lambda = lambda;
    fit.penalty_order = penalty != nullptr ? penalty->order : 0;
    fit.alpha = alpha;

    // initial coefficients
    Eigen::VectorXd b;
    if (cfg.init == InitMode::given) {
        if (cfg.init_coef.size() != d)
            throw std::invalid_argument("fit_penalized_quantile: init_coef has wrong length");
        b = cfg.init_coef;
    } else {
        b = work.weighted_solve(Eigen::VectorXd::Ones(data.size()));
    }
    Eigen::VectorXd resid = data.y - Z.multiply(b);

    Eigen::VectorXd best_b = b;
    Eigen::VectorXd best_r = resid;
    double best_J = work.objective(resid, b);
    fit.objective_trace.push_back(best_J);

    auto irls_stage = [&](double stage_alpha, int cap) -> bool {
        // oscillation near the fixed point cannot improve the objective;
        // stop the stage once the accepted value stalls
        int stalled = 0;
        for (int it = 0; it < cap; ++it) {
            Eigen::VectorXd w(data.size());
            for (int i = 0; i < data.size(); ++i)
                w[i] = irls_weight_single(resid[i], tau, stage_alpha, cfg.weight_mode);
            Eigen::VectorXd b_new = work.weighted_solve(w);
            const double delta = (b_new - b).lpNorm<Eigen::Infinity>();
            b = std::move(b_new);
            resid = data.y - Z.multiply(b);
            const double J = work.objective(resid, b);
            ++fit.iterations;
            if (J < best_J - 1e-12 * (1.0 + std::abs(best_J)))
                stalled = 0;
            else
                ++stalled;
            if (J < best_J) {
                best_J = J;
                best_b = b;
                best_r = resid;
            }
            fit.objective_trace.push_back(best_J);
            if (delta < cfg.tol) return true;
            if (stalled >= 8) return false;
        }
        return false;
    };

    fit.converged = irls_stage(alpha, cfg.max_iter);

    if (cfg.polish) {
        // continuation: shrink the smoothing radius so IRLS approaches the
        // exact minimizer before the coordinate refinement
        double stage_alpha = alpha;
        for (int s = 0; s < 5; ++s) {
            stage_alpha *= 0.1;
            irls_stage(stage_alpha, 60);
        }
        b = best_b;
        resid = best_r;

        const std::vector<std::vector<int>> cols = column_lists(Z);
        std::vector<std::pair<double, double>> bp;
        const int max_sweeps = 80;
        for (int sweep = 0; sweep < max_sweeps; ++sweep) {
            double max_move = 0.0;
            for (int g = 0; g < d; ++g) {
                bp.clear();
                double s0 = 0.0;
                const double bg = b[g];
                for (int i : cols[static_cast<size_t>(g)]) {
                    const double z = Z.values(i, g - Z.first[static_cast<size_t>(i)]);
                    if (std::abs(z) < 1e-14) continue;
                    const double c = resid[i] + z * bg;
                    bp.emplace_back(c / z, std::abs(z));
                    s0 -= z * tau;  // z > 0 for spline bases
                }
                double A = 0.0, Bq = 0.0;
                if (penalty != nullptr && lambda > 0.0) {
                    const double ggg = penalty->gram(g, g);
                    double gb = 0.0;
                    const int m = penalty->order;
                    for (int h = std::max(0, g - m); h <= std::min(d - 1, g + m); ++h)
                        gb += penalty->gram(g, h) * b[h];
                    A = lambda * ggg;
                    Bq = lambda * (gb - ggg * bg);
                }
                const double t = piecewise_line_min(bp, s0, A, Bq, bg);
                if (t != bg) {
                    for (int i : cols[static_cast<size_t>(g)]) {
                        const double z = Z.values(i, g - Z.first[static_cast<size_t>(i)]);
                        resid[i] -= z * (t - bg);
                    }
                    max_move = std::max(max_move, std::abs(t - bg));
                    b[g] = t;
                }
            }
            if (max_move < 1e-4 * cfg.tol) {
                fit.converged = true;
                break;
            }
        }
        best_b = b;
        best_r = data.y - Z.multiply(b);
        best_J = work.objective(best_r, b);
        fit.objective_trace.push_back(best_J);
    }

    fit.coef = best_b;
    fit.objective = best_J;
    fit.final_weights.resize(data.size());
    for (int i = 0; i < data.size(); ++i)
        fit.final_weights[i] = irls_weight_single(best_r[i], tau, alpha, cfg.weight_mode);
    return fit;
}

Eigen::VectorXd fit_penalized_mean(const Dataset& data, const BasisSpec& spec,
                                   const PenaltyOperator* penalty, double mu) {
    if (mu < 0.0) throw std::invalid_argument("fit_penalized_mean: mu must be >= 0");
    if (mu > 0.0 && penalty == nullptr)
        throw std::invalid_argument("fit_penalized_mean: mu > 0 requires a penalty");
    if (penalty != nullptr && penalty->dim != spec.dim())
        throw std::invalid_argument("fit_penalized_mean: penalty dimension mismatch");
    if (data.size() < 1) throw std::invalid_argument("fit_penalized_mean: empty dataset");

    const DesignMatrix Z = design_matrix(spec, data.x);
    SplineWork work(data, spec, Z, penalty, mu, 0.5, WeightMode::capped);
    try {
        return work.weighted_solve(Eigen::VectorXd::Ones(data.size()));
    } catch (const SingularSystem&) {
        throw SingularSystem("fit_penalized_mean: Z^T Z + mu D'D is numerically rank-deficient");
    }
}

namespace {

struct LocalWork {
    double tau;
    WeightMode mode;
    const std::vector<int>& idx;
    const Eigen::VectorXd& y;
    const std::vector<double>& dx;
    const std::vector<double>& kern;

    // weighted 2x2 normal equations; returns false when singular
    bool solve(const Eigen::VectorXd& w, double& a, double& bslope, double& inv00) const {
        double s00 = 0.0, s01 = 0.0, s11 = 0.0, r0 = 0.0, r1 = 0.0;
        for (size_t j = 0; j < idx.size(); ++j) {
            const double wi = w[static_cast<int>(j)] * kern[j];
            const int i = idx[j];
            s00 += wi;
            s01 += wi * dx[j];
            s11 += wi * dx[j] * dx[j];
            r0 += wi * y[i];
            r1 += wi * dx[j] * y[i];
        }
        const double det = s00 * s11 - s01 * s01;
        if (!(det > 1e-14 * std::max(1e-300, s00 * s11))) return false;
        a = (s11 * r0 - s01 * r1) / det;
        bslope = (s00 * r1 - s01 * r0) / det;
        inv00 = s11 / det;
        return true;
    }

    double objective(double a, double bslope) const {
        double J = 0.0;
        for (size_t j = 0; j < idx.size(); ++j)
            J += kern[j] * check_loss(y[idx[j]] - a - bslope * dx[j], tau);
        return J;
    }
};

}  // namespace

LocalLinearFit fit_local_linear_quantile_full(const Dataset& data, double tau, double x0,
                                              double h, const IRLSConfig& cfg) {
    if (!(tau > 0.0 && tau < 1.0))
        throw std::invalid_argument("fit_local_linear_quantile: tau must be in (0,1)");
    if (!(h > 0.0)) throw std::invalid_argument("fit_local_linear_quantile: h must be > 0");
    if (data.size() < 2)
        throw std::invalid_argument("fit_local_linear_quantile: need at least 2 observations");

    std::vector<int> idx;
    std::vector<double> dx, kern;
    for (int i = 0; i < data.size(); ++i) {
        const double u = (data.x[i] - x0) / h;
        const double k = std::exp(-0.5 * u * u);
        if (k > 0.0) {
            idx.push_back(i);
            dx.push_back(data.x[i] - x0);
            kern.push_back(k);
        }
    }
    if (idx.size() < 2)
        throw std::invalid_argument("fit_local_linear_quantile: empty effective neighborhood");

    const double alpha = resolve_alpha(data.y, cfg);
    LocalWork work{tau, cfg.weight_mode, idx, data.y, dx, kern};

    LocalLinearFit fit;
    fit.alpha = alpha;

    double a = 0.0, bs = 0.0, inv00 = 0.0;
    if (!work.solve(Eigen::VectorXd::Ones(static_cast<int>(idx.size())), a, bs, inv00))
        throw SingularSystem("fit_local_linear_quantile: degenerate local design");

    auto resid = [&](double aa, double bb, size_t j) {
        return data.y[idx[j]] - aa - bb * dx[j];
    };

    double best_a = a, best_bs = bs;
    double best_J = work.objective(a, bs);

    auto irls_stage = [&](double stage_alpha, int cap) -> bool {
        Eigen::VectorXd w(static_cast<int>(idx.size()));
        int stalled = 0;
        for (int it = 0; it < cap; ++it) {
            for (size_t j = 0; j < idx.size(); ++j)
                w[static_cast<int>(j)] =
                    irls_weight_single(resid(a, bs, j), tau, stage_alpha, cfg.weight_mode);
            double na, nb, ninv;
            if (!work.solve(w, na, nb, ninv))
                throw SingularSystem("fit_local_linear_quantile: singular weighted system");
            const double delta = std::max(std::abs(na - a), std::abs(nb - bs));
            a = na;
            bs = nb;
            const double J = work.objective(a, bs);
            if (J < best_J - 1e-12 * (1.0 + std::abs(best_J)))
                stalled = 0;
            else
                ++stalled;
            if (J < best_J) {
                best_J = J;
                best_a = a;
                best_bs = bs;
            }
            if (delta < cfg.tol) return true;
            if (stalled >= 8) return false;
        }
        return false;
    };

    fit.converged = irls_stage(alpha, cfg.max_iter);

    if (cfg.polish) {
        double stage_alpha = alpha;
        for (int s = 0; s < 5; ++s) {
            stage_alpha *= 0.1;
            irls_stage(stage_alpha, 60);
        }
        a = best_a;
        bs = best_bs;
        std::vector<std::pair<double, double>> bp;
        for (int sweep = 0; sweep < 80; ++sweep) {
            double max_move = 0.0;
            // intercept coordinate: z = 1
            bp.clear();
            double s0 = 0.0;
            for (size_t j = 0; j < idx.size(); ++j) {
                bp.emplace_back(data.y[idx[j]] - bs * dx[j], kern[j]);
                s0 -= kern[j] * tau;
            }
            double t = piecewise_line_min(bp, s0, 0.0, 0.0, a);
            max_move = std::max(max_move, std::abs(t - a));
            a = t;
            // slope coordinate: z = dx (mixed signs)
            bp.clear();
            s0 = 0.0;
            for (size_t j = 0; j < idx.size(); ++j) {
                const double z = dx[j];
                if (std::abs(z) < 1e-300) continue;
                bp.emplace_back((data.y[idx[j]] - a) / z, kern[j] * std::abs(z));
                s0 -= kern[j] * z * (z > 0.0 ? tau : tau - 1.0);
            }
            t = piecewise_line_min(bp, s0, 0.0, 0.0, bs);
            max_move = std::max(max_move, std::abs(t - bs));
            bs = t;
            if (max_move < 1e-4 * cfg.tol) {
                fit.converged = true;
                break;
            }
        }
        const double J = work.objective(a, bs);
        if (J <= best_J) {
            best_J = J;
            best_a = a;
            best_bs = bs;
        }
    }

    // final weighted matrix at the returned point, for hat diagonals
    Eigen::VectorXd w(static_cast<int>(idx.size()));
    for (size_t j = 0; j < idx.size(); ++j)
        w[static_cast<int>(j)] =
            irls_weight_single(resid(best_a, best_bs, j), tau, alpha, cfg.weight_mode);
    double fa, fb;
    if (!work.solve(w, fa, fb, inv00))
        throw SingularSystem("fit_local_linear_quantile: singular weighted system");

    fit.intercept = best_a;
    fit.slope = best_bs;
    fit.inv00 = inv00;
    return fit;
}

double fit_local_linear_quantile(const Dataset& data, double tau, double x0, double h,
                                 const IRLSConfig& cfg) {
    return fit_local_linear_quantile_full(data, tau, x0, h, cfg).intercept;
}

}  // namespace psqr
