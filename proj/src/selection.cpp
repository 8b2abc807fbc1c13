#include "psqr/selection.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "psqr/band.hpp"

namespace psqr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// df = d - s * trace(M^{-1} gram) with M = Z^T W Z + s * gram
double hat_trace(const DesignMatrix& Z, const Eigen::VectorXd& w, const PenaltyOperator* penalty,
                 double s) {
    const int d = Z.cols;
    const int bw = std::max(Z.band - 1, (penalty != nullptr && s > 0.0) ? penalty->order : 0);
    BandSym M(d, bw);
    for (int i = 0; i < Z.rows; ++i) {
        const int f = Z.first[static_cast<size_t>(i)];
        for (int a = 0; a < Z.band; ++a) {
            const double wza = w[i] * Z.values(i, a);
            if (wza == 0.0) continue;
            for (int b = a; b < Z.band; ++b) M.add(f + b, f + a, wza * Z.values(i, b));
        }
    }
    if (penalty != nullptr && s > 0.0) M.add_scaled(penalty->gram, s);
    if (!M.factorize()) throw SingularSystem("effective_df: singular weighted system");
    if (penalty == nullptr || s == 0.0) return static_cast<double>(d);
    double tr = 0.0;
    for (int g = 0; g < d; ++g) {
        Eigen::VectorXd col = penalty->gram.col(g);
        tr += M.solve(std::move(col))[g];
    }
    return static_cast<double>(d) - s * tr;
}

}  // namespace

double effective_df(const QuantileFit& fit, const DesignMatrix& Z, const PenaltyOperator* penalty,
                    double lambda) {
    if (fit.final_weights.size() != Z.rows)
        throw std::invalid_argument("effective_df: weights do not match the design");
    if (lambda > 0.0 && penalty == nullptr)
        throw std::invalid_argument("effective_df: lambda > 0 requires a penalty");
    return hat_trace(Z, fit.final_weights, penalty, lambda);
}

double effective_df_mean(const DesignMatrix& Z, const PenaltyOperator* penalty, double mu) {
    return hat_trace(Z, Eigen::VectorXd::Ones(Z.rows), penalty, mu);
}

double gacv_from_fit(const Dataset& data, const QuantileFit& fit, const DesignMatrix& Z,
                     const PenaltyOperator* penalty, double lambda) {
    const double df = effective_df(fit, Z, penalty, lambda);
    const double n = static_cast<double>(data.size());
    if (!(df < n)) throw std::invalid_argument("gacv: df >= n, configuration is invalid");
    double loss = 0.0;
    for (int i = 0; i < data.size(); ++i)
        loss += check_loss(data.y[i] - Z.row_value(i, fit.coef), fit.tau);
    return loss / (n - df);
}

double gacv_score(const Dataset& data, double tau, const BasisSpec& spec,
                  const PenaltyOperator* penalty, double lambda, const IRLSConfig& cfg) {
    const QuantileFit fit = fit_penalized_quantile(data, tau, spec, penalty, lambda, cfg);
    const DesignMatrix Z = design_matrix(spec, data.x);
    return gacv_from_fit(data, fit, Z, penalty, lambda);
}

double gcv_score(const Dataset& data, const BasisSpec& spec, const PenaltyOperator* penalty,
                 double mu) {
    const Eigen::VectorXd coef = fit_penalized_mean(data, spec, penalty, mu);
    const DesignMatrix Z = design_matrix(spec, data.x);
    const double df = effective_df_mean(Z, penalty, mu);
    const double n = static_cast<double>(data.size());
    if (!(df < n)) throw std::invalid_argument("gcv: df >= n, configuration is invalid");
    const double rss = (data.y - Z.multiply(coef)).squaredNorm();
    return n * rss / ((n - df) * (n - df));
}

SelectionGrid select_model(const Dataset& data, double tau, const std::vector<int>& K_values,
                           const std::vector<double>& lambda_values, int degree,
                           int penalty_order, const IRLSConfig& cfg) {
    if (K_values.empty() || lambda_values.empty())
        throw std::invalid_argument("select_model: empty grid");

    SelectionGrid grid;
    grid.K_values = K_values;
    grid.lambda_values = lambda_values;
    grid.scores = Eigen::MatrixXd::Constant(static_cast<int>(K_values.size()),
                                            static_cast<int>(lambda_values.size()), kNaN);

    IRLSConfig sweep_cfg = cfg;
    sweep_cfg.polish = false;  // scores only need IRLS accuracy

    for (size_t ki = 0; ki < K_values.size(); ++ki) {
        BasisSpec spec = build_basis(degree, K_values[ki]);
        PenaltyOperator pen;
        bool has_pen = false;
        if (penalty_order >= 1 && penalty_order < spec.dim() &&
            penalty_order <= degree + 1) {
            pen = difference_matrix(penalty_order, spec.dim());
            has_pen = true;
        }
        IRLSConfig cell_cfg = sweep_cfg;
        bool warm = false;
        for (size_t li = 0; li < lambda_values.size(); ++li) {
            const double lam = lambda_values[li];
            try {
                const PenaltyOperator* p = (has_pen && lam > 0.0) ? &pen : nullptr;
                if (lam > 0.0 && !has_pen)
                    throw std::invalid_argument("select_model: penalty unavailable for this K");
                if (warm) cell_cfg.init = InitMode::given;
                const QuantileFit fit =
                    fit_penalized_quantile(data, tau, spec, p, lam, cell_cfg);
                const DesignMatrix Z = design_matrix(spec, data.x);
                grid.scores(static_cast<int>(ki), static_cast<int>(li)) =
                    gacv_from_fit(data, fit, Z, p, lam);
                cell_cfg.init_coef = fit.coef;
                warm = true;
            } catch (const std::exception&) {
                // excluded cell; the sweep continues
            }
        }
    }

    double best = std::numeric_limits<double>::infinity();
    for (int ki = 0; ki < grid.scores.rows(); ++ki)
        for (int li = 0; li < grid.scores.cols(); ++li) {
            const double s = grid.scores(ki, li);
            if (std::isfinite(s) && s < best) {
                best = s;
                grid.best_K_index = ki;
                grid.best_lambda_index = li;
            }
        }
    if (grid.best_K_index < 0)
        throw SingularSystem("select_model: every grid cell failed");
    grid.best_K = K_values[static_cast<size_t>(grid.best_K_index)];
    grid.best_lambda = lambda_values[static_cast<size_t>(grid.best_lambda_index)];
    grid.best_score = best;
    return grid;
}

QuantileFit fit_selected(const Dataset& data, double tau, const SelectionGrid& grid, int degree,
                         int penalty_order, const IRLSConfig& cfg) {
    BasisSpec spec = build_basis(degree, grid.best_K);
    if (grid.best_lambda > 0.0) {
        PenaltyOperator pen = difference_matrix(penalty_order, spec.dim());
        return fit_penalized_quantile(data, tau, spec, &pen, grid.best_lambda, cfg);
    }
    return fit_penalized_quantile(data, tau, spec, nullptr, 0.0, cfg);
}

BandwidthSelection select_local_linear_bandwidth(const Dataset& data, double tau,
                                                 const std::vector<double>& h_values,
                                                 const IRLSConfig& cfg) {
    if (h_values.empty())
        throw std::invalid_argument("select_local_linear_bandwidth: empty grid");
    IRLSConfig sweep_cfg = cfg;
    sweep_cfg.polish = false;

    BandwidthSelection sel;
    sel.h_values = h_values;
    sel.scores.assign(h_values.size(), kNaN);

    const double n = static_cast<double>(data.size());
    for (size_t hi = 0; hi < h_values.size(); ++hi) {
        const double h = h_values[hi];
        try {
            double loss = 0.0, df = 0.0;
            for (int i = 0; i < data.size(); ++i) {
                const LocalLinearFit f =
                    fit_local_linear_quantile_full(data, tau, data.x[i], h, sweep_cfg);
                const double r = data.y[i] - f.intercept;
                loss += check_loss(r, tau);
                df += irls_weight_single(r, tau, f.alpha, sweep_cfg.weight_mode) * f.inv00;
            }
            if (!(df < n)) continue;
            sel.scores[hi] = loss / (n - df);
        } catch (const std::exception&) {
            // excluded bandwidth
        }
    }
    double best = std::numeric_limits<double>::infinity();
    for (size_t hi = 0; hi < h_values.size(); ++hi)
        if (std::isfinite(sel.scores[hi]) && sel.scores[hi] < best) {
            best = sel.scores[hi];
            sel.best_index = static_cast<int>(hi);
        }
    if (sel.best_index < 0)
        throw SingularSystem("select_local_linear_bandwidth: every bandwidth failed");
    sel.best_h = h_values[static_cast<size_t>(sel.best_index)];
    return sel;
}

double select_mean_mu(const Dataset& data, const BasisSpec& spec, const PenaltyOperator* penalty,
                      const std::vector<double>& mu_values) {
    if (mu_values.empty()) throw std::invalid_argument("select_mean_mu: empty grid");
    double best = std::numeric_limits<double>::infinity();
    double best_mu = mu_values.front();
    bool any = false;
    for (double mu : mu_values) {
        try {
            const double s = gcv_score(data, spec, penalty, mu);
            if (s < best) {
                best = s;
                best_mu = mu;
                any = true;
            }
        } catch (const std::exception&) {
        }
    }
    if (!any) throw SingularSystem("select_mean_mu: every grid value failed");
    return best_mu;
}

std::vector<int> default_knot_grid() { return {5, 10, 20, 40}; }

std::vector<double> default_lambda_grid() {
    std::vector<double> out;
    const int count = 30;
    for (int i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / (count - 1);
        out.push_back(std::pow(10.0, -6.0 + 9.0 * t));
    }
    return out;
}

std::vector<double> default_bandwidth_grid() {
    std::vector<double> out;
    const int count = 8;
    for (int i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / (count - 1);
        out.push_back(0.02 * std::pow(0.5 / 0.02, t));
    }
    return out;
}

}  // namespace psqr
