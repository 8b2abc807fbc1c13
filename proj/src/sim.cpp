#include "psqr/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "psqr/density.hpp"
#include "psqr/inference.hpp"
#include "psqr/selection.hpp"
#include "psqr/solver.hpp"
#include "psqr/stats.hpp"

namespace psqr {

std::string error_law_name(ErrorLaw law) {
    switch (law) {
        case ErrorLaw::normal: return "normal";
        case ErrorLaw::exponential: return "exponential";
        case ErrorLaw::cauchy: return "cauchy";
    }
    return "unknown";
}

double NoiseSpec::quantile(double tau) const {
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("NoiseSpec: tau must be in (0,1)");
    switch (law) {
        case ErrorLaw::normal: return param == 0.0 ? 0.0 : param * normal_quantile(tau);
        case ErrorLaw::exponential: return -param * std::log(1.0 - tau);
        case ErrorLaw::cauchy: return param * std::tan(M_PI * (tau - 0.5));
    }
    throw std::logic_error("NoiseSpec: unknown law");
}

double NoiseSpec::draw(Rng& rng) const {
    switch (law) {
        case ErrorLaw::normal: return rng.normal(0.0, param);
        case ErrorLaw::exponential: return rng.exponential(param);
        case ErrorLaw::cauchy: return rng.cauchy(0.0, param);
    }
    throw std::logic_error("NoiseSpec: unknown law");
}

NoiseSpec NoiseSpec::standard(ErrorLaw law) {
    switch (law) {
        case ErrorLaw::normal: return {ErrorLaw::normal, 0.1};
        case ErrorLaw::exponential: return {ErrorLaw::exponential, 2.0};
        case ErrorLaw::cauchy: return {ErrorLaw::cauchy, 0.01};
    }
    throw std::logic_error("NoiseSpec: unknown law");
}

SimModel::SimModel() : signal([](double x) { return std::sin(2.0 * M_PI * x); }) {}

double true_quantile(const SimModel& model, double tau, double x) {
    return model.signal(x) + model.noise.quantile(tau);
}

Dataset generate_dataset(const SimModel& model, uint64_t repetition) {
    if (model.n < 1) throw std::invalid_argument("generate_dataset: n must be >= 1");
    Rng rng(model.seed, repetition);
    Eigen::VectorXd x(model.n), y(model.n);
    for (int i = 0; i < model.n; ++i) {
        x[i] = rng.uniform01();
        y[i] = model.signal(x[i]) + model.noise.draw(rng);
    }
    return Dataset(std::move(x), std::move(y));
}

std::string estimator_name(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::p_cubic: return "P-cubic";
        case EstimatorKind::r_linear: return "R-linear";
        case EstimatorKind::l_linear: return "L-linear";
    }
    return "unknown";
}

StudyGrids::StudyGrids()
    : knots(default_knot_grid()),
      lambdas(default_lambda_grid()),
      bandwidths(default_bandwidth_grid()) {}

Eigen::VectorXd simulation_grid() {
    Eigen::VectorXd z(100);
    for (int j = 1; j <= 100; ++j) z[j - 1] = static_cast<double>(j) / 100.0;
    return z;
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    if (threads <= 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        threads = static_cast<int>(std::min<unsigned>(hw == 0 ? 1 : hw, 8));
    }
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

namespace {

struct SelectedSpline {
    int K = 0;
    double lambda = 0.0;
};

// curve of the requested estimator on the grid; selection parameters are
// reused when `fixed` is provided
Eigen::VectorXd estimator_curve(EstimatorKind kind, const Dataset& data, double tau,
                                const StudyGrids& grids, const Eigen::VectorXd& grid,
                                const SelectedSpline* fixed_spline, const double* fixed_h,
                                SelectedSpline* out_spline, double* out_h) {
    const IRLSConfig cfg;
    switch (kind) {
        case EstimatorKind::p_cubic:
        case EstimatorKind::r_linear: {
            const int degree = (kind == EstimatorKind::p_cubic) ? 3 : 1;
            const std::vector<double> zero{0.0};
            const std::vector<double>& lams =
                (kind == EstimatorKind::p_cubic) ? grids.lambdas : zero;
            SelectedSpline sel;
            if (fixed_spline != nullptr) {
                sel = *fixed_spline;
            } else {
                const SelectionGrid g = select_model(data, tau, grids.knots, lams, degree, 2, cfg);
                sel = {g.best_K, g.best_lambda};
            }
            if (out_spline != nullptr) *out_spline = sel;
            const BasisSpec spec = build_basis(degree, sel.K);
            QuantileFit fit;
            if (sel.lambda > 0.0) {
                const PenaltyOperator pen = difference_matrix(2, spec.dim());
                fit = fit_penalized_quantile(data, tau, spec, &pen, sel.lambda, cfg);
            } else {
                fit = fit_penalized_quantile(data, tau, spec, nullptr, 0.0, cfg);
            }
            Eigen::VectorXd curve(grid.size());
            for (int j = 0; j < grid.size(); ++j) curve[j] = fit.value(grid[j]);
            return curve;
        }
        case EstimatorKind::l_linear: {
            double h;
            if (fixed_h != nullptr) {
                h = *fixed_h;
            } else {
                h = select_local_linear_bandwidth(data, tau, grids.bandwidths, cfg).best_h;
            }
            if (out_h != nullptr) *out_h = h;
            Eigen::VectorXd curve(grid.size());
            for (int j = 0; j < grid.size(); ++j)
                curve[j] = fit_local_linear_quantile(data, tau, grid[j], h, cfg);
            return curve;
        }
    }
    throw std::logic_error("estimator_curve: unknown estimator");
}

}  // namespace

MiseReport run_mise_study(const MiseConfig& config) {
    if (config.repetitions < 1)
        throw std::invalid_argument("run_mise_study: repetitions must be >= 1");
    if (config.taus.empty()) throw std::invalid_argument("run_mise_study: empty tau list");
    if (config.estimators.empty())
        throw std::invalid_argument("run_mise_study: empty estimator list");

    const Eigen::VectorXd grid = simulation_grid();
    const int R = config.repetitions;
    const int cells = static_cast<int>(config.taus.size() * config.estimators.size());

    // optional one-shot selection on the first repetition
    std::vector<SelectedSpline> fixed_splines(static_cast<size_t>(cells));
    std::vector<double> fixed_h(static_cast<size_t>(cells), 0.0);
    bool have_fixed = false;
    if (!config.select_per_repetition) {
        const Dataset first = generate_dataset(config.model, 0);
        int c = 0;
        for (double tau : config.taus)
            for (EstimatorKind kind : config.estimators) {
                estimator_curve(kind, first, tau, config.grids, grid, nullptr, nullptr,
                                &fixed_splines[static_cast<size_t>(c)],
                                &fixed_h[static_cast<size_t>(c)]);
                ++c;
            }
        have_fixed = true;
    }

    // curves[rep][cell]; NaN size-0 marks a failed cell
    std::vector<std::vector<Eigen::VectorXd>> curves(static_cast<size_t>(R));
    parallel_for(R, config.threads, [&](int rep) {
        const Dataset data = generate_dataset(config.model, static_cast<uint64_t>(rep));
        std::vector<Eigen::VectorXd>& row = curves[static_cast<size_t>(rep)];
        row.resize(static_cast<size_t>(cells));
        int c = 0;
        for (double tau : config.taus)
            for (EstimatorKind kind : config.estimators) {
                try {
                    row[static_cast<size_t>(c)] = estimator_curve(
                        kind, data, tau, config.grids, grid,
                        have_fixed ? &fixed_splines[static_cast<size_t>(c)] : nullptr,
                        have_fixed ? &fixed_h[static_cast<size_t>(c)] : nullptr, nullptr,
                        nullptr);
                } catch (const std::exception&) {
                    row[static_cast<size_t>(c)].resize(0);
                }
                ++c;
            }
    });

    MiseReport report;
    report.noise = config.model.noise;
    report.n = config.model.n;
    report.seed = config.model.seed;
    report.repetitions = R;
    report.select_per_repetition = config.select_per_repetition;
    report.grid = grid;

    int c = 0;
    for (double tau : config.taus)
        for (EstimatorKind kind : config.estimators) {
            MiseCell cell;
            cell.estimator = kind;
            cell.tau = tau;
            cell.mse = Eigen::VectorXd::Zero(grid.size());
            Eigen::VectorXd truth(grid.size());
            for (int j = 0; j < grid.size(); ++j)
                truth[j] = true_quantile(config.model, tau, grid[j]);
            int kept = 0;
            for (int rep = 0; rep < R; ++rep) {
                const Eigen::VectorXd& curve = curves[static_cast<size_t>(rep)][static_cast<size_t>(c)];
                if (curve.size() != grid.size()) {
                    ++cell.failures;
                    continue;
                }
                cell.mse += (curve - truth).cwiseAbs2();
                ++kept;
            }
            if (kept > 0) {
                cell.mse /= static_cast<double>(kept);
                cell.mise = cell.mse.mean();
            } else {
                cell.mse.setConstant(std::numeric_limits<double>::quiet_NaN());
                cell.mise = std::numeric_limits<double>::quiet_NaN();
            }
            report.cells.push_back(std::move(cell));
            ++c;
        }
    return report;
}

std::vector<NormalityReport> normality_study(const NormalityConfig& config) {
    if (config.repetitions < 1)
        throw std::invalid_argument("normality_study: repetitions must be >= 1");
    if (config.n_values.empty())
        throw std::invalid_argument("normality_study: empty n list");

    std::vector<NormalityReport> reports;
    const IRLSConfig cfg;
    for (int n : config.n_values) {
        SimModel model = config.model;
        model.n = n;
        const int R = config.repetitions;
        std::vector<double> u(static_cast<size_t>(R),
                              std::numeric_limits<double>::quiet_NaN());
        parallel_for(R, config.threads, [&](int rep) {
            try {
                const Dataset data = generate_dataset(model, static_cast<uint64_t>(rep));
                const SelectionGrid sel =
                    select_model(data, config.tau, config.grids.knots, config.grids.lambdas, 3, 2,
                                 cfg);
                const QuantileFit fit = fit_selected(data, config.tau, sel, 3, 2, cfg);
                const DesignMatrix Z = design_matrix(fit.spec, data.x);
                const Eigen::VectorXd resid = data.y - Z.multiply(fit.coef);
                const ConditionalDensityEstimate density = make_conditional_density(data, resid);
                PenaltyOperator pen;
                const PenaltyOperator* pptr = nullptr;
                if (fit.lambda > 0.0) {
                    pen = difference_matrix(2, fit.spec.dim());
                    pptr = &pen;
                }
                const double phi =
                    variance_estimate(fit, Z, pptr, fit.lambda, density, config.x);
                if (!(phi > 0.0)) return;
                u[static_cast<size_t>(rep)] =
                    (fit.value(config.x) - true_quantile(model, config.tau, config.x)) /
                    std::sqrt(phi);
            } catch (const std::exception&) {
                // excluded repetition
            }
        });

        NormalityReport rep;
        rep.n = n;
        rep.tau = config.tau;
        rep.x = config.x;
        for (double v : u) {
            if (std::isfinite(v))
                rep.u_sample.push_back(v);
            else
                ++rep.excluded;
        }
        if (rep.u_sample.size() >= 10) {
            Eigen::VectorXd sample =
                Eigen::Map<const Eigen::VectorXd>(rep.u_sample.data(),
                                                  static_cast<int>(rep.u_sample.size()));
            const double bw = sj_bandwidth(sample);
            Eigen::VectorXd ugrid(161);
            for (int i = 0; i < 161; ++i) ugrid[i] = -4.0 + 0.05 * i;
            rep.density_grid = ugrid;
            rep.density_values = gaussian_kde(sample, bw, ugrid);
            rep.ks = ks_to_standard_normal(rep.u_sample);
        } else {
            rep.ks = std::numeric_limits<double>::quiet_NaN();
        }
        reports.push_back(std::move(rep));
    }
    return reports;
}

}  // namespace psqr
