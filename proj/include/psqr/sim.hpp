#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "psqr/rng.hpp"
#include "psqr/types.hpp"

namespace psqr {

enum class ErrorLaw { normal, exponential, cauchy };

std::string error_law_name(ErrorLaw law);

// normal: param = standard deviation; exponential: param = mean;
// cauchy: param = scale (location 0 throughout)
struct NoiseSpec {
    ErrorLaw law = ErrorLaw::normal;
    double param = 0.1;

    double quantile(double tau) const;
    double draw(Rng& rng) const;
    // the paper's three laws: N(0, 0.1^2), Exp(mean 2), Cauchy(0, 0.01)
    static NoiseSpec standard(ErrorLaw law);
};

struct SimModel {
    std::function<double(double)> signal;  // defaults to sin(2 pi x)
    NoiseSpec noise;
    int n = 100;
    uint64_t seed = 1;

    SimModel();
};

// eta_tau(x) = signal(x) + F_eps^{-1}(tau)
double true_quantile(const SimModel& model, double tau, double x);

// x ~ U[0,1], y = signal(x) + eps; bit-reproducible given (seed, repetition)
Dataset generate_dataset(const SimModel& model, uint64_t repetition = 0);

enum class EstimatorKind { p_cubic, r_linear, l_linear };

std::string estimator_name(EstimatorKind kind);

struct StudyGrids {
    std::vector<int> knots;
    std::vector<double> lambdas;
    std::vector<double> bandwidths;
    StudyGrids();  // selection-module defaults
};

// evaluation grid z_j = j/100, j = 1..100
Eigen::VectorXd simulation_grid();

struct MiseConfig {
    SimModel model;
    std::vector<double> taus{0.5};
    std::vector<EstimatorKind> estimators{EstimatorKind::p_cubic, EstimatorKind::r_linear,
                                          EstimatorKind::l_linear};
    int repetitions = 100;
    StudyGrids grids;
    // per-repetition GACV selection; false selects once on the first
    // repetition and reuses the choice
    bool select_per_repetition = true;
    int threads = 0;  // 0 picks a hardware default
};

struct MiseCell {
    EstimatorKind estimator = EstimatorKind::p_cubic;
    double tau = 0.5;
    double mise = 0.0;
    Eigen::VectorXd mse;  // per grid point
    int failures = 0;
};

struct MiseReport {
    NoiseSpec noise;
    int n = 0;
    uint64_t seed = 0;
    int repetitions = 0;
    bool select_per_repetition = true;
    Eigen::VectorXd grid;
    std::vector<MiseCell> cells;
};

MiseReport run_mise_study(const MiseConfig& config);

struct NormalityConfig {
    SimModel model;  // n is taken from n_values
    double tau = 0.5;
    double x = 0.5;
    std::vector<int> n_values{100, 1000};
    int repetitions = 100;
    StudyGrids grids;
    int threads = 0;
};

struct NormalityReport {
    int n = 0;
    double tau = 0.5;
    double x = 0.5;
    std::vector<double> u_sample;       // standardized deviations, one per kept repetition
    Eigen::VectorXd density_grid;       // KDE abscissae
    Eigen::VectorXd density_values;     // KDE of the u sample
    double ks = 0.0;                    // KS distance to N(0,1)
    int excluded = 0;                   // repetitions dropped (fit or plug-in failure)
};

std::vector<NormalityReport> normality_study(const NormalityConfig& config);

// shared worker pool: body(i) for i in [0, count); exceptions propagate
void parallel_for(int count, int threads, const std::function<void(int)>& body);

}  // namespace psqr
