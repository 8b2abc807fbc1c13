// Command-line surface: fit quantile curves, confidence bands, model
// selection tables, and the Monte Carlo studies, all file-based.

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "psqr/csv.hpp"
#include "psqr/density.hpp"
#include "psqr/inference.hpp"
#include "psqr/selection.hpp"
#include "psqr/sim.hpp"
#include "psqr/solver.hpp"
#include "svg_plot.hpp"

using json = nlohmann::json;
using namespace psqr;

namespace {

constexpr const char* kVersion = "0.1.0";

// post-parse validation failures map to exit status 2
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<double> parse_tau_list(const std::string& arg) {
    std::vector<double> taus;
    std::stringstream ss(arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw UsageError("cannot parse tau value '" + tok + "'");
        }
        if (used != tok.size()) throw UsageError("cannot parse tau value '" + tok + "'");
        if (!(v > 0.0 && v < 1.0)) throw UsageError("tau must lie in (0,1), got " + tok);
        taus.push_back(v);
    }
    if (taus.empty()) throw UsageError("empty tau list");
    return taus;
}

struct InputFrame {
    Dataset data;
    bool rescaled = false;
    double xmin = 0.0;
    double xmax = 1.0;

    double to_original(double t) const { return rescaled ? xmin + t * (xmax - xmin) : t; }
};

InputFrame load_input(const std::string& path, bool rescale) {
    InputFrame frame{read_xy_csv(path)};
    const double lo = frame.data.x.minCoeff();
    const double hi = frame.data.x.maxCoeff();
    if (rescale) {
        if (!(hi > lo)) throw UsageError("cannot rescale: x has zero range");
        frame.rescaled = true;
        frame.xmin = lo;
        frame.xmax = hi;
        frame.data.x = (frame.data.x.array() - lo) / (hi - lo);
    } else if (lo < 0.0 || hi > 1.0) {
        throw UsageError("x values outside [0,1]; pass --rescale to map them by min-max");
    }
    return frame;
}

Eigen::VectorXd unit_grid(int points) {
    Eigen::VectorXd g(points);
    for (int i = 0; i < points; ++i) g[i] = static_cast<double>(i) / (points - 1);
    return g;
}

// all outputs are produced in memory first, then written and renamed
struct OutputBundle {
    std::vector<std::pair<std::string, std::string>> files;
    void add(const std::string& path, std::string content) {
        files.emplace_back(path, std::move(content));
    }
    void commit() const {
        for (const auto& [path, content] : files) atomic_write_file(path, content);
    }
};

struct FitOptions {
    std::string input, output;
    std::string tau_arg = "0.5";
    int degree = 3;
    int penalty_order = 2;
    int knots = 0;  // 0: select over the default grid
    std::string lambda_arg = "gacv";
    bool rescale = false;
    int grid_points = 101;
    double alpha = 0.05;  // band only
    std::string svg_path;
};

struct SelectedFit {
    QuantileFit fit;
    bool selected = false;
    double score = 0.0;
};

SelectedFit fit_one_tau(const Dataset& data, double tau, const FitOptions& opt) {
    if (opt.degree < 0 || opt.degree > 10) throw UsageError("degree must be in [0,10]");
    if (opt.penalty_order < 1) throw UsageError("penalty order must be >= 1");
    if (opt.penalty_order > opt.degree + 1)
        throw UsageError("penalty order must be <= degree+1");

    if (opt.lambda_arg == "gacv") {
        const std::vector<int> Ks =
            opt.knots > 0 ? std::vector<int>{opt.knots} : default_knot_grid();
        const SelectionGrid grid =
            select_model(data, tau, Ks, default_lambda_grid(), opt.degree, opt.penalty_order);
        SelectedFit out{fit_selected(data, tau, grid, opt.degree, opt.penalty_order), true,
                        grid.best_score};
        return out;
    }

    size_t used = 0;
    double lambda = 0.0;
    try {
        lambda = std::stod(opt.lambda_arg, &used);
    } catch (const std::exception&) {
        throw UsageError("lambda must be a number or 'gacv'");
    }
    if (used != opt.lambda_arg.size() || lambda < 0.0)
        throw UsageError("lambda must be a nonnegative number or 'gacv'");
    if (opt.knots <= 0) throw UsageError("--knots is required with a numeric --lambda");

    const BasisSpec spec = build_basis(opt.degree, opt.knots);
    SelectedFit out{QuantileFit{}, false, 0.0};
    if (lambda > 0.0) {
        const PenaltyOperator pen = difference_matrix(opt.penalty_order, spec.dim());
        out.fit = fit_penalized_quantile(data, tau, spec, &pen, lambda);
    } else {
        out.fit = fit_penalized_quantile(data, tau, spec, nullptr, 0.0);
    }
    return out;
}

json fit_manifest_entry(double tau, const SelectedFit& sf) {
    return json{{"tau", tau},
                {"knots", sf.fit.spec.interior_count()},
                {"lambda", sf.fit.lambda},
                {"selected_by_gacv", sf.selected},
                {"gacv_score", sf.selected ? json(sf.score) : json()},
                {"iterations", sf.fit.iterations},
                {"converged", sf.fit.converged},
                {"objective", sf.fit.objective},
                {"alpha_smoothing", sf.fit.alpha}};
}

json common_manifest(const std::string& command, const FitOptions& opt,
                     const InputFrame& frame) {
    json j{{"program", "psqr"},
           {"version", kVersion},
           {"command", command},
           {"input", opt.input},
           {"output", opt.output},
           {"degree", opt.degree},
           {"penalty_order", opt.penalty_order},
           {"grid_points", opt.grid_points},
           {"lambda", opt.lambda_arg},
           {"knots", opt.knots},
           {"rescale", json{{"applied", frame.rescaled},
                            {"x_min", frame.xmin},
                            {"x_max", frame.xmax}}}};
    return j;
}

std::string manifest_path(const std::string& output) { return output + ".manifest.json"; }

int cmd_fit(const FitOptions& opt) {
    const InputFrame frame = load_input(opt.input, opt.rescale);
    const std::vector<double> taus = parse_tau_list(opt.tau_arg);
    if (opt.grid_points < 2) throw UsageError("grid must have at least 2 points");

    std::vector<SelectedFit> fits;
    for (double tau : taus) fits.push_back(fit_one_tau(frame.data, tau, opt));

    const Eigen::VectorXd grid = unit_grid(opt.grid_points);
    std::ostringstream csv;
    csv << "x";
    for (double tau : taus) csv << ",eta_" << format_double(tau);
    csv << '\n';
    for (int i = 0; i < grid.size(); ++i) {
        csv << format_double(frame.to_original(grid[i]));
        for (const auto& sf : fits) csv << ',' << format_double(sf.fit.value(grid[i]));
        csv << '\n';
    }

    json manifest = common_manifest("fit", opt, frame);
    manifest["tau"] = taus;
    manifest["fits"] = json::array();
    for (size_t t = 0; t < taus.size(); ++t)
        manifest["fits"].push_back(fit_manifest_entry(taus[t], fits[t]));

    OutputBundle out;
    out.add(opt.output, csv.str());
    out.add(manifest_path(opt.output), manifest.dump(2) + "\n");
    if (!opt.svg_path.empty()) {
        std::vector<psqr_cli::Series> series(taus.size());
        for (size_t t = 0; t < taus.size(); ++t) {
            series[t].label = "tau=" + format_double(taus[t]);
            for (int i = 0; i < grid.size(); ++i) {
                series[t].x.push_back(frame.to_original(grid[i]));
                series[t].y.push_back(fits[t].fit.value(grid[i]));
            }
        }
        out.add(opt.svg_path, psqr_cli::render_svg(series, nullptr));
    }
    out.commit();
    return 0;
}

int cmd_band(const FitOptions& opt) {
    const InputFrame frame = load_input(opt.input, opt.rescale);
    const std::vector<double> taus = parse_tau_list(opt.tau_arg);
    if (taus.size() != 1) throw UsageError("band expects exactly one tau");
    if (!(opt.alpha > 0.0 && opt.alpha < 1.0)) throw UsageError("alpha must lie in (0,1)");
    if (opt.grid_points < 2) throw UsageError("grid must have at least 2 points");
    const double tau = taus.front();

    const SelectedFit sf = fit_one_tau(frame.data, tau, opt);
    const QuantileFit& fit = sf.fit;
    const DesignMatrix Z = design_matrix(fit.spec, frame.data.x);
    const Eigen::VectorXd resid = frame.data.y - Z.multiply(fit.coef);
    const ConditionalDensityEstimate density = make_conditional_density(frame.data, resid);

    PenaltyOperator pen;
    const PenaltyOperator* pptr = nullptr;
    if (fit.lambda > 0.0) {
        pen = difference_matrix(opt.penalty_order, fit.spec.dim());
        pptr = &pen;
    }
    const Eigen::VectorXd grid = unit_grid(opt.grid_points);
    // the pilot fit reuses the main fit's smoothing parameter
    const InferenceReport report =
        confidence_band(fit, Z, pptr, fit.lambda, density, grid, opt.alpha, fit.lambda);

    std::ostringstream csv;
    csv << "x,eta_hat,b_a_hat,b_lambda_hat,phi_hat,lower,upper,"
           "lower_uncorrected,upper_uncorrected\n";
    for (int i = 0; i < grid.size(); ++i) {
        csv << format_double(frame.to_original(grid[i])) << ','
            << format_double(report.eta_hat[i]) << ',' << format_double(report.b_a_hat[i]) << ','
            << format_double(report.b_lambda_hat[i]) << ',' << format_double(report.phi_hat[i])
            << ',' << format_double(report.lower[i]) << ',' << format_double(report.upper[i])
            << ',' << format_double(report.lower_uncorrected[i]) << ','
            << format_double(report.upper_uncorrected[i]) << '\n';
    }

    json manifest = common_manifest("band", opt, frame);
    manifest["tau"] = json::array({tau});
    manifest["alpha"] = opt.alpha;
    manifest["pilot_lambda"] = fit.lambda;
    manifest["x_bandwidth"] = density.x_bandwidth();
    manifest["y_bandwidth"] = density.y_bandwidth();
    manifest["fits"] = json::array({fit_manifest_entry(tau, sf)});

    OutputBundle out;
    out.add(opt.output, csv.str());
    out.add(manifest_path(opt.output), manifest.dump(2) + "\n");
    if (!opt.svg_path.empty()) {
        psqr_cli::Series eta;
        eta.label = "eta tau=" + format_double(tau);
        psqr_cli::Series center;
        center.label = "bias-corrected";
        psqr_cli::BandShape band;
        for (int i = 0; i < grid.size(); ++i) {
            const double x = frame.to_original(grid[i]);
            eta.x.push_back(x);
            eta.y.push_back(report.eta_hat[i]);
            center.x.push_back(x);
            center.y.push_back(report.eta_hat[i] - report.b_a_hat[i] - report.b_lambda_hat[i]);
            band.x.push_back(x);
            band.lower.push_back(report.lower[i]);
            band.upper.push_back(report.upper[i]);
        }
        out.add(opt.svg_path, psqr_cli::render_svg({eta, center}, &band));
    }
    out.commit();
    return 0;
}

int cmd_select(const FitOptions& opt) {
    const InputFrame frame = load_input(opt.input, opt.rescale);
    const std::vector<double> taus = parse_tau_list(opt.tau_arg);
    if (taus.size() != 1) throw UsageError("select expects exactly one tau");
    const double tau = taus.front();
    if (opt.degree < 0 || opt.degree > 10) throw UsageError("degree must be in [0,10]");
    if (opt.penalty_order < 1 || opt.penalty_order > opt.degree + 1)
        throw UsageError("penalty order must be in [1, degree+1]");

    const std::vector<int> Ks =
        opt.knots > 0 ? std::vector<int>{opt.knots} : default_knot_grid();
    const SelectionGrid grid =
        select_model(frame.data, tau, Ks, default_lambda_grid(), opt.degree, opt.penalty_order);

    std::ostringstream csv;
    csv << "K";
    for (double lam : grid.lambda_values) csv << ",lambda_" << format_double(lam);
    csv << '\n';
    for (size_t ki = 0; ki < grid.K_values.size(); ++ki) {
        csv << grid.K_values[ki];
        for (size_t li = 0; li < grid.lambda_values.size(); ++li)
            csv << ',' << format_double(grid.scores(static_cast<int>(ki), static_cast<int>(li)));
        csv << '\n';
    }

    json manifest = common_manifest("select", opt, frame);
    manifest["tau"] = json::array({tau});
    manifest["K_grid"] = grid.K_values;
    manifest["lambda_grid"] = grid.lambda_values;
    manifest["best"] = json{{"K", grid.best_K},
                            {"lambda", grid.best_lambda},
                            {"score", grid.best_score}};

    OutputBundle out;
    out.add(opt.output, csv.str());
    out.add(manifest_path(opt.output), manifest.dump(2) + "\n");
    out.commit();
    return 0;
}

struct SimulateOptions {
    std::string prefix;
    std::string law = "normal";
    std::vector<int> n_values{100};
    int reps = 100;
    std::string tau_arg = "0.5";
    uint64_t seed = 1;
    std::vector<std::string> estimator_names{"p-cubic", "r-linear", "l-linear"};
    bool normality = false;
    bool select_once = false;
    int threads = 0;
};

EstimatorKind parse_estimator(const std::string& name) {
    if (name == "p-cubic") return EstimatorKind::p_cubic;
    if (name == "r-linear") return EstimatorKind::r_linear;
    if (name == "l-linear") return EstimatorKind::l_linear;
    throw UsageError("unknown estimator '" + name + "'");
}

ErrorLaw parse_law(const std::string& name) {
    if (name == "normal") return ErrorLaw::normal;
    if (name == "exponential") return ErrorLaw::exponential;
    if (name == "cauchy") return ErrorLaw::cauchy;
    throw UsageError("unknown error law '" + name + "'");
}

int cmd_simulate(const SimulateOptions& opt) {
    const std::vector<double> taus = parse_tau_list(opt.tau_arg);
    if (opt.reps < 1) throw UsageError("repetitions must be >= 1");
    if (opt.n_values.empty()) throw UsageError("need at least one sample size");
    for (int n : opt.n_values)
        if (n < 10) throw UsageError("sample sizes must be >= 10");
    std::vector<EstimatorKind> estimators;
    for (const auto& name : opt.estimator_names) estimators.push_back(parse_estimator(name));
    const ErrorLaw law = parse_law(opt.law);

    json manifest{{"program", "psqr"},
                  {"version", kVersion},
                  {"command", "simulate"},
                  {"law", opt.law},
                  {"n", opt.n_values},
                  {"repetitions", opt.reps},
                  {"tau", taus},
                  {"seed", opt.seed},
                  {"estimators", opt.estimator_names},
                  {"select_per_repetition", !opt.select_once},
                  {"normality", opt.normality}};
    manifest["knot_grid"] = default_knot_grid();
    manifest["lambda_grid"] = default_lambda_grid();
    manifest["bandwidth_grid"] = default_bandwidth_grid();

    OutputBundle out;

    std::ostringstream mise_csv;
    mise_csv << "law,n,tau,estimator,repetitions,failures,mise\n";
    std::ostringstream msej_csv;
    msej_csv << "z";
    json cells = json::array();

    std::vector<MiseReport> reports;
    for (int n : opt.n_values) {
        MiseConfig cfg;
        cfg.model.noise = NoiseSpec::standard(law);
        cfg.model.n = n;
        cfg.model.seed = opt.seed;
        cfg.taus = taus;
        cfg.estimators = estimators;
        cfg.repetitions = opt.reps;
        cfg.select_per_repetition = !opt.select_once;
        cfg.threads = opt.threads;
        reports.push_back(run_mise_study(cfg));
    }

    for (size_t r = 0; r < reports.size(); ++r) {
        for (const MiseCell& cell : reports[r].cells) {
            mise_csv << opt.law << ',' << reports[r].n << ',' << format_double(cell.tau) << ','
                     << estimator_name(cell.estimator) << ',' << reports[r].repetitions << ','
                     << cell.failures << ',' << format_double(cell.mise) << '\n';
            msej_csv << ',' << estimator_name(cell.estimator) << "_tau" << format_double(cell.tau)
                     << "_n" << reports[r].n;
            cells.push_back(json{{"law", opt.law},
                                 {"n", reports[r].n},
                                 {"tau", cell.tau},
                                 {"estimator", estimator_name(cell.estimator)},
                                 {"failures", cell.failures},
                                 {"mise", cell.mise}});
        }
    }
    msej_csv << '\n';
    const Eigen::VectorXd zgrid = simulation_grid();
    for (int j = 0; j < zgrid.size(); ++j) {
        msej_csv << format_double(zgrid[j]);
        for (const auto& report : reports)
            for (const MiseCell& cell : report.cells) msej_csv << ',' << format_double(cell.mse[j]);
        msej_csv << '\n';
    }
    manifest["cells"] = cells;

    out.add(opt.prefix + "_mise.csv", mise_csv.str());
    out.add(opt.prefix + "_msej.csv", msej_csv.str());

    if (opt.normality) {
        if (taus.size() != 1) throw UsageError("--normality expects exactly one tau");
        NormalityConfig ncfg;
        ncfg.model.noise = NoiseSpec::standard(law);
        ncfg.model.seed = opt.seed;
        ncfg.tau = taus.front();
        ncfg.n_values = opt.n_values;
        ncfg.repetitions = opt.reps;
        ncfg.threads = opt.threads;
        const std::vector<NormalityReport> nreports = normality_study(ncfg);
        json normality = json::array();
        for (const NormalityReport& rep : nreports) {
            std::ostringstream ucsv;
            ucsv << "u\n";
            for (double u : rep.u_sample) ucsv << format_double(u) << '\n';
            out.add(opt.prefix + "_u_n" + std::to_string(rep.n) + ".csv", ucsv.str());

            std::ostringstream dcsv;
            dcsv << "u,density\n";
            for (int i = 0; i < rep.density_grid.size(); ++i)
                dcsv << format_double(rep.density_grid[i]) << ','
                     << format_double(rep.density_values[i]) << '\n';
            out.add(opt.prefix + "_udensity_n" + std::to_string(rep.n) + ".csv", dcsv.str());

            normality.push_back(json{{"n", rep.n},
                                     {"x", rep.x},
                                     {"kept", rep.u_sample.size()},
                                     {"excluded", rep.excluded},
                                     {"ks_to_normal", rep.ks}});
        }
        manifest["normality_reports"] = normality;
    }

    out.add(opt.prefix + "_manifest.json", manifest.dump(2) + "\n");
    out.commit();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Penalized B-spline quantile regression"};
    app.require_subcommand(1);

    FitOptions fit_opt, band_opt, select_opt;
    SimulateOptions sim_opt;

    auto add_common = [](CLI::App* cmd, FitOptions& opt, bool with_alpha) {
        cmd->add_option("input", opt.input, "input CSV with columns x,y")->required();
        cmd->add_option("output", opt.output, "output CSV path")->required();
        cmd->add_option("--tau", opt.tau_arg, "quantile level(s), comma separated");
        cmd->add_option("--degree", opt.degree, "spline degree p");
        cmd->add_option("--penalty-order", opt.penalty_order, "difference order m");
        cmd->add_option("--knots", opt.knots, "interior interval count K (0 = choose by GACV)");
        cmd->add_option("--lambda", opt.lambda_arg, "smoothing parameter or 'gacv'");
        cmd->add_flag("--rescale", opt.rescale, "min-max rescale x into [0,1]");
        cmd->add_option("--grid", opt.grid_points, "output grid size");
        cmd->add_option("--svg", opt.svg_path, "also render a simple SVG chart");
        if (with_alpha) cmd->add_option("--alpha", opt.alpha, "band miscoverage level");
    };

    CLI::App* fit_cmd = app.add_subcommand("fit", "fit penalized quantile curves");
    add_common(fit_cmd, fit_opt, false);
    CLI::App* band_cmd = app.add_subcommand("band", "bias-corrected confidence band");
    add_common(band_cmd, band_opt, true);
    CLI::App* select_cmd = app.add_subcommand("select", "GACV score table over (K, lambda)");
    add_common(select_cmd, select_opt, false);

    CLI::App* sim_cmd = app.add_subcommand("simulate", "Monte Carlo study with CSV reports");
    sim_cmd->add_option("prefix", sim_opt.prefix, "output path prefix")->required();
    sim_cmd->add_option("--law", sim_opt.law, "error law")
        ->check(CLI::IsMember({"normal", "exponential", "cauchy"}));
    sim_cmd->add_option("--n", sim_opt.n_values, "sample size(s)")->delimiter(',');
    sim_cmd->add_option("--reps", sim_opt.reps, "repetitions per cell");
    sim_cmd->add_option("--tau", sim_opt.tau_arg, "quantile level(s), comma separated");
    sim_cmd->add_option("--seed", sim_opt.seed, "master seed");
    sim_cmd->add_option("--estimators", sim_opt.estimator_names, "subset of p-cubic,r-linear,l-linear")
        ->delimiter(',');
    sim_cmd->add_flag("--normality", sim_opt.normality, "also run the U normality study");
    sim_cmd->add_flag("--select-once", sim_opt.select_once,
                      "select (K, lambda) on the first repetition only");
    sim_cmd->add_option("--threads", sim_opt.threads, "worker threads (0 = auto)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (fit_cmd->parsed()) return cmd_fit(fit_opt);
        if (band_cmd->parsed()) return cmd_band(band_opt);
        if (select_cmd->parsed()) return cmd_select(select_opt);
        if (sim_cmd->parsed()) return cmd_simulate(sim_opt);
        std::fprintf(stderr, "error: no subcommand\n");
        return 2;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const CsvError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const SingularSystem& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
}
