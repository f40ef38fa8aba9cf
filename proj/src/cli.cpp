#include "mar/cli.hpp"

#include "mar/alse.hpp"
#include "mar/banded.hpp"
#include "mar/errors.hpp"
#include "mar/evalkit.hpp"
#include "mar/experiment.hpp"
#include "mar/io.hpp"
#include "mar/rng.hpp"
#include "mar/simgen.hpp"
#include "mar/sparse.hpp"
#include "mar/version.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

namespace mar::cli {

namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
    std::uint64_t seed = 1;
    int threads = 1;
    std::string output_dir = ".";
};

struct SimulateOptions {
    std::string design;
    int p1 = 0;
    int p2 = 0;
    int k1 = 1;
    int k2 = 1;
    double r1 = 0.3;
    double r2 = 0.3;
    std::string nonzero_rule = "floor";
    long long T = 0;
    std::optional<double> rho;
    int burn_in = kDefaultBurnIn;
    std::string series_name = "series.csv";
    std::string model_name = "truth.model";
};

struct FitOptions {
    std::string series;
    std::string method;
    double eta = 1e-6;
    int max_iter = 200;
    std::string order = "a-first";
    std::optional<int> kmax_a;
    std::optional<int> kmax_b;
    bool include_zero = false;
    std::string tuning = "ksc";
    std::optional<double> lambda_a;
    std::optional<double> lambda_b;
    int folds = 10;
    std::string fold_scheme = "random";
    int ksc_splits = 50;
    double ksc_alpha = 0.4;
    std::string ksc_rule = "smallest";
    int n_lambda = 100;
    double lambda_ratio = 1e-3;
    bool no_standardize = false;
    std::string model_name = "fit.model";
};

struct ForecastCliOptions {
    std::string series;
    std::string model;
    std::string mode;
    std::optional<long long> split;
    std::optional<long long> start;
    std::optional<long long> end;
    bool fixed_coefficients = false;
    bool squared = false;
    bool entrywise = false;
    std::string table_name = "forecast.csv";
    std::string summary_name = "forecast_summary.csv";
};

struct BenchmarkOptions {
    std::string config;
};

std::string shape(Eigen::Index rows, Eigen::Index cols) {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

std::string output_path(const GlobalOptions& g, const std::string& name) {
    return (fs::path(g.output_dir) / name).string();
}

void prepare_output_dir(const GlobalOptions& g) {
    std::error_code ec;
    fs::create_directories(g.output_dir, ec);
    if (ec || !fs::is_directory(g.output_dir)) throw Error("cannot create output directory '" + g.output_dir + "'");
}

ModelFile model_from(const MarCoefficients& coeffs, const std::string& estimator, const FitTrace& trace,
                     std::uint64_t seed) {
    ModelFile m;
    m.coeffs = coeffs;
    m.estimator = estimator;
    m.iterations = trace.iterations;
    m.converged = trace.converged;
    m.final_delta_A = trace.delta_A.empty() ? 0.0 : trace.delta_A.back();
    m.final_delta_B = trace.delta_B.empty() ? 0.0 : trace.delta_B.back();
    m.seed = seed;
    return m;
}

std::string tuning_table(const TuningDiagnostics& d) {
    std::ostringstream out;
    out << "lambda,cv_mean,cv_se,stability\n";
    for (std::size_t i = 0; i < d.grid.size(); ++i) {
        out << format_double(d.grid[i]) << ',' << (i < d.cv_mean.size() ? format_double(d.cv_mean[i]) : "") << ','
            << (i < d.cv_se.size() ? format_double(d.cv_se[i]) : "") << ','
            << (i < d.stability.size() ? format_double(d.stability[i]) : "") << '\n';
    }
    return out.str();
}

int cmd_simulate(const SimulateOptions& o, const GlobalOptions& g, const CLI::App& sub, std::ostream& out) {
    if (o.T < 2) throw ConfigError("--T must be at least 2");
    if (o.burn_in < 0) throw ConfigError("--burn-in must be non-negative");
    const bool banded = o.design == "banded";
    if (banded && (sub.count("--r1") || sub.count("--r2") || sub.count("--nonzero-rule"))) {
        throw ConfigError("--r1/--r2/--nonzero-rule apply to the sparse design only");
    }
    if (!banded && (sub.count("--k1") || sub.count("--k2"))) {
        throw ConfigError("--k1/--k2 apply to the banded design only");
    }
    MarCoefficients truth;
    const std::uint64_t truth_seed = derive_seed(g.seed, {0});
    try {
        truth = banded ? gen_banded_coeffs({o.p1, o.p2, {o.k1, o.k2}, o.rho.value_or(0.5)}, truth_seed)
                       : gen_sparse_coeffs({o.p1, o.p2, o.r1, o.r2, o.rho.value_or(0.9),
                                             o.nonzero_rule == "nearest" ? NonzeroRule::nearest : NonzeroRule::floor},
                                            truth_seed);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    const auto series = simulate(truth, NoiseSpec{}, static_cast<std::size_t>(o.T),
                                 static_cast<std::size_t>(o.burn_in), derive_seed(g.seed, {1}));
    ModelFile model;
    model.coeffs = truth;
    model.estimator = "truth";
    model.converged = true;
    model.seed = g.seed;
    if (banded) model.band = BandSpec{o.k1, o.k2};

    prepare_output_dir(g);
    const auto series_path = output_path(g, o.series_name);
    const auto model_path = output_path(g, o.model_name);
    write_series_file(series_path, series);
    write_model_file(model_path, model);
    out << "design: " << o.design << '\n'
        << "dimensions: " << o.p1 << " x " << o.p2 << ", T = " << o.T << '\n'
        << "rho(A) rho(B): " << format_double(spectral_radius(truth.A) * spectral_radius(truth.B)) << '\n'
        << "series: " << series_path << '\n'
        << "model: " << model_path << '\n';
    return kSuccess;
}

AlseConfig alse_config(const FitOptions& o) {
    AlseConfig c;
    c.eta = o.eta;
    c.max_iter = o.max_iter;
    c.order = o.order == "b-first" ? UpdateOrder::b_first : UpdateOrder::a_first;
    c.validate();
    return c;
}

TuningMethod tuning_method(const FitOptions& o) {
    TuningMethod t;
    t.kind = parse_tuning_kind(o.tuning);
    t.folds = o.folds;
    t.fold_scheme = o.fold_scheme == "contiguous" ? FoldScheme::contiguous : FoldScheme::random;
    t.ksc_splits = o.ksc_splits;
    t.ksc_alpha = o.ksc_alpha;
    t.ksc_rule = o.ksc_rule == "largest" ? KscRule::largest : KscRule::smallest;
    t.n_lambda = o.n_lambda;
    t.lambda_ratio = o.lambda_ratio;
    if (t.kind == TuningKind::fixed) {
        if (!o.lambda_a || !o.lambda_b) throw ConfigError("--tuning fixed needs --lambda-a and --lambda-b");
        t.lambda_A = *o.lambda_a;
        t.lambda_B = *o.lambda_b;
    } else if (o.lambda_a || o.lambda_b) {
        throw ConfigError("--lambda-a/--lambda-b need --tuning fixed");
    }
    t.validate();
    return t;
}

int cmd_fit(const FitOptions& o, const GlobalOptions& g, std::ostream& out) {
    const AlseConfig alse = alse_config(o);
    const bool lasso = o.method == "lasso";
    const bool banded = o.method == "banded";
    if (!banded && (o.kmax_a || o.kmax_b || o.include_zero)) {
        throw ConfigError("bandwidth flags apply to --method banded only");
    }
    std::optional<TuningMethod> tuning;
    if (lasso) tuning = tuning_method(o);

    const MatrixSeries series = read_series_file(o.series);

    ModelFile model;
    std::optional<SparseFitResult> sparse;
    std::vector<std::string> warnings;
    if (o.method == "alse") {
        const auto fit = fit_alse(series, alse);
        model = model_from(fit.coeffs, "alse", fit.trace, g.seed);
        warnings = fit.trace.warnings;
    } else if (banded) {
        BandedConfig config;
        config.alse = alse;
        config.k_max_A = o.kmax_a;
        config.k_max_B = o.kmax_b;
        config.include_zero = o.include_zero;
        const auto fit = fit_banded(series, config);
        model = model_from(fit.coeffs, "banded", fit.trace, g.seed);
        model.band = fit.band;
        warnings = fit.init_trace.warnings;
    } else {
        SparseConfig config;
        config.alse = alse;
        config.standardize = !o.no_standardize;
        config.seed = g.seed;
        config.threads = g.threads;
        sparse = fit_sparse(series, *tuning, config);
        model = model_from(sparse->coeffs, "lasso", sparse->trace, g.seed);
        model.lambda_A = sparse->lambda_A;
        model.lambda_B = sparse->lambda_B;
        model.tuning = to_string(tuning->kind);
        warnings = sparse->init_trace.warnings;
    }

    prepare_output_dir(g);
    const auto model_path = output_path(g, o.model_name);
    std::vector<std::string> dumps;
    if (sparse && tuning->kind != TuningKind::fixed) {
        dumps = {output_path(g, "tuning_A.csv"), output_path(g, "tuning_B.csv")};
        write_text_file(dumps[0], tuning_table(sparse->tuning_A));
        write_text_file(dumps[1], tuning_table(sparse->tuning_B));
    }
    write_model_file(model_path, model);

    out << "estimator: " << model.estimator << '\n'
        << "dimensions: " << series.rows() << " x " << series.cols() << ", T = " << series.length() << '\n'
        << "iterations: " << model.iterations << '\n'
        << "converged: " << (model.converged ? "yes" : "no") << '\n';
    if (model.band) out << "bandwidth: k1 = " << model.band->k1 << ", k2 = " << model.band->k2 << '\n';
    if (sparse) {
        out << "tuning: " << model.tuning << '\n'
            << "lambda_A: " << format_double(sparse->lambda_A) << '\n'
            << "lambda_B: " << format_double(sparse->lambda_B) << '\n';
        if (!sparse->tuning_A.stability.empty()) {
            out << "stability_A:";
            for (double s : sparse->tuning_A.stability) out << ' ' << format_double(s);
            out << "\nstability_B:";
            for (double s : sparse->tuning_B.stability) out << ' ' << format_double(s);
            out << '\n';
        }
        if (!sparse->solver_converged) out << "warning: coordinate descent hit its pass limit\n";
    }
    out << "sparsity_A: " << format_double(zero_proportion(model.coeffs.A)) << '\n'
        << "sparsity_B: " << format_double(zero_proportion(model.coeffs.B)) << '\n';
    for (const auto& w : warnings) out << "warning: " << w << '\n';
    for (const auto& d : dumps) out << "tuning table: " << d << '\n';
    out << "model: " << model_path << '\n';
    return kSuccess;
}

Fitter refit_with(const ModelFile& model, const GlobalOptions& g) {
    if (model.estimator == "alse") {
        return [](const MatrixSeries& s) { return fit_alse(s).coeffs; };
    }
    if (model.estimator == "banded") {
        return [](const MatrixSeries& s) { return fit_banded(s).coeffs; };
    }
    if (model.estimator == "lasso") {
        if (!model.lambda_A || !model.lambda_B) throw ParseError("lasso model lacks its penalties", 0);
        TuningMethod tuning;
        tuning.kind = TuningKind::fixed;
        tuning.lambda_A = *model.lambda_A;
        tuning.lambda_B = *model.lambda_B;
        SparseConfig config;
        config.seed = g.seed;
        return [tuning, config](const MatrixSeries& s) { return fit_sparse(s, tuning, config).coeffs; };
    }
    throw ConfigError("model estimator '" + model.estimator +
                      "' cannot be refitted; pass --fixed-coefficients to use the stored matrices");
}

int cmd_forecast(const ForecastCliOptions& o, const GlobalOptions& g, std::ostream& out) {
    const bool holdout = o.mode == "holdout";
    if (holdout && (o.start || o.end)) throw ConfigError("--start/--end apply to --mode rolling only");
    if (!holdout && o.split) throw ConfigError("--split applies to --mode holdout only");
    if (holdout && !o.split) throw ConfigError("--mode holdout needs --split");
    if (!holdout && (!o.start || !o.end)) throw ConfigError("--mode rolling needs --start and --end");

    const MatrixSeries series = read_series_file(o.series);
    const ModelFile model = read_model_file(o.model);
    if (model.coeffs.A.rows() != series.rows() || model.coeffs.B.rows() != series.cols()) {
        throw DimensionError("model coefficients are " + shape(model.coeffs.A.rows(), model.coeffs.A.cols()) +
                             " and " + shape(model.coeffs.B.rows(), model.coeffs.B.cols()) +
                             " but series observations are " + shape(series.rows(), series.cols()));
    }
    const long long T = static_cast<long long>(series.length());
    if (holdout && (*o.split < 2 || *o.split >= T)) {
        throw ConfigError("--split must satisfy 2 <= split < T = " + std::to_string(T));
    }
    if (!holdout && (*o.start < 2 || *o.start > *o.end || *o.end >= T)) {
        throw ConfigError("--start/--end must satisfy 2 <= start <= end < T = " + std::to_string(T));
    }

    const bool fixed = o.fixed_coefficients || model.estimator == "truth";
    const MarCoefficients stored = model.coeffs;
    const Fitter fitter = fixed ? Fitter([stored](const MatrixSeries&) { return stored; }) : refit_with(model, g);
    ForecastOptions fo;
    fo.squared_frobenius = o.squared;
    fo.entrywise_l1 = o.entrywise;
    const ForecastReport report =
        holdout ? holdout_forecast_eval(series, static_cast<std::size_t>(*o.split), fitter, fo)
                : rolling_forecast_eval(series, static_cast<std::size_t>(*o.start), static_cast<std::size_t>(*o.end),
                                        fitter, fo);

    std::ostringstream table;
    table << "origin,target,fro_error,one_error\n";
    for (std::size_t i = 0; i < report.origins.size(); ++i) {
        table << report.origins[i] << ',' << report.origins[i] + 1 << ',' << format_double(report.fro_error[i]) << ','
              << format_double(report.one_error[i]) << '\n';
    }
    std::ostringstream summary;
    summary << "mode,origins,pmse,pmae,mean_fro,mean_one,squared_frobenius,entrywise_l1\n"
            << o.mode << ',' << report.origins.size() << ',' << format_double(report.pmse) << ','
            << format_double(report.pmae) << ',' << format_double(report.mean_fro) << ','
            << format_double(report.mean_one) << ',' << (o.squared ? 1 : 0) << ',' << (o.entrywise ? 1 : 0) << '\n';

    prepare_output_dir(g);
    const auto table_path = output_path(g, o.table_name);
    const auto summary_path = output_path(g, o.summary_name);
    write_text_file(table_path, table.str());
    write_text_file(summary_path, summary.str());
    out << "mode: " << o.mode << '\n'
        << "coefficients: " << (fixed ? "stored" : "refitted with " + model.estimator) << '\n'
        << "origins: " << report.origins.size() << '\n'
        << "pmse: " << format_double(report.pmse) << '\n'
        << "pmae: " << format_double(report.pmae) << '\n'
        << "mean_fro: " << format_double(report.mean_fro) << '\n'
        << "mean_one: " << format_double(report.mean_one) << '\n'
        << "table: " << table_path << '\n'
        << "summary: " << summary_path << '\n';
    return kSuccess;
}

std::string manifest_text(const ExperimentConfig& config, const ExperimentResult& result) {
    const auto& spec = config.spec;
    std::ostringstream m;
    m << "format mar-benchmark-manifest/1\n"
      << "library_version " << kVersion << '\n'
      << "experiment " << to_string(spec.kind) << '\n'
      << "design " << to_string(spec.design) << '\n'
      << "seed " << spec.seed << '\n'
      << "n_reps " << spec.n_reps << '\n'
      << "truth_seed derive_seed(seed, {replicate, 0})\n"
      << "series_seed derive_seed(seed, {replicate, 1, T})\n"
      << "fit_seed derive_seed(seed, {replicate, 2, T})\n"
      << "attempts " << result.attempts << '\n'
      << "failures " << result.failures << '\n'
      << "table " << config.output << '\n';
    for (const auto& cell : result.cells) {
        for (const auto& msg : cell.failure_messages) {
            m << "failure T=" << cell.T << " label=" << cell.label << ' ' << msg << '\n';
        }
    }
    return m.str();
}

int cmd_benchmark(const BenchmarkOptions& o, const GlobalOptions& g, bool seed_given, std::ostream& out) {
    ExperimentConfig config = read_experiment_config(o.config);
    config.spec.threads = g.threads;
    if (seed_given) config.spec.seed = g.seed;
    const auto result = run_monte_carlo(config.spec);

    prepare_output_dir(g);
    const auto table_path = output_path(g, config.output);
    const auto manifest_path = table_path + ".manifest";
    write_text_file(table_path, result.table.to_csv());
    write_text_file(manifest_path, manifest_text(config, result));
    out << result.table.to_csv() << "replicates: " << result.attempts << ", failures: " << result.failures << '\n'
        << "table: " << table_path << '\n'
        << "manifest: " << manifest_path << '\n';
    return result.failures == result.attempts ? kNumericalError : kSuccess;
}

}  // namespace

int exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e)) return kUsageError;
    if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const DimensionError*>(&e)) return kDataError;
    if (dynamic_cast<const IllPosedRegressionError*>(&e) || dynamic_cast<const TuningError*>(&e) ||
        dynamic_cast<const DegenerateCoefficientError*>(&e) || dynamic_cast<const StationarityError*>(&e) ||
        dynamic_cast<const FitFailure*>(&e)) {
        return kNumericalError;
    }
    if (dynamic_cast<const Error*>(&e)) return kDataError;
    return kNumericalError;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Estimation, simulation and forecasting for matrix autoregressive models", "mar"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    GlobalOptions g;
    app.add_option("--seed", g.seed, "Base seed for all randomness");
    app.add_option("--threads", g.threads, "Worker threads (output does not depend on this)")
        ->check(CLI::PositiveNumber);
    app.add_option("--output-dir", g.output_dir, "Directory for written files");

    SimulateOptions so;
    auto* sim = app.add_subcommand("simulate", "Draw true coefficients and simulate a series");
    sim->fallthrough();
    sim->add_option("--design", so.design, "banded or sparse")->required()->check(CLI::IsMember({"banded", "sparse"}));
    sim->add_option("--p1", so.p1, "Rows of each observation")->required();
    sim->add_option("--p2", so.p2, "Columns of each observation")->required();
    sim->add_option("--k1", so.k1, "Bandwidth of A (banded design)");
    sim->add_option("--k2", so.k2, "Bandwidth of B (banded design)");
    sim->add_option("--r1", so.r1, "Nonzero proportion per row of A (sparse design)");
    sim->add_option("--r2", so.r2, "Nonzero proportion per row of B (sparse design)");
    sim->add_option("--nonzero-rule", so.nonzero_rule, "floor or nearest count of nonzeros per row")
        ->check(CLI::IsMember({"floor", "nearest"}));
    sim->add_option("--T", so.T, "Series length")->required();
    sim->add_option("--rho", so.rho, "Target rho(A) rho(B); 0.5 banded, 0.9 sparse by default");
    sim->add_option("--burn-in", so.burn_in, "Discarded warm-up steps");
    sim->add_option("--series-name", so.series_name, "Series file name inside the output directory");
    sim->add_option("--model-name", so.model_name, "Truth model file name inside the output directory");

    FitOptions fo;
    auto* fit = app.add_subcommand("fit", "Fit a model to a series file");
    fit->fallthrough();
    fit->add_option("series", fo.series, "Series CSV")->required();
    fit->add_option("--method", fo.method, "alse, banded or lasso")
        ->required()
        ->check(CLI::IsMember({"alse", "banded", "lasso"}));
    fit->add_option("--eta", fo.eta, "Convergence threshold");
    fit->add_option("--max-iter", fo.max_iter, "Iteration limit");
    fit->add_option("--order", fo.order, "a-first or b-first")->check(CLI::IsMember({"a-first", "b-first"}));
    fit->add_option("--kmax-a", fo.kmax_a, "Largest bandwidth searched for A");
    fit->add_option("--kmax-b", fo.kmax_b, "Largest bandwidth searched for B");
    fit->add_flag("--include-zero", fo.include_zero, "Also consider bandwidth 0");
    fit->add_option("--tuning", fo.tuning, "sdcv, mcv, ksc or fixed")
        ->check(CLI::IsMember({"sdcv", "mcv", "ksc", "fixed"}));
    fit->add_option("--lambda-a", fo.lambda_a, "Fixed penalty for A");
    fit->add_option("--lambda-b", fo.lambda_b, "Fixed penalty for B");
    fit->add_option("--folds", fo.folds, "Cross-validation folds");
    fit->add_option("--fold-scheme", fo.fold_scheme, "random or contiguous")
        ->check(CLI::IsMember({"random", "contiguous"}));
    fit->add_option("--ksc-splits", fo.ksc_splits, "Half-splits per penalty");
    fit->add_option("--ksc-alpha", fo.ksc_alpha, "Stability tolerance");
    fit->add_option("--ksc-rule", fo.ksc_rule, "smallest or largest")->check(CLI::IsMember({"smallest", "largest"}));
    fit->add_option("--n-lambda", fo.n_lambda, "Penalty grid size");
    fit->add_option("--lambda-ratio", fo.lambda_ratio, "Smallest over largest grid penalty");
    fit->add_flag("--no-standardize", fo.no_standardize, "Use unit penalty weights");
    fit->add_option("--model-name", fo.model_name, "Model file name inside the output directory");

    ForecastCliOptions fc;
    auto* fcst = app.add_subcommand("forecast", "One-step-ahead forecast evaluation");
    fcst->fallthrough();
    fcst->add_option("series", fc.series, "Series CSV")->required();
    fcst->add_option("model", fc.model, "Model file")->required();
    fcst->add_option("--mode", fc.mode, "holdout or rolling")->required()->check(CLI::IsMember({"holdout", "rolling"}));
    fcst->add_option("--split", fc.split, "Training length for holdout");
    fcst->add_option("--start", fc.start, "First rolling origin");
    fcst->add_option("--end", fc.end, "Last rolling origin");
    fcst->add_flag("--fixed-coefficients", fc.fixed_coefficients, "Use the stored matrices instead of refitting");
    fcst->add_flag("--squared", fc.squared, "Square Frobenius errors before averaging");
    fcst->add_flag("--entrywise-l1", fc.entrywise, "Entrywise absolute sum instead of the matrix 1-norm");
    fcst->add_option("--table-name", fc.table_name, "Per-origin table file name");
    fcst->add_option("--summary-name", fc.summary_name, "Aggregate table file name");

    BenchmarkOptions bo;
    auto* bench = app.add_subcommand("benchmark", "Run a Monte Carlo experiment from a config file");
    bench->fallthrough();
    bench->add_option("config", bo.config, "Experiment config")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsageError;
    }

    try {
        if (sim->parsed()) return cmd_simulate(so, g, *sim, out);
        if (fit->parsed()) return cmd_fit(fo, g, out);
        if (fcst->parsed()) return cmd_forecast(fc, g, out);
        if (bench->parsed()) return cmd_benchmark(bo, g, app.count("--seed") > 0, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return kUsageError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"mar"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace mar::cli
