#include "mar/experiment.hpp"

#include "mar/banded.hpp"
#include "mar/errors.hpp"
#include "mar/evalkit.hpp"
#include "mar/parallel.hpp"
#include "mar/rng.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

namespace mar {

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::order: return "order";
        case ExperimentKind::bandwidth: return "bandwidth";
        case ExperimentKind::error: return "error";
        case ExperimentKind::sparse: return "sparse";
    }
    return "unknown";
}

std::string to_string(DesignKind kind) { return kind == DesignKind::banded ? "banded" : "sparse"; }

std::string to_string(Estimator estimator) {
    switch (estimator) {
        case Estimator::alse: return "alse";
        case Estimator::banded: return "banded";
        case Estimator::lasso: return "lasso";
    }
    return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
    if (name == "order") return ExperimentKind::order;
    if (name == "bandwidth") return ExperimentKind::bandwidth;
    if (name == "error") return ExperimentKind::error;
    if (name == "sparse") return ExperimentKind::sparse;
    throw ConfigError("unknown experiment '" + name + "' (expected order, bandwidth, error or sparse)");
}

DesignKind parse_design_kind(const std::string& name) {
    if (name == "banded") return DesignKind::banded;
    if (name == "sparse") return DesignKind::sparse;
    throw ConfigError("unknown design '" + name + "' (expected banded or sparse)");
}

Estimator parse_estimator(const std::string& name) {
    if (name == "alse") return Estimator::alse;
    if (name == "banded") return Estimator::banded;
    if (name == "lasso") return Estimator::lasso;
    throw ConfigError("unknown estimator '" + name + "' (expected alse, banded or lasso)");
}

void ExperimentSpec::validate() const {
    if (n_reps < 1) throw ConfigError("n_reps must be at least 1");
    if (p1 < 1 || p2 < 1) throw ConfigError("dimensions must be positive");
    if (T_values.empty()) throw ConfigError("at least one T value is required");
    for (auto T : T_values) {
        if (T < 3) throw ConfigError("every T must be at least 3");
    }
    if (threads < 1) throw ConfigError("threads must be at least 1");
    if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("rho must lie in (0, 1)");
    if ((kind == ExperimentKind::order || kind == ExperimentKind::bandwidth) && design != DesignKind::banded) {
        throw ConfigError(to_string(kind) + " experiments need the banded design");
    }
    if (kind == ExperimentKind::error && estimators.empty()) throw ConfigError("no estimators listed");
    if (kind == ExperimentKind::sparse && tunings.empty()) throw ConfigError("no tuning methods listed");
    alse.validate();
    try {
        if (design == DesignKind::banded) {
            BandedDesign{p1, p2, band, rho}.validate();
        } else {
            SparseDesign{p1, p2, r1, r2, rho, nonzero_rule}.validate();
        }
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

namespace {

struct Outcome {
    bool ok = false;
    std::string message;
    std::map<std::string, double> values;
};

std::vector<std::string> labels_for(const ExperimentSpec& spec) {
    switch (spec.kind) {
        case ExperimentKind::order:
        case ExperimentKind::bandwidth: return {"banded"};
        case ExperimentKind::error: {
            std::vector<std::string> out;
            for (auto e : spec.estimators) out.push_back(to_string(e));
            return out;
        }
        case ExperimentKind::sparse: {
            std::vector<std::string> out{"alse"};
            for (auto t : spec.tunings) out.push_back(to_string(t));
            return out;
        }
    }
    return {};
}

MarCoefficients draw_truth(const ExperimentSpec& spec, std::uint64_t seed) {
    if (spec.design == DesignKind::banded) return gen_banded_coeffs({spec.p1, spec.p2, spec.band, spec.rho}, seed);
    return gen_sparse_coeffs({spec.p1, spec.p2, spec.r1, spec.r2, spec.rho, spec.nonzero_rule}, seed);
}

void put_errors(Outcome& out, const MarCoefficients& estimate, const MarCoefficients& truth) {
    const auto e = estimation_error(estimate, truth);
    out.values["log_A"] = e.log_A;
    out.values["log_B"] = e.log_B;
    out.values["log_S"] = e.log_S;
}

template <class F>
Outcome attempt(F&& body) {
    Outcome out;
    try {
        body(out);
        out.ok = true;
    } catch (const std::exception& e) {
        out.ok = false;
        out.values.clear();
        out.message = e.what();
    }
    return out;
}

SparseFitResult sparse_fit(const MatrixSeries& series, const ExperimentSpec& spec, TuningKind kind,
                           std::uint64_t seed) {
    TuningMethod tuning = spec.tuning;
    tuning.kind = kind;
    SparseConfig config;
    config.alse = spec.alse;
    config.seed = seed;
    return fit_sparse(series, tuning, config);
}

std::vector<Outcome> run_job(const ExperimentSpec& spec, const std::vector<std::string>& labels, std::size_t rep,
                             std::size_t T) {
    std::vector<Outcome> outcomes(labels.size());
    MarCoefficients truth;
    std::optional<MatrixSeries> generated;
    try {
        truth = draw_truth(spec, derive_seed(spec.seed, {rep, 0}));
        generated = simulate(truth, NoiseSpec{}, T, spec.burn_in, derive_seed(spec.seed, {rep, 1, T}));
    } catch (const std::exception& e) {
        for (auto& o : outcomes) o.message = std::string("data generation failed: ") + e.what();
        return outcomes;
    }
    const MatrixSeries& series = *generated;
    const std::uint64_t fit_seed = derive_seed(spec.seed, {rep, 2, T});

    switch (spec.kind) {
        case ExperimentKind::order:
            outcomes[0] = attempt([&](Outcome& out) {
                BandedConfig config;
                config.alse = spec.alse;
                config.alse.order = UpdateOrder::a_first;
                const auto first = normalize_identification(fit_banded(series, config).coeffs);
                config.alse.order = UpdateOrder::b_first;
                const auto second = normalize_identification(fit_banded(series, config).coeffs);
                out.values["log10_A"] = std::log10((first.A - second.A).norm());
                out.values["log10_B"] = std::log10((first.B - second.B).norm());
            });
            break;
        case ExperimentKind::bandwidth:
            outcomes[0] = attempt([&](Outcome& out) {
                BandedConfig config;
                config.alse = spec.alse;
                const auto fit = fit_banded(series, config);
                out.values["k1_hat"] = fit.band.k1;
                out.values["k2_hat"] = fit.band.k2;
                out.values["hit_k1"] = fit.band.k1 == spec.band.k1 ? 1.0 : 0.0;
                out.values["hit_k2"] = fit.band.k2 == spec.band.k2 ? 1.0 : 0.0;
            });
            break;
        case ExperimentKind::error:
            for (std::size_t i = 0; i < labels.size(); ++i) {
                const Estimator estimator = spec.estimators[i];
                outcomes[i] = attempt([&](Outcome& out) {
                    MarCoefficients estimate;
                    if (estimator == Estimator::alse) {
                        estimate = fit_alse(series, spec.alse).coeffs;
                    } else if (estimator == Estimator::banded) {
                        BandedConfig config;
                        config.alse = spec.alse;
                        estimate = fit_banded(series, config).coeffs;
                    } else {
                        estimate = sparse_fit(series, spec, spec.tunings.front(), fit_seed).coeffs;
                    }
                    put_errors(out, estimate, truth);
                });
            }
            break;
        case ExperimentKind::sparse:
            outcomes[0] = attempt([&](Outcome& out) { put_errors(out, fit_alse(series, spec.alse).coeffs, truth); });
            for (std::size_t i = 1; i < labels.size(); ++i) {
                const TuningKind kind = spec.tunings[i - 1];
                outcomes[i] = attempt([&](Outcome& out) {
                    const auto fit = sparse_fit(series, spec, kind, fit_seed);
                    put_errors(out, fit.coeffs, truth);
                    out.values["cr_A"] = recovery_score(fit.coeffs.A, truth.A).cr;
                    out.values["cr_B"] = recovery_score(fit.coeffs.B, truth.B).cr;
                    out.values["lambda_A"] = fit.lambda_A;
                    out.values["lambda_B"] = fit.lambda_B;
                });
            }
            break;
    }
    return outcomes;
}

double mean_of(const Cell& cell, const std::string& metric) {
    const auto it = cell.metrics.find(metric);
    if (it == cell.metrics.end()) return std::nan("");
    return summarize(it->second).mean;
}

Table build_table(const ExperimentSpec& spec, const std::vector<Cell>& cells) {
    Table table;
    const std::string p1 = std::to_string(spec.p1);
    const std::string p2 = std::to_string(spec.p2);
    switch (spec.kind) {
        case ExperimentKind::order:
            table.columns = {"p1", "p2", "T", "reps", "failures", "log10_A_mean", "log10_A_median", "log10_A_max",
                             "log10_B_mean", "log10_B_median", "log10_B_max"};
            for (const auto& c : cells) {
                const auto a = summarize(c.metrics.count("log10_A") ? c.metrics.at("log10_A") : std::vector<double>{});
                const auto b = summarize(c.metrics.count("log10_B") ? c.metrics.at("log10_B") : std::vector<double>{});
                table.rows.push_back({p1, p2, std::to_string(c.T), std::to_string(c.replicates),
                                      std::to_string(c.failures), format_double(a.mean), format_double(a.median),
                                      format_double(a.max), format_double(b.mean), format_double(b.median),
                                      format_double(b.max)});
            }
            break;
        case ExperimentKind::bandwidth:
            table.columns = {"p1", "p2", "k1", "k2", "T", "reps", "failures", "freq_k1_pct", "freq_k2_pct"};
            for (const auto& c : cells) {
                table.rows.push_back({p1, p2, std::to_string(spec.band.k1), std::to_string(spec.band.k2),
                                      std::to_string(c.T), std::to_string(c.replicates), std::to_string(c.failures),
                                      format_double(100.0 * mean_of(c, "hit_k1")),
                                      format_double(100.0 * mean_of(c, "hit_k2"))});
            }
            break;
        case ExperimentKind::error:
            table.columns = {"estimator", "p1", "p2", "T", "reps", "failures", "log_A_mean", "log_B_mean", "log_S_mean"};
            for (const auto& c : cells) {
                table.rows.push_back({c.label, p1, p2, std::to_string(c.T), std::to_string(c.replicates),
                                      std::to_string(c.failures), format_double(mean_of(c, "log_A")),
                                      format_double(mean_of(c, "log_B")), format_double(mean_of(c, "log_S"))});
            }
            break;
        case ExperimentKind::sparse:
            table.columns = {"method", "p1", "p2", "T", "reps", "failures", "cr_A_mean", "cr_B_mean", "log_S_mean"};
            for (const auto& c : cells) {
                const bool has_cr = c.label != "alse";
                table.rows.push_back({c.label, p1, p2, std::to_string(c.T), std::to_string(c.replicates),
                                      std::to_string(c.failures), has_cr ? format_double(mean_of(c, "cr_A")) : "",
                                      has_cr ? format_double(mean_of(c, "cr_B")) : "",
                                      format_double(mean_of(c, "log_S"))});
            }
            break;
    }
    return table;
}

}  // namespace

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string Table::to_csv() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << '\n';
    }
    return out.str();
}

const Cell* ExperimentResult::find(std::size_t T, const std::string& label) const {
    for (const auto& c : cells) {
        if (c.T == T && c.label == label) return &c;
    }
    return nullptr;
}

ExperimentResult run_monte_carlo(const ExperimentSpec& spec) {
    spec.validate();
    const auto labels = labels_for(spec);
    const std::size_t n_T = spec.T_values.size();
    const std::size_t reps = static_cast<std::size_t>(spec.n_reps);

    std::vector<std::vector<Outcome>> slots(reps * n_T);
    parallel_for(slots.size(), spec.threads, [&](std::size_t job) {
        slots[job] = run_job(spec, labels, job / n_T, spec.T_values[job % n_T]);
    });

    ExperimentResult result;
    for (std::size_t ti = 0; ti < n_T; ++ti) {
        for (std::size_t li = 0; li < labels.size(); ++li) {
            Cell cell;
            cell.T = spec.T_values[ti];
            cell.label = labels[li];
            for (std::size_t rep = 0; rep < reps; ++rep) {
                const auto& outcome = slots[rep * n_T + ti][li];
                ++cell.replicates;
                if (!outcome.ok) {
                    ++cell.failures;
                    cell.failure_messages.push_back("replicate " + std::to_string(rep) + ": " + outcome.message);
                    continue;
                }
                for (const auto& [name, value] : outcome.values) cell.metrics[name].push_back(value);
            }
            result.attempts += cell.replicates;
            result.failures += cell.failures;
            result.cells.push_back(std::move(cell));
        }
    }
    result.table = build_table(spec, result.cells);
    return result;
}

ExperimentResult run_monte_carlo(ExperimentSpec spec, int n_reps, std::uint64_t seed) {
    spec.n_reps = n_reps;
    spec.seed = seed;
    return run_monte_carlo(spec);
}

}  // namespace mar
