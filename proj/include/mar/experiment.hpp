#pragma once

#include "mar/alse.hpp"
#include "mar/simgen.hpp"
#include "mar/sparse.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mar {

enum class ExperimentKind {
    order,      ///< log10 discrepancy between the two update orders of the banded fit
    bandwidth,  ///< frequency of exact bandwidth recovery
    error,      ///< log estimation errors per estimator
    sparse,     ///< recovery accuracy and product error per tuning method
};

enum class DesignKind { banded, sparse };
enum class Estimator { alse, banded, lasso };

std::string to_string(ExperimentKind kind);
std::string to_string(DesignKind kind);
std::string to_string(Estimator estimator);
ExperimentKind parse_experiment_kind(const std::string& name);
DesignKind parse_design_kind(const std::string& name);
Estimator parse_estimator(const std::string& name);

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::error;
    DesignKind design = DesignKind::banded;
    Eigen::Index p1 = 6;
    Eigen::Index p2 = 4;
    BandSpec band{1, 1};
    double r1 = 0.3;
    double r2 = 0.3;
    NonzeroRule nonzero_rule = NonzeroRule::floor;
    double rho = 0.5;
    std::vector<std::size_t> T_values{400};
    /// Estimators compared by the error experiment.
    std::vector<Estimator> estimators{Estimator::alse, Estimator::banded};
    /// Tuning methods compared by the sparse experiment, and the first one
    /// is used by a lasso entry of the error experiment.
    std::vector<TuningKind> tunings{TuningKind::ksc};
    /// Fold count, split count, alpha and grid shared by every tuning method.
    TuningMethod tuning;
    AlseConfig alse;
    int n_reps = 100;
    std::uint64_t seed = 1;
    std::size_t burn_in = kDefaultBurnIn;
    int threads = 1;

    void validate() const;
};

/// One (T, label) configuration. Metric vectors hold one value per
/// successful replicate, in replicate order.
struct Cell {
    std::size_t T = 0;
    std::string label;
    int replicates = 0;
    int failures = 0;
    std::map<std::string, std::vector<double>> metrics;
    std::vector<std::string> failure_messages;
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::string to_csv() const;
};

struct ExperimentResult {
    std::vector<Cell> cells;
    Table table;
    int attempts = 0;
    int failures = 0;

    /// Nullptr when the pair is absent.
    const Cell* find(std::size_t T, const std::string& label) const;
};

/// Replicate r draws its truth from derive_seed(seed, {r, 0}) (shared by all
/// T) and its series from derive_seed(seed, {r, 1, T}). Results do not
/// depend on spec.threads.
ExperimentResult run_monte_carlo(const ExperimentSpec& spec);
ExperimentResult run_monte_carlo(ExperimentSpec spec, int n_reps, std::uint64_t seed);

/// Round-trip decimal text of a double ("%.17g"), with "inf"/"-inf"/"nan".
std::string format_double(double value);

}  // namespace mar
