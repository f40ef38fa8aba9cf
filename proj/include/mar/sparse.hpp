#pragma once

#include "mar/alse.hpp"
#include "mar/lasso.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mar {

enum class TuningKind { sdcv, mcv, ksc, fixed };

struct TuningMethod {
    TuningKind kind = TuningKind::ksc;
    int folds = 10;
    FoldScheme fold_scheme = FoldScheme::random;
    int ksc_splits = 50;
    double ksc_alpha = 0.4;
    KscRule ksc_rule = KscRule::smallest;
    /// Used when kind == fixed.
    double lambda_A = 0.0;
    double lambda_B = 0.0;
    int n_lambda = 100;
    double lambda_ratio = 1e-3;

    void validate() const;
};

std::string to_string(TuningKind kind);
TuningKind parse_tuning_kind(const std::string& name);

struct SparseConfig {
    AlseConfig alse;
    LassoOptions lasso;
    bool standardize = true;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct TuningDiagnostics {
    std::vector<double> grid;
    std::vector<double> cv_mean;
    std::vector<double> cv_se;
    std::vector<double> stability;
    double selected = 0.0;
};

struct SparseFitResult {
    MarCoefficients coeffs;
    double lambda_A = 0.0;
    double lambda_B = 0.0;
    double sparsity_A = 0.0;
    double sparsity_B = 0.0;
    FitTrace trace;
    FitTrace init_trace;
    TuningDiagnostics tuning_A;
    TuningDiagnostics tuning_B;
    bool solver_converged = true;
    double max_kkt_residual = 0.0;
};

/// Iterated Lasso. Penalties are selected on the first half-step of each
/// side and then held fixed.
SparseFitResult fit_sparse(const MatrixSeries& series, const TuningMethod& tuning, const SparseConfig& config = {});

/// The explicit vec-form problem for one side: rows stacked over t = 2..T of
/// vec(Y_t) = ((B Y_{t-1}') (x) I) vec(A) (A-side) or
/// vec(Y_t') = ((A Y_{t-1}) (x) I) vec(B) (B-side). Intended for small p.
LassoProblem vec_form_problem(const MatrixSeries& series, Side side, const Matrix& fixed, double lambda);

struct RecoveryScore {
    double cr = 0.0;
    int both_zero = 0;        ///< S1
    int false_positive = 0;   ///< S2
    int both_nonzero = 0;     ///< S3
    int false_negative = 0;   ///< S4
};

RecoveryScore recovery_score(const Matrix& estimate, const Matrix& truth);

/// Proportion of exactly-zero entries.
double zero_proportion(const Matrix& m);

}  // namespace mar
