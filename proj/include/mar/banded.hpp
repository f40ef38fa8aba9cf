#pragma once

#include "mar/alse.hpp"
#include "mar/matcore.hpp"

#include <optional>
#include <vector>

namespace mar {

enum class Side { A, B };

/// Row-wise regression form of one half-step, stacked over lag pairs t = 2..T.
///
/// A-side (B fixed): block t of `design` is B Y_{t-1}' (p2 x p1) and block t
/// of `responses` is Y_t', so column j of `responses` regressed on `design`
/// estimates row j of A. B-side (A fixed): blocks A Y_{t-1} and Y_t, giving
/// the rows of B. Both sides share one design across all rows.
struct StackedDesign {
    Matrix design;
    Matrix responses;
    Eigen::Index rows_per_pair = 0;
    Eigen::Index pairs = 0;

    Eigen::Index dimension() const noexcept { return design.cols(); }
};

StackedDesign stack_side(const MatrixSeries& series, Side side, const Matrix& fixed);

/// v_j = X_{j,k} beta_{j,k} + f_j for one row j at bandwidth k.
struct RowRegression {
    Vector response;
    Matrix design;
    int row = 1;         ///< 1-based row index j
    int bandwidth = 0;
    int first_col = 0;   ///< 0-based index of the first design column, max(1, j-k) - 1
};

/// Nonzeros in row j (1-based) of a p x p matrix with bandwidth k.
int tau_count(int j, int k, int p);

RowRegression row_regression(const StackedDesign& stacked, int j, int k);
RowRegression build_row_regression_A(const MatrixSeries& series, const Matrix& B_hat, int j, int k);
RowRegression build_row_regression_B(const MatrixSeries& series, const Matrix& A_hat, int j, int k);

struct RowFit {
    Vector beta;
    double rss = 0.0;
    double bic = 0.0;
};

/// Least-squares fit of a row regression with its BIC
///   log RSS + (log log T2 / T2) tau log(max(p, T2)),  T2 = p_other * T_eff.
/// RSS is floored before the log so exact fits give a finite score.
RowFit bic_row(const RowRegression& reg, int p, int T_eff);

/// Floor applied to RSS before taking the log.
double rss_floor(const Vector& response);

struct BicTrace {
    std::vector<int> candidates;   ///< bandwidth grid, ascending
    Matrix rss;                    ///< rows x candidates
    Matrix bic;                    ///< rows x candidates
    std::vector<int> row_choice;   ///< argmin per row
    int k_max = 0;
    int k_hat = 0;
};

struct BandwidthSelection {
    int k_hat = 0;
    BicTrace trace;
};

/// K_max default min(ceil(sqrt(T)), p - 1).
int default_k_max(std::size_t T, Eigen::Index p);

BandwidthSelection select_bandwidth(const StackedDesign& stacked, int T_eff, int k_max,
                                    bool include_zero = false);
BandwidthSelection select_bandwidth(const MatrixSeries& series, const Matrix& fixed_coeff, Side side,
                                    int k_max, bool include_zero = false);

/// Banded LS refit of every row at common bandwidth k. Entries outside the
/// band are exactly zero.
Matrix refit_banded(const StackedDesign& stacked, int k);

struct BandedConfig {
    AlseConfig alse;
    std::optional<int> k_max_A;
    std::optional<int> k_max_B;
    bool include_zero = false;
};

struct BandedFitResult {
    MarCoefficients coeffs;
    BandSpec band;
    FitTrace trace;
    FitTrace init_trace;
    std::vector<BicTrace> bic_A;   ///< one per iteration
    std::vector<BicTrace> bic_B;
};

/// Banded iterated least squares with BIC bandwidth selection. Step 1 is
/// fit_alse; `config.alse.order` controls the order inside step 2.
BandedFitResult fit_banded(const MatrixSeries& series, const BandedConfig& config = {});

}  // namespace mar
