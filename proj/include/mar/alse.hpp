#pragma once

#include "mar/matcore.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mar {

/// Which coefficient the alternating loop updates first in each iteration.
/// `a_first` starts from the current B (the B^(0) start), `b_first` from
/// the current A (the A^(0) start).
enum class UpdateOrder { a_first, b_first };

struct AlseConfig {
    double eta = 1e-6;
    int max_iter = 200;
    /// Starting pair; identity start A = I/sqrt(p1) with B from one LS step when empty.
    std::optional<MarCoefficients> init;
    UpdateOrder order = UpdateOrder::a_first;

    void validate() const;
};

struct FitTrace {
    int iterations = 0;
    std::vector<double> delta_A;
    std::vector<double> delta_B;
    /// Residual sum of squares after every half-step, two entries per iteration.
    std::vector<double> objective;
    bool converged = false;
    std::vector<std::string> warnings;
};

struct AlseResult {
    MarCoefficients coeffs;
    FitTrace trace;
};

/// argmin_A sum_t ||Y_t - A Y_{t-1} B'||_F^2.
Matrix ls_step_A(const MatrixSeries& series, const Matrix& B);

/// argmin_B sum_t ||Y_t - A Y_{t-1} B'||_F^2.
Matrix ls_step_B(const MatrixSeries& series, const Matrix& A);

/// Alternating least squares, normalized after every A-update.
AlseResult fit_alse(const MatrixSeries& series, const AlseConfig& config = {});

/// Identity start used when no initializer is provided.
MarCoefficients identity_start(const MatrixSeries& series);

/// Solves G X = rhs for symmetric positive-definite G. Throws
/// IllPosedRegressionError when the condition number exceeds 1e12.
Matrix spd_solve(const Matrix& gram, const Matrix& rhs);

inline constexpr double kMaxCondition = 1e12;

}  // namespace mar
