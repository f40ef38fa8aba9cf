#pragma once

#include "mar/errors.hpp"
#include "mar/matcore.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace mar {

/// Natural-log Frobenius errors of one estimate. An exact match gives -inf.
struct EstimationError {
    double log_A = 0.0;
    double log_B = 0.0;
    double log_S = 0.0;
};

/// Normalizes both pairs, then log ||A^ - A||_F, log ||B^ - B||_F and
/// log ||B^ (x) A^ - B (x) A||_F.
EstimationError estimation_error(const MarCoefficients& estimate, const MarCoefficients& truth);

struct Summary {
    double mean = 0.0;
    double median = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

/// Mean, median and maximum; an empty input gives NaN fields.
Summary summarize(std::vector<double> values);

/// Per-replicate estimation errors.
struct ErrorReport {
    std::vector<double> err_A;
    std::vector<double> err_B;
    std::vector<double> err_S;

    void add(const EstimationError& e);
    Summary summary_A() const { return summarize(err_A); }
    Summary summary_B() const { return summarize(err_B); }
    Summary summary_S() const { return summarize(err_S); }
};

/// A^ Y_t B^'.
Matrix one_step_forecast(const MarCoefficients& coeffs, const Matrix& y);

/// max_j sum_i |h_ij|
double matrix_one_norm(const Matrix& m);

using Fitter = std::function<MarCoefficients(const MatrixSeries&)>;

struct ForecastOptions {
    /// Square the Frobenius errors before averaging (conventional MSE).
    bool squared_frobenius = false;
    /// Entrywise absolute sum instead of the max-column-sum matrix 1-norm.
    bool entrywise_l1 = false;
};

struct ForecastReport {
    std::vector<std::size_t> origins;   ///< 1-based t; each forecasts Y_{t+1}
    std::vector<double> fro_error;      ///< ||Y^_{t+1} - Y_{t+1}||_F per origin
    std::vector<double> one_error;      ///< ||Y^_{t+1} - Y_{t+1}||_1 per origin
    double pmse = 0.0;                  ///< sum fro / (p1 p2 n)
    double pmae = 0.0;                  ///< sum one / (p1 p2 n)
    double mean_fro = 0.0;              ///< sum fro / n
    double mean_one = 0.0;              ///< sum one / n
};

/// Raised when a fitter fails at a forecast origin.
class FitFailure : public Error {
public:
    FitFailure(std::size_t origin, const std::string& cause)
        : Error("fit failed at origin t = " + std::to_string(origin) + ": " + cause), origin_(origin) {}
    std::size_t origin() const noexcept { return origin_; }

private:
    std::size_t origin_;
};

/// Fits once on Y_1..Y_split and forecasts Y_{t+1} for t = split..T-1.
ForecastReport holdout_forecast_eval(const MatrixSeries& series, std::size_t split, const Fitter& fitter,
                                     const ForecastOptions& options = {});

/// For t = start..end refits on Y_1..Y_t and forecasts Y_{t+1}.
ForecastReport rolling_forecast_eval(const MatrixSeries& series, std::size_t start, std::size_t end,
                                     const Fitter& fitter, const ForecastOptions& options = {});

}  // namespace mar
