#include "mar/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mar {

namespace {

void add_error(const Matrix& estimate, const Matrix& truth, const ForecastOptions& options, ForecastReport& report) {
    const Matrix diff = estimate - truth;
    report.fro_error.push_back(diff.norm());
    report.one_error.push_back(options.entrywise_l1 ? diff.cwiseAbs().sum() : matrix_one_norm(diff));
}

void aggregate(ForecastReport& report, Eigen::Index p1, Eigen::Index p2, const ForecastOptions& options) {
    const double n = static_cast<double>(report.origins.size());
    double fro = 0.0;
    for (double e : report.fro_error) fro += options.squared_frobenius ? e * e : e;
    const double one = std::accumulate(report.one_error.begin(), report.one_error.end(), 0.0);
    const double cells = static_cast<double>(p1 * p2);
    report.pmse = fro / (cells * n);
    report.pmae = one / (cells * n);
    report.mean_fro = fro / n;
    report.mean_one = one / n;
}

}  // namespace

EstimationError estimation_error(const MarCoefficients& estimate, const MarCoefficients& truth) {
    if (estimate.A.rows() != truth.A.rows() || estimate.A.cols() != truth.A.cols() ||
        estimate.B.rows() != truth.B.rows() || estimate.B.cols() != truth.B.cols()) {
        throw DimensionError("estimate and truth have different dimensions");
    }
    const auto est = normalize_identification(estimate);
    const auto ref = normalize_identification(truth);
    EstimationError e;
    e.log_A = std::log((est.A - ref.A).norm());
    e.log_B = std::log((est.B - ref.B).norm());
    e.log_S = std::log((kron(estimate.B, estimate.A) - kron(truth.B, truth.A)).norm());
    return e;
}

Summary summarize(std::vector<double> values) {
    Summary s;
    s.count = values.size();
    if (values.empty()) {
        s.mean = s.median = s.max = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    s.max = *std::max_element(values.begin(), values.end());
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    s.median = values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
    return s;
}

void ErrorReport::add(const EstimationError& e) {
    err_A.push_back(e.log_A);
    err_B.push_back(e.log_B);
    err_S.push_back(e.log_S);
}

Matrix one_step_forecast(const MarCoefficients& coeffs, const Matrix& y) {
    if (coeffs.A.cols() != y.rows() || coeffs.B.cols() != y.cols()) {
        throw DimensionError("forecast: coefficients do not conform with the observation");
    }
    return coeffs.A * y * coeffs.B.transpose();
}

double matrix_one_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().colwise().sum().maxCoeff();
}

ForecastReport holdout_forecast_eval(const MatrixSeries& series, std::size_t split, const Fitter& fitter,
                                     const ForecastOptions& options) {
    const std::size_t T = series.length();
    if (split < 2 || split >= T) {
        throw DomainError("holdout split " + std::to_string(split) + " must satisfy 2 <= split < T = " +
                          std::to_string(T));
    }
    MarCoefficients coeffs;
    try {
        coeffs = fitter(series.slice(0, split));
    } catch (const std::exception& e) {
        throw FitFailure(split, e.what());
    }
    ForecastReport report;
    for (std::size_t t = split; t < T; ++t) {
        report.origins.push_back(t);
        add_error(one_step_forecast(coeffs, series[t - 1]), series[t], options, report);
    }
    aggregate(report, series.rows(), series.cols(), options);
    return report;
}

ForecastReport rolling_forecast_eval(const MatrixSeries& series, std::size_t start, std::size_t end,
                                     const Fitter& fitter, const ForecastOptions& options) {
    const std::size_t T = series.length();
    if (start < 2 || start > end || end >= T) {
        throw DomainError("rolling range [" + std::to_string(start) + ", " + std::to_string(end) +
                          "] must satisfy 2 <= start <= end < T = " + std::to_string(T));
    }
    ForecastReport report;
    for (std::size_t t = start; t <= end; ++t) {
        MarCoefficients coeffs;
        try {
            coeffs = fitter(series.slice(0, t));
        } catch (const std::exception& e) {
            throw FitFailure(t, e.what());
        }
        report.origins.push_back(t);
        add_error(one_step_forecast(coeffs, series[t - 1]), series[t], options, report);
    }
    aggregate(report, series.rows(), series.cols(), options);
    return report;
}

}  // namespace mar
