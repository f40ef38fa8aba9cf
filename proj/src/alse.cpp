#include "mar/alse.hpp"

#include "alternate.hpp"
#include "mar/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>

namespace mar {

void AlseConfig::validate() const {
    if (!(eta > 0.0)) throw ConfigError("eta must be positive");
    if (max_iter < 1) throw ConfigError("max_iter must be at least 1");
}

Matrix spd_solve(const Matrix& gram, const Matrix& rhs) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    const double condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (!(condition <= kMaxCondition)) {
        throw IllPosedRegressionError("Gram matrix is singular or ill-conditioned (condition " +
                                          std::to_string(condition) + ")",
                                      condition);
    }
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) {
        throw IllPosedRegressionError("Gram matrix is not positive definite", condition);
    }
    return llt.solve(rhs);
}

Matrix ls_step_A(const MatrixSeries& series, const Matrix& B) {
    if (B.rows() != series.cols() || B.cols() != series.cols()) {
        throw DimensionError("B must be " + std::to_string(series.cols()) + "x" + std::to_string(series.cols()));
    }
    const auto p1 = series.rows();
    Matrix gram = Matrix::Zero(p1, p1);
    Matrix cross = Matrix::Zero(p1, p1);
    Matrix q;
    for (std::size_t t = 1; t < series.length(); ++t) {
        q.noalias() = series[t - 1] * B.transpose();
        gram.noalias() += q * q.transpose();
        cross.noalias() += series[t] * q.transpose();
    }
    // A gram = cross  <=>  gram A' = cross'
    return spd_solve(gram, cross.transpose()).transpose();
}

Matrix ls_step_B(const MatrixSeries& series, const Matrix& A) {
    if (A.rows() != series.rows() || A.cols() != series.rows()) {
        throw DimensionError("A must be " + std::to_string(series.rows()) + "x" + std::to_string(series.rows()));
    }
    const auto p2 = series.cols();
    Matrix gram = Matrix::Zero(p2, p2);
    Matrix cross = Matrix::Zero(p2, p2);
    Matrix r;
    for (std::size_t t = 1; t < series.length(); ++t) {
        r.noalias() = A * series[t - 1];
        gram.noalias() += r.transpose() * r;
        cross.noalias() += series[t].transpose() * r;
    }
    return spd_solve(gram, cross.transpose()).transpose();
}

MarCoefficients identity_start(const MatrixSeries& series) {
    const auto p1 = series.rows();
    Matrix A = Matrix::Identity(p1, p1) / std::sqrt(static_cast<double>(p1));
    Matrix B = ls_step_B(series, A);
    return MarCoefficients{std::move(A), std::move(B), true};
}

AlseResult fit_alse(const MatrixSeries& series, const AlseConfig& config) {
    config.validate();
    const auto p1 = series.rows();
    const auto p2 = series.cols();
    MarCoefficients current = config.init ? *config.init : identity_start(series);
    if (current.A.rows() != p1 || current.A.cols() != p1 || current.B.rows() != p2 || current.B.cols() != p2) {
        throw DimensionError("initial coefficients do not match the series dimensions");
    }
    FitTrace trace = detail::alternate(
        series, current, config.eta, config.max_iter, config.order,
        [&](const Matrix& B) { return ls_step_A(series, B); },
        [&](const Matrix& A) { return ls_step_B(series, A); });
    const double observations = static_cast<double>(p1 * p2) * static_cast<double>(series.length() - 1);
    if (observations < static_cast<double>(p1 * p1 + p2 * p2)) {
        trace.warnings.push_back("fewer observations than coefficients: p1 p2 (T-1) < p1^2 + p2^2");
    }
    return AlseResult{std::move(current), std::move(trace)};
}

}  // namespace mar
