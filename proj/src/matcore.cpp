#include "mar/matcore.hpp"

#include "mar/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace mar {

namespace {

std::string shape(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

MatrixSeries::MatrixSeries(std::vector<Matrix> data) : data_(std::move(data)) {
    if (data_.size() < 2) {
        throw DimensionError("matrix series needs T >= 2 observations, got " +
                             std::to_string(data_.size()));
    }
    const auto r = data_.front().rows();
    const auto c = data_.front().cols();
    if (r == 0 || c == 0) throw DimensionError("matrix series observations must be non-empty");
    for (std::size_t t = 0; t < data_.size(); ++t) {
        if (data_[t].rows() != r || data_[t].cols() != c) {
            throw DimensionError("observation " + std::to_string(t + 1) + " is " + shape(data_[t]) +
                                 ", expected " + std::to_string(r) + "x" + std::to_string(c));
        }
        if (!data_[t].allFinite()) {
            throw DomainError("observation " + std::to_string(t + 1) + " has non-finite entries");
        }
    }
}

MatrixSeries MatrixSeries::slice(std::size_t first, std::size_t count) const {
    if (first + count > data_.size()) throw DomainError("series slice out of range");
    return MatrixSeries(std::vector<Matrix>(data_.begin() + static_cast<std::ptrdiff_t>(first),
                                            data_.begin() + static_cast<std::ptrdiff_t>(first + count)));
}

MatrixSeries MatrixSeries::transposed() const {
    std::vector<Matrix> out;
    out.reserve(data_.size());
    for (const auto& y : data_) out.push_back(y.transpose());
    return MatrixSeries(std::move(out));
}

Matrix MarCoefficients::product() const { return kron(B, A); }

void BandSpec::validate(Eigen::Index p1, Eigen::Index p2) const {
    if (k1 < 0 || k1 > p1 - 1 || k2 < 0 || k2 > p2 - 1) {
        throw DomainError("bandwidths (" + std::to_string(k1) + "," + std::to_string(k2) +
                          ") invalid for dimensions (" + std::to_string(p1) + "," +
                          std::to_string(p2) + ")");
    }
}

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
    if (v.size() != rows * cols) {
        throw DimensionError("cannot reshape vector of length " + std::to_string(v.size()) +
                             " to " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Matrix kron(const Matrix& left, const Matrix& right) {
    const auto r = right.rows();
    const auto c = right.cols();
    Matrix out(left.rows() * r, left.cols() * c);
    for (Eigen::Index j = 0; j < left.cols(); ++j) {
        for (Eigen::Index i = 0; i < left.rows(); ++i) {
            out.block(i * r, j * c, r, c) = left(i, j) * right;
        }
    }
    return out;
}

double spectral_radius(const Matrix& m) {
    if (m.rows() != m.cols()) throw DimensionError("spectral radius of non-square " + shape(m));
    if (m.size() == 0) return 0.0;
    Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw Error("eigenvalue iteration failed to converge");
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

MarCoefficients normalize_identification(const MarCoefficients& coeffs) {
    const double norm = coeffs.A.norm();
    if (!(norm > 0.0)) throw DegenerateCoefficientError("cannot normalize: ||A||_F = 0");
    const double c = coeffs.A.trace() >= 0.0 ? norm : -norm;
    // + 0.0 turns the -0.0 produced by a negative c back into +0.0
    Matrix A = (coeffs.A.array() / c + 0.0).matrix();
    Matrix B = (coeffs.B.array() * c + 0.0).matrix();
    return MarCoefficients{std::move(A), std::move(B), true};
}

bool is_stationary(const MarCoefficients& coeffs) {
    return spectral_radius(coeffs.A) * spectral_radius(coeffs.B) < 1.0;
}

double residual_sum_of_squares(const MatrixSeries& series, const Matrix& A, const Matrix& B) {
    if (A.rows() != series.rows() || A.cols() != series.rows() || B.rows() != series.cols() ||
        B.cols() != series.cols()) {
        throw DimensionError("coefficients do not conform with the series");
    }
    double rss = 0.0;
    for (std::size_t t = 1; t < series.length(); ++t) {
        rss += (series[t] - A * series[t - 1] * B.transpose()).squaredNorm();
    }
    return rss;
}

bool is_banded(const Matrix& m, int k) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            if (std::abs(i - j) > k && m(i, j) != 0.0) return false;
        }
    }
    return true;
}

}  // namespace mar
