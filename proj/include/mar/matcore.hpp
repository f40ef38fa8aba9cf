#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace mar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Ordered sequence Y_1..Y_T of real p1 x p2 observations.
///
/// Construction validates that every matrix has the same shape, that
/// T >= 2 and that all entries are finite. Indexing is 0-based:
/// `series[0]` is Y_1.
class MatrixSeries {
public:
    explicit MatrixSeries(std::vector<Matrix> data);

    std::size_t length() const noexcept { return data_.size(); }
    Eigen::Index rows() const noexcept { return data_.front().rows(); }
    Eigen::Index cols() const noexcept { return data_.front().cols(); }

    const Matrix& operator[](std::size_t t) const { return data_[t]; }
    const std::vector<Matrix>& data() const noexcept { return data_; }

    /// Y_{first+1}..Y_{first+count} as a new series (count >= 2).
    MatrixSeries slice(std::size_t first, std::size_t count) const;

    /// The series of transposes Y_t'.
    MatrixSeries transposed() const;

private:
    std::vector<Matrix> data_;
};

/// Coefficient pair (A, B) of Y_t = A Y_{t-1} B' + E_t.
struct MarCoefficients {
    Matrix A;
    Matrix B;
    bool normalized = false;

    /// S = B (x) A, the identified part of the model.
    Matrix product() const;
};

/// Bandwidths (k1, k2): a_ij = 0 for |i-j| > k1, b_ij = 0 for |i-j| > k2.
struct BandSpec {
    int k1 = 0;
    int k2 = 0;

    void validate(Eigen::Index p1, Eigen::Index p2) const;
    friend bool operator==(const BandSpec&, const BandSpec&) = default;
};

/// Column-major stacking.
Vector vec(const Matrix& m);

/// Inverse of vec for an m x n target.
Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols);

Matrix kron(const Matrix& left, const Matrix& right);

/// Largest eigenvalue modulus, from a dense real-Schur eigendecomposition.
double spectral_radius(const Matrix& m);

/// Rescale (A, B) -> (A/c, cB) with c = sign(tr A) ||A||_F, sign(0) = +1.
/// Throws DegenerateCoefficientError when ||A||_F = 0.
MarCoefficients normalize_identification(const MarCoefficients& coeffs);

/// rho(A) rho(B) < 1.
bool is_stationary(const MarCoefficients& coeffs);

/// Sum_t ||Y_t - A Y_{t-1} B'||_F^2 over t = 2..T.
double residual_sum_of_squares(const MatrixSeries& series, const Matrix& A, const Matrix& B);

/// Zero outside |i-j| <= k.
bool is_banded(const Matrix& m, int k);

}  // namespace mar
