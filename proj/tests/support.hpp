#pragma once

#include "mar/matcore.hpp"
#include "mar/rng.hpp"

#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace mar::test {

inline Matrix gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> normal;
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
    }
    return m;
}

/// Deterministic recursion Y_t = A Y_{t-1} B' from a Gaussian Y_1.
inline MatrixSeries noise_free_series(const MarCoefficients& coeffs, std::size_t T, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Matrix> data;
    data.push_back(gaussian(coeffs.A.rows(), coeffs.B.rows(), rng));
    for (std::size_t t = 1; t < T; ++t) data.push_back(coeffs.A * data.back() * coeffs.B.transpose());
    return MatrixSeries(std::move(data));
}

/// Random pair scaled so that rho(A) rho(B) = rho.
inline MarCoefficients random_pair(Eigen::Index p1, Eigen::Index p2, double rho, Rng& rng) {
    Matrix A = gaussian(p1, p1, rng);
    Matrix B = gaussian(p2, p2, rng);
    A /= spectral_radius(A);
    B *= rho / spectral_radius(B);
    return {A, B, false};
}

/// Gaussian series of length T driven by the given pair.
inline MatrixSeries driven_series(const MarCoefficients& coeffs, std::size_t T, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Matrix> data;
    Matrix y = Matrix::Zero(coeffs.A.rows(), coeffs.B.rows());
    for (std::size_t t = 0; t < T + 100; ++t) {
        y = coeffs.A * y * coeffs.B.transpose() + gaussian(y.rows(), y.cols(), rng);
        if (t >= 100) data.push_back(y);
    }
    return MatrixSeries(std::move(data));
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    REQUIRE(a.rows() == b.rows());
    REQUIRE(a.cols() == b.cols());
    return (a - b).cwiseAbs().maxCoeff();
}

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("mar_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

}  // namespace mar::test
