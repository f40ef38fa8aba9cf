#include "support.hpp"

#include "mar/errors.hpp"
#include "mar/matcore.hpp"

#include <cmath>
#include <limits>

using namespace mar;
using namespace mar::test;

TEST_CASE("vec stacks columns and unvec inverts it") {
    Matrix m(2, 3);
    m << 1, 2, 3, 4, 5, 6;
    Vector expected(6);
    expected << 1, 4, 2, 5, 3, 6;
    CHECK(vec(m) == expected);
    CHECK(unvec(vec(m), 2, 3) == m);
    CHECK_THROWS_AS(unvec(expected, 4, 2), DimensionError);
}

TEST_CASE("kron matches the block definition") {
    Matrix a(2, 2), b(2, 3);
    a << 1, 2, 3, 4;
    b << 0, 5, -1, 6, 7, 2;
    const Matrix k = kron(a, b);
    REQUIRE(k.rows() == 4);
    REQUIRE(k.cols() == 6);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            for (int r = 0; r < 2; ++r) {
                for (int c = 0; c < 3; ++c) CHECK(k(2 * i + r, 3 * j + c) == a(i, j) * b(r, c));
            }
        }
    }
}

TEST_CASE("vec(AYB') = (B kron A) vec(Y) on random triples") {
    Rng rng(11);
    std::uniform_int_distribution<int> dim(1, 6);
    for (int trial = 0; trial < 200; ++trial) {
        const int p1 = dim(rng), p2 = dim(rng);
        const Matrix A = gaussian(p1, p1, rng), B = gaussian(p2, p2, rng), Y = gaussian(p1, p2, rng);
        const Vector lhs = vec(A * Y * B.transpose());
        const Vector rhs = kron(B, A) * vec(Y);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("spectral radius") {
    SUBCASE("Fibonacci companion matrix has the golden ratio") {
        Matrix c(2, 2);
        c << 1, 1, 1, 0;
        CHECK(spectral_radius(c) == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-14));
    }
    SUBCASE("rotation has radius one") {
        const double th = 0.7;
        Matrix r(2, 2);
        r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
        CHECK(spectral_radius(r) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("diagonal matrix") {
        Matrix d = Matrix::Zero(3, 3);
        d.diagonal() << 0.2, -0.9, 0.5;
        CHECK(spectral_radius(d) == doctest::Approx(0.9).epsilon(1e-14));
    }
    SUBCASE("non-square input is rejected") { CHECK_THROWS_AS(spectral_radius(Matrix::Ones(2, 3)), DimensionError); }
}

TEST_CASE("normalize_identification") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const MarCoefficients raw{gaussian(4, 4, rng), gaussian(3, 3, rng), false};
        const auto n = normalize_identification(raw);
        CHECK(n.normalized);
        CHECK(n.A.norm() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(n.A.trace() >= 0.0);
        CHECK(max_abs_diff(n.product(), raw.product()) <= 1e-12);
        const auto again = normalize_identification(n);
        CHECK(max_abs_diff(again.A, n.A) <= 1e-15);
        CHECK(max_abs_diff(again.B, n.B) <= 1e-14);
    }

    SUBCASE("joint sign flip maps to the same pair") {
        const MarCoefficients raw{gaussian(3, 3, rng), gaussian(2, 2, rng), false};
        const auto a = normalize_identification(raw);
        const auto b = normalize_identification({-raw.A, -raw.B, false});
        CHECK(max_abs_diff(a.A, b.A) <= 1e-15);
        CHECK(max_abs_diff(a.B, b.B) <= 1e-15);
    }
    SUBCASE("zero trace counts as non-negative") {
        Matrix A(2, 2);
        A << 0, 3, 4, 0;
        const auto n = normalize_identification({A, Matrix::Identity(2, 2), false});
        CHECK(n.A(0, 1) == doctest::Approx(0.6));
        CHECK(n.B(0, 0) == doctest::Approx(5.0));
    }
    SUBCASE("zeros stay positive zeros under a negative scale") {
        Matrix A = Matrix::Zero(3, 3);
        A.diagonal() << -1, -2, -3;
        const auto n = normalize_identification({A, Matrix::Identity(2, 2), false});
        CHECK_FALSE(std::signbit(n.A(0, 1)));
        CHECK(n.A.trace() > 0.0);
    }
    SUBCASE("zero A is degenerate") {
        CHECK_THROWS_AS(normalize_identification({Matrix::Zero(2, 2), Matrix::Identity(2, 2), false}),
                        DegenerateCoefficientError);
    }
}

TEST_CASE("stationarity") {
    Matrix A = Matrix::Identity(2, 2) * 0.9;
    CHECK(is_stationary({A, Matrix::Identity(3, 3), false}));
    CHECK_FALSE(is_stationary({A, Matrix::Identity(3, 3) * (1.0 / 0.9), false}));
}

TEST_CASE("MatrixSeries validation and views") {
    CHECK_THROWS_AS(MatrixSeries({Matrix::Zero(2, 2)}), DimensionError);
    CHECK_THROWS_AS(MatrixSeries({Matrix::Zero(2, 2), Matrix::Zero(2, 3)}), DimensionError);
    Matrix bad = Matrix::Zero(2, 2);
    bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(MatrixSeries({Matrix::Zero(2, 2), bad}), DomainError);

    Rng rng(3);
    std::vector<Matrix> data;
    for (int t = 0; t < 5; ++t) data.push_back(gaussian(2, 3, rng));
    const MatrixSeries s(data);
    CHECK(s.length() == 5);
    CHECK(s.rows() == 2);
    CHECK(s.cols() == 3);
    const auto sl = s.slice(1, 3);
    CHECK(sl.length() == 3);
    CHECK(sl[0] == data[1]);
    CHECK_THROWS(s.slice(4, 2));
    const auto tr = s.transposed();
    CHECK(tr.rows() == 3);
    CHECK(tr[2] == data[2].transpose());
}

TEST_CASE("residual sum of squares") {
    Rng rng(8);
    std::vector<Matrix> data;
    for (int t = 0; t < 6; ++t) data.push_back(gaussian(3, 2, rng));
    const MatrixSeries s(data);
    const Matrix A = gaussian(3, 3, rng), B = gaussian(2, 2, rng);
    double expected = 0.0;
    for (int t = 1; t < 6; ++t) expected += (data[t] - A * data[t - 1] * B.transpose()).squaredNorm();
    CHECK(residual_sum_of_squares(s, A, B) == doctest::Approx(expected).epsilon(1e-14));
    CHECK_THROWS_AS(residual_sum_of_squares(s, B, B), DimensionError);
}

TEST_CASE("band helpers") {
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = m(1, 0) = m(0, 1) = m(3, 3) = 1.0;
    CHECK(is_banded(m, 1));
    m(3, 1) = 1.0;
    CHECK_FALSE(is_banded(m, 1));
    CHECK(is_banded(m, 2));

    BandSpec{1, 1}.validate(6, 4);
    const BandSpec too_wide{6, 1}, negative{0, -1};
    CHECK_THROWS_AS(too_wide.validate(6, 4), DomainError);
    CHECK_THROWS_AS(negative.validate(6, 4), DomainError);
}
