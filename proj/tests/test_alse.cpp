#include "support.hpp"

#include "mar/alse.hpp"
#include "mar/errors.hpp"

#include <cmath>
#include <numeric>

using namespace mar;
using namespace mar::test;

namespace {

Matrix random_orthogonal(Eigen::Index p, Rng& rng) {
    Eigen::HouseholderQR<Matrix> qr(gaussian(p, p, rng));
    return qr.householderQ() * Matrix::Identity(p, p);
}

// Orthogonal truth keeps a noise-free recursion from decaying, so every Gram
// matrix along the path stays well conditioned.
MarCoefficients orthogonal_pair(Eigen::Index p1, Eigen::Index p2, Rng& rng) {
    return {random_orthogonal(p1, rng), random_orthogonal(p2, rng), false};
}

}  // namespace

TEST_CASE("half-steps recover the truth from noise-free data") {
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const auto truth = orthogonal_pair(4, 3, rng);
        const auto s = noise_free_series(truth, 40, 100 + trial);
        CHECK(max_abs_diff(ls_step_A(s, truth.B), truth.A) <= 1e-8);
        CHECK(max_abs_diff(ls_step_B(s, truth.A), truth.B) <= 1e-8);
    }
}

TEST_CASE("scalar case is the AR(1) OLS slope") {
    Rng rng(4);
    const auto s = driven_series({Matrix::Constant(1, 1, 0.7), Matrix::Constant(1, 1, 1.0), false}, 300, 9);
    double xy = 0.0, xx = 0.0;
    for (std::size_t t = 1; t < s.length(); ++t) {
        xy += s[t](0, 0) * s[t - 1](0, 0);
        xx += s[t - 1](0, 0) * s[t - 1](0, 0);
    }
    const double b = 1.7;
    CHECK(ls_step_A(s, Matrix::Constant(1, 1, b))(0, 0) == doctest::Approx(xy / xx / b).epsilon(1e-12));
    CHECK(ls_step_B(s, Matrix::Constant(1, 1, b))(0, 0) == doctest::Approx(xy / xx / b).epsilon(1e-12));
}

TEST_CASE("half-steps equal the brute-force vec-form normal equations") {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index p1 = 3, p2 = 2;
        const auto truth = random_pair(p1, p2, 0.6, rng);
        const auto s = driven_series(truth, 60, 300 + trial);
        const Matrix B = gaussian(p2, p2, rng), A = gaussian(p1, p1, rng);

        // vec(A Q) = (Q' (x) I) vec(A) with Q = Y_{t-1} B'.
        Matrix za((s.length() - 1) * p1 * p2, p1 * p1);
        Vector ya(za.rows());
        // vec(Y') = vec(B R') = (R (x) I) vec(B) with R = A Y_{t-1}.
        Matrix zb((s.length() - 1) * p1 * p2, p2 * p2);
        Vector yb(zb.rows());
        for (std::size_t t = 1; t < s.length(); ++t) {
            const auto row = static_cast<Eigen::Index>((t - 1) * p1 * p2);
            const Matrix q = s[t - 1] * B.transpose();
            za.middleRows(row, p1 * p2) = kron(q.transpose(), Matrix::Identity(p1, p1));
            ya.segment(row, p1 * p2) = vec(s[t]);
            const Matrix r = A * s[t - 1];
            zb.middleRows(row, p1 * p2) = kron(r, Matrix::Identity(p2, p2));
            yb.segment(row, p1 * p2) = vec(s[t].transpose());
        }
        const Vector va = (za.transpose() * za).ldlt().solve(za.transpose() * ya);
        const Vector vb = (zb.transpose() * zb).ldlt().solve(zb.transpose() * yb);
        CHECK(max_abs_diff(ls_step_A(s, B), unvec(va, p1, p1)) <= 1e-8);
        CHECK(max_abs_diff(ls_step_B(s, A), unvec(vb, p2, p2)) <= 1e-8);
    }
}

TEST_CASE("transposing the series swaps the roles of the half-steps") {
    Rng rng(13);
    const auto truth = random_pair(4, 3, 0.7, rng);
    const auto s = driven_series(truth, 200, 77);
    const auto tr = s.transposed();
    const Matrix A = gaussian(4, 4, rng), B = gaussian(3, 3, rng);
    CHECK(max_abs_diff(ls_step_A(tr, A), ls_step_B(s, A)) <= 1e-10);
    CHECK(max_abs_diff(ls_step_B(tr, B), ls_step_A(s, B)) <= 1e-10);

    const auto direct = fit_alse(s).coeffs;
    const auto swapped = fit_alse(tr).coeffs;
    const auto back = normalize_identification({swapped.B, swapped.A, false});
    CHECK(max_abs_diff(direct.product(), back.product()) <= 1e-5);
}

TEST_CASE("noise-free data converges within three iterations from a start aligned with the truth") {
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const auto truth = orthogonal_pair(4, 3, rng);
        const auto s = noise_free_series(truth, 40, 500 + trial);
        // the first half-step solves for A from the starting B, and the
        // reverse under b_first, so only that matrix needs the right direction
        AlseConfig config;
        config.init = MarCoefficients{gaussian(4, 4, rng), 2.5 * truth.B, false};
        const auto fit = fit_alse(s, config);
        CHECK(fit.trace.converged);
        CHECK(fit.trace.iterations <= 3);
        CHECK(fit.trace.objective.back() <= 1e-12);
        CHECK(max_abs_diff(fit.coeffs.product(), truth.product()) <= 1e-8);

        config.order = UpdateOrder::b_first;
        config.init = MarCoefficients{-0.4 * truth.A, gaussian(3, 3, rng), false};
        const auto reverse = fit_alse(s, config);
        CHECK(reverse.trace.converged);
        CHECK(reverse.trace.iterations <= 3);
        CHECK(max_abs_diff(reverse.coeffs.product(), truth.product()) <= 1e-8);
    }
}

TEST_CASE("objective is non-increasing at every half-step") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        std::uniform_int_distribution<int> dim(2, 5);
        const int p1 = dim(rng), p2 = dim(rng);
        const auto truth = random_pair(p1, p2, 0.8, rng);
        const auto s = driven_series(truth, 80, 1000 + trial);
        const auto start = identity_start(s);
        const auto fit = fit_alse(s);
        double previous = residual_sum_of_squares(s, start.A, start.B);
        for (double value : fit.trace.objective) {
            CHECK(value <= previous * (1.0 + 1e-12));
            previous = value;
        }
        CHECK(fit.trace.objective.size() == 2 * static_cast<std::size_t>(fit.trace.iterations));
        CHECK(fit.trace.delta_A.size() == static_cast<std::size_t>(fit.trace.iterations));
        CHECK(fit.coeffs.normalized);
        CHECK(fit.coeffs.A.norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(fit.coeffs.A.trace() >= 0.0);
    }
}

TEST_CASE("relabeling the rows conjugates the left coefficient") {
    Rng rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        const auto truth = random_pair(5, 3, 0.7, rng);
        const auto s = driven_series(truth, 150, 2000 + trial);
        std::vector<int> order(5);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        Matrix P = Matrix::Zero(5, 5);
        for (int i = 0; i < 5; ++i) P(i, order[i]) = 1.0;
        std::vector<Matrix> permuted;
        for (const auto& y : s.data()) permuted.push_back(P * y);
        const auto fit = fit_alse(s).coeffs;
        const auto fit_p = fit_alse(MatrixSeries(permuted)).coeffs;
        CHECK(max_abs_diff(fit_p.A, P * fit.A * P.transpose()) <= 1e-8);
        CHECK(max_abs_diff(fit_p.B, fit.B) <= 1e-8);
    }
}

TEST_CASE("update order does not move the fixed point") {
    Rng rng(5);
    const auto truth = random_pair(6, 4, 0.5, rng);
    const auto s = driven_series(truth, 400, 8);
    AlseConfig b_first;
    b_first.order = UpdateOrder::b_first;
    const auto one = fit_alse(s).coeffs;
    const auto two = fit_alse(s, b_first).coeffs;
    CHECK(std::log10((one.A - two.A).norm()) <= -6.0);
    CHECK(std::log10((one.B - two.B).norm()) <= -6.0);
}

TEST_CASE("configuration, warnings and failures") {
    Rng rng(2);
    const auto truth = random_pair(3, 2, 0.6, rng);
    const auto s = driven_series(truth, 100, 3);

    SUBCASE("invalid settings") {
        AlseConfig c;
        c.eta = 0.0;
        CHECK_THROWS_AS(fit_alse(s, c), ConfigError);
        c.eta = 1e-6;
        c.max_iter = 0;
        CHECK_THROWS_AS(fit_alse(s, c), ConfigError);
    }
    SUBCASE("exhausting the iteration budget is flagged") {
        AlseConfig c;
        c.max_iter = 1;
        const auto fit = fit_alse(s, c);
        CHECK_FALSE(fit.trace.converged);
        CHECK(fit.trace.iterations == 1);
    }
    SUBCASE("a provided start at the truth converges immediately on noise-free data") {
        const auto clean_truth = orthogonal_pair(3, 2, rng);
        const auto clean = noise_free_series(clean_truth, 30, 4);
        AlseConfig c;
        c.init = clean_truth;
        const auto fit = fit_alse(clean, c);
        CHECK(fit.trace.converged);
        CHECK(fit.trace.iterations == 1);
        c.init = MarCoefficients{Matrix::Identity(2, 2), Matrix::Identity(2, 2), false};
        CHECK_THROWS_AS(fit_alse(clean, c), DimensionError);
    }
    SUBCASE("few observations produce a warning") {
        const auto tiny = driven_series(random_pair(2, 2, 0.5, rng), 2, 6);
        AlseConfig c;
        c.max_iter = 3;
        const auto fit = fit_alse(tiny, c);
        CHECK(fit.trace.warnings.size() == 1);
        CHECK(fit_alse(s).trace.warnings.empty());
    }
    SUBCASE("singular Gram matrices are reported") {
        const MatrixSeries zero({Matrix::Zero(3, 2), Matrix::Zero(3, 2), Matrix::Zero(3, 2)});
        CHECK_THROWS_AS(fit_alse(zero), IllPosedRegressionError);
        try {
            spd_solve(Matrix::Zero(2, 2), Matrix::Identity(2, 2));
            FAIL("expected an exception");
        } catch (const IllPosedRegressionError& e) {
            CHECK(std::isinf(e.condition()));
        }
        CHECK_THROWS_AS(ls_step_A(s, Matrix::Identity(3, 3)), DimensionError);
        CHECK_THROWS_AS(ls_step_B(s, Matrix::Identity(2, 2)), DimensionError);
    }
}
