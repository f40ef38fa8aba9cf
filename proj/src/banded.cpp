#include "mar/banded.hpp"

#include "alternate.hpp"
#include "mar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mar {

namespace {

// Relative RSS at which a fit is exact up to rounding.
constexpr double kRelativeRssFloor = 1e-20;

void check_row(int j, int k, int p) {
    if (p < 1 || j < 1 || j > p || k < 0 || k >= p) {
        throw DomainError("row/bandwidth (" + std::to_string(j) + "," + std::to_string(k) +
                          ") out of range for dimension " + std::to_string(p));
    }
}

struct LsSolution {
    Vector beta;
    double rss;
};

LsSolution solve_thin(const Matrix& X, const Vector& v) {
    Eigen::ColPivHouseholderQR<Matrix> qr(X);
    const Eigen::Index cols = X.cols();
    double condition = std::numeric_limits<double>::infinity();
    if (qr.rank() == cols && cols > 0) {
        const auto diag = qr.matrixQR().diagonal().cwiseAbs();
        condition = diag.maxCoeff() / diag.minCoeff();
        condition *= condition;
    }
    if (qr.rank() < cols || !(condition <= kMaxCondition)) {
        throw IllPosedRegressionError("row regression design is rank deficient (rank " +
                                          std::to_string(qr.rank()) + " of " + std::to_string(cols) + ")",
                                      condition);
    }
    LsSolution out{qr.solve(v), 0.0};
    out.rss = (v - X * out.beta).squaredNorm();
    return out;
}

}  // namespace

StackedDesign stack_side(const MatrixSeries& series, Side side, const Matrix& fixed) {
    const auto p1 = series.rows();
    const auto p2 = series.cols();
    const auto own = side == Side::A ? p1 : p2;
    const auto other = side == Side::A ? p2 : p1;
    if (fixed.rows() != other || fixed.cols() != other) {
        throw DimensionError(std::string("fixed coefficient for the ") + (side == Side::A ? "A" : "B") +
                             "-side must be " + std::to_string(other) + "x" + std::to_string(other));
    }
    StackedDesign out;
    out.pairs = static_cast<Eigen::Index>(series.length() - 1);
    out.rows_per_pair = other;
    out.design.resize(out.pairs * other, own);
    out.responses.resize(out.pairs * other, own);
    for (Eigen::Index t = 0; t < out.pairs; ++t) {
        const auto s = static_cast<std::size_t>(t);
        if (side == Side::A) {
            out.design.middleRows(t * other, other).noalias() = fixed * series[s].transpose();
            out.responses.middleRows(t * other, other) = series[s + 1].transpose();
        } else {
            out.design.middleRows(t * other, other).noalias() = fixed * series[s];
            out.responses.middleRows(t * other, other) = series[s + 1];
        }
    }
    return out;
}

int tau_count(int j, int k, int p) {
    check_row(j, k, p);
    // k + j, 2k + 1 and p + k - j + 1 on the three stretches of the band
    // when p >= 2k + 1; clipping at both edges covers wider bands too
    return std::min(p, j + k) - std::max(1, j - k) + 1;
}

RowRegression row_regression(const StackedDesign& stacked, int j, int k) {
    const int p = static_cast<int>(stacked.dimension());
    check_row(j, k, p);
    const int first = std::max(1, j - k) - 1;
    const int last = std::min(p, j + k) - 1;
    RowRegression reg;
    reg.row = j;
    reg.bandwidth = k;
    reg.first_col = first;
    reg.response = stacked.responses.col(j - 1);
    reg.design = stacked.design.middleCols(first, last - first + 1);
    return reg;
}

RowRegression build_row_regression_A(const MatrixSeries& series, const Matrix& B_hat, int j, int k) {
    return row_regression(stack_side(series, Side::A, B_hat), j, k);
}

RowRegression build_row_regression_B(const MatrixSeries& series, const Matrix& A_hat, int j, int k) {
    return row_regression(stack_side(series, Side::B, A_hat), j, k);
}

double rss_floor(const Vector& response) {
    return std::max(1e-300, kRelativeRssFloor * response.squaredNorm());
}

RowFit bic_row(const RowRegression& reg, int p, int T_eff) {
    if (T_eff < 1) throw DomainError("effective sample size must be positive");
    if (reg.design.rows() != reg.response.size()) throw DimensionError("row regression shapes disagree");
    auto ls = solve_thin(reg.design, reg.response);
    const double t2 = static_cast<double>(reg.response.size());
    const double penalty = std::log(std::log(t2)) / t2 * static_cast<double>(reg.design.cols()) *
                           std::log(std::max(static_cast<double>(p), t2));
    RowFit fit;
    fit.rss = ls.rss;
    fit.bic = std::log(std::max(ls.rss, rss_floor(reg.response))) + penalty;
    fit.beta = std::move(ls.beta);
    return fit;
}

int default_k_max(std::size_t T, Eigen::Index p) {
    const int root = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(T))));
    return std::min(root, static_cast<int>(p) - 1);
}

BandwidthSelection select_bandwidth(const StackedDesign& stacked, int T_eff, int k_max, bool include_zero) {
    const int p = static_cast<int>(stacked.dimension());
    k_max = std::min(k_max, p - 1);
    const int k_min = (include_zero || k_max < 1) ? 0 : 1;
    if (k_max < k_min) throw DomainError("bandwidth search range is empty");

    BandwidthSelection out;
    auto& trace = out.trace;
    trace.k_max = k_max;
    for (int k = k_min; k <= k_max; ++k) trace.candidates.push_back(k);
    const auto n_cand = static_cast<Eigen::Index>(trace.candidates.size());
    trace.rss.resize(p, n_cand);
    trace.bic.resize(p, n_cand);
    trace.row_choice.assign(static_cast<std::size_t>(p), k_min);
    for (int j = 1; j <= p; ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < n_cand; ++c) {
            const int k = trace.candidates[static_cast<std::size_t>(c)];
            const RowFit fit = bic_row(row_regression(stacked, j, k), p, T_eff);
            trace.rss(j - 1, c) = fit.rss;
            trace.bic(j - 1, c) = fit.bic;
            if (fit.bic < best) {
                best = fit.bic;
                trace.row_choice[static_cast<std::size_t>(j - 1)] = k;
            }
        }
    }
    trace.k_hat = *std::max_element(trace.row_choice.begin(), trace.row_choice.end());
    out.k_hat = trace.k_hat;
    return out;
}

BandwidthSelection select_bandwidth(const MatrixSeries& series, const Matrix& fixed_coeff, Side side,
                                    int k_max, bool include_zero) {
    if (k_max < 1 && !include_zero) throw DomainError("K_max must be at least 1");
    const auto stacked = stack_side(series, side, fixed_coeff);
    return select_bandwidth(stacked, static_cast<int>(stacked.pairs), k_max, include_zero);
}

Matrix refit_banded(const StackedDesign& stacked, int k) {
    const int p = static_cast<int>(stacked.dimension());
    Matrix out = Matrix::Zero(p, p);
    for (int j = 1; j <= p; ++j) {
        const RowRegression reg = row_regression(stacked, j, k);
        const auto ls = solve_thin(reg.design, reg.response);
        out.row(j - 1).segment(reg.first_col, ls.beta.size()) = ls.beta.transpose();
    }
    return out;
}

BandedFitResult fit_banded(const MatrixSeries& series, const BandedConfig& config) {
    config.alse.validate();
    const auto p1 = series.rows();
    const auto p2 = series.cols();
    const int k_max_a = config.k_max_A.value_or(default_k_max(series.length(), p1));
    const int k_max_b = config.k_max_B.value_or(default_k_max(series.length(), p2));

    AlseConfig init_config = config.alse;
    init_config.order = UpdateOrder::a_first;
    AlseResult init = fit_alse(series, init_config);

    BandedFitResult result;
    result.init_trace = std::move(init.trace);
    MarCoefficients current = std::move(init.coeffs);

    auto step = [&](Side side, const Matrix& fixed) {
        const auto stacked = stack_side(series, side, fixed);
        const int k_max = side == Side::A ? k_max_a : k_max_b;
        auto selection = select_bandwidth(stacked, static_cast<int>(stacked.pairs), k_max, config.include_zero);
        (side == Side::A ? result.band.k1 : result.band.k2) = selection.k_hat;
        (side == Side::A ? result.bic_A : result.bic_B).push_back(std::move(selection.trace));
        return refit_banded(stacked, selection.k_hat);
    };
    result.trace = detail::alternate(
        series, current, config.alse.eta, config.alse.max_iter, config.alse.order,
        [&](const Matrix& B) { return step(Side::A, B); },
        [&](const Matrix& A) { return step(Side::B, A); });
    result.coeffs = std::move(current);
    return result;
}

}  // namespace mar
