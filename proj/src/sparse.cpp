#include "mar/sparse.hpp"

#include "alternate.hpp"
#include "mar/errors.hpp"
#include "mar/rng.hpp"

#include <optional>

namespace mar {

void TuningMethod::validate() const {
    switch (kind) {
        case TuningKind::sdcv:
        case TuningKind::mcv:
            if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
            break;
        case TuningKind::ksc:
            if (ksc_splits < 2) throw ConfigError("KSC needs at least 2 splits");
            if (!(ksc_alpha > 0.0 && ksc_alpha < 1.0)) throw ConfigError("KSC alpha must lie in (0, 1)");
            break;
        case TuningKind::fixed:
            if (!(lambda_A >= 0.0) || !(lambda_B >= 0.0)) throw ConfigError("fixed penalties must be non-negative");
            break;
    }
    if (kind != TuningKind::fixed && (n_lambda < 1 || !(lambda_ratio > 0.0 && lambda_ratio < 1.0))) {
        throw ConfigError("invalid lambda grid settings");
    }
}

std::string to_string(TuningKind kind) {
    switch (kind) {
        case TuningKind::sdcv: return "sdcv";
        case TuningKind::mcv: return "mcv";
        case TuningKind::ksc: return "ksc";
        case TuningKind::fixed: return "fixed";
    }
    return "unknown";
}

TuningKind parse_tuning_kind(const std::string& name) {
    if (name == "sdcv") return TuningKind::sdcv;
    if (name == "mcv") return TuningKind::mcv;
    if (name == "ksc") return TuningKind::ksc;
    if (name == "fixed") return TuningKind::fixed;
    throw ConfigError("unknown tuning method '" + name + "' (expected sdcv, mcv, ksc or fixed)");
}

namespace {

double select_penalty(const LassoFamily& family, const GramSystem& full, const TuningMethod& tuning,
                      double fixed_lambda, const SparseConfig& config, std::uint64_t seed,
                      TuningDiagnostics& diag) {
    if (tuning.kind == TuningKind::fixed) {
        diag.selected = fixed_lambda;
        return fixed_lambda;
    }
    const auto grid = LambdaGrid::geometric(lambda_max(full), tuning.n_lambda, tuning.lambda_ratio);
    diag.grid = grid.values;
    if (tuning.kind == TuningKind::ksc) {
        auto sel = select_lambda_ksc(family, grid, tuning.ksc_splits, tuning.ksc_alpha, seed, tuning.ksc_rule,
                                     config.lasso, config.threads);
        diag.stability = std::move(sel.stability);
        diag.selected = sel.lambda;
    } else {
        const auto rule = tuning.kind == TuningKind::sdcv ? CvRule::one_se : CvRule::min;
        auto sel = select_lambda_cv(family, grid, tuning.folds, rule, seed, tuning.fold_scheme, config.lasso,
                                    config.threads);
        diag.cv_mean = std::move(sel.mean);
        diag.cv_se = std::move(sel.se);
        diag.selected = sel.lambda;
    }
    return diag.selected;
}

}  // namespace

SparseFitResult fit_sparse(const MatrixSeries& series, const TuningMethod& tuning, const SparseConfig& config) {
    tuning.validate();
    config.alse.validate();

    AlseConfig init_config = config.alse;
    init_config.order = UpdateOrder::a_first;
    AlseResult init = fit_alse(series, init_config);

    SparseFitResult result;
    result.init_trace = std::move(init.trace);
    MarCoefficients current = std::move(init.coeffs);
    std::optional<double> lambda_a;
    std::optional<double> lambda_b;

    auto step = [&](Side side, const Matrix& fixed, const Matrix& own) {
        LassoFamily family(stack_side(series, side, fixed), config.standardize);
        const GramSystem full = family.system();
        auto& lambda = side == Side::A ? lambda_a : lambda_b;
        if (!lambda) {
            lambda = select_penalty(family, full, tuning, side == Side::A ? tuning.lambda_A : tuning.lambda_B, config,
                                    derive_seed(config.seed, {side == Side::A ? 1u : 2u}),
                                    side == Side::A ? result.tuning_A : result.tuning_B);
        }
        const Matrix warm = own.transpose();
        const auto sol = solve_family(full, *lambda, config.lasso, &warm);
        result.solver_converged = result.solver_converged && sol.converged;
        result.max_kkt_residual = std::max(result.max_kkt_residual, sol.kkt_residual);
        return Matrix(sol.coef.transpose());
    };
    result.trace = detail::alternate(
        series, current, config.alse.eta, config.alse.max_iter, config.alse.order,
        [&](const Matrix& B) { return step(Side::A, B, current.A); },
        [&](const Matrix& A) { return step(Side::B, A, current.B); });

    result.lambda_A = lambda_a.value_or(0.0);
    result.lambda_B = lambda_b.value_or(0.0);
    result.sparsity_A = zero_proportion(current.A);
    result.sparsity_B = zero_proportion(current.B);
    result.coeffs = std::move(current);
    return result;
}

LassoProblem vec_form_problem(const MatrixSeries& series, Side side, const Matrix& fixed, double lambda) {
    const auto p1 = series.rows();
    const auto p2 = series.cols();
    const auto own = side == Side::A ? p1 : p2;
    const auto other = side == Side::A ? p2 : p1;
    if (fixed.rows() != other || fixed.cols() != other) throw DimensionError("fixed coefficient has the wrong shape");
    const auto pairs = static_cast<Eigen::Index>(series.length() - 1);
    const auto block = p1 * p2;
    LassoProblem problem;
    problem.design.resize(pairs * block, own * own);
    problem.response.resize(pairs * block);
    problem.sample_count = static_cast<double>(pairs);
    problem.lambda = lambda;
    const Matrix eye = Matrix::Identity(own, own);
    for (Eigen::Index t = 0; t < pairs; ++t) {
        const auto& prev = series[static_cast<std::size_t>(t)];
        const auto& next = series[static_cast<std::size_t>(t + 1)];
        if (side == Side::A) {
            problem.design.middleRows(t * block, block) = kron(fixed * prev.transpose(), eye);
            problem.response.segment(t * block, block) = vec(next);
        } else {
            problem.design.middleRows(t * block, block) = kron(fixed * prev, eye);
            problem.response.segment(t * block, block) = vec(next.transpose());
        }
    }
    return problem;
}

RecoveryScore recovery_score(const Matrix& estimate, const Matrix& truth) {
    if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
        throw DimensionError("recovery score needs matrices of equal shape");
    }
    RecoveryScore s;
    for (Eigen::Index j = 0; j < truth.cols(); ++j) {
        for (Eigen::Index i = 0; i < truth.rows(); ++i) {
            const bool t0 = truth(i, j) == 0.0;
            const bool e0 = estimate(i, j) == 0.0;
            if (t0 && e0) ++s.both_zero;
            else if (t0) ++s.false_positive;
            else if (!e0) ++s.both_nonzero;
            else ++s.false_negative;
        }
    }
    s.cr = static_cast<double>(s.both_zero + s.both_nonzero) / static_cast<double>(truth.size());
    return s;
}

double zero_proportion(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return static_cast<double>((m.array() == 0.0).count()) / static_cast<double>(m.size());
}

}  // namespace mar
