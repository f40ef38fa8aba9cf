#include "mar/lasso.hpp"

#include "mar/errors.hpp"
#include "mar/parallel.hpp"
#include "mar/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mar {

namespace {

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

// Largest KKT violation given the loss gradient 2 (c - G beta).
double gram_kkt(const Matrix& gram, const Vector& cross, const Vector& weights, double lambda,
                const Vector& beta) {
    const Vector grad = 2.0 * (cross - gram * beta);
    double worst = 0.0;
    for (Eigen::Index g = 0; g < beta.size(); ++g) {
        if (!(gram(g, g) > 0.0)) continue;
        const double bound = lambda * weights(g);
        const double v = beta(g) == 0.0 ? std::max(0.0, std::abs(grad(g)) - bound)
                                         : std::abs(grad(g) - std::copysign(bound, beta(g)));
        worst = std::max(worst, v);
    }
    return worst;
}

Vector weights_or_ones(const Vector& w, Eigen::Index size) {
    if (w.size() == 0) return Vector::Ones(size);
    if (w.size() != size) throw DimensionError("penalty weights do not match the design width");
    return w;
}

std::vector<Eigen::Index> shuffled_pairs(Eigen::Index n, Rng& rng) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    return idx;
}

}  // namespace

LassoSolution solve_gram(const Matrix& gram, const Vector& cross, const Vector& weights, double lambda,
                         Vector beta, const LassoOptions& options) {
    const Eigen::Index p = gram.rows();
    if (beta.size() != p) beta = Vector::Zero(p);
    for (Eigen::Index g = 0; g < p; ++g) {
        if (!(gram(g, g) > 0.0)) beta(g) = 0.0;
    }
    Vector gb = gram * beta;

    auto update = [&](Eigen::Index g) {
        const double a = gram(g, g);
        if (!(a > 0.0)) return 0.0;
        const double rho = cross(g) - gb(g) + a * beta(g);
        const double next = soft_threshold(rho, 0.5 * lambda * weights(g)) / a;
        const double delta = next - beta(g);
        if (delta != 0.0) {
            gb.noalias() += gram.col(g) * delta;
            beta(g) = next;
        }
        return std::abs(delta) * std::sqrt(a);
    };

    LassoSolution out;
    while (out.passes < options.max_passes) {
        double change = 0.0;
        for (Eigen::Index g = 0; g < p; ++g) change = std::max(change, update(g));
        ++out.passes;
        if (change <= options.tol) {
            gb = gram * beta;
            if (gram_kkt(gram, cross, weights, lambda, beta) <= options.tol) {
                out.converged = true;
                break;
            }
            continue;
        }
        // sweep the active set until it settles, then go back to a full pass
        while (out.passes < options.max_passes) {
            double active_change = 0.0;
            for (Eigen::Index g = 0; g < p; ++g) {
                if (beta(g) != 0.0) active_change = std::max(active_change, update(g));
            }
            ++out.passes;
            if (active_change <= options.tol) break;
        }
    }
    out.kkt_residual = gram_kkt(gram, cross, weights, lambda, beta);
    out.coef = std::move(beta);
    return out;
}

LassoSolution lasso_cd(const LassoProblem& problem, const LassoOptions& options, const Vector* warm_start) {
    if (problem.design.rows() != problem.response.size()) throw DimensionError("design and response lengths differ");
    if (!(problem.lambda >= 0.0)) throw DomainError("lambda must be non-negative");
    if (!problem.design.allFinite() || !problem.response.allFinite()) throw DomainError("non-finite Lasso input");
    const double n = problem.normalizer();
    const Matrix gram = problem.design.transpose() * problem.design / n;
    const Vector cross = problem.design.transpose() * problem.response / n;
    const Vector weights = weights_or_ones(problem.penalty_weights, problem.design.cols());
    Vector start = warm_start ? *warm_start : Vector::Zero(problem.design.cols());
    LassoSolution out = solve_gram(gram, cross, weights, problem.lambda, std::move(start), options);
    out.kkt_residual = kkt_residual(problem, out.coef);
    return out;
}

double lambda_max(const LassoProblem& problem) {
    const Vector grad = 2.0 * problem.design.transpose() * problem.response / problem.normalizer();
    const Vector w = weights_or_ones(problem.penalty_weights, problem.design.cols());
    double out = 0.0;
    for (Eigen::Index g = 0; g < grad.size(); ++g) {
        if (w(g) > 0.0) out = std::max(out, std::abs(grad(g)) / w(g));
    }
    return out;
}

double kkt_residual(const LassoProblem& problem, const Vector& coef) {
    const double n = problem.normalizer();
    const Vector grad = 2.0 * problem.design.transpose() * (problem.response - problem.design * coef) / n;
    const Vector w = weights_or_ones(problem.penalty_weights, problem.design.cols());
    double worst = 0.0;
    for (Eigen::Index g = 0; g < coef.size(); ++g) {
        if (problem.design.col(g).squaredNorm() == 0.0) continue;
        const double bound = problem.lambda * w(g);
        const double v = coef(g) == 0.0 ? std::max(0.0, std::abs(grad(g)) - bound)
                                         : std::abs(grad(g) - std::copysign(bound, coef(g)));
        worst = std::max(worst, v);
    }
    return worst;
}

Vector standardization_weights(const Matrix& design, double rows) {
    return (design.colwise().squaredNorm().transpose() / rows).cwiseSqrt();
}

LambdaGrid LambdaGrid::geometric(double lambda_max, int count, double ratio) {
    if (!(lambda_max > 0.0)) throw TuningError("lambda_max is zero: the response is orthogonal to the design");
    if (count < 1 || !(ratio > 0.0 && ratio < 1.0)) throw ConfigError("invalid lambda grid settings");
    LambdaGrid grid;
    grid.values.reserve(static_cast<std::size_t>(count));
    if (count == 1) {
        grid.values.push_back(lambda_max);
        return grid;
    }
    const double step = std::log(ratio) / static_cast<double>(count - 1);
    for (int i = 0; i < count; ++i) grid.values.push_back(lambda_max * std::exp(step * i));
    return grid;
}

LassoFamily::LassoFamily(StackedDesign stacked, bool standardize)
    : stacked_(std::move(stacked)), standardize_(standardize) {}

GramSystem LassoFamily::system(std::span<const Eigen::Index> pairs) const {
    const auto m = stacked_.rows_per_pair;
    GramSystem out;
    double n = 0.0;
    if (pairs.empty()) {
        n = static_cast<double>(stacked_.pairs);
        out.gram = stacked_.design.transpose() * stacked_.design / n;
        out.cross = stacked_.design.transpose() * stacked_.responses / n;
    } else {
        n = static_cast<double>(pairs.size());
        Matrix d(static_cast<Eigen::Index>(pairs.size()) * m, stacked_.design.cols());
        Matrix r(d.rows(), stacked_.responses.cols());
        Eigen::Index row = 0;
        for (auto t : pairs) {
            d.middleRows(row, m) = stacked_.design.middleRows(t * m, m);
            r.middleRows(row, m) = stacked_.responses.middleRows(t * m, m);
            row += m;
        }
        out.gram = d.transpose() * d / n;
        out.cross = d.transpose() * r / n;
    }
    if (standardize_) {
        // RMS of each column of the pooled vec-form design, which repeats
        // this design once per coefficient row.
        const double copies = static_cast<double>(m * stacked_.responses.cols());
        out.weights = (out.gram.diagonal() / copies).cwiseSqrt();
    } else {
        out.weights = Vector::Ones(out.gram.rows());
    }
    return out;
}

double LassoFamily::squared_error(std::span<const Eigen::Index> pairs, const Matrix& coef) const {
    const auto m = stacked_.rows_per_pair;
    double total = 0.0;
    for (auto t : pairs) {
        total += (stacked_.responses.middleRows(t * m, m) - stacked_.design.middleRows(t * m, m) * coef).squaredNorm();
    }
    return total;
}

double lambda_max(const GramSystem& system) {
    double out = 0.0;
    for (Eigen::Index g = 0; g < system.cross.rows(); ++g) {
        if (!(system.weights(g) > 0.0)) continue;
        out = std::max(out, 2.0 * system.cross.row(g).cwiseAbs().maxCoeff() / system.weights(g));
    }
    return out;
}

FamilySolution solve_family(const GramSystem& system, double lambda, const LassoOptions& options,
                            const Matrix* warm_start) {
    if (!(lambda >= 0.0)) throw DomainError("lambda must be non-negative");
    FamilySolution out;
    out.coef.resize(system.gram.rows(), system.cross.cols());
    for (Eigen::Index i = 0; i < system.cross.cols(); ++i) {
        Vector start = warm_start ? Vector(warm_start->col(i)) : Vector::Zero(system.gram.rows());
        auto sol = solve_gram(system.gram, system.cross.col(i), system.weights, lambda, std::move(start), options);
        out.coef.col(i) = sol.coef;
        out.converged = out.converged && sol.converged;
        out.kkt_residual = std::max(out.kkt_residual, sol.kkt_residual);
        out.passes += sol.passes;
    }
    return out;
}

std::vector<FamilySolution> solve_path(const GramSystem& system, const LambdaGrid& grid, const LassoOptions& options) {
    std::vector<FamilySolution> path;
    path.reserve(grid.values.size());
    for (double lambda : grid.values) {
        const Matrix* warm = path.empty() ? nullptr : &path.back().coef;
        path.push_back(solve_family(system, lambda, options, warm));
    }
    return path;
}

CvSelection select_lambda_cv(const LassoFamily& family, const LambdaGrid& grid, int folds, CvRule rule,
                             std::uint64_t seed, FoldScheme scheme, const LassoOptions& options, int threads) {
    const Eigen::Index n = family.pairs();
    if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
    if (folds > n) {
        throw ConfigError("cannot split " + std::to_string(n) + " lag pairs into " + std::to_string(folds) + " folds");
    }
    if (grid.values.empty()) throw ConfigError("empty lambda grid");

    std::vector<int> fold_of(static_cast<std::size_t>(n));
    if (scheme == FoldScheme::random) {
        Rng rng = make_rng(seed, {0x6376});
        const auto perm = shuffled_pairs(n, rng);
        for (std::size_t i = 0; i < perm.size(); ++i) fold_of[static_cast<std::size_t>(perm[i])] = static_cast<int>(i % folds);
    } else {
        for (Eigen::Index i = 0; i < n; ++i) fold_of[static_cast<std::size_t>(i)] = static_cast<int>(i * folds / n);
    }

    const std::size_t n_lambda = grid.values.size();
    Matrix fold_error(folds, static_cast<Eigen::Index>(n_lambda));
    parallel_for(static_cast<std::size_t>(folds), threads, [&](std::size_t k) {
        std::vector<Eigen::Index> train;
        std::vector<Eigen::Index> test;
        for (Eigen::Index t = 0; t < n; ++t) {
            (fold_of[static_cast<std::size_t>(t)] == static_cast<int>(k) ? test : train).push_back(t);
        }
        if (train.empty() || test.empty()) throw ConfigError("cross-validation fold with an empty training or test set");
        const auto path = solve_path(family.system(train), grid, options);
        for (std::size_t l = 0; l < n_lambda; ++l) {
            fold_error(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) =
                family.squared_error(test, path[l].coef) / static_cast<double>(test.size());
        }
    });

    CvSelection out;
    out.mean.resize(n_lambda);
    out.se.resize(n_lambda);
    for (std::size_t l = 0; l < n_lambda; ++l) {
        const auto col = fold_error.col(static_cast<Eigen::Index>(l));
        const double mean = col.mean();
        const double var = (col.array() - mean).square().sum() / static_cast<double>(folds - 1);
        out.mean[l] = mean;
        out.se[l] = std::sqrt(var / static_cast<double>(folds));
    }
    const auto best = static_cast<std::size_t>(std::min_element(out.mean.begin(), out.mean.end()) - out.mean.begin());
    out.index = best;
    if (rule == CvRule::one_se) {
        const double bound = out.mean[best] + out.se[best];
        out.index = static_cast<std::size_t>(
            std::find_if(out.mean.begin(), out.mean.end(), [&](double e) { return e <= bound; }) - out.mean.begin());
    }
    out.lambda = grid.values[out.index];
    return out;
}

double cohen_kappa(const std::vector<bool>& first, const std::vector<bool>& second) {
    if (first.size() != second.size() || first.empty()) throw DimensionError("kappa needs two equal-length selections");
    const double n = static_cast<double>(first.size());
    double both = 0.0, neither = 0.0, sel1 = 0.0, sel2 = 0.0;
    for (std::size_t i = 0; i < first.size(); ++i) {
        sel1 += first[i];
        sel2 += second[i];
        both += first[i] && second[i];
        neither += !first[i] && !second[i];
    }
    if (sel1 == 0.0 || sel1 == n || sel2 == 0.0 || sel2 == n) return 0.0;
    const double p1 = sel1 / n;
    const double p2 = sel2 / n;
    const double observed = (both + neither) / n;
    const double chance = p1 * p2 + (1.0 - p1) * (1.0 - p2);
    return (observed - chance) / (1.0 - chance);
}

KscSelection select_lambda_ksc(const LassoFamily& family, const LambdaGrid& grid, int splits, double alpha,
                               std::uint64_t seed, KscRule rule, const LassoOptions& options, int threads) {
    if (splits < 2) throw ConfigError("KSC needs at least 2 random splits");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("KSC alpha must lie in (0, 1)");
    if (grid.values.empty()) throw ConfigError("empty lambda grid");
    const Eigen::Index n = family.pairs();
    const Eigen::Index half = n / 2;
    if (half < 1) throw ConfigError("KSC needs at least 2 lag pairs");

    const std::size_t n_lambda = grid.values.size();
    Matrix kappa(splits, static_cast<Eigen::Index>(n_lambda));
    parallel_for(static_cast<std::size_t>(splits), threads, [&](std::size_t b) {
        Rng rng = make_rng(seed, {0x6b7363, b});
        const auto perm = shuffled_pairs(n, rng);
        std::vector<Eigen::Index> first(perm.begin(), perm.begin() + half);
        std::vector<Eigen::Index> second(perm.begin() + half, perm.begin() + 2 * half);
        std::sort(first.begin(), first.end());
        std::sort(second.begin(), second.end());
        const auto path1 = solve_path(family.system(first), grid, options);
        const auto path2 = solve_path(family.system(second), grid, options);
        for (std::size_t l = 0; l < n_lambda; ++l) {
            const auto& c1 = path1[l].coef;
            const auto& c2 = path2[l].coef;
            std::vector<bool> s1(static_cast<std::size_t>(c1.size())), s2(s1.size());
            for (Eigen::Index i = 0; i < c1.size(); ++i) {
                s1[static_cast<std::size_t>(i)] = c1(i) != 0.0;
                s2[static_cast<std::size_t>(i)] = c2(i) != 0.0;
            }
            kappa(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(l)) = cohen_kappa(s1, s2);
        }
    });

    KscSelection out;
    out.stability.resize(n_lambda);
    for (std::size_t l = 0; l < n_lambda; ++l) out.stability[l] = kappa.col(static_cast<Eigen::Index>(l)).mean();
    const double best = *std::max_element(out.stability.begin(), out.stability.end());
    if (!(best > 0.0)) {
        throw TuningError("selection stability is non-positive for every lambda; use cross-validation instead");
    }
    const double threshold = 1.0 - alpha;
    auto feasible = [&](std::size_t l) { return out.stability[l] / best >= threshold; };
    // the grid is decreasing: the smallest feasible lambda has the largest index
    if (rule == KscRule::smallest) {
        for (std::size_t l = n_lambda; l-- > 0;) {
            if (feasible(l)) {
                out.index = l;
                break;
            }
        }
    } else {
        for (std::size_t l = 0; l < n_lambda; ++l) {
            if (feasible(l)) {
                out.index = l;
                break;
            }
        }
    }
    out.lambda = grid.values[out.index];
    return out;
}

}  // namespace mar
