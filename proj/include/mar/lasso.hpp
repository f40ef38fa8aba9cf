#pragma once

#include "mar/banded.hpp"
#include "mar/matcore.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace mar {

/// min_theta (1/n_T) ||y - Z theta||^2 + lambda sum_g w_g |theta_g|
///
/// `sample_count` is n_T, the number of stacked lag pairs; it need not equal
/// the number of rows of Z. Empty `penalty_weights` means w = 1.
struct LassoProblem {
    Matrix design;
    Vector response;
    double sample_count = 0.0;
    double lambda = 0.0;
    Vector penalty_weights;

    double normalizer() const { return sample_count > 0.0 ? sample_count : static_cast<double>(design.rows()); }
};

struct LassoOptions {
    double tol = 1e-9;
    int max_passes = 10000;
};

struct LassoSolution {
    Vector coef;
    int passes = 0;
    bool converged = false;
    /// Largest violation of the stationarity conditions at `coef`.
    double kkt_residual = 0.0;
};

LassoSolution lasso_cd(const LassoProblem& problem, const LassoOptions& options = {},
                       const Vector* warm_start = nullptr);

/// Smallest lambda with an all-zero solution: max_g |(2/n_T) Z_g' y| / w_g.
double lambda_max(const LassoProblem& problem);

/// KKT violation computed from the explicit residual y - Z theta.
double kkt_residual(const LassoProblem& problem, const Vector& coef);

/// Root-mean-square of each column over `rows` rows; the weights that make a
/// weighted Lasso equal to one on unit-variance columns.
Vector standardization_weights(const Matrix& design, double rows);

/// Quadratic form of one or more Lasso problems sharing a design:
///   gram = Z'Z / n_T,  cross.col(i) = Z' y_i / n_T.
struct GramSystem {
    Matrix gram;
    Matrix cross;
    Vector weights;
};

/// Coordinate descent on one column of a GramSystem, warm-started from `beta`.
LassoSolution solve_gram(const Matrix& gram, const Vector& cross, const Vector& weights, double lambda,
                         Vector beta, const LassoOptions& options);

struct LambdaGrid {
    std::vector<double> values;   ///< strictly decreasing

    static LambdaGrid geometric(double lambda_max, int count = 100, double ratio = 1e-3);
};

/// The Lasso on one side of the model: one problem per coefficient row, all
/// sharing the stacked design. The penalty applies to the pooled vector
/// vec(A) (or vec(B)), so a subset fit solves the monolithic vec-form
/// problem row by row.
class LassoFamily {
public:
    LassoFamily(StackedDesign stacked, bool standardize);

    Eigen::Index pairs() const noexcept { return stacked_.pairs; }
    Eigen::Index dimension() const noexcept { return stacked_.dimension(); }
    Eigen::Index problems() const noexcept { return stacked_.responses.cols(); }
    const StackedDesign& stacked() const noexcept { return stacked_; }

    /// System over the given lag-pair indices (0-based); all pairs when empty.
    GramSystem system(std::span<const Eigen::Index> pairs = {}) const;

    /// Sum of squared residuals over the given pairs; coef is dimension x problems.
    double squared_error(std::span<const Eigen::Index> pairs, const Matrix& coef) const;

private:
    StackedDesign stacked_;
    bool standardize_;
};

double lambda_max(const GramSystem& system);

struct FamilySolution {
    Matrix coef;          ///< dimension x problems; column i is coefficient row i
    bool converged = true;
    double kkt_residual = 0.0;
    int passes = 0;
};

FamilySolution solve_family(const GramSystem& system, double lambda, const LassoOptions& options,
                            const Matrix* warm_start = nullptr);

/// Solutions along a decreasing grid with warm starts.
std::vector<FamilySolution> solve_path(const GramSystem& system, const LambdaGrid& grid, const LassoOptions& options);

enum class CvRule { min, one_se };
enum class FoldScheme { random, contiguous };

struct CvSelection {
    double lambda = 0.0;
    std::size_t index = 0;
    std::vector<double> mean;   ///< mean CV error per grid value
    std::vector<double> se;     ///< standard error per grid value
};

/// K-fold CV over lag-pair indices. `min` returns the minimizer; `one_se`
/// the largest lambda whose mean error is within one standard error of it.
CvSelection select_lambda_cv(const LassoFamily& family, const LambdaGrid& grid, int folds, CvRule rule,
                             std::uint64_t seed, FoldScheme scheme = FoldScheme::random,
                             const LassoOptions& options = {}, int threads = 1);

/// Cohen's kappa of two selection indicator sets; 0 when either selects all or none.
double cohen_kappa(const std::vector<bool>& first, const std::vector<bool>& second);

enum class KscRule { smallest, largest };

struct KscSelection {
    double lambda = 0.0;
    std::size_t index = 0;
    std::vector<double> stability;   ///< S(lambda) per grid value
};

/// Kappa selection criterion: average kappa between active sets fitted on
/// random half-splits, then the smallest (or largest) lambda with
/// S / max S >= 1 - alpha.
KscSelection select_lambda_ksc(const LassoFamily& family, const LambdaGrid& grid, int splits, double alpha,
                               std::uint64_t seed, KscRule rule = KscRule::smallest,
                               const LassoOptions& options = {}, int threads = 1);

}  // namespace mar
