#include "mar/simgen.hpp"

#include "mar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace mar {

namespace {

constexpr int kMaxRedraws = 100;

Matrix draw_band(Eigen::Index p, int k, Rng& rng) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Matrix m = Matrix::Zero(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = std::max<Eigen::Index>(0, j - k); i <= std::min<Eigen::Index>(p - 1, j + k); ++i) {
            m(i, j) = unif(rng);
        }
    }
    return m;
}

Matrix draw_sparse(Eigen::Index p, double r, NonzeroRule rule, Rng& rng) {
    std::uniform_real_distribution<double> unif(1.0, 2.0);
    const Eigen::Index positive = p / 2;
    const Eigen::Index zeros = p - nonzeros_per_row(r, p, rule);
    Matrix m(p, p);
    std::vector<double> row(static_cast<std::size_t>(p));
    std::vector<std::size_t> idx(row.size());
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            const double u = unif(rng);
            row[static_cast<std::size_t>(j)] = j < positive ? u : -u;
        }
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::shuffle(idx.begin(), idx.end(), rng);
        for (Eigen::Index z = 0; z < zeros; ++z) row[idx[static_cast<std::size_t>(z)]] = 0.0;
        std::shuffle(row.begin(), row.end(), rng);
        for (Eigen::Index j = 0; j < p; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
    }
    return m;
}

// Rescale A to unit Frobenius norm and B so that rho(A) rho(B) hits the
// target, then fix the sign. Returns false for a degenerate draw.
bool finish_pair(Matrix A, Matrix B, double rho_target, MarCoefficients& out) {
    const double norm_a = A.norm();
    if (!(norm_a > 0.0)) return false;
    A /= norm_a;
    const double rho_a = spectral_radius(A);
    const double rho_b = spectral_radius(B);
    if (!(rho_a > 0.0) || !(rho_b > 0.0)) return false;
    B *= rho_target / (rho_a * rho_b);
    out = normalize_identification(MarCoefficients{std::move(A), std::move(B), false});
    return true;
}

void validate_rho(double rho) {
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("rho_target must lie in (0, 1)");
}

}  // namespace

Eigen::Index nonzeros_per_row(double r, Eigen::Index p, NonzeroRule rule) {
    const double target = r * static_cast<double>(p) + 1e-9;
    return static_cast<Eigen::Index>(rule == NonzeroRule::floor ? std::floor(target) : std::floor(target + 0.5));
}

void BandedDesign::validate() const {
    if (p1 < 1 || p2 < 1) throw DomainError("dimensions must be positive");
    band.validate(p1, p2);
    validate_rho(rho_target);
}

void SparseDesign::validate() const {
    if (p1 < 1 || p2 < 1) throw DomainError("dimensions must be positive");
    if (!(r1 > 0.0 && r1 <= 1.0) || !(r2 > 0.0 && r2 <= 1.0)) {
        throw DomainError("nonzero proportions must lie in (0, 1]");
    }
    if (nonzeros_per_row(r1, p1, rule) < 1 || nonzeros_per_row(r2, p2, rule) < 1) {
        throw DomainError("the nonzero proportions leave a row with no nonzero entry");
    }
    validate_rho(rho_target);
}

MarCoefficients gen_banded_coeffs(const BandedDesign& design, std::uint64_t seed) {
    design.validate();
    Rng rng(seed);
    MarCoefficients out;
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        Matrix A = draw_band(design.p1, design.band.k1, rng);
        Matrix B = draw_band(design.p2, design.band.k2, rng);
        if (finish_pair(std::move(A), std::move(B), design.rho_target, out)) return out;
    }
    throw DegenerateCoefficientError("banded design: 100 consecutive draws had zero spectral radius");
}

MarCoefficients gen_sparse_coeffs(const SparseDesign& design, std::uint64_t seed) {
    design.validate();
    Rng rng(seed);
    MarCoefficients out;
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        Matrix A = draw_sparse(design.p1, design.r1, design.rule, rng);
        Matrix B = draw_sparse(design.p2, design.r2, design.rule, rng);
        if (finish_pair(std::move(A), std::move(B), design.rho_target, out)) return out;
    }
    throw DegenerateCoefficientError("sparse design: 100 consecutive draws had zero spectral radius");
}

MatrixSeries simulate(const MarCoefficients& coeffs, const NoiseSpec& noise, std::size_t T,
                      std::size_t burn_in, std::uint64_t seed) {
    if (T < 2) throw DomainError("simulate needs T >= 2");
    if (coeffs.A.rows() != coeffs.A.cols() || coeffs.B.rows() != coeffs.B.cols()) {
        throw DimensionError("coefficient matrices must be square");
    }
    if (!is_stationary(coeffs)) {
        throw StationarityError("rho(A) rho(B) = " +
                                std::to_string(spectral_radius(coeffs.A) * spectral_radius(coeffs.B)) +
                                " >= 1");
    }
    const auto p1 = coeffs.A.rows();
    const auto p2 = coeffs.B.rows();
    const Matrix Bt = coeffs.B.transpose();
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<Matrix> out;
    out.reserve(T);
    Matrix y = Matrix::Zero(p1, p2);
    Matrix e(p1, p2);
    for (std::size_t step = 0; step < burn_in + T; ++step) {
        for (Eigen::Index j = 0; j < p2; ++j) {
            for (Eigen::Index i = 0; i < p1; ++i) e(i, j) = noise.scale * normal(rng);
        }
        y = coeffs.A * y * Bt + e;
        if (step >= burn_in) out.push_back(y);
    }
    return MatrixSeries(std::move(out));
}

}  // namespace mar
