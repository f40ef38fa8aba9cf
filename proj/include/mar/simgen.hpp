#pragma once

#include "mar/matcore.hpp"
#include "mar/rng.hpp"

#include <cstdint>

namespace mar {

/// Banded truth: entries with |i-j| <= k drawn from U[-1, 1].
struct BandedDesign {
    Eigen::Index p1 = 0;
    Eigen::Index p2 = 0;
    BandSpec band;
    double rho_target = 0.5;

    void validate() const;
};

/// How a nonzero proportion r becomes a per-row count for dimension p.
enum class NonzeroRule {
    floor,    ///< floor(r p)
    nearest,  ///< r p rounded to the nearest integer, halves up
};

/// Sparse truth: per row, a fixed number of nonzeros with magnitudes in [1, 2].
struct SparseDesign {
    Eigen::Index p1 = 0;
    Eigen::Index p2 = 0;
    double r1 = 0.3;
    double r2 = 0.3;
    double rho_target = 0.9;
    NonzeroRule rule = NonzeroRule::floor;

    void validate() const;
};

/// Innovations E_t with i.i.d. N(0, scale^2) entries. Only the identity
/// covariance is supported; `scale` exists so tests can switch noise off.
struct NoiseSpec {
    double scale = 1.0;
};

inline constexpr int kDefaultBurnIn = 200;

MarCoefficients gen_banded_coeffs(const BandedDesign& design, std::uint64_t seed);
/// Nonzeros per row under `rule`.
Eigen::Index nonzeros_per_row(double r, Eigen::Index p, NonzeroRule rule = NonzeroRule::floor);

MarCoefficients gen_sparse_coeffs(const SparseDesign& design, std::uint64_t seed);

/// Y_0 = 0, Y_t = A Y_{t-1} B' + E_t for burn_in + T steps; returns the last T.
/// Throws StationarityError unless rho(A) rho(B) < 1.
MatrixSeries simulate(const MarCoefficients& coeffs, const NoiseSpec& noise, std::size_t T,
                      std::size_t burn_in, std::uint64_t seed);

}  // namespace mar
