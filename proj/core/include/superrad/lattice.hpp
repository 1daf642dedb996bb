#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "superrad/criteria.hpp"
#include "superrad/geometry.hpp"

namespace superrad {

enum class RateKind { Total, Directional };

/// Bravais array with n1 sites along each of `dim` primitive vectors.
///
/// The factories match the geometry builders: the line runs along +y, the square lies
/// in the xy plane, and every family has a z dipole by default.
struct LatticeSpec {
    int dim = 1;
    std::array<Vec3, 3> basis{Vec3::UnitY(), Vec3::UnitX(), Vec3::UnitZ()};
    std::size_t n1 = 1;
    Vec3 dipole = Vec3::UnitZ();
    DipoleMode mode = DipoleMode::Linear;

    static LatticeSpec line(std::size_t n, double d);
    static LatticeSpec square(std::size_t n1, double d);
    static LatticeSpec cubic(std::size_t n1, double d);
    /// dim = 1, 2 or 3 with spacing d along the family's axes.
    static LatticeSpec of_dim(int dim, std::size_t n1, double d);

    std::size_t n_atoms() const;
    /// Throws InvalidArgument for a bad dimension, zero size, dependent basis vectors or a
    /// non-unit dipole.
    void validate() const;
    /// Every site explicitly, for the naive O(N^2) path.
    AtomCloud expand() const;
    /// Position of the displacement nu_1 a_1 + nu_2 a_2 + nu_3 a_3.
    Vec3 displacement(const std::array<long, 3>& nu) const;
};

/// Multiplicity weight prod_i (1 - |nu_i| / n1) over the active axes.
double pair_weight(const std::array<long, 3>& nu, int dim, std::size_t n1);

/// gdot(0) = N (-2 + sum_nu W_nu Gamma_nu^2). Parallel over displacement shells with a
/// fixed reduction order, so the result does not depend on `threads`.
SlopeResult gdot_total_fast(const LatticeSpec& spec, unsigned threads = 1);

/// gdot(0, k_f) = N (-2 + sum_nu W_nu Gamma_nu cos(k_f . R_nu)).
SlopeResult gdot_directional_fast(const LatticeSpec& spec, const Vec3& k_f, unsigned threads = 1);

/// Scaled slope gdot(0)/N for every n1 in [1, n1_max] in one pass.
///
/// W is a polynomial in 1/n1 whose coefficients are moments of the kernel over shells
/// max_i |nu_i| = M; accumulating those moments shell by shell gives all sizes at the
/// cost of the largest one. Entry i holds n1 = i + 1.
std::vector<double> scaled_slope_series(const LatticeSpec& shape, std::size_t n1_max,
                                        RateKind kind, const std::optional<Vec3>& k_f = {},
                                        unsigned threads = 1);

struct ThresholdResult {
    int dim = 0;
    double d = 0.0;
    RateKind kind = RateKind::Total;
    std::size_t n1_max = 0;
    bool found = false;
    /// Start of the positive run that lasts to n1_max (0 when not found).
    std::size_t n1_threshold = 0;
    /// First n1 with a positive slope; differs from n1_threshold when there are dips.
    std::size_t first_positive = 0;
    double largest_slope = 0.0;
    std::size_t n1_at_largest = 0;
};

/// Smallest n1 past which the scaled slope stays positive up to n1_max. Every size is
/// scanned; the sign change is then confirmed with gdot_*_fast at the boundary.
ThresholdResult threshold_n1(int dim, double d, RateKind kind, const std::optional<Vec3>& k_f,
                             std::size_t n1_max, unsigned threads = 1);

struct FitResult {
    int dim = 0;
    double d = 0.0;
    std::size_t n1_lo = 0;
    std::size_t n1_hi = 0;
    std::size_t points = 0;
    double C = 0.0;    ///< intercept
    double D = 0.0;    ///< raw coefficient of ln n1 (dim 2) or n1 (dim 3)
    double rms = 0.0;  ///< residual root mean square
    /// n1 at which C + D x crosses zero; an extrapolation, not a computed threshold.
    std::optional<double> extrapolated_threshold;

    /// D d^2 / lambda^2, the spacing-independent coefficient.
    double normalized_coefficient() const { return D * d * d; }
};

/// Least-squares fit of the scaled total slope against ln n1 (dim 2) or n1 (dim 3).
/// n1_lo = n1_hi = 0 selects [50, 400] (dim 2) or [6, 60] (dim 3).
FitResult fit_asymptote(int dim, double d, std::size_t n1_lo = 0, std::size_t n1_hi = 0,
                        unsigned threads = 1);

struct Limit1dResult {
    double value = 0.0;
    long nu_max = 0;
    /// Upper bound on the neglected tail; only for the absolutely convergent total kind.
    std::optional<double> tail_bound;
    bool conditionally_convergent = false;
};

/// Infinite-line scaled slope truncated symmetrically at |nu| <= nu_max.
Limit1dResult limit_1d(double d, RateKind kind, const std::optional<Vec3>& k_f, long nu_max);

}  // namespace superrad
