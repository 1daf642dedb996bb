#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "superrad/criteria.hpp"
#include "superrad/geometry.hpp"
#include "superrad/lattice.hpp"

namespace superrad {

/// Array families. The size parameter is the atom count for the line families and the
/// number of sites per axis (N1) for the square and cubic arrays. Double lines with an
/// odd total put the extra atom on the first line.
enum class Family { Line, DoubleLine, Square, Cubic };

const char* family_name(Family f);
bool is_bravais(Family f);

/// Atoms of `family` at size parameter `size` and spacing `d`.
AtomCloud build_family(Family family, std::size_t size, double d);

struct Axis {
    std::string name;
    std::vector<double> samples;

    /// lo, lo + step, ... up to hi (inclusive within step / 1e6).
    static Axis range(std::string name, double lo, double hi, double step);
    static Axis integers(std::string name, std::size_t lo, std::size_t hi);
    std::size_t size() const noexcept { return samples.size(); }
};

/// Row-major grid of scaled slopes gdot(0) / N; rows follow the y axis, columns the x axis.
struct RegionMap {
    Axis x;
    Axis y;
    std::vector<double> values;
    std::vector<std::uint8_t> mask;  ///< values > 0

    RegionMap() = default;
    RegionMap(Axis x_axis, Axis y_axis);

    std::size_t rows() const noexcept { return y.size(); }
    std::size_t cols() const noexcept { return x.size(); }
    bool empty() const noexcept { return values.empty(); }
    double value(std::size_t row, std::size_t col) const { return values.at(row * cols() + col); }
    bool superradiant(std::size_t row, std::size_t col) const {
        return mask.at(row * cols() + col) != 0;
    }
    void set(std::size_t row, std::size_t col, double v);
    /// Throws InvalidArgument if sizes disagree or a mask entry does not match its value.
    void validate() const;
    std::size_t area() const;
};

/// Scaled slope of one cell; Bravais families use the O(N) weighted sum.
double cell_scaled_slope(Family family, RateKind kind, std::size_t size, double d,
                         const std::optional<Vec3>& k_f, unsigned threads = 1);

/// Size on x, spacing on y. k_f = 2 pi (cos phi, sin phi, 0) for the directional kind.
RegionMap map_n_d(Family family, RateKind kind, double phi, const Axis& sizes, const Axis& spacings,
                  unsigned threads = 0);

/// Directional map with the emission angle phi on x and spacing on y at a fixed size.
RegionMap map_phi_d(Family family, std::size_t size, const Axis& phis, const Axis& spacings,
                    unsigned threads = 0);

struct PartialSweep {
    /// x = excited fraction sin^2(alpha/2), y = spacing.
    RegionMap map;
    std::vector<double> alphas;
    std::vector<std::size_t> areas;  ///< superradiant cells per alpha
    /// Areas never grow as the excited fraction decreases. Reported, not enforced.
    bool area_monotone = true;
};

/// Partially inverted slopes for each alpha (any order; columns follow the sorted
/// excited fraction). k_i is the drive direction; along z it gives eta = 0 in plane.
PartialSweep partial_sweep(Family family, std::size_t size, RateKind kind, double phi,
                           const Axis& spacings, const std::vector<double>& alphas,
                           const Vec3& k_i, unsigned threads = 0);

struct Band {
    double lo = 0.0;
    double hi = 0.0;
};

struct PartialThreshold {
    /// Lowest fraction on the coarse grid where the band still has a superradiant cell.
    std::optional<double> coarse_present;
    /// The next coarse fraction below, where it has none.
    std::optional<double> coarse_absent;
    /// Bisection between the two, within `tolerance`.
    std::optional<double> refined;
};

/// Smallest excited fraction at which `band` keeps a superradiant cell, scanning down
/// from full inversion in steps of `coarse_step` and bisecting the last interval.
PartialThreshold partial_threshold(Family family, std::size_t size, RateKind kind, double phi,
                                   Band band, double d_step, const Vec3& k_i,
                                   double coarse_step = 0.05, double tolerance = 1e-3,
                                   unsigned threads = 0);

struct RemovalStudy {
    std::vector<double> p_values;
    std::vector<double> survival;  ///< fraction of trials with a superradiant band cell
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    /// Kept fraction 1 - p where survival crosses 1/2, linearly interpolated.
    std::optional<double> kept_at_half;
};

/// Seed of trial `t` for a study seeded with `seed`.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial);

/// Random atom removal. For each trial one uniform draw per atom is shared across all
/// p values (thin_indices with trial_seed), so kept sets are nested in p. A trial
/// survives at p when any spacing in `band` (step d_step) gives a positive slope.
RemovalStudy removal_study(Family family, std::size_t size, RateKind kind, double phi, Band band,
                           double d_step, const std::vector<double>& p_values, std::size_t trials,
                           std::uint64_t seed, unsigned threads = 0);

/// 4-neighbour connected components of the mask; label 0 is background, components are
/// numbered from 1 in row-major order of first appearance.
std::vector<int> connected_components(const RegionMap& map, int* count = nullptr);

/// True if a connected superradiant component has a cell in column `col` with a y value
/// inside [band.lo, band.hi].
bool region_in_band(const RegionMap& map, std::size_t col, Band band);

/// Smallest x value whose column has a superradiant cell in `band`, if any.
std::optional<double> region_onset(const RegionMap& map, Band band);

}  // namespace superrad
