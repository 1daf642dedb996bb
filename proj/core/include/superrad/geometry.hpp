#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace superrad {

using Vec3 = Eigen::Vector3d;

/// Unit conventions used everywhere: lengths in units of the transition wavelength
/// (lambda = 1, so k = 2 pi) and rates in units of the single-atom decay rate.
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kWaveNumber = 2.0 * kPi;

/// Transition type selecting the angular factor of the dipole kernel.
enum class DipoleMode {
    Linear,    ///< Delta M = 0: coefficient P2(cos theta)
    Circular,  ///< Delta M = +-1: coefficient -P2(cos theta)/2
};

/// Fixed atom positions (units of lambda) sharing one dipole orientation.
///
/// Invariants: no two atoms coincide, |dipole| = 1 within 1e-12. Both are checked on
/// construction.
class AtomCloud {
public:
    AtomCloud() = default;
    AtomCloud(std::vector<Vec3> positions, Vec3 dipole = Vec3::UnitZ(),
              DipoleMode mode = DipoleMode::Linear, std::string label = {});

    std::size_t size() const noexcept { return positions_.size(); }
    bool empty() const noexcept { return positions_.empty(); }

    const std::vector<Vec3>& positions() const noexcept { return positions_; }
    const Vec3& position(std::size_t n) const { return positions_.at(n); }
    const Vec3& dipole() const noexcept { return dipole_; }
    DipoleMode mode() const noexcept { return mode_; }
    const std::string& label() const noexcept { return label_; }

    /// R_n - R_m.
    Vec3 displacement(std::size_t n, std::size_t m) const {
        return positions_[n] - positions_[m];
    }

    AtomCloud translated(const Vec3& shift) const;
    AtomCloud with_label(std::string label) const;

private:
    std::vector<Vec3> positions_;
    Vec3 dipole_ = Vec3::UnitZ();
    DipoleMode mode_ = DipoleMode::Linear;
    std::string label_;
};

/// How double_line_lattice distributes an odd atom total.
enum class LineSplit {
    Even,       ///< odd totals are rejected
    CeilFirst,  ///< first line receives ceil(N/2) atoms
};

/// n atoms along +y at spacing d, dipole z.
AtomCloud line_lattice(std::size_t n, double d);

/// Two lines parallel to y displaced by `offset` along x (defaults to d), rows aligned.
AtomCloud double_line_lattice(std::size_t n_total, double d, LineSplit split = LineSplit::Even,
                              double offset = -1.0);

/// n1 x n1 array in the xy plane.
AtomCloud square_lattice(std::size_t n1, double d);

/// n1 x n1 x n1 array.
AtomCloud cubic_lattice(std::size_t n1, double d);

/// Uniform random positions in [0, extent)^3 with pairwise separation >= min_sep.
AtomCloud random_cloud(std::size_t n, double extent, double min_sep, std::uint64_t seed);

/// Keeps each atom independently with probability 1 - p_remove.
///
/// The generator is std::mt19937_64 seeded with `seed`; exactly one 53-bit uniform
/// u in [0,1) is drawn per atom in position order and the atom is kept iff u >= p_remove.
/// Reusing a seed with a larger p_remove therefore yields a subset of the atoms kept at
/// a smaller p_remove.
AtomCloud thin_cloud(const AtomCloud& cloud, double p_remove, std::uint64_t seed);

/// Indices kept by thin_cloud for a cloud of `n` atoms.
std::vector<std::size_t> thin_indices(std::size_t n, double p_remove, std::uint64_t seed);

/// Plain text, one "x y z" triple per line, '#' starts a comment line.
AtomCloud load_cloud(const std::filesystem::path& path);
void save_cloud(const AtomCloud& cloud, const std::filesystem::path& path);
AtomCloud parse_cloud(const std::string& text);

}  // namespace superrad
