#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "superrad/coupling.hpp"
#include "superrad/geometry.hpp"

namespace superrad {

/// Product initial state: every atom in cos(alpha/2)|g> + exp(i k_i.R) sin(alpha/2)|e>.
struct DriveSpec {
    double alpha = kPi;             ///< inversion angle, 0 <= alpha <= pi
    Vec3 k_i = Vec3::Zero();        ///< drive direction; rescaled to |k_i| = 2 pi when nonzero

    static DriveSpec inverted() { return {}; }
    double excited_fraction() const;
};

/// Emission direction k_f = 2 pi (sin th cos ph, sin th sin ph, cos th).
Vec3 emission_vector(double theta, double phi);

/// In-plane emission k_f = 2 pi (cos phi, sin phi, 0).
Vec3 in_plane_emission(double phi);

/// Early-time expansion of a photon emission rate: gamma(0), its first derivative, and
/// optionally the second. Rates are in units of Gamma (Gamma = 1).
struct SlopeResult {
    std::size_t n_atoms = 0;
    double gamma0 = 0.0;
    double gdot0 = 0.0;
    std::optional<double> gddot0;
    std::optional<Vec3> k_f;
    double alpha = kPi;
    Vec3 k_i = Vec3::Zero();
    /// gdot0 == single_atom_term + pair_term exactly.
    double single_atom_term = 0.0;
    double pair_term = 0.0;
    /// k_f parallel to the dipole, where the directional rate is ill defined.
    bool direction_warning = false;

    bool superradiant() const noexcept { return gdot0 > 0.0; }
    /// gdot0 / (N Gamma^2).
    double scaled() const noexcept {
        return n_atoms == 0 ? 0.0 : gdot0 / static_cast<double>(n_atoms);
    }
};

/// Which phase enters the leading double sum of the partially inverted directional slope.
enum class DirectionalPhase {
    Detection,  ///< cos(phi_nm), reduces to the fully inverted directional slope at alpha = pi
    AsPrinted,  ///< cos(eta_nm)
};

struct PartialOptions {
    std::size_t max_atoms = 400;  ///< cap for the O(N^3) sums
    DirectionalPhase reading = DirectionalPhase::Detection;
};

/// gdot(0) = -2 N + sum_nm Gamma_nm^2, O(N^2), no matrix product.
SlopeResult gdot_total_inverted(const CouplingSet& c);

/// gdot(0, k_f) = -2 N + sum_nm Gamma_mn cos(k_f.(R_n - R_m)).
SlopeResult gdot_directional_inverted(const CouplingSet& c, const AtomCloud& cloud,
                                      const Vec3& k_f);

/// Partially inverted product state, total rate. O(N^3).
SlopeResult gdot_total_partial(const CouplingSet& c, const AtomCloud& cloud,
                               const DriveSpec& drive, const PartialOptions& opts = {});

/// Partially inverted product state, rate into k_f. O(N^3).
SlopeResult gdot_directional_partial(const CouplingSet& c, const AtomCloud& cloud,
                                     const DriveSpec& drive, const Vec3& k_f,
                                     const PartialOptions& opts = {});

/// Both algebraic forms of the fully inverted second derivative of the total rate.
struct SecondDerivative {
    double explicit_sum = 0.0;  ///< N - 5 sum' Gamma^2 + sum''' Gamma Gamma Gamma
    double trace_form = 0.0;    ///< 8N - 8 Tr[G G] + Tr[G G G]
    double rel_diff = 0.0;      ///< relative to the magnitude of the contributing terms
};

SecondDerivative gddot_total_forms(const CouplingSet& c);

/// Fully inverted total rate with gddot0 filled (trace form). Throws NumericalError if
/// the two forms disagree beyond 1e-10 of the term scale.
SlopeResult gddot_total_inverted(const CouplingSet& c);

/// Fully inverted rate into k_f with gddot0 filled. Phase matrices use
/// phi_mn = k_f.(R_m - R_n); the commutator term is Tr[sin(phi) [Gamma, Omega]].
SlopeResult gddot_directional_inverted(const CouplingSet& c, const AtomCloud& cloud,
                                       const Vec3& k_f);

/// Fully inverted multilevel atoms; one result per decay channel. The total rate is
/// the sum of channel rates.
std::vector<SlopeResult> gdot_multilevel(const AtomCloud& cloud,
                                         const std::vector<MultilevelChannel>& channels);

struct EigenCheck {
    double trace_value = 0.0;  ///< sum_nm Gamma_nm^2
    double eigen_sum = 0.0;    ///< sum over eigenvalues Gamma_nu^2
    double rel_diff = 0.0;
    double gdot_from_trace() const { return trace_value - 2.0 * n_atoms; }
    double gdot_from_eigen() const { return eigen_sum - 2.0 * n_atoms; }
    double n_atoms = 0.0;
};

/// Tr[Gamma^2] versus the sum of squared eigenvalues of Gamma.
EigenCheck eigen_criterion_check(const CouplingSet& c);

/// Relative difference |a - b| / max(|a|, |b|), zero when both vanish.
double relative_difference(double a, double b);

}  // namespace superrad
