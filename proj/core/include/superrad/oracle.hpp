#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "superrad/coupling.hpp"
#include "superrad/criteria.hpp"
#include "superrad/geometry.hpp"

namespace superrad {

// Brute-force master-equation reference for small clouds. Basis index i has bit n set
// when atom n is excited; operators are applied by bit manipulation, never as dense
// 2^N x 2^N products.

/// Dense N-atom density matrix, N <= kMaxAtoms.
class DensityMatrix {
public:
    static constexpr std::size_t kMaxAtoms = 8;

    explicit DensityMatrix(std::size_t n_atoms);
    DensityMatrix(std::size_t n_atoms, Eigen::MatrixXcd rho);

    std::size_t n_atoms() const noexcept { return n_; }
    Eigen::Index dim() const noexcept { return rho_.rows(); }
    const Eigen::MatrixXcd& matrix() const noexcept { return rho_; }
    Eigen::MatrixXcd& matrix() noexcept { return rho_; }

private:
    std::size_t n_ = 0;
    Eigen::MatrixXcd rho_;
};

struct InvariantReport {
    double hermiticity = 0.0;     ///< max |rho - rho^dagger|
    double trace_error = 0.0;     ///< |Tr rho - 1|
    double min_eigenvalue = 0.0;  ///< of the Hermitian part
    bool ok() const { return hermiticity <= 1e-10 && trace_error <= 1e-10 && min_eigenvalue >= -1e-8; }
};

InvariantReport check_invariants(const DensityMatrix& rho);

/// Throws NumericalError describing the violated invariant.
void require_invariants(const DensityMatrix& rho, const std::string& context);

/// Product state prod_n [cos(alpha/2)|g> + exp(i k_i.R_n) sin(alpha/2)|e>].
DensityMatrix initial_state(const AtomCloud& cloud, const DriveSpec& drive);

/// <e_n>.
double excited_population(const DensityMatrix& rho, std::size_t n);

/// <sigma+_m sigma-_n> for any 2^N x 2^N operator argument.
cplx coherence(const Eigen::MatrixXcd& rho, std::size_t n_atoms, std::size_t m, std::size_t n);

/// d rho / dt for a Hermitian argument:
/// -i (H_eff rho - rho H_eff^dagger) + sum_nm Gamma_nm sigma-_n rho sigma+_m with
/// H_eff = sum_jk (Omega_jk - i Gamma_jk / 2) sigma+_j sigma-_k.
Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& rho, const CouplingSet& c);

/// w(m, n) multiplying <sigma+_m sigma-_n> in the total rate: Gamma_mn.
Eigen::MatrixXcd total_rate_weights(const CouplingSet& c);

/// Rate into k_f: w(n, n) = 1 and w(m, n) = exp(i k_f.(R_m - R_n)).
Eigen::MatrixXcd directional_rate_weights(const AtomCloud& cloud, const Vec3& k_f);

/// sum_mn w(m, n) <sigma+_m sigma-_n>; throws NumericalError on a non-real result.
double photon_rate(const Eigen::MatrixXcd& rho, std::size_t n_atoms, const Eigen::MatrixXcd& w);

struct RateMoments {
    double rate = 0.0;
    double first = 0.0;
    double second = 0.0;
};

/// Tr[G rho0], Tr[G L rho0], Tr[G L^2 rho0] for the rate operator with weights w.
RateMoments exact_rate_moments(const DensityMatrix& rho0, const CouplingSet& c,
                               const Eigen::MatrixXcd& w);

struct EvolveOptions {
    double dt = 1e-3;
    std::size_t sample_every = 1;
    std::optional<Vec3> k_f;
    bool check_invariants = true;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<double> gamma_total;
    std::vector<double> gamma_dir;  ///< empty without k_f
};

/// Fixed-step classical RK4 from t = 0 to t_end, sampling every `sample_every` steps.
/// Invariants are checked at each sample; a violation aborts with NumericalError.
Trajectory evolve(const DensityMatrix& rho0, const CouplingSet& c, const AtomCloud& cloud,
                  double t_end, const EvolveOptions& opts = {});

/// "t,gamma_total,gamma_dir" after `#` comment lines.
void write_trajectory_csv(const Trajectory& tr, const std::filesystem::path& path,
                          const std::string& header_comment = {});

struct OracleOptions {
    double h = 0.02;        ///< coarsest finite-difference step
    int substeps = 5;       ///< RK4 steps per h/4
};

struct FiniteDifference {
    double first = 0.0;     ///< Richardson-extrapolated one-sided first derivative
    double second = 0.0;    ///< Richardson-extrapolated one-sided second derivative
    double first_raw = 0.0; ///< (gamma(h/4) - gamma(0)) / (h/4), before extrapolation
};

/// Derivatives of Tr[G rho(t)] at t = 0+ from integrated samples at multiples of h/4.
FiniteDifference richardson_derivatives(const DensityMatrix& rho0, const CouplingSet& c,
                                        const Eigen::MatrixXcd& w, const OracleOptions& opts = {});

struct SlopeCheck {
    double formula_value = 0.0;
    double oracle_value = 0.0;
    /// |formula - oracle| / max(|formula|, |oracle|, gamma(0)).
    double rel_diff = 0.0;
    double exact_moment = 0.0;
    /// Directional only: the as-printed cos(eta) reading of the leading term.
    std::optional<double> as_printed_value;
    std::optional<double> as_printed_rel_diff;
};

/// First-derivative formula versus the integrated master equation.
SlopeCheck slope_check(const AtomCloud& cloud, const DriveSpec& drive,
                       const std::optional<Vec3>& k_f = {}, const OracleOptions& opts = {});

/// Fully inverted second-derivative formula versus the integrated master equation.
SlopeCheck second_derivative_check(const AtomCloud& cloud, const std::optional<Vec3>& k_f = {},
                                   const OracleOptions& opts = {});

}  // namespace superrad
