#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>

#include <Eigen/Core>

#include "superrad/geometry.hpp"

namespace superrad {

using cplx = std::complex<double>;

// Spherical Bessel and outgoing Hankel functions of order 0 and 2.
//
// The Hankel functions are assembled as j_l + i y_l. Below s = 1 the regular part j_l
// comes from its power series; the closed form (3/s^3 - 1/s) sin s - 3 cos s / s^2
// cancels catastrophically there (relative error ~ 45 eps / s^5). The irregular part
// y_l uses the closed form throughout, so Im h_2 carries the 1/s^3 singularity and
// loses relative precision only through cos/sin rounding. Arguments below
// kMinKernelArgument are rejected.
inline constexpr double kMinKernelArgument = 1e-8;

double bessel_j0(double s);
double bessel_j2(double s);
cplx hankel_h0(double s);
cplx hankel_h2(double s);

/// Angular coefficient multiplying h_2 for displacement direction `r_hat`.
double angular_factor(const Vec3& r_hat, const Vec3& dipole, DipoleMode mode);

/// g(R) = (Gamma/2) [h0(kR) + c(R_hat) h2(kR)] with Gamma = 1, k = 2 pi.
cplx green_g(const Vec3& r, const Vec3& dipole, DipoleMode mode = DipoleMode::Linear);

/// 2 Re g at argument s = kR with cos(theta) = R_hat . dipole. Needs s >= 1e-8.
double decay_kernel_scalar(double s, double cos_theta, DipoleMode mode);

/// 2 Re g(R), evaluated through the real Bessel functions only.
double decay_kernel(const Vec3& r, const Vec3& dipole, DipoleMode mode = DipoleMode::Linear);

/// Pairwise collective couplings for one cloud.
///
/// g(n,m) = g(R_n - R_m) off the diagonal and 1/2 on it, so that gamma = 2 Re g has unit
/// diagonal and omega = Im g has zero diagonal.
struct CouplingSet {
    Eigen::MatrixXcd g;
    Eigen::MatrixXd gamma;
    Eigen::MatrixXd omega;

    std::size_t size() const noexcept { return static_cast<std::size_t>(gamma.rows()); }

    /// g+_nm = i Omega_nm + Gamma_nm / 2 (equals g for n != m).
    cplx g_plus(std::size_t n, std::size_t m) const {
        return {gamma(n, m) / 2.0, omega(n, m)};
    }
    /// g-_nm = -i Omega_nm + Gamma_nm / 2.
    cplx g_minus(std::size_t n, std::size_t m) const {
        return {gamma(n, m) / 2.0, -omega(n, m)};
    }
};

/// O(N^2) symmetric fill. Throws DomainError for coincident or near-coincident atoms.
CouplingSet build_coupling(const AtomCloud& cloud, unsigned threads = 1);

/// Writes "n,m,Gamma,Omega" rows for every ordered pair, after `#` provenance lines.
void write_coupling_csv(const CouplingSet& c, const std::filesystem::path& path,
                        const std::string& header_comment = {});
void write_coupling_csv(const CouplingSet& c, std::ostream& out,
                        const std::string& header_comment = {});

/// Trace term convention for the multilevel kernel.
enum class TraceConvention {
    AsPrinted,  ///< j0 + (3 R_i R_i' - 1)/2 j2
    Kronecker,  ///< delta_ii' j0 + (3 R_i R_i' - delta_ii')/2 j2, tending to Gamma_f delta_ii' as R -> 0
};

struct MultilevelChannel {
    double gamma_f = 1.0;            ///< partial decay rate into this final level
    double k_mag = kWaveNumber;      ///< photon wave number of the channel
    TraceConvention convention = TraceConvention::AsPrinted;
};

/// Gamma_nm^{f i i'} for Cartesian orbitals i, i' in {0, 1, 2}.
double multilevel_gamma(const Vec3& r, const MultilevelChannel& ch, int i, int i_prime);

}  // namespace superrad
