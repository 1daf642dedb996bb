#include "superrad/coupling.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "superrad/error.hpp"
#include "superrad/parallel.hpp"

namespace superrad {
namespace {

double p2(double cos_theta) { return 0.5 * (3.0 * cos_theta * cos_theta - 1.0); }

double coefficient(double cos_theta, DipoleMode mode) {
    return mode == DipoleMode::Linear ? p2(cos_theta) : -0.5 * p2(cos_theta);
}

double checked_norm(const Vec3& r) {
    const double len = r.norm();
    if (!(len > 0.0)) throw DomainError("dipole kernel is singular at zero displacement");
    if (kWaveNumber * len < kMinKernelArgument) {
        throw DomainError("dipole kernel argument below 1e-8 (near-coincident atoms)");
    }
    return len;
}

}  // namespace

double angular_factor(const Vec3& r_hat, const Vec3& dipole, DipoleMode mode) {
    return coefficient(r_hat.dot(dipole), mode);
}

cplx green_g(const Vec3& r, const Vec3& dipole, DipoleMode mode) {
    const double len = checked_norm(r);
    const double s = kWaveNumber * len;
    const double c = coefficient(r.dot(dipole) / len, mode);
    return 0.5 * (hankel_h0(s) + c * hankel_h2(s));
}

double decay_kernel_scalar(double s, double cos_theta, DipoleMode mode) {
    if (s < kMinKernelArgument) {
        throw DomainError("dipole kernel argument below 1e-8 (near-coincident atoms)");
    }
    const double c = coefficient(cos_theta, mode);
    if (s < 1.0) return bessel_j0(s) + c * bessel_j2(s);
    const double sn = std::sin(s);
    const double cs = std::cos(s);
    const double inv = 1.0 / s;
    const double j0 = sn * inv;
    const double j2 = (3.0 * inv * inv * inv - inv) * sn - 3.0 * cs * inv * inv;
    return j0 + c * j2;
}

double decay_kernel(const Vec3& r, const Vec3& dipole, DipoleMode mode) {
    const double len = checked_norm(r);
    return decay_kernel_scalar(kWaveNumber * len, r.dot(dipole) / len, mode);
}

CouplingSet build_coupling(const AtomCloud& cloud, unsigned threads) {
    const auto n = static_cast<Eigen::Index>(cloud.size());
    CouplingSet c;
    c.g = Eigen::MatrixXcd::Zero(n, n);
    c.gamma = Eigen::MatrixXd::Zero(n, n);
    c.omega = Eigen::MatrixXd::Zero(n, n);
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t row) {
        const auto i = static_cast<Eigen::Index>(row);
        c.g(i, i) = cplx(0.5, 0.0);
        c.gamma(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            const cplx v = green_g(cloud.displacement(row, static_cast<std::size_t>(j)),
                                   cloud.dipole(), cloud.mode());
            // each (i, j > i) pair is written only by row i's owner
            c.g(i, j) = v;
            c.g(j, i) = v;
            c.gamma(i, j) = c.gamma(j, i) = 2.0 * v.real();
            c.omega(i, j) = c.omega(j, i) = v.imag();
        }
    });
    return c;
}

void write_coupling_csv(const CouplingSet& c, const std::filesystem::path& path,
                        const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    write_coupling_csv(c, out, header_comment);
    if (!out) throw IoError("write failed for " + path.string());
}

void write_coupling_csv(const CouplingSet& c, std::ostream& out, const std::string& header_comment) {
    if (!header_comment.empty()) out << header_comment;
    out << "n,m,Gamma,Omega\n";
    char buf[128];
    for (Eigen::Index n = 0; n < c.gamma.rows(); ++n) {
        for (Eigen::Index m = 0; m < c.gamma.cols(); ++m) {
            std::snprintf(buf, sizeof buf, "%lld,%lld,%.17g,%.17g\n", static_cast<long long>(n),
                          static_cast<long long>(m), c.gamma(n, m), c.omega(n, m));
            out << buf;
        }
    }
}

double multilevel_gamma(const Vec3& r, const MultilevelChannel& ch, int i, int i_prime) {
    if (i < 0 || i > 2 || i_prime < 0 || i_prime > 2) {
        throw InvalidArgument("Cartesian orbital index must be 0, 1 or 2");
    }
    if (!(ch.gamma_f > 0.0) || !(ch.k_mag > 0.0)) {
        throw InvalidArgument("channel rate and wave number must be positive");
    }
    const double len = r.norm();
    if (!(len > 0.0)) throw DomainError("multilevel kernel is singular at zero displacement");
    const double s = ch.k_mag * len;
    if (s < kMinKernelArgument) throw DomainError("multilevel kernel argument below 1e-8");
    const Vec3 r_hat = r / len;
    const bool kronecker = ch.convention == TraceConvention::Kronecker;
    const double delta = i == i_prime ? 1.0 : 0.0;
    const double trace = kronecker ? delta : 1.0;
    const double isotropic = kronecker ? delta : 1.0;
    const double angular = 0.5 * (3.0 * r_hat[i] * r_hat[i_prime] - trace);
    return ch.gamma_f * (isotropic * bessel_j0(s) + angular * bessel_j2(s));
}

}  // namespace superrad
