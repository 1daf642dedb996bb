#include "superrad/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "superrad/error.hpp"
#include "superrad/parallel.hpp"

namespace superrad {
namespace {

void require_matching(const CouplingSet& c, const AtomCloud& cloud) {
    if (c.size() != cloud.size()) {
        throw InvalidArgument("coupling set and cloud describe different atom counts");
    }
}

Vec3 normalized_wavevector(const Vec3& k, const char* what) {
    const double len = k.norm();
    if (!(len > 0.0) || !std::isfinite(len)) {
        throw InvalidArgument(std::string(what) + " must be a nonzero finite vector");
    }
    return k * (kWaveNumber / len);
}

bool parallel_to(const Vec3& k, const Vec3& dipole) {
    return k.normalized().cross(dipole).norm() < 1e-12;
}

void require_alpha(double alpha) {
    if (!(alpha >= 0.0 && alpha <= kPi + 1e-12)) {
        throw InvalidArgument("inversion angle must lie in [0, pi]");
    }
}

std::vector<double> drive_phases(const AtomCloud& cloud, const Vec3& k_i) {
    std::vector<double> theta(cloud.size(), 0.0);
    if (k_i.isZero(0.0)) return theta;
    const Vec3 k = normalized_wavevector(k_i, "drive wavevector");
    for (std::size_t n = 0; n < cloud.size(); ++n) theta[n] = k.dot(cloud.position(n));
    return theta;
}

double trace_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.cwiseProduct(b.transpose()).sum();
}

// Sums that are real only after full (n, m) symmetrisation.
void check_imaginary_residue(const cplx& total, double scale, const char* what) {
    if (std::abs(total.imag()) > 1e-9 * std::max(std::abs(total.real()), scale)) {
        throw NumericalError(std::string(what) + ": imaginary residue " +
                             std::to_string(total.imag()) + " exceeds 1e-9 relative");
    }
}

}  // namespace

double DriveSpec::excited_fraction() const {
    const double s = std::sin(alpha / 2.0);
    return s * s;
}

Vec3 emission_vector(double theta, double phi) {
    return kWaveNumber *
           Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
}

Vec3 in_plane_emission(double phi) {
    return kWaveNumber * Vec3(std::cos(phi), std::sin(phi), 0.0);
}

double relative_difference(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

SlopeResult gdot_total_inverted(const CouplingSet& c) {
    const auto n = c.gamma.rows();
    CompensatedSum pairs;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (i != j) pairs.add(c.gamma(i, j) * c.gamma(i, j));
        }
    }
    SlopeResult r;
    r.n_atoms = static_cast<std::size_t>(n);
    r.gamma0 = static_cast<double>(n);
    r.single_atom_term = -static_cast<double>(n);
    r.pair_term = pairs.value();
    r.gdot0 = r.single_atom_term + r.pair_term;
    return r;
}

SlopeResult gdot_directional_inverted(const CouplingSet& c, const AtomCloud& cloud,
                                      const Vec3& k_f) {
    require_matching(c, cloud);
    const Vec3 k = normalized_wavevector(k_f, "emission wavevector");
    const std::size_t n = cloud.size();
    CompensatedSum pairs;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            const double phase = k.dot(cloud.displacement(a, b));
            pairs.add(c.gamma(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) *
                      std::cos(phase));
        }
    }
    SlopeResult r;
    r.n_atoms = n;
    r.gamma0 = static_cast<double>(n);
    r.k_f = k;
    r.single_atom_term = -static_cast<double>(n);
    r.pair_term = pairs.value();
    r.gdot0 = r.single_atom_term + r.pair_term;
    r.direction_warning = n > 0 && parallel_to(k, cloud.dipole());
    return r;
}

namespace {

// Three-atom sum T_nm = sum_{l != n,m} (g_nl e^{i eta_lm} + g*_ml e^{-i eta_ln}).
cplx three_atom_sum(const CouplingSet& c, const std::vector<cplx>& u, std::size_t n,
                    std::size_t m) {
    cplx acc{0.0, 0.0};
    const auto nn = static_cast<Eigen::Index>(n);
    const auto mm = static_cast<Eigen::Index>(m);
    for (std::size_t l = 0; l < u.size(); ++l) {
        if (l == n || l == m) continue;
        const auto ll = static_cast<Eigen::Index>(l);
        acc += c.g(nn, ll) * u[l] * std::conj(u[m]) + std::conj(c.g(mm, ll)) * std::conj(u[l]) * u[n];
    }
    return acc;
}

void check_partial_inputs(const CouplingSet& c, const AtomCloud& cloud, const DriveSpec& drive,
                          const PartialOptions& opts) {
    require_matching(c, cloud);
    require_alpha(drive.alpha);
    if (cloud.size() > opts.max_atoms) {
        throw TooLarge("partial-inversion slope is O(N^3); N = " + std::to_string(cloud.size()) +
                       " exceeds the cap of " + std::to_string(opts.max_atoms) +
                       " (raise PartialOptions::max_atoms to override)");
    }
}

}  // namespace

SlopeResult gdot_total_partial(const CouplingSet& c, const AtomCloud& cloud,
                               const DriveSpec& drive, const PartialOptions& opts) {
    check_partial_inputs(c, cloud, drive, opts);
    const std::size_t n = cloud.size();
    const double co = std::cos(drive.alpha);
    const double si = std::sin(drive.alpha);
    const auto theta = drive_phases(cloud, drive.k_i);
    std::vector<cplx> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = std::polar(1.0, theta[i]);

    double scale = 0.0;
    CompensatedSum re, im, gamma0;
    for (std::size_t a = 0; a < n; ++a) {      // n
        for (std::size_t b = 0; b < n; ++b) {  // m
            if (a == b) continue;
            const double gmn = c.gamma(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a));
            const double eta_mn = theta[b] - theta[a];
            const double two_atom =
                0.5 * co * (co - 1.0) * gmn * gmn - 0.5 * si * si * gmn * std::cos(eta_mn);
            const cplx three = -0.25 * co * si * si * gmn * three_atom_sum(c, u, a, b);
            re.add(two_atom + three.real());
            im.add(three.imag());
            scale += std::abs(two_atom) + std::abs(three);
            gamma0.add(0.25 * si * si * gmn * std::cos(eta_mn));
        }
    }
    const cplx pairs(re.value(), im.value());
    check_imaginary_residue(pairs, scale, "total partial-inversion slope");

    SlopeResult r;
    r.n_atoms = n;
    r.alpha = drive.alpha;
    r.k_i = drive.k_i;
    r.gamma0 = static_cast<double>(n) * drive.excited_fraction() + gamma0.value();
    r.single_atom_term = -static_cast<double>(n) * 0.5 * (1.0 - co);
    r.pair_term = pairs.real();
    r.gdot0 = r.single_atom_term + r.pair_term;
    return r;
}

SlopeResult gdot_directional_partial(const CouplingSet& c, const AtomCloud& cloud,
                                     const DriveSpec& drive, const Vec3& k_f,
                                     const PartialOptions& opts) {
    check_partial_inputs(c, cloud, drive, opts);
    const Vec3 k = normalized_wavevector(k_f, "emission wavevector");
    const std::size_t n = cloud.size();
    const double co = std::cos(drive.alpha);
    const double si = std::sin(drive.alpha);
    const auto theta = drive_phases(cloud, drive.k_i);
    std::vector<cplx> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = std::polar(1.0, theta[i]);

    double scale = 0.0;
    CompensatedSum re, im, gamma0;
    for (std::size_t a = 0; a < n; ++a) {      // n
        for (std::size_t b = 0; b < n; ++b) {  // m
            if (a == b) continue;
            const double gmn = c.gamma(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a));
            const double phi_mn = k.dot(cloud.displacement(b, a));
            const double eta_mn = theta[b] - theta[a];
            const double lead_phase = opts.reading == DirectionalPhase::Detection ? phi_mn : eta_mn;
            const double two_atom = 0.5 * co * (co - 1.0) * gmn * std::cos(lead_phase) -
                                    0.25 * si * si * (gmn * std::cos(eta_mn) + std::cos(phi_mn - eta_mn));
            const cplx three =
                -0.25 * si * si * co * std::polar(1.0, phi_mn) * three_atom_sum(c, u, a, b);
            re.add(two_atom + three.real());
            im.add(three.imag());
            scale += std::abs(two_atom) + std::abs(three);
            gamma0.add(0.25 * si * si * std::cos(phi_mn - eta_mn));
        }
    }
    const cplx pairs(re.value(), im.value());
    check_imaginary_residue(pairs, scale, "directional partial-inversion slope");

    SlopeResult r;
    r.n_atoms = n;
    r.alpha = drive.alpha;
    r.k_i = drive.k_i;
    r.k_f = k;
    r.gamma0 = static_cast<double>(n) * drive.excited_fraction() + gamma0.value();
    r.single_atom_term = -static_cast<double>(n) * 0.5 * (1.0 - co);
    r.pair_term = pairs.real();
    r.gdot0 = r.single_atom_term + r.pair_term;
    r.direction_warning = n > 0 && parallel_to(k, cloud.dipole());
    return r;
}

SecondDerivative gddot_total_forms(const CouplingSet& c) {
    const auto n = static_cast<double>(c.gamma.rows());
    const Eigen::MatrixXd off =
        c.gamma - Eigen::MatrixXd::Identity(c.gamma.rows(), c.gamma.cols());
    const double off_sq = off.cwiseProduct(off).sum();
    const double off_cube = trace_product(off, off * off);
    const double tr2 = c.gamma.cwiseProduct(c.gamma).sum();
    const double tr3 = trace_product(c.gamma, c.gamma * c.gamma);

    SecondDerivative d;
    d.explicit_sum = n - 5.0 * off_sq + off_cube;
    d.trace_form = 8.0 * n - 8.0 * tr2 + tr3;
    const double scale = n + 5.0 * off_sq + std::abs(off_cube) + 8.0 * n + 8.0 * tr2 + std::abs(tr3);
    d.rel_diff = scale == 0.0 ? 0.0 : std::abs(d.explicit_sum - d.trace_form) / scale;
    return d;
}

SlopeResult gddot_total_inverted(const CouplingSet& c) {
    const auto forms = gddot_total_forms(c);
    if (forms.rel_diff > 1e-10) {
        throw NumericalError("second-derivative forms disagree: rel_diff = " +
                             std::to_string(forms.rel_diff));
    }
    SlopeResult r = gdot_total_inverted(c);
    r.gddot0 = forms.trace_form;
    return r;
}

SlopeResult gddot_directional_inverted(const CouplingSet& c, const AtomCloud& cloud,
                                       const Vec3& k_f) {
    SlopeResult r = gdot_directional_inverted(c, cloud, k_f);
    const Vec3 k = *r.k_f;
    const auto n = static_cast<Eigen::Index>(cloud.size());
    Eigen::MatrixXd cos_phi(n, n), sin_phi(n, n);
    for (Eigen::Index m = 0; m < n; ++m) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double phase = k.dot(cloud.displacement(static_cast<std::size_t>(m),
                                                           static_cast<std::size_t>(j)));
            cos_phi(m, j) = std::cos(phase);
            sin_phi(m, j) = std::sin(phase);
        }
    }
    const Eigen::MatrixXd& g = c.gamma;
    const Eigen::MatrixXd commutator = g * c.omega - c.omega * g;
    const double value = 8.0 * static_cast<double>(n) - 2.0 * g.cwiseProduct(g).sum() -
                         6.0 * trace_product(g, cos_phi) + trace_product(g * g, cos_phi) +
                         trace_product(sin_phi, commutator);
    r.gddot0 = value;
    return r;
}

std::vector<SlopeResult> gdot_multilevel(const AtomCloud& cloud,
                                         const std::vector<MultilevelChannel>& channels) {
    if (channels.empty()) throw InvalidArgument("at least one decay channel is required");
    double total_rate = 0.0;
    for (const auto& ch : channels) {
        if (!(ch.gamma_f > 0.0) || !(ch.k_mag > 0.0)) {
            throw InvalidArgument("channel rate and wave number must be positive");
        }
        total_rate += ch.gamma_f;
    }
    const std::size_t n = cloud.size();
    std::vector<SlopeResult> out;
    out.reserve(channels.size());
    for (const auto& ch : channels) {
        CompensatedSum pairs;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                if (a == b) continue;
                const Vec3 r = cloud.displacement(a, b);
                double sq = 0.0;
                for (int i = 0; i < 3; ++i) {
                    for (int ip = 0; ip < 3; ++ip) {
                        const double v = multilevel_gamma(r, ch, i, ip);
                        sq += v * v;
                    }
                }
                pairs.add(sq / 9.0);
            }
        }
        SlopeResult res;
        res.n_atoms = n;
        res.gamma0 = static_cast<double>(n) * ch.gamma_f;
        res.single_atom_term = -static_cast<double>(n) * ch.gamma_f * total_rate;
        res.pair_term = pairs.value();
        res.gdot0 = res.single_atom_term + res.pair_term;
        out.push_back(res);
    }
    return out;
}

EigenCheck eigen_criterion_check(const CouplingSet& c) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c.gamma, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("symmetric eigensolver did not converge");
    }
    EigenCheck e;
    e.n_atoms = static_cast<double>(c.gamma.rows());
    CompensatedSum tr, ev;
    for (Eigen::Index j = 0; j < c.gamma.cols(); ++j) {
        for (Eigen::Index i = 0; i < c.gamma.rows(); ++i) tr.add(c.gamma(i, j) * c.gamma(i, j));
    }
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        const double lam = solver.eigenvalues()(i);
        ev.add(lam * lam);
    }
    e.trace_value = tr.value();
    e.eigen_sum = ev.value();
    e.rel_diff = relative_difference(e.trace_value, e.eigen_sum);
    return e;
}

}  // namespace superrad
