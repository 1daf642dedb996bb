#include "superrad/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <Eigen/Eigenvalues>

#include "superrad/error.hpp"

namespace superrad {
namespace {

using Bits = std::size_t;

Bits bit(std::size_t n) { return Bits{1} << n; }

void require_size(std::size_t n) {
    if (n == 0) throw InvalidArgument("master equation needs at least one atom");
    if (n > DensityMatrix::kMaxAtoms) {
        throw TooLarge("master equation is limited to " +
                       std::to_string(DensityMatrix::kMaxAtoms) + " atoms, got " +
                       std::to_string(n));
    }
}

void require_shape(const Eigen::MatrixXcd& rho, std::size_t n_atoms) {
    const auto dim = static_cast<Eigen::Index>(bit(n_atoms));
    if (rho.rows() != dim || rho.cols() != dim) {
        throw InvalidArgument("operator dimension does not match 2^N for N = " +
                              std::to_string(n_atoms));
    }
}

double rate_scale_rel(double a, double b, double scale) {
    const double denom = std::max({std::abs(a), std::abs(b), std::abs(scale)});
    return denom == 0.0 ? 0.0 : std::abs(a - b) / denom;
}

// Samples Tr[G rho(t)] at t = j h/4 for j = 0..8.
std::vector<double> sample_quarter_steps(const DensityMatrix& rho0, const CouplingSet& c,
                                         const Eigen::MatrixXcd& w, const OracleOptions& opts) {
    if (!(opts.h > 0.0) || opts.substeps < 1) {
        throw InvalidArgument("finite-difference step and substeps must be positive");
    }
    const double dt = opts.h / 4.0 / static_cast<double>(opts.substeps);
    const std::size_t n = rho0.n_atoms();
    std::vector<double> out;
    out.reserve(9);
    Eigen::MatrixXcd rho = rho0.matrix();
    out.push_back(photon_rate(rho, n, w));
    for (int j = 1; j <= 8; ++j) {
        for (int s = 0; s < opts.substeps; ++s) {
            const Eigen::MatrixXcd k1 = lindblad_rhs(rho, c);
            const Eigen::MatrixXcd k2 = lindblad_rhs(rho + 0.5 * dt * k1, c);
            const Eigen::MatrixXcd k3 = lindblad_rhs(rho + 0.5 * dt * k2, c);
            const Eigen::MatrixXcd k4 = lindblad_rhs(rho + dt * k3, c);
            rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        require_invariants(DensityMatrix(n, rho), "finite-difference integration");
        out.push_back(photon_rate(rho, n, w));
    }
    return out;
}

double richardson(double coarse, double mid, double fine) {
    const double r_coarse = 2.0 * mid - coarse;
    const double r_fine = 2.0 * fine - mid;
    return (4.0 * r_fine - r_coarse) / 3.0;
}

}  // namespace

DensityMatrix::DensityMatrix(std::size_t n_atoms) : n_(n_atoms) {
    require_size(n_atoms);
    const auto dim = static_cast<Eigen::Index>(bit(n_atoms));
    rho_ = Eigen::MatrixXcd::Zero(dim, dim);
}

DensityMatrix::DensityMatrix(std::size_t n_atoms, Eigen::MatrixXcd rho)
    : n_(n_atoms), rho_(std::move(rho)) {
    require_size(n_atoms);
    require_shape(rho_, n_atoms);
}

InvariantReport check_invariants(const DensityMatrix& rho) {
    const Eigen::MatrixXcd& m = rho.matrix();
    InvariantReport r;
    r.hermiticity = (m - m.adjoint()).cwiseAbs().maxCoeff();
    r.trace_error = std::abs(m.trace() - cplx(1.0, 0.0));
    const Eigen::MatrixXcd herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("density-matrix eigensolver failed");
    r.min_eigenvalue = solver.eigenvalues().minCoeff();
    return r;
}

void require_invariants(const DensityMatrix& rho, const std::string& context) {
    const InvariantReport r = check_invariants(rho);
    if (r.ok()) return;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "%s: density matrix invariant violated (hermiticity %.3g, trace error %.3g, "
                  "min eigenvalue %.3g)",
                  context.c_str(), r.hermiticity, r.trace_error, r.min_eigenvalue);
    throw NumericalError(buf);
}

DensityMatrix initial_state(const AtomCloud& cloud, const DriveSpec& drive) {
    const std::size_t n = cloud.size();
    require_size(n);
    if (!(drive.alpha >= 0.0 && drive.alpha <= kPi + 1e-12)) {
        throw InvalidArgument("inversion angle must lie in [0, pi]");
    }
    std::vector<double> theta(n, 0.0);
    if (!drive.k_i.isZero(0.0)) {
        const Vec3 k = drive.k_i * (kWaveNumber / drive.k_i.norm());
        for (std::size_t a = 0; a < n; ++a) theta[a] = k.dot(cloud.position(a));
    }
    const double cg = std::cos(drive.alpha / 2.0);
    const double se = std::sin(drive.alpha / 2.0);
    const auto dim = static_cast<Eigen::Index>(bit(n));
    Eigen::VectorXcd psi(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        cplx amp(1.0, 0.0);
        for (std::size_t a = 0; a < n; ++a) {
            amp *= (static_cast<Bits>(i) & bit(a)) ? std::polar(se, theta[a]) : cplx(cg, 0.0);
        }
        psi(i) = amp;
    }
    return DensityMatrix(n, psi * psi.adjoint());
}

double excited_population(const DensityMatrix& rho, std::size_t n) {
    return coherence(rho.matrix(), rho.n_atoms(), n, n).real();
}

cplx coherence(const Eigen::MatrixXcd& rho, std::size_t n_atoms, std::size_t m, std::size_t n) {
    require_shape(rho, n_atoms);
    if (m >= n_atoms || n >= n_atoms) throw InvalidArgument("atom index out of range");
    const Bits dim = bit(n_atoms);
    cplx acc(0.0, 0.0);
    for (Bits i = 0; i < dim; ++i) {
        if (!(i & bit(n))) continue;
        if (m == n) {
            acc += rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
        } else if (!(i & bit(m))) {
            acc += rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i ^ bit(n) ^ bit(m)));
        }
    }
    return acc;
}

Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& rho, const CouplingSet& c) {
    const std::size_t n = c.size();
    require_size(n);
    require_shape(rho, n);
    const auto dim = static_cast<Eigen::Index>(bit(n));

    // x = H_eff rho, one (j, k) hop at a time: sigma+_j sigma-_k maps src -> row
    Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(dim, dim);
    std::vector<std::pair<Eigen::Index, Eigen::Index>> hops;
    hops.reserve(static_cast<std::size_t>(dim));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            const auto jj = static_cast<Eigen::Index>(j);
            const auto kk = static_cast<Eigen::Index>(k);
            const cplx h(c.omega(jj, kk), -0.5 * c.gamma(jj, kk));
            if (h == cplx(0.0, 0.0)) continue;
            hops.clear();
            for (Bits row = 0; row < bit(n); ++row) {
                if (!(row & bit(j))) continue;
                if (j == k) {
                    hops.emplace_back(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(row));
                } else if (!(row & bit(k))) {
                    hops.emplace_back(static_cast<Eigen::Index>(row),
                                      static_cast<Eigen::Index>(row ^ bit(j) ^ bit(k)));
                }
            }
            for (Eigen::Index col = 0; col < dim; ++col) {
                for (const auto& [row, src] : hops) x(row, col) += h * rho(src, col);
            }
        }
    }
    // rho H_eff^dagger = (H_eff rho)^dagger for Hermitian rho
    const cplx i_unit(0.0, 1.0);
    Eigen::MatrixXcd out = -i_unit * x + i_unit * x.adjoint();

    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            const double g = c.gamma(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            if (g == 0.0) continue;
            for (Bits col = 0; col < bit(n); ++col) {
                if (col & bit(b)) continue;
                const auto src_col = static_cast<Eigen::Index>(col | bit(b));
                for (Bits row = 0; row < bit(n); ++row) {
                    if (row & bit(a)) continue;
                    out(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) +=
                        g * rho(static_cast<Eigen::Index>(row | bit(a)), src_col);
                }
            }
        }
    }
    return out;
}

Eigen::MatrixXcd total_rate_weights(const CouplingSet& c) {
    return c.gamma.cast<cplx>();
}

Eigen::MatrixXcd directional_rate_weights(const AtomCloud& cloud, const Vec3& k_f) {
    const double len = k_f.norm();
    if (!(len > 0.0)) throw InvalidArgument("emission wavevector must be nonzero");
    const Vec3 k = k_f * (kWaveNumber / len);
    const auto n = static_cast<Eigen::Index>(cloud.size());
    Eigen::MatrixXcd w(n, n);
    for (Eigen::Index m = 0; m < n; ++m) {
        for (Eigen::Index j = 0; j < n; ++j) {
            w(m, j) = m == j ? cplx(1.0, 0.0)
                             : std::polar(1.0, k.dot(cloud.displacement(static_cast<std::size_t>(m),
                                                                       static_cast<std::size_t>(j))));
        }
    }
    return w;
}

double photon_rate(const Eigen::MatrixXcd& rho, std::size_t n_atoms, const Eigen::MatrixXcd& w) {
    const auto n = static_cast<Eigen::Index>(n_atoms);
    if (w.rows() != n || w.cols() != n) throw InvalidArgument("rate weights do not match N");
    cplx acc(0.0, 0.0);
    double scale = 0.0;
    for (Eigen::Index m = 0; m < n; ++m) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (w(m, j) == cplx(0.0, 0.0)) continue;
            const cplx term = w(m, j) * coherence(rho, n_atoms, static_cast<std::size_t>(m),
                                                  static_cast<std::size_t>(j));
            acc += term;
            scale += std::abs(term);
        }
    }
    if (std::abs(acc.imag()) > 1e-9 * std::max(scale, 1e-300) && std::abs(acc.imag()) > 1e-14) {
        throw NumericalError("photon rate has a non-negligible imaginary part");
    }
    return acc.real();
}

RateMoments exact_rate_moments(const DensityMatrix& rho0, const CouplingSet& c,
                               const Eigen::MatrixXcd& w) {
    const std::size_t n = rho0.n_atoms();
    const Eigen::MatrixXcd l1 = lindblad_rhs(rho0.matrix(), c);
    const Eigen::MatrixXcd l2 = lindblad_rhs(l1, c);
    return {photon_rate(rho0.matrix(), n, w), photon_rate(l1, n, w), photon_rate(l2, n, w)};
}

Trajectory evolve(const DensityMatrix& rho0, const CouplingSet& c, const AtomCloud& cloud,
                  double t_end, const EvolveOptions& opts) {
    if (!(opts.dt > 0.0) || !(t_end >= 0.0) || opts.sample_every == 0) {
        throw InvalidArgument("evolve needs dt > 0, t_end >= 0 and sample_every >= 1");
    }
    if (cloud.size() != rho0.n_atoms() || c.size() != rho0.n_atoms()) {
        throw InvalidArgument("cloud, couplings and state describe different atom counts");
    }
    const std::size_t n = rho0.n_atoms();
    const Eigen::MatrixXcd w_total = total_rate_weights(c);
    Eigen::MatrixXcd w_dir;
    if (opts.k_f) w_dir = directional_rate_weights(cloud, *opts.k_f);

    Trajectory tr;
    Eigen::MatrixXcd rho = rho0.matrix();
    auto record = [&](double t) {
        if (opts.check_invariants) {
            require_invariants(DensityMatrix(n, rho), "evolve at t = " + std::to_string(t));
        }
        tr.t.push_back(t);
        tr.gamma_total.push_back(photon_rate(rho, n, w_total));
        if (opts.k_f) tr.gamma_dir.push_back(photon_rate(rho, n, w_dir));
    };
    record(0.0);
    const auto steps = static_cast<std::size_t>(std::llround(std::ceil(t_end / opts.dt - 1e-9)));
    const double dt = opts.dt;
    for (std::size_t s = 1; s <= steps; ++s) {
        const Eigen::MatrixXcd k1 = lindblad_rhs(rho, c);
        const Eigen::MatrixXcd k2 = lindblad_rhs(rho + 0.5 * dt * k1, c);
        const Eigen::MatrixXcd k3 = lindblad_rhs(rho + 0.5 * dt * k2, c);
        const Eigen::MatrixXcd k4 = lindblad_rhs(rho + dt * k3, c);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (s % opts.sample_every == 0 || s == steps) record(static_cast<double>(s) * dt);
    }
    return tr;
}

void write_trajectory_csv(const Trajectory& tr, const std::filesystem::path& path,
                          const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    if (!header_comment.empty()) out << header_comment;
    out << "t,gamma_total,gamma_dir\n";
    char buf[160];
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        if (tr.gamma_dir.empty()) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,\n", tr.t[i], tr.gamma_total[i]);
        } else {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", tr.t[i], tr.gamma_total[i],
                          tr.gamma_dir[i]);
        }
        out << buf;
    }
    if (!out) throw IoError("write failed for " + path.string());
}

FiniteDifference richardson_derivatives(const DensityMatrix& rho0, const CouplingSet& c,
                                        const Eigen::MatrixXcd& w, const OracleOptions& opts) {
    const auto g = sample_quarter_steps(rho0, c, w, opts);
    const double q = opts.h / 4.0;
    // one-sided stencils at x = h, h/2, h/4 (indices in units of h/4)
    auto first = [&](int j) { return (g[static_cast<std::size_t>(j)] - g[0]) / (j * q); };
    auto second = [&](int j) {
        const double x = j * q;
        return (g[static_cast<std::size_t>(2 * j)] - 2.0 * g[static_cast<std::size_t>(j)] + g[0]) /
               (x * x);
    };
    FiniteDifference fd;
    fd.first = richardson(first(4), first(2), first(1));
    fd.second = richardson(second(4), second(2), second(1));
    fd.first_raw = first(1);
    return fd;
}

SlopeCheck slope_check(const AtomCloud& cloud, const DriveSpec& drive,
                       const std::optional<Vec3>& k_f, const OracleOptions& opts) {
    const CouplingSet c = build_coupling(cloud);
    const DensityMatrix rho0 = initial_state(cloud, drive);
    const Eigen::MatrixXcd w = k_f ? directional_rate_weights(cloud, *k_f) : total_rate_weights(c);

    SlopeCheck r;
    SlopeResult formula;
    if (k_f) {
        formula = gdot_directional_partial(c, cloud, drive, *k_f);
        PartialOptions printed;
        printed.reading = DirectionalPhase::AsPrinted;
        r.as_printed_value = gdot_directional_partial(c, cloud, drive, *k_f, printed).gdot0;
    } else {
        formula = gdot_total_partial(c, cloud, drive);
    }
    const RateMoments exact = exact_rate_moments(rho0, c, w);
    const FiniteDifference fd = richardson_derivatives(rho0, c, w, opts);
    r.formula_value = formula.gdot0;
    r.oracle_value = fd.first;
    r.exact_moment = exact.first;
    r.rel_diff = rate_scale_rel(r.formula_value, r.oracle_value, exact.rate);
    if (r.as_printed_value) {
        r.as_printed_rel_diff = rate_scale_rel(*r.as_printed_value, r.oracle_value, exact.rate);
    }
    return r;
}

SlopeCheck second_derivative_check(const AtomCloud& cloud, const std::optional<Vec3>& k_f,
                                   const OracleOptions& opts) {
    const CouplingSet c = build_coupling(cloud);
    const DensityMatrix rho0 = initial_state(cloud, DriveSpec::inverted());
    const Eigen::MatrixXcd w = k_f ? directional_rate_weights(cloud, *k_f) : total_rate_weights(c);
    const SlopeResult formula =
        k_f ? gddot_directional_inverted(c, cloud, *k_f) : gddot_total_inverted(c);
    const RateMoments exact = exact_rate_moments(rho0, c, w);
    const FiniteDifference fd = richardson_derivatives(rho0, c, w, opts);

    SlopeCheck r;
    r.formula_value = *formula.gddot0;
    r.oracle_value = fd.second;
    r.exact_moment = exact.second;
    r.rel_diff = rate_scale_rel(r.formula_value, r.oracle_value, exact.rate);
    return r;
}

}  // namespace superrad
