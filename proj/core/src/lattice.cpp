#include "superrad/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "superrad/coupling.hpp"
#include "superrad/error.hpp"
#include "superrad/parallel.hpp"

namespace superrad {
namespace {

using Index3 = std::array<long, 3>;

Vec3 unit_wavevector(const std::optional<Vec3>& k_f, RateKind kind) {
    if (kind == RateKind::Total) return Vec3::Zero();
    if (!k_f) throw InvalidArgument("directional kind needs an emission wavevector");
    const double len = k_f->norm();
    if (!(len > 0.0) || !std::isfinite(len)) {
        throw InvalidArgument("emission wavevector must be a nonzero finite vector");
    }
    return *k_f * (kWaveNumber / len);
}

// Visits every displacement with max_i |nu_i| == m (m >= 1) whose first nonzero
// component is positive. The opposite half follows from Gamma_{-nu} = Gamma_nu.
template <class Visit>
void for_each_in_shell(int dim, long m, Visit&& visit) {
    const int prefix = dim - 1;
    const long a_hi = prefix >= 1 ? m : 0;
    const long b_lo = prefix >= 2 ? -m : 0;
    const long b_hi = prefix >= 2 ? m : 0;
    for (long a = 0; a <= a_hi; ++a) {
        for (long b = b_lo; b <= b_hi; ++b) {
            if (a == 0 && b < 0) continue;
            Index3 nu{0, 0, 0};
            if (prefix >= 1) nu[0] = a;
            if (prefix >= 2) nu[1] = b;
            const bool zero_prefix = a == 0 && b == 0;
            const bool prefix_on_shell = std::max(a, std::abs(b)) == m;
            if (prefix_on_shell) {
                for (long c = -m; c <= m; ++c) {
                    nu[static_cast<std::size_t>(prefix)] = c;
                    visit(nu);
                }
            } else {
                nu[static_cast<std::size_t>(prefix)] = m;
                visit(nu);
                if (!zero_prefix) {
                    nu[static_cast<std::size_t>(prefix)] = -m;
                    visit(nu);
                }
            }
        }
    }
}

struct ShellKernel {
    const LatticeSpec& spec;
    RateKind kind;
    Vec3 k;

    double operator()(const Index3& nu) const {
        const Vec3 r = spec.displacement(nu);
        const double gamma = decay_kernel(r, spec.dipole, spec.mode);
        return kind == RateKind::Total ? gamma * gamma : gamma * std::cos(k.dot(r));
    }
};

double fast_scaled(const LatticeSpec& spec, RateKind kind, const Vec3& k, unsigned threads) {
    spec.validate();
    const ShellKernel kernel{spec, kind, k};
    const std::size_t shells = spec.n1 - 1;
    const double half = ordered_sum(shells, threads, [&](std::size_t i) {
        CompensatedSum acc;
        for_each_in_shell(spec.dim, static_cast<long>(i + 1), [&](const Index3& nu) {
            acc.add(pair_weight(nu, spec.dim, spec.n1) * kernel(nu));
        });
        return acc.value();
    });
    // nu = 0 contributes Gamma_nn^2 = cos(0) = 1
    return -2.0 + 1.0 + 2.0 * half;
}

SlopeResult scaled_to_result(const LatticeSpec& spec, double scaled) {
    SlopeResult r;
    r.n_atoms = spec.n_atoms();
    const auto n = static_cast<double>(r.n_atoms);
    r.gamma0 = n;
    r.single_atom_term = -n;
    r.gdot0 = scaled * n;
    r.pair_term = r.gdot0 - r.single_atom_term;
    return r;
}

}  // namespace

LatticeSpec LatticeSpec::line(std::size_t n, double d) {
    return of_dim(1, n, d);
}

LatticeSpec LatticeSpec::square(std::size_t n1, double d) {
    return of_dim(2, n1, d);
}

LatticeSpec LatticeSpec::cubic(std::size_t n1, double d) {
    return of_dim(3, n1, d);
}

LatticeSpec LatticeSpec::of_dim(int dim, std::size_t n1, double d) {
    if (!(d > 0.0) || !std::isfinite(d)) throw InvalidArgument("spacing must be positive");
    LatticeSpec s;
    s.dim = dim;
    s.n1 = n1;
    if (dim == 1) {
        s.basis = {d * Vec3::UnitY(), Vec3::UnitX(), Vec3::UnitZ()};
    } else {
        s.basis = {d * Vec3::UnitX(), d * Vec3::UnitY(), d * Vec3::UnitZ()};
    }
    s.validate();
    return s;
}

std::size_t LatticeSpec::n_atoms() const {
    std::size_t n = 1;
    for (int i = 0; i < dim; ++i) n *= n1;
    return n;
}

void LatticeSpec::validate() const {
    if (dim < 1 || dim > 3) throw InvalidArgument("lattice dimension must be 1, 2 or 3");
    if (n1 == 0) throw InvalidArgument("lattice needs at least one site per axis");
    for (int i = 0; i < dim; ++i) {
        if (!basis[static_cast<std::size_t>(i)].allFinite()) {
            throw InvalidArgument("lattice basis vectors must be finite");
        }
    }
    double volume = 0.0;
    if (dim == 1) volume = basis[0].norm();
    if (dim == 2) volume = basis[0].cross(basis[1]).norm();
    if (dim == 3) volume = std::abs(basis[0].cross(basis[1]).dot(basis[2]));
    if (!(volume > 0.0)) throw InvalidArgument("lattice basis vectors are linearly dependent");
    if (std::abs(dipole.norm() - 1.0) > 1e-12) throw InvalidArgument("dipole must be a unit vector");
}

AtomCloud LatticeSpec::expand() const {
    validate();
    std::vector<Vec3> pos;
    pos.reserve(n_atoms());
    const long n = static_cast<long>(n1);
    const long hi1 = dim >= 2 ? n : 1;
    const long hi2 = dim >= 3 ? n : 1;
    for (long i = 0; i < n; ++i) {
        for (long j = 0; j < hi1; ++j) {
            for (long k = 0; k < hi2; ++k) pos.push_back(displacement({i, j, k}));
        }
    }
    return AtomCloud(std::move(pos), dipole, mode);
}

Vec3 LatticeSpec::displacement(const Index3& nu) const {
    Vec3 r = Vec3::Zero();
    for (int i = 0; i < dim; ++i) {
        r += static_cast<double>(nu[static_cast<std::size_t>(i)]) * basis[static_cast<std::size_t>(i)];
    }
    return r;
}

double pair_weight(const Index3& nu, int dim, std::size_t n1) {
    const double n = static_cast<double>(n1);
    double w = 1.0;
    for (int i = 0; i < dim; ++i) {
        const double a = static_cast<double>(std::abs(nu[static_cast<std::size_t>(i)]));
        if (a >= n) return 0.0;
        w *= 1.0 - a / n;
    }
    return w;
}

SlopeResult gdot_total_fast(const LatticeSpec& spec, unsigned threads) {
    return scaled_to_result(spec, fast_scaled(spec, RateKind::Total, Vec3::Zero(), threads));
}

SlopeResult gdot_directional_fast(const LatticeSpec& spec, const Vec3& k_f, unsigned threads) {
    const Vec3 k = unit_wavevector(k_f, RateKind::Directional);
    SlopeResult r = scaled_to_result(spec, fast_scaled(spec, RateKind::Directional, k, threads));
    r.k_f = k;
    r.direction_warning = k.normalized().cross(spec.dipole).norm() < 1e-12;
    return r;
}

std::vector<double> scaled_slope_series(const LatticeSpec& shape, std::size_t n1_max,
                                        RateKind kind, const std::optional<Vec3>& k_f,
                                        unsigned threads) {
    if (n1_max == 0) throw InvalidArgument("n1_max must be at least 1");
    shape.validate();
    const Vec3 k = unit_wavevector(k_f, kind);
    const ShellKernel kernel{shape, kind, k};

    // moments[m-1][j] = sum over shell m of K_nu e_j(|nu_1|, |nu_2|, |nu_3|)
    std::vector<std::array<double, 4>> moments(n1_max > 1 ? n1_max - 1 : 0);
    parallel_for(moments.size(), threads, [&](std::size_t i) {
        std::array<CompensatedSum, 4> acc;
        for_each_in_shell(shape.dim, static_cast<long>(i + 1), [&](const Index3& nu) {
            const double a = static_cast<double>(std::abs(nu[0]));
            const double b = static_cast<double>(std::abs(nu[1]));
            const double c = static_cast<double>(std::abs(nu[2]));
            const double kv = kernel(nu);
            acc[0].add(kv);
            acc[1].add(kv * (a + b + c));
            acc[2].add(kv * (a * b + a * c + b * c));
            acc[3].add(kv * a * b * c);
        });
        for (std::size_t j = 0; j < 4; ++j) moments[i][j] = acc[j].value();
    });

    std::vector<double> out(n1_max);
    std::array<CompensatedSum, 4> cumulative;
    out[0] = -1.0;
    for (std::size_t n1 = 2; n1 <= n1_max; ++n1) {
        for (std::size_t j = 0; j < 4; ++j) cumulative[j].add(moments[n1 - 2][j]);
        const double inv = 1.0 / static_cast<double>(n1);
        const double half = cumulative[0].value() - inv * cumulative[1].value() +
                            inv * inv * cumulative[2].value() -
                            inv * inv * inv * cumulative[3].value();
        out[n1 - 1] = -1.0 + 2.0 * half;
    }
    return out;
}

ThresholdResult threshold_n1(int dim, double d, RateKind kind, const std::optional<Vec3>& k_f,
                             std::size_t n1_max, unsigned threads) {
    const LatticeSpec shape = LatticeSpec::of_dim(dim, 1, d);
    const auto series = scaled_slope_series(shape, n1_max, kind, k_f, threads);

    ThresholdResult r;
    r.dim = dim;
    r.d = d;
    r.kind = kind;
    r.n1_max = n1_max;
    const auto largest = std::max_element(series.begin(), series.end());
    r.largest_slope = *largest;
    r.n1_at_largest = static_cast<std::size_t>(largest - series.begin()) + 1;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (series[i] > 0.0) {
            r.first_positive = i + 1;
            break;
        }
    }
    if (!(series.back() > 0.0)) return r;
    std::size_t start = series.size();
    while (start > 0 && series[start - 1] > 0.0) --start;
    r.found = true;
    r.n1_threshold = start + 1;

    auto direct = [&](std::size_t n1) {
        LatticeSpec s = shape;
        s.n1 = n1;
        return kind == RateKind::Total ? gdot_total_fast(s, threads).scaled()
                                       : gdot_directional_fast(s, *k_f, threads).scaled();
    };
    const bool above = direct(r.n1_threshold) > 0.0;
    const bool below = r.n1_threshold == 1 || !(direct(r.n1_threshold - 1) > 0.0);
    if (!above || !below) {
        throw NumericalError("threshold at n1 = " + std::to_string(r.n1_threshold) +
                             " not confirmed by the direct weighted sum");
    }
    return r;
}

FitResult fit_asymptote(int dim, double d, std::size_t n1_lo, std::size_t n1_hi,
                        unsigned threads) {
    if (dim != 2 && dim != 3) throw InvalidArgument("asymptotic fits exist for dim 2 and 3");
    if (n1_lo == 0 && n1_hi == 0) {
        n1_lo = dim == 2 ? 50 : 6;
        n1_hi = dim == 2 ? 400 : 60;
    }
    if (n1_lo < 1 || n1_hi < n1_lo || n1_hi - n1_lo + 1 < 10) {
        throw InvalidArgument("fit needs at least 10 sizes with 1 <= n1_lo <= n1_hi");
    }
    const auto series =
        scaled_slope_series(LatticeSpec::of_dim(dim, 1, d), n1_hi, RateKind::Total, {}, threads);

    const auto count = static_cast<Eigen::Index>(n1_hi - n1_lo + 1);
    Eigen::MatrixXd design(count, 2);
    Eigen::VectorXd y(count);
    for (Eigen::Index i = 0; i < count; ++i) {
        const auto n1 = n1_lo + static_cast<std::size_t>(i);
        const double x = static_cast<double>(n1);
        design(i, 0) = 1.0;
        design(i, 1) = dim == 2 ? std::log(x) : x;
        y(i) = series[n1 - 1];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < 2) throw NumericalError("fit design matrix is rank deficient");
    const Eigen::VectorXd coef = qr.solve(y);

    FitResult f;
    f.dim = dim;
    f.d = d;
    f.n1_lo = n1_lo;
    f.n1_hi = n1_hi;
    f.points = static_cast<std::size_t>(count);
    f.C = coef(0);
    f.D = coef(1);
    f.rms = std::sqrt((design * coef - y).squaredNorm() / static_cast<double>(count));
    if (f.D > 0.0) {
        const double x0 = -f.C / f.D;
        f.extrapolated_threshold = dim == 2 ? std::exp(x0) : x0;
    }
    return f;
}

Limit1dResult limit_1d(double d, RateKind kind, const std::optional<Vec3>& k_f, long nu_max) {
    if (!(d > 0.0) || !std::isfinite(d)) throw InvalidArgument("spacing must be positive");
    if (nu_max < 1) throw InvalidArgument("nu_max must be at least 1");
    const LatticeSpec line = LatticeSpec::line(1, d);
    const ShellKernel kernel{line, kind, unit_wavevector(k_f, kind)};

    CompensatedSum acc;
    for (long nu = 1; nu <= nu_max; ++nu) acc.add(kernel({nu, 0, 0}));

    Limit1dResult r;
    r.value = -1.0 + 2.0 * acc.value();
    r.nu_max = nu_max;
    if (kind == RateKind::Total) {
        // |Gamma| <= (1 + |c|(1 + 3/s + 3/s^2)) / s for s = k d |nu| in the tail
        const double s0 = kWaveNumber * d * static_cast<double>(nu_max + 1);
        const double c = std::abs(angular_factor(Vec3::UnitY(), line.dipole, line.mode));
        const double amp = 1.0 + c * (1.0 + 3.0 / s0 + 3.0 / (s0 * s0));
        const double kd = kWaveNumber * d;
        r.tail_bound = 2.0 * amp * amp / (kd * kd * static_cast<double>(nu_max));
    } else {
        r.conditionally_convergent = true;
    }
    return r;
}

}  // namespace superrad
