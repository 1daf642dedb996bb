#include "superrad/scan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "superrad/coupling.hpp"
#include "superrad/error.hpp"
#include "superrad/parallel.hpp"

namespace superrad {
namespace {

std::optional<Vec3> emission_for(RateKind kind, double phi) {
    if (kind == RateKind::Total) return std::nullopt;
    return in_plane_emission(phi);
}

double excited_to_alpha(double fraction) {
    return 2.0 * std::asin(std::sqrt(std::clamp(fraction, 0.0, 1.0)));
}

double partial_cell(Family family, std::size_t size, RateKind kind, double d,
                    const std::optional<Vec3>& k_f, const DriveSpec& drive) {
    const AtomCloud cloud = build_family(family, size, d);
    const CouplingSet c = build_coupling(cloud);
    const SlopeResult r = kind == RateKind::Total
                              ? gdot_total_partial(c, cloud, drive)
                              : gdot_directional_partial(c, cloud, drive, *k_f);
    return r.scaled();
}

bool band_present(Family family, std::size_t size, RateKind kind, const std::optional<Vec3>& k_f,
                  const std::vector<double>& ds, const DriveSpec& drive, unsigned threads) {
    std::vector<std::uint8_t> hit(ds.size(), 0);
    parallel_for(ds.size(), threads, [&](std::size_t i) {
        hit[i] = partial_cell(family, size, kind, ds[i], k_f, drive) > 0.0;
    });
    return std::any_of(hit.begin(), hit.end(), [](std::uint8_t h) { return h != 0; });
}

}  // namespace

const char* family_name(Family f) {
    switch (f) {
        case Family::Line: return "line";
        case Family::DoubleLine: return "double_line";
        case Family::Square: return "square";
        case Family::Cubic: return "cubic";
    }
    return "unknown";
}

bool is_bravais(Family f) { return f != Family::DoubleLine; }

AtomCloud build_family(Family family, std::size_t size, double d) {
    switch (family) {
        case Family::Line: return line_lattice(size, d);
        case Family::DoubleLine: return double_line_lattice(size, d, LineSplit::CeilFirst);
        case Family::Square: return square_lattice(size, d);
        case Family::Cubic: return cubic_lattice(size, d);
    }
    throw InvalidArgument("unknown family");
}

Axis Axis::range(std::string name, double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw InvalidArgument("axis range needs lo <= hi and a positive step");
    }
    Axis a{std::move(name), {}};
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-6)) + 1;
    a.samples.reserve(count);
    for (std::size_t i = 0; i < count; ++i) a.samples.push_back(lo + static_cast<double>(i) * step);
    return a;
}

Axis Axis::integers(std::string name, std::size_t lo, std::size_t hi) {
    if (hi < lo) throw InvalidArgument("axis range needs lo <= hi");
    Axis a{std::move(name), {}};
    for (std::size_t i = lo; i <= hi; ++i) a.samples.push_back(static_cast<double>(i));
    return a;
}

RegionMap::RegionMap(Axis x_axis, Axis y_axis) : x(std::move(x_axis)), y(std::move(y_axis)) {
    values.assign(x.size() * y.size(), 0.0);
    mask.assign(values.size(), 0);
}

void RegionMap::set(std::size_t row, std::size_t col, double v) {
    const std::size_t i = row * cols() + col;
    values.at(i) = v;
    mask.at(i) = v > 0.0;
}

void RegionMap::validate() const {
    if (values.size() != rows() * cols() || mask.size() != values.size()) {
        throw InvalidArgument("region map grid does not match its axes");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if ((mask[i] != 0) != (values[i] > 0.0)) {
            throw InvalidArgument("region map mask disagrees with its values");
        }
    }
}

std::size_t RegionMap::area() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

double cell_scaled_slope(Family family, RateKind kind, std::size_t size, double d,
                         const std::optional<Vec3>& k_f, unsigned threads) {
    if (kind == RateKind::Directional && !k_f) {
        throw InvalidArgument("directional kind needs an emission direction");
    }
    if (is_bravais(family)) {
        const int dim = family == Family::Line ? 1 : family == Family::Square ? 2 : 3;
        const LatticeSpec spec = LatticeSpec::of_dim(dim, size, d);
        return kind == RateKind::Total ? gdot_total_fast(spec, threads).scaled()
                                       : gdot_directional_fast(spec, *k_f, threads).scaled();
    }
    const AtomCloud cloud = build_family(family, size, d);
    const CouplingSet c = build_coupling(cloud);
    return kind == RateKind::Total ? gdot_total_inverted(c).scaled()
                                   : gdot_directional_inverted(c, cloud, *k_f).scaled();
}

RegionMap map_n_d(Family family, RateKind kind, double phi, const Axis& sizes,
                  const Axis& spacings, unsigned threads) {
    if (sizes.size() == 0 || spacings.size() == 0) throw InvalidArgument("map axes must be nonempty");
    const auto k_f = emission_for(kind, phi);
    RegionMap map(sizes, spacings);
    parallel_for(map.values.size(), threads, [&](std::size_t i) {
        const std::size_t row = i / map.cols();
        const std::size_t col = i % map.cols();
        const auto n = static_cast<std::size_t>(std::llround(map.x.samples[col]));
        map.set(row, col, cell_scaled_slope(family, kind, n, map.y.samples[row], k_f));
    });
    return map;
}

RegionMap map_phi_d(Family family, std::size_t size, const Axis& phis, const Axis& spacings,
                    unsigned threads) {
    if (phis.size() == 0 || spacings.size() == 0) throw InvalidArgument("map axes must be nonempty");
    RegionMap map(phis, spacings);
    parallel_for(map.values.size(), threads, [&](std::size_t i) {
        const std::size_t row = i / map.cols();
        const std::size_t col = i % map.cols();
        const Vec3 k_f = in_plane_emission(map.x.samples[col]);
        map.set(row, col,
                cell_scaled_slope(family, RateKind::Directional, size, map.y.samples[row], k_f));
    });
    return map;
}

PartialSweep partial_sweep(Family family, std::size_t size, RateKind kind, double phi,
                           const Axis& spacings, const std::vector<double>& alphas,
                           const Vec3& k_i, unsigned threads) {
    if (alphas.empty() || spacings.size() == 0) throw InvalidArgument("sweep needs alphas and spacings");
    PartialSweep sweep;
    sweep.alphas = alphas;
    std::sort(sweep.alphas.begin(), sweep.alphas.end());
    Axis fractions{"excited_fraction", {}};
    for (double a : sweep.alphas) {
        if (!(a >= 0.0 && a <= kPi + 1e-12)) throw InvalidArgument("inversion angle must lie in [0, pi]");
        fractions.samples.push_back(DriveSpec{a, k_i}.excited_fraction());
    }
    const auto k_f = emission_for(kind, phi);
    sweep.map = RegionMap(fractions, spacings);
    RegionMap& map = sweep.map;
    parallel_for(map.values.size(), threads, [&](std::size_t i) {
        const std::size_t row = i / map.cols();
        const std::size_t col = i % map.cols();
        const DriveSpec drive{sweep.alphas[col], k_i};
        map.set(row, col, partial_cell(family, size, kind, map.y.samples[row], k_f, drive));
    });
    sweep.areas.assign(map.cols(), 0);
    for (std::size_t col = 0; col < map.cols(); ++col) {
        for (std::size_t row = 0; row < map.rows(); ++row) sweep.areas[col] += map.superradiant(row, col);
        if (col > 0 && sweep.areas[col] < sweep.areas[col - 1]) sweep.area_monotone = false;
    }
    return sweep;
}

PartialThreshold partial_threshold(Family family, std::size_t size, RateKind kind, double phi,
                                   Band band, double d_step, const Vec3& k_i, double coarse_step,
                                   double tolerance, unsigned threads) {
    if (!(coarse_step > 0.0 && coarse_step <= 1.0) || !(tolerance > 0.0)) {
        throw InvalidArgument("threshold steps must be positive");
    }
    const auto ds = Axis::range("d", band.lo, band.hi, d_step).samples;
    const auto k_f = emission_for(kind, phi);
    auto present = [&](double fraction) {
        return band_present(family, size, kind, k_f, ds, DriveSpec{excited_to_alpha(fraction), k_i},
                            threads);
    };

    PartialThreshold out;
    const auto steps = static_cast<long>(std::floor(1.0 / coarse_step + 1e-9));
    for (long k = 0; k <= steps; ++k) {
        const double f = 1.0 - static_cast<double>(k) * coarse_step;
        if (present(f)) {
            out.coarse_present = f;
            continue;
        }
        if (out.coarse_present) out.coarse_absent = f;
        break;
    }
    if (!out.coarse_present || !out.coarse_absent) return out;
    double hi = *out.coarse_present;
    double lo = *out.coarse_absent;
    while (hi - lo > tolerance) {
        const double mid = 0.5 * (hi + lo);
        (present(mid) ? hi : lo) = mid;
    }
    out.refined = 0.5 * (hi + lo);
    return out;
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) {
    // splitmix64 finaliser over the (seed, trial) pair
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(trial) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

RemovalStudy removal_study(Family family, std::size_t size, RateKind kind, double phi, Band band,
                           double d_step, const std::vector<double>& p_values, std::size_t trials,
                           std::uint64_t seed, unsigned threads) {
    if (trials == 0) throw InvalidArgument("removal study needs at least one trial");
    if (p_values.empty()) throw InvalidArgument("removal study needs p values");
    for (double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("removal probability must lie in [0, 1]");
    }
    const auto ds = Axis::range("d", band.lo, band.hi, d_step).samples;
    const auto k_f = emission_for(kind, phi);

    // pair kernels of the full array, one matrix per spacing
    std::vector<Eigen::MatrixXd> kernels(ds.size());
    std::size_t n_atoms = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const AtomCloud cloud = build_family(family, size, ds[i]);
        const CouplingSet c = build_coupling(cloud);
        n_atoms = cloud.size();
        Eigen::MatrixXd kmat = c.gamma;
        for (Eigen::Index a = 0; a < kmat.rows(); ++a) {
            for (Eigen::Index b = 0; b < kmat.cols(); ++b) {
                if (a == b) {
                    kmat(a, b) = 0.0;
                } else if (kind == RateKind::Total) {
                    kmat(a, b) = c.gamma(a, b) * c.gamma(a, b);
                } else {
                    const Vec3 r = cloud.displacement(static_cast<std::size_t>(a),
                                                      static_cast<std::size_t>(b));
                    kmat(a, b) = c.gamma(a, b) * std::cos(k_f->dot(r));
                }
            }
        }
        kernels[i] = std::move(kmat);
    }

    std::vector<std::uint8_t> survived(trials * p_values.size(), 0);
    parallel_for(trials, threads, [&](std::size_t t) {
        const std::uint64_t s = trial_seed(seed, t);
        for (std::size_t j = 0; j < p_values.size(); ++j) {
            const auto kept = thin_indices(n_atoms, p_values[j], s);
            if (kept.empty()) continue;
            for (const auto& kmat : kernels) {
                CompensatedSum acc;
                acc.add(-static_cast<double>(kept.size()));
                for (std::size_t a : kept) {
                    for (std::size_t b : kept) {
                        if (a != b) {
                            acc.add(kmat(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
                        }
                    }
                }
                if (acc.value() > 0.0) {
                    survived[t * p_values.size() + j] = 1;
                    break;
                }
            }
        }
    });

    RemovalStudy out;
    out.p_values = p_values;
    out.trials = trials;
    out.seed = seed;
    out.survival.assign(p_values.size(), 0.0);
    for (std::size_t j = 0; j < p_values.size(); ++j) {
        std::size_t count = 0;
        for (std::size_t t = 0; t < trials; ++t) count += survived[t * p_values.size() + j];
        out.survival[j] = static_cast<double>(count) / static_cast<double>(trials);
    }

    std::vector<std::size_t> order(p_values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    for (std::size_t i = 1; i < order.size(); ++i) {
        const double s0 = out.survival[order[i - 1]];
        const double s1 = out.survival[order[i]];
        if (s0 >= 0.5 && s1 < 0.5) {
            const double q0 = 1.0 - p_values[order[i - 1]];
            const double q1 = 1.0 - p_values[order[i]];
            out.kept_at_half = q0 + (s0 - 0.5) / (s0 - s1) * (q1 - q0);
            break;
        }
    }
    return out;
}

std::vector<int> connected_components(const RegionMap& map, int* count) {
    const std::size_t rows = map.rows();
    const std::size_t cols = map.cols();
    std::vector<int> label(rows * cols, 0);
    int next = 0;
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < label.size(); ++start) {
        if (!map.mask[start] || label[start] != 0) continue;
        label[start] = ++next;
        stack.assign(1, start);
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            const std::size_t r = i / cols;
            const std::size_t c = i % cols;
            auto visit = [&](std::size_t j) {
                if (map.mask[j] && label[j] == 0) {
                    label[j] = next;
                    stack.push_back(j);
                }
            };
            if (r > 0) visit(i - cols);
            if (r + 1 < rows) visit(i + cols);
            if (c > 0) visit(i - 1);
            if (c + 1 < cols) visit(i + 1);
        }
    }
    if (count) *count = next;
    return label;
}

bool region_in_band(const RegionMap& map, std::size_t col, Band band) {
    if (col >= map.cols()) throw InvalidArgument("column out of range");
    const auto labels = connected_components(map);
    for (std::size_t row = 0; row < map.rows(); ++row) {
        const double y = map.y.samples[row];
        if (y < band.lo - 1e-12 || y > band.hi + 1e-12) continue;
        if (labels[row * map.cols() + col] != 0) return true;
    }
    return false;
}

std::optional<double> region_onset(const RegionMap& map, Band band) {
    std::vector<std::size_t> cols(map.cols());
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    std::sort(cols.begin(), cols.end(),
              [&](std::size_t a, std::size_t b) { return map.x.samples[a] < map.x.samples[b]; });
    for (std::size_t col : cols) {
        if (region_in_band(map, col, band)) return map.x.samples[col];
    }
    return std::nullopt;
}

}  // namespace superrad
