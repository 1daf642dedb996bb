// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "superrad/coupling.hpp"
#include "superrad/criteria.hpp"
#include "superrad/lattice.hpp"
#include "superrad/oracle.hpp"
#include "superrad/scan.hpp"

using namespace superrad;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

double scale_rel(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

struct Check {
    std::string what;
    bool ok;
};

class Criterion {
public:
    Criterion(int id, std::string title) : id_(id), title_(std::move(title)), t0_(Clock::now()) {}

    void expect(bool ok, const std::string& what) { checks_.push_back({what, ok}); }

    bool finish(double budget_seconds) {
        const double elapsed = seconds_since(t0_);
        char buf[96];
        std::snprintf(buf, sizeof buf, "runtime %.1f s within %.0f s", elapsed, budget_seconds);
        expect(elapsed <= budget_seconds, buf);
        bool ok = true;
        for (const auto& c : checks_) ok = ok && c.ok;
        std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id_, title_.c_str());
        for (const auto& c : checks_) std::printf("    [%s] %s\n", c.ok ? "ok" : "FAILED", c.what.c_str());
        std::fflush(stdout);
        return ok;
    }

private:
    int id_;
    std::string title_;
    Clock::time_point t0_;
    std::vector<Check> checks_;
};

std::string fmt(const char* f, double a) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

/// Region present in `band` at size `n` on a fine spacing grid.
bool present(Family family, RateKind kind, double phi, std::size_t n, Band band) {
    const auto map = map_n_d(family, kind, phi, Axis::integers("N", n, n), Axis::range("d", 0.005, 1.6, 0.005));
    return region_in_band(map, 0, band);
}

bool dicke() {
    Criterion c(1, "Dicke closed forms for N = 1..100");
    double worst1 = 0.0, worst2 = 0.0;
    for (std::size_t n = 1; n <= 100; ++n) {
        CouplingSet set;
        const auto m = static_cast<Eigen::Index>(n);
        set.gamma = Eigen::MatrixXd::Ones(m, m);
        set.omega = Eigen::MatrixXd::Zero(m, m);
        set.g = Eigen::MatrixXcd::Constant(m, m, cplx(0.5, 0.0));
        const double nn = static_cast<double>(n);
        const auto r = gddot_total_inverted(set);
        worst1 = std::max(worst1, scale_rel(r.gdot0, nn * (nn - 2.0)));
        worst2 = std::max(worst2, scale_rel(*r.gddot0, nn * (nn * nn - 8.0 * nn + 8.0)));
    }
    c.expect(worst1 <= 1e-12, fmt("first derivative N(N-2): worst rel %.2e <= 1e-12", worst1));
    c.expect(worst2 <= 1e-12, fmt("second derivative N(N^2-8N+8): worst rel %.2e <= 1e-12", worst2));
    return c.finish(1.0);
}

bool eigen_equivalence() {
    Criterion c(2, "trace and eigenvalue forms of the total criterion agree");
    std::mt19937_64 rng(2);
    double worst = 0.0;
    std::size_t largest = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = trial == 0 ? 200 : 2 + rng() % 199;
        largest = std::max(largest, n);
        const auto cloud = random_cloud(n, 0.5 * std::cbrt(static_cast<double>(n)), 0.02, rng());
        worst = std::max(worst, eigen_criterion_check(build_coupling(cloud)).rel_diff);
    }
    c.expect(worst < 1e-10, fmt("20 random clouds up to N=%.0f: worst rel %.2e < 1e-10", double(largest), worst));
    return c.finish(30.0);
}

bool oracle_agreement() {
    Criterion c(3, "slope formulas agree with the integrated master equation");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_total = 0.0, worst_dir = 0.0, worst_second = 0.0;
    for (std::size_t n = 2; n <= 4; ++n) {
        for (int g = 0; g < 5; ++g) {
            const auto cloud = random_cloud(n, 0.9, 0.1, 100 * n + static_cast<std::size_t>(g));
            const Vec3 k_f = emission_vector(kPi * u(rng), 2.0 * kPi * u(rng));
            const Vec3 k_i = emission_vector(kPi * u(rng), 2.0 * kPi * u(rng));
            for (double alpha : {kPi, 2.0 * kPi / 3.0, kPi / 2.0}) {
                const DriveSpec drive{alpha, k_i};
                worst_total = std::max(worst_total, slope_check(cloud, drive).rel_diff);
                worst_dir = std::max(worst_dir, slope_check(cloud, drive, k_f).rel_diff);
            }
            worst_second = std::max({worst_second, second_derivative_check(cloud).rel_diff,
                                     second_derivative_check(cloud, k_f).rel_diff});
        }
    }
    c.expect(worst_total <= 1e-4, fmt("total slope, 45 cases: worst rel %.2e <= 1e-4", worst_total));
    c.expect(worst_dir <= 1e-4, fmt("directional slope, 45 cases: worst rel %.2e <= 1e-4", worst_dir));
    c.expect(worst_second <= 1e-3, fmt("second derivative, 30 cases: worst rel %.2e <= 1e-3", worst_second));
    return c.finish(300.0);
}

bool line_onsets() {
    Criterion c(4, "directional onsets of the single and double line");
    const double phi1 = 0.4 * kPi;
    const double phi2 = 0.5 * kPi;
    const Band line_band{0.5, 0.6};
    const Band middle{0.45, 0.6};
    const Band upper{0.95, 1.1};
    c.expect(present(Family::Line, RateKind::Directional, phi1, 9, line_band), "line, d in [0.5,0.6]: present at N=9");
    c.expect(!present(Family::Line, RateKind::Directional, phi1, 8, line_band), "line, d in [0.5,0.6]: absent at N=8");
    c.expect(present(Family::DoubleLine, RateKind::Directional, phi2, 9, middle),
             "double line, middle region d in [0.45,0.6]: present at N=9");
    c.expect(!present(Family::DoubleLine, RateKind::Directional, phi2, 8, middle),
             "double line, middle region: absent at N=8");
    c.expect(present(Family::DoubleLine, RateKind::Directional, phi2, 30, upper),
             "double line, upper region d in [0.95,1.1]: present at N=30");
    c.expect(!present(Family::DoubleLine, RateKind::Directional, phi2, 29, upper),
             "double line, upper region: absent at N=29");
    return c.finish(60.0);
}

bool line_total_boundary() {
    Criterion c(5, "total-rate boundary of the N=100 line");
    const auto ds = Axis::range("d", 0.005, 0.5, 0.005);
    const auto map = map_n_d(Family::Line, RateKind::Total, 0.0, Axis::integers("N", 100, 100), ds);
    std::size_t first_off = ds.size();
    for (std::size_t r = 0; r < ds.size(); ++r) {
        if (!map.superradiant(r, 0)) {
            first_off = r;
            break;
        }
    }
    const bool found = first_off > 0 && first_off < ds.size();
    const double boundary = found ? 0.5 * (ds.samples[first_off - 1] + ds.samples[first_off]) : 0.0;
    c.expect(found, "superradiant at small d with a boundary inside the scan");
    c.expect(found && boundary >= 0.2 && boundary <= 0.3, fmt("boundary d = %.4f in [0.2, 0.3]", boundary));
    return c.finish(60.0);
}

bool square_scaling() {
    Criterion c(6, "2D total-rate scaling and threshold");
    const auto f1 = fit_asymptote(2, 1.0, 50, 400);
    c.expect(std::abs(f1.normalized_coefficient() - 0.1740) <= 0.010,
             fmt("d=1: coefficient D d^2 = %.5f, want 0.1740 +- 0.010", f1.normalized_coefficient()));
    c.expect(std::abs(f1.C + 1.276) <= 0.05, fmt("d=1: intercept C = %.5f, want -1.276 +- 0.05", f1.C));
    const auto f2 = fit_asymptote(2, 2.0, 50, 400);
    c.expect(std::abs(f2.D - 0.0429) <= 0.005, fmt("d=2: slope D = %.5f, want 0.0429 +- 0.005", f2.D));
    const auto t = threshold_n1(2, 1.0, RateKind::Total, std::nullopt, 2000);
    c.expect(t.found && rel(static_cast<double>(t.n1_threshold), 1530.0) <= 0.03,
             fmt("d=1: threshold N1 = %.0f, want 1530 +- 3%%", static_cast<double>(t.n1_threshold)));
    const double ext = f2.extrapolated_threshold.value_or(0.0);
    c.expect(ext >= 5.5e10 / 2.0 && ext <= 5.5e10 * 2.0,
             fmt("d=2: fit extrapolation N1 = %.3g, within a factor 2 of 5.5e10", ext));
    return c.finish(60.0);
}

bool cubic_scaling() {
    Criterion c(7, "3D total-rate scaling and thresholds");
    const auto f1 = fit_asymptote(3, 1.0);
    const auto f2 = fit_asymptote(3, 2.0);
    c.expect(std::abs(f1.C + 1.1913) <= 0.05, fmt("d=1: intercept C = %.5f, want -1.1913 +- 0.05", f1.C));
    c.expect(std::abs(f1.D - 0.0856) <= 0.005, fmt("d=1: slope D = %.5f, want 0.0856 +- 0.005", f1.D));
    const auto t1 = threshold_n1(3, 1.0, RateKind::Total, std::nullopt, 200);
    const auto t2 = threshold_n1(3, 2.0, RateKind::Total, std::nullopt, 200);
    c.expect(t1.found && t1.n1_threshold == 14, fmt("d=1: threshold N1 = %.0f, want 14", double(t1.n1_threshold)));
    c.expect(t2.found && t2.n1_threshold == 51, fmt("d=2: threshold N1 = %.0f, want 51", double(t2.n1_threshold)));
    const double ratio = f2.D / f1.D;
    c.expect(std::abs(ratio - 0.25) <= 0.03, fmt("D(2)/D(1) = %.4f, want 0.25 +- 0.03", ratio));
    return c.finish(60.0);
}

bool square_directional_onsets() {
    Criterion c(8, "2D directional onsets of the square array");
    const Band near_one{0.95, 1.1};
    const Band near_five_quarters{1.2, 1.3};
    c.expect(present(Family::Square, RateKind::Directional, 0.0, 6, near_one), "d in [0.95,1.1]: present at N1=6");
    c.expect(!present(Family::Square, RateKind::Directional, 0.0, 5, near_one), "d in [0.95,1.1]: absent at N1=5");
    c.expect(present(Family::Square, RateKind::Directional, 0.0, 11, near_five_quarters),
             "d in [1.2,1.3]: present at N1=11");
    c.expect(!present(Family::Square, RateKind::Directional, 0.0, 10, near_five_quarters),
             "d in [1.2,1.3]: absent at N1=10");
    return c.finish(60.0);
}

bool fast_path() {
    Criterion c(9, "weighted lattice sums match pair sums and scale linearly");
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> spacing(0.1, 2.5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    int cases = 0;
    struct Size {
        int dim;
        std::size_t max_n1;
    };
    for (const Size s : {Size{1, 1000}, Size{2, 40}, Size{3, 12}}) {
        for (int k = 0; k < 10; ++k) {
            const auto spec = LatticeSpec::of_dim(s.dim, 1 + rng() % s.max_n1, spacing(rng));
            const auto cloud = spec.expand();
            const auto set = build_coupling(cloud);
            const Vec3 k_f = emission_vector(kPi * unit(rng), 2.0 * kPi * unit(rng));
            worst = std::max({worst, scale_rel(gdot_total_fast(spec).scaled(), gdot_total_inverted(set).scaled()),
                              scale_rel(gdot_directional_fast(spec, k_f).scaled(),
                                        gdot_directional_inverted(set, cloud, k_f).scaled())});
            cases += 2;
        }
    }
    c.expect(worst <= 1e-12, fmt("%.0f randomized comparisons: worst rel %.2e <= 1e-12", cases, worst));

    std::vector<double> log_n, log_t;
    for (std::size_t n1 : {10, 16, 25, 40, 63, 100}) {
        const auto spec = LatticeSpec::cubic(n1, 1.0);
        double best = 1e300;
        for (int rep = 0; rep < 3; ++rep) {
            const auto t0 = Clock::now();
            volatile double sink = gdot_total_fast(spec, 1).gdot0;
            (void)sink;
            best = std::min(best, seconds_since(t0));
        }
        log_n.push_back(std::log(static_cast<double>(spec.n_atoms())));
        log_t.push_back(std::log(best));
    }
    const double mn = std::accumulate(log_n.begin(), log_n.end(), 0.0) / double(log_n.size());
    const double mt = std::accumulate(log_t.begin(), log_t.end(), 0.0) / double(log_t.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
        sxy += (log_n[i] - mn) * (log_t[i] - mt);
        sxx += (log_n[i] - mn) * (log_n[i] - mn);
    }
    const double exponent = sxy / sxx;
    c.expect(exponent < 1.2, fmt("runtime exponent over N = 1e3..1e6: %.3f < 1.2", exponent));
    return c.finish(120.0);
}

bool non_ideal() {
    Criterion c(10, "partial inversion and random atom removal");
    const auto t = partial_threshold(Family::Line, 100, RateKind::Directional, 0.4 * kPi, Band{0.5, 0.6}, 0.005,
                                     Vec3::UnitZ());
    const double frac = t.refined.value_or(-1.0);
    c.expect(std::abs(frac - 0.75) <= 0.05,
             fmt("line N=100, d in [0.5,0.6]: region vanishes below excited fraction %.4f, want 0.75 +- 0.05",
                 frac));

    std::vector<double> ps;
    for (int i = 0; i <= 14; ++i) ps.push_back(0.05 * i);
    struct Study {
        const char* name;
        Family family;
        double phi;
        Band band;
        double want;
    };
    for (const Study s : {Study{"line, d in [0.5,0.6]", Family::Line, 0.4 * kPi, {0.5, 0.6}, 0.80},
                          Study{"double line, d in [0.95,1.1]", Family::DoubleLine, 0.5 * kPi, {0.95, 1.1}, 0.70},
                          Study{"double line, d in [0.45,0.6]", Family::DoubleLine, 0.5 * kPi, {0.45, 0.6}, 0.40}}) {
        const auto r = removal_study(s.family, 100, RateKind::Directional, s.phi, s.band, 0.005, ps, 100, 2024);
        const double kept = r.kept_at_half.value_or(-1.0);
        c.expect(std::abs(kept - s.want) <= 0.07,
                 std::string("removal, ") + s.name +
                     fmt(": half the trials lose the region at kept fraction %.3f, want %.2f +- 0.07", kept,
                         s.want));
    }
    return c.finish(600.0);
}

}  // namespace

int main() {
    const std::vector<std::function<bool()>> criteria{dicke,          eigen_equivalence, oracle_agreement,
                                                      line_onsets,    line_total_boundary, square_scaling,
                                                      cubic_scaling,  square_directional_onsets, fast_path,
                                                      non_ideal};
    int failed = 0;
    for (const auto& run : criteria) failed += run() ? 0 : 1;
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
