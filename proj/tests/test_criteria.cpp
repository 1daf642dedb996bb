#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "superrad/coupling.hpp"
#include "superrad/criteria.hpp"
#include "superrad/error.hpp"

using namespace superrad;

namespace {

CouplingSet dicke_set(std::size_t n) {
    CouplingSet c;
    const auto m = static_cast<Eigen::Index>(n);
    c.gamma = Eigen::MatrixXd::Ones(m, m);
    c.omega = Eigen::MatrixXd::Zero(m, m);
    c.g = Eigen::MatrixXcd::Constant(m, m, cplx(0.5, 0.0));
    return c;
}

double scale_rel(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

// Same sums with the three-atom l-sum rewritten through row sums, O(N^2).
double total_partial_factorized(const CouplingSet& c, const AtomCloud& cloud, double alpha,
                                const Vec3& k_i) {
    const auto n = static_cast<Eigen::Index>(cloud.size());
    const double co = std::cos(alpha);
    const double si = std::sin(alpha);
    const Vec3 k = k_i.isZero(0.0) ? Vec3::Zero() : Vec3(k_i * (kWaveNumber / k_i.norm()));
    Eigen::VectorXcd u(n);
    for (Eigen::Index i = 0; i < n; ++i) u(i) = std::polar(1.0, k.dot(cloud.position(i)));
    const Eigen::VectorXcd row = c.g * u;  // includes l = n
    double total = -static_cast<double>(n) * 0.5 * (1.0 - co);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            if (a == b) continue;
            const double gmn = c.gamma(b, a);
            const double eta = std::arg(u(b) * std::conj(u(a)));
            const cplx s1 = row(a) - c.g(a, a) * u(a) - c.g(a, b) * u(b);
            const cplx s2 = std::conj(row(b)) - std::conj(c.g(b, b) * u(b)) - std::conj(c.g(b, a) * u(a));
            const cplx three = std::conj(u(b)) * s1 + u(a) * s2;
            total += 0.5 * co * (co - 1.0) * gmn * gmn - 0.5 * si * si * gmn * std::cos(eta) -
                     0.25 * co * si * si * gmn * three.real();
        }
    }
    return total;
}

}  // namespace

TEST(Criteria, DickeClosedForms) {
    for (std::size_t n = 1; n <= 100; ++n) {
        const auto c = dicke_set(n);
        const double nn = static_cast<double>(n);
        const auto r = gddot_total_inverted(c);
        EXPECT_LE(scale_rel(r.gdot0, nn * (nn - 2.0)), 1e-12) << n;
        EXPECT_LE(scale_rel(*r.gddot0, nn * (nn * nn - 8.0 * nn + 8.0)), 1e-12) << n;
    }
}

TEST(Criteria, SingleAtomAndPair) {
    const auto one = build_coupling(AtomCloud({Vec3::Zero()}));
    EXPECT_EQ(gdot_total_inverted(one).gdot0, -1.0);
    const auto pair_cloud = line_lattice(2, 0.3);
    const auto pair = build_coupling(pair_cloud);
    const double g = pair.gamma(0, 1);
    const auto r = gdot_total_inverted(pair);
    EXPECT_NEAR(r.gdot0, -2.0 + 2.0 * g * g, 1e-15);
    EXPECT_EQ(r.gdot0, r.single_atom_term + r.pair_term);
    EXPECT_EQ(r.superradiant(), r.gdot0 > 0.0);
}

TEST(Criteria, DirectionalInvertedIsPhaseWeightedPairSum) {
    const auto cloud = random_cloud(8, 1.0, 0.1, 3);
    const auto c = build_coupling(cloud);
    const Vec3 k = emission_vector(0.7, 1.9);
    double expect = -8.0;
    for (std::size_t a = 0; a < 8; ++a) {
        for (std::size_t b = 0; b < 8; ++b) {
            if (a != b) expect += c.gamma(a, b) * std::cos(k.dot(cloud.position(b) - cloud.position(a)));
        }
    }
    EXPECT_NEAR(gdot_directional_inverted(c, cloud, k).gdot0, expect, 1e-13);
    // magnitude of k_f is irrelevant
    EXPECT_NEAR(gdot_directional_inverted(c, cloud, 3.0 * k).gdot0, expect, 1e-13);
    EXPECT_TRUE(gdot_directional_inverted(c, cloud, Vec3::UnitZ()).direction_warning);
    EXPECT_THROW(gdot_directional_inverted(c, cloud, Vec3::Zero()), InvalidArgument);
}

TEST(Criteria, EigenvalueFormAgreesWithTrace) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng() % 199;
        const auto c = build_coupling(random_cloud(n, 0.5 * std::cbrt(static_cast<double>(n)), 0.02, rng()));
        const auto e = eigen_criterion_check(c);
        EXPECT_LT(e.rel_diff, 1e-10) << n;
        EXPECT_NEAR(e.gdot_from_trace(), gdot_total_inverted(c).gdot0,
                    1e-10 * std::abs(e.trace_value));
    }
}

TEST(Criteria, PartialReducesToInvertedAtPi) {
    const auto cloud = random_cloud(9, 1.2, 0.1, 21);
    const auto c = build_coupling(cloud);
    const Vec3 k_f = emission_vector(1.0, 0.3);
    const DriveSpec pi_drive{kPi, Vec3(0.3, 0.1, 1.0)};
    EXPECT_NEAR(gdot_total_partial(c, cloud, pi_drive).gdot0, gdot_total_inverted(c).gdot0, 1e-12);
    EXPECT_NEAR(gdot_directional_partial(c, cloud, pi_drive, k_f).gdot0,
                gdot_directional_inverted(c, cloud, k_f).gdot0, 1e-12);
    EXPECT_NEAR(gdot_total_partial(c, cloud, pi_drive).gamma0, 9.0, 1e-12);
}

TEST(Criteria, GroundStateHasNoSlope) {
    const auto cloud = random_cloud(6, 1.0, 0.1, 4);
    const auto c = build_coupling(cloud);
    const DriveSpec ground{0.0, Vec3::Zero()};
    EXPECT_EQ(gdot_total_partial(c, cloud, ground).gdot0, 0.0);
    EXPECT_EQ(gdot_total_partial(c, cloud, ground).gamma0, 0.0);
}

TEST(Criteria, PartialMatchesFactorizedSums) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t n = 2 + rng() % 30;
        const auto cloud = random_cloud(n, 1.5, 0.05, rng());
        const auto c = build_coupling(cloud);
        const double alpha = kPi * u(rng);
        const Vec3 k_i = emission_vector(kPi * u(rng), 2.0 * kPi * u(rng));
        const double got = gdot_total_partial(c, cloud, DriveSpec{alpha, k_i}).gdot0;
        EXPECT_LE(scale_rel(got, total_partial_factorized(c, cloud, alpha, k_i)), 1e-12);
    }
}

TEST(Criteria, ReadingsDifferOnlyWhenDriveAndDetectionDiffer) {
    const auto cloud = random_cloud(5, 1.0, 0.1, 8);
    const auto c = build_coupling(cloud);
    const Vec3 k = emission_vector(0.4, 2.0);
    PartialOptions printed;
    printed.reading = DirectionalPhase::AsPrinted;
    const DriveSpec same{2.0, k};
    EXPECT_NEAR(gdot_directional_partial(c, cloud, same, k).gdot0,
                gdot_directional_partial(c, cloud, same, k, printed).gdot0, 1e-12);
    const DriveSpec other{2.0, Vec3::UnitZ()};
    EXPECT_GT(std::abs(gdot_directional_partial(c, cloud, other, k).gdot0 -
                       gdot_directional_partial(c, cloud, other, k, printed).gdot0),
              1e-6);
}

TEST(Criteria, PartialCapAndValidation) {
    const auto cloud = line_lattice(12, 0.3);
    const auto c = build_coupling(cloud);
    PartialOptions small;
    small.max_atoms = 10;
    EXPECT_THROW(gdot_total_partial(c, cloud, DriveSpec{1.0, Vec3::Zero()}, small), TooLarge);
    EXPECT_THROW(gdot_total_partial(c, cloud, DriveSpec{4.0, Vec3::Zero()}), InvalidArgument);
    EXPECT_THROW(gdot_total_partial(c, line_lattice(3, 0.3), DriveSpec{}), InvalidArgument);
}

TEST(Criteria, SecondDerivativeFormsAgree) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto c = build_coupling(random_cloud(3 + seed * 7, 1.0, 0.03, seed));
        const auto f = gddot_total_forms(c);
        EXPECT_LT(f.rel_diff, 1e-12);
    }
}

TEST(Criteria, DirectionalSecondDerivativeWithoutPhases) {
    // co-linear cloud along z and k_f along x: all phases vanish, so the commutator term drops
    const AtomCloud cloud({Vec3(0, 0, 0), Vec3(0, 0, 0.3), Vec3(0, 0, 0.7)});
    const auto c = build_coupling(cloud);
    const auto r = gddot_directional_inverted(c, cloud, Vec3::UnitX());
    const Eigen::MatrixXd& g = c.gamma;
    const double expect = 24.0 - 2.0 * g.cwiseProduct(g).sum() - 6.0 * g.sum() + (g * g).sum();
    EXPECT_NEAR(*r.gddot0, expect, 1e-12);
}

TEST(Multilevel, SingleChannelSlopes) {
    const auto cloud = random_cloud(7, 1.0, 0.1, 6);
    MultilevelChannel ch;
    const auto one = gdot_multilevel(cloud, {ch});
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].gamma0, 7.0);
    double pairs = 0.0;
    for (std::size_t a = 0; a < 7; ++a) {
        for (std::size_t b = 0; b < 7; ++b) {
            if (a == b) continue;
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) pairs += std::pow(multilevel_gamma(cloud.displacement(a, b), ch, i, j), 2);
            }
        }
    }
    EXPECT_NEAR(one[0].gdot0, -7.0 + pairs / 9.0, 1e-12);

    // doubling every rate scales the slope by four
    MultilevelChannel twice = ch;
    twice.gamma_f = 2.0;
    EXPECT_NEAR(gdot_multilevel(cloud, {twice})[0].gdot0, 4.0 * one[0].gdot0, 1e-12);
    EXPECT_THROW(gdot_multilevel(cloud, {}), InvalidArgument);
}

TEST(Multilevel, ChannelsShareTheTotalRate) {
    const auto cloud = line_lattice(4, 0.4);
    MultilevelChannel a;
    a.gamma_f = 0.6;
    MultilevelChannel b;
    b.gamma_f = 0.4;
    b.k_mag = 1.1 * kWaveNumber;
    const auto r = gdot_multilevel(cloud, {a, b});
    ASSERT_EQ(r.size(), 2u);
    EXPECT_NEAR(r[0].single_atom_term, -4.0 * 0.6, 1e-15);
    EXPECT_NEAR(r[1].single_atom_term, -4.0 * 0.4, 1e-15);
    EXPECT_NEAR(r[0].gamma0 + r[1].gamma0, 4.0, 1e-15);
}

TEST(Multilevel, KroneckerPairAtContact) {
    // at vanishing separation each channel matrix is Gamma_f times the identity
    const AtomCloud pair({Vec3::Zero(), Vec3(1e-7, 0, 0)});
    MultilevelChannel ch;
    ch.convention = TraceConvention::Kronecker;
    const auto r = gdot_multilevel(pair, {ch});
    EXPECT_NEAR(r[0].gdot0, -2.0 + 2.0 * 3.0 / 9.0, 1e-10);
}
