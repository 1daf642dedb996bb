#include <cmath>
#include <string>

#include "superrad/coupling.hpp"
#include "superrad/error.hpp"

namespace superrad {
namespace {

// j_l(s) = s^l / (2l+1)!! * sum_k (-s^2/2)^k / (k! (2l+3)(2l+5)...(2l+2k+1))
double bessel_series(int l, double s) {
    double prefactor = 1.0;
    for (int i = 1; i <= l; ++i) prefactor *= s / (2.0 * i + 1.0);
    const double x = -0.5 * s * s;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 30; ++k) {
        term *= x / (k * (2.0 * l + 2.0 * k + 1.0));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return prefactor * sum;
}

void require_kernel_argument(double s) {
    if (!(s > 0.0)) throw DomainError("Hankel function needs s > 0, got " + std::to_string(s));
    if (s < kMinKernelArgument) {
        throw DomainError("kernel argument below 1e-8 (near-coincident atoms)");
    }
}

}  // namespace

double bessel_j0(double s) {
    if (s < 0.0) throw DomainError("spherical Bessel function needs s >= 0");
    if (s < 1e-2) return bessel_series(0, s);
    return std::sin(s) / s;
}

double bessel_j2(double s) {
    if (s < 0.0) throw DomainError("spherical Bessel function needs s >= 0");
    if (s < 1.0) return bessel_series(2, s);
    const double s2 = s * s;
    return (3.0 / (s2 * s) - 1.0 / s) * std::sin(s) - 3.0 * std::cos(s) / s2;
}

cplx hankel_h0(double s) {
    require_kernel_argument(s);
    return {bessel_j0(s), -std::cos(s) / s};
}

cplx hankel_h2(double s) {
    require_kernel_argument(s);
    const double s2 = s * s;
    const double y2 = (1.0 / s - 3.0 / (s2 * s)) * std::cos(s) - 3.0 * std::sin(s) / s2;
    return {bessel_j2(s), y2};
}

}  // namespace superrad
