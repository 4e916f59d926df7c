#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "doctest.h"
#include "kw/weight_series.hpp"

using namespace kw;
using cplx = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

// Integral of r^n ln^m r from b to a.
double radial_oracle(int n, int m, double a, double b) {
    auto f = [&](double r) { return std::pow(r, n) * std::pow(std::log(r), m); };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, b, a, 15, 1e-14);
}

// Disk integral of f(conj w)(1/(w-p) + conj(p)/(1 - w conj p)) dwbar ^ dw in
// polar coordinates around p, where the pole is integrable.
cplx vanishing_oracle(const std::vector<cplx>& fc, cplx p) {
    const int nt = 400;
    cplx sum = 0;
    for (int k = 0; k < nt; ++k) {
        const double th = 2 * kPi * (k + 0.5) / nt;
        const cplx e = std::polar(1.0, th);
        const double c = (std::conj(p) * e).real();
        const double rmax = -c + std::sqrt(c * c + 1 - std::norm(p));
        auto g = [&](double rho) {
            const cplx w = p + rho * e;
            cplx f = 0, wb = 1;
            for (auto a : fc) {
                f += a * wb;
                wb *= std::conj(w);
            }
            // rho * (1/(w-p)) = 1/e removes the pole
            return f * (1.0 / e + rho * std::conj(p) / (1.0 - w * std::conj(p)));
        };
        auto re = [&](double r) { return g(r).real(); };
        auto im = [&](double r) { return g(r).imag(); };
        using Q = boost::math::quadrature::gauss<double, 30>;
        sum += cplx(Q::integrate(re, 0.0, rmax), Q::integrate(im, 0.0, rmax));
    }
    // dwbar ^ dw = 2i dx ^ dy
    return cplx(0, 2) * sum * (2 * kPi / nt);
}

} // namespace

TEST_SUITE("weight_series") {

TEST_CASE("oscillatory delta") {
    CHECK(oscillatory_delta(0) == doctest::Approx(2 * kPi));
    CHECK(oscillatory_delta(5) == 0.0);
    CHECK(oscillatory_delta(-3) == 0.0);
}

TEST_CASE("radial log integral against quadrature") {
    CHECK(radial_log_integral(0, 0, 1.0, 0.0) == doctest::Approx(1.0));
    CHECK(radial_log_integral(0, 0, 0.0, 1.0) == doctest::Approx(-1.0));
    CHECK(radial_log_integral(-1, 0, 0.3, 0.7) == doctest::Approx(std::log(0.3 / 0.7)));
    CHECK(radial_log_integral(1, 1, 1.0, 1.0) == 0.0);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> U(0.05, 1.0);
    std::uniform_int_distribution<int> N(-4, 5), M(0, 4);
    for (int k = 0; k < 50; ++k) {
        const int n = N(rng), m = M(rng);
        const double a = U(rng), b = U(rng);
        CAPTURE(n);
        CAPTURE(m);
        const double v = radial_log_integral(n, m, a, b), o = radial_oracle(n, m, a, b);
        CHECK(std::abs(v - o) <= 1e-8 * std::max(1.0, std::abs(o)));
    }
    CHECK_THROWS_AS(radial_log_integral(-1, 0, 0.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(radial_log_integral(0, 0, 1.5, 0.5), std::domain_error);
}

TEST_CASE("geometric series branches") {
    const cplx x(0.3, 0.4), y(1.5, -2.0);
    CHECK(std::abs(geometric_series(x, 200) - 1.0 / (1.0 - x)) < 1e-14);
    CHECK(std::abs(geometric_series(y, 200) - 1.0 / (1.0 - y)) < 1e-14);
}

TEST_CASE("wheel recipe reproduces zeta values") {
    const double z3 = 1.2020569031595942, z5 = 1.0369277551433699;
    CHECK(std::abs(merkulov_wheel_zeta(2, 10000).value - kPi * kPi / 6) < 1e-6);
    CHECK(std::abs(merkulov_wheel_zeta(3, 10000).value - z3) < 1e-6);
    CHECK(std::abs(merkulov_wheel_zeta(4, 10000).value - std::pow(kPi, 4) / 90) < 1e-6);
    CHECK(std::abs(merkulov_wheel_zeta(5, 10000).value - z5) < 1e-6);
    for (int n = 2; n <= 6; ++n) {
        const auto a = merkulov_wheel_zeta(n, 5000);
        const auto b = zeta_partial(n, 5000);
        CHECK(std::abs(a.value - b.value) <= a.bound + b.bound);
    }
    // weight (-1)^{n(n-1)/2} zeta(n) / (2 pi i)^n
    const auto w2 = merkulov_wheel_zeta(2, 10000).weight;
    CHECK(std::abs(w2 - cplx(1.0 / 24, 0)) < 1e-8);
}

TEST_CASE("shadow sums") {
    std::vector<ShadowSum> s;
    for (double w : {0.1, 0.3, 0.5}) s.push_back(shadow_sum(2, w, 4000));
    for (auto& a : s)
        for (auto& b : s) CHECK(std::abs(a.value - b.value) <= a.bound + b.bound);
    for (auto& a : s) CHECK(std::abs(a.value - kPi * kPi / 6) <= a.bound + 1e-9);
    std::vector<SeriesValue> t;
    for (double w : {0.1, 0.3, 0.5, 0.7}) t.push_back(two_wheel_shadow(w, 4000));
    for (auto& a : t)
        for (auto& b : t) CHECK(std::abs(a.value - b.value) <= a.bound + b.bound);
    CHECK_THROWS_AS(shadow_sum(2, 0.9, 100), std::domain_error);
    CHECK_THROWS_AS(shadow_sum(1, 0.5, 100), std::domain_error);
}

TEST_CASE("harmonic identities") {
    const auto h1 = harmonic_identity(1);
    CHECK(h1.lhs == 1);
    CHECK(h1.all_equal());
    CHECK(harmonic_identity(2).lhs == mpq_class(3, 4));
    for (int m = 1; m <= 50; ++m) CHECK(harmonic_identity(m).all_equal());
}

TEST_CASE("vanishing of the two-term disk integral") {
    const auto a = merkulov_vanishing_check({1.0}, {0.3, 0.1});
    CHECK(std::abs(a.total) < 1e-14);
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> U(-0.6, 0.6);
    for (int k = 0; k < 3; ++k) {
        const cplx p(U(rng), U(rng));
        const std::vector<cplx> f{0.0, 0.0, 1.0};
        CHECK(std::abs(merkulov_vanishing_check(f, p).total) < 1e-14);
        CHECK(std::abs(vanishing_oracle(f, p)) < 1e-4);
    }
    CHECK(std::abs(vanishing_oracle({1.0}, {0.3, 0.1})) < 1e-4);
}

TEST_CASE("residue formula") {
    for (auto [al, be] : {std::pair{0.5, 0.3}, std::pair{2.0, -1.0}, std::pair{0.0, 0.7}}) {
        const auto r = residue_formula_check(al, be);
        CHECK(std::abs(r.quadrature - r.closed_form) < 1e-8);
        CHECK(r.closed_form == doctest::Approx(kPi * std::atan(be / (al + 1))));
    }
}

}
