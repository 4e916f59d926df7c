#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kw/propagators.hpp"

using namespace kw;

namespace {

constexpr cplx I{0, 1};
constexpr double kPi = std::numbers::pi;

cplx random_H(std::mt19937& rng) {
    std::uniform_real_distribution<double> x(-2, 2), y(0.2, 2);
    return {x(rng), y(rng)};
}

cplx random_disk(std::mt19937& rng, double rmax = 0.9) {
    std::uniform_real_distribution<double> r(0.05, rmax), a(-kPi, kPi);
    return std::polar(r(rng), a(rng));
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// Wirtinger derivatives of phi(s, t) by central differences.
OneForm finite_difference(LambdaParam lam, cplx s, cplx t, double h = 1e-5) {
    auto f = [&](cplx ds, cplx dt) { return phi_lambda_H(lam, s + ds, t + dt); };
    const cplx tx = (f(0, h) - f(0, -h)) / (2 * h), ty = (f(0, I * h) - f(0, -I * h)) / (2 * h);
    const cplx sx = (f(h, 0) - f(-h, 0)) / (2 * h), sy = (f(I * h, 0) - f(-I * h, 0)) / (2 * h);
    return {0.5 * (tx - I * ty), 0.5 * (tx + I * ty), 0.5 * (sx - I * sy), 0.5 * (sx + I * sy)};
}

} // namespace

TEST_SUITE("propagators") {

TEST_CASE("closed values on the half-plane") {
    CHECK(std::abs(phi_lambda_H({0.5}, I, 2.0 * I)) < 1e-15);
    const cplx s = I, t = 1.0 + I;
    const cplx direct = std::log((t - s) / (t - std::conj(s))) / (2 * kPi * I);
    CHECK(std::abs(phi_lambda_H({1.0}, s, t) - direct) < 1e-15);
    // lambda = 1/2 is the angle form
    const cplx u = 0.3 + 1.7 * I, v = -0.4 + 0.6 * I;
    CHECK(std::abs(phi_lambda_H({0.5}, u, v) - std::arg((v - u) / (v - std::conj(u))) / (2 * kPi)) < 1e-14);
    CHECK_THROWS_AS(phi_lambda_H({0.5}, s, s), SingularityError);
    CHECK_THROWS_AS(dphi_H({0.5}, s, s), SingularityError);
}

TEST_CASE("analytic partials match finite differences") {
    std::mt19937 rng(11);
    for (cplx lam : {cplx(0.5), cplx(1), cplx(0), cplx(0.3, 0.2), cplx(-1.1, 0.7)})
        for (int k = 0; k < 10; ++k) {
            const cplx s = random_H(rng), t = random_H(rng);
            const auto a = dphi_H({lam}, s, t), b = finite_difference({lam}, s, t);
            CHECK(std::abs(a.a - b.a) < 1e-8);
            CHECK(std::abs(a.abar - b.abar) < 1e-8);
            CHECK(std::abs(a.b - b.b) < 1e-8);
            CHECK(std::abs(a.bbar - b.bbar) < 1e-8);
        }
}

TEST_CASE("logarithmic propagator is holomorphic in the target") {
    std::mt19937 rng(12);
    for (int k = 0; k < 10; ++k) {
        CHECK(std::abs(dphi_H({1.0}, random_H(rng), random_H(rng)).abar) == 0.0);
        CHECK(std::abs(dphi_disk({1.0}, random_disk(rng), random_disk(rng)).abar) == 0.0);
    }
}

TEST_CASE("source approaching the real line") {
    const cplx t = 0.5 + 0.7 * I;
    for (cplx lam : {cplx(0.5), cplx(0.3, 0.2)}) {
        const auto f = dphi_H({lam}, 0.3 + 1e-6 * I, t);
        CHECK(std::abs(f.a) < 1e-5);
        CHECK(std::abs(f.abar) < 1e-5);
    }
}

TEST_CASE("R+ x R invariance") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> P(0.1, 5), Q(-3, 3);
    for (int k = 0; k < 20; ++k) {
        const cplx s = random_H(rng), t = random_H(rng), lam(0.3, 0.2);
        const double p = P(rng), q = Q(rng);
        const auto a = dphi_H({lam}, s, t), b = dphi_H({lam}, p * s + q, p * t + q);
        CHECK(rel(p * b.a, a.a) < 1e-12);
        CHECK(rel(p * b.abar, a.abar) < 1e-12);
        CHECK(rel(p * b.b, a.b) < 1e-12);
        CHECK(rel(p * b.bbar, a.bbar) < 1e-12);
    }
}

TEST_CASE("conjugation exchanges lambda and 1 - conj(lambda)") {
    std::mt19937 rng(14);
    for (cplx lam : {cplx(0.3, 0.2), cplx(0.5), cplx(2, -1)})
        for (int k = 0; k < 10; ++k) {
            const cplx s = random_H(rng), t = random_H(rng);
            const auto a = dphi_H({lam}, s, t), b = dphi_H({1.0 - std::conj(lam)}, s, t);
            CHECK(rel(std::conj(a.a), b.abar) < 1e-12);
            CHECK(rel(std::conj(a.b), b.bbar) < 1e-12);
        }
}

TEST_CASE("disk forms are the Moebius pullback") {
    std::mt19937 rng(15);
    auto dz = [](cplx w) { return 2.0 * I / ((1.0 - w) * (1.0 - w)); };
    for (int k = 0; k < 5; ++k) {
        const cplx ws = random_disk(rng), wt = random_disk(rng), lam(0.3, 0.2);
        CHECK(std::abs(to_disk(to_halfplane(ws)) - ws) < 1e-12);
        CHECK(to_halfplane(ws).imag() > 0);
        const auto d = dphi_disk({lam}, ws, wt), h = dphi_H({lam}, to_halfplane(ws), to_halfplane(wt));
        CHECK(rel(d.a, h.a * dz(wt)) < 1e-12);
        CHECK(rel(d.abar, h.abar * std::conj(dz(wt))) < 1e-12);
        CHECK(rel(d.b, h.b * dz(ws)) < 1e-12);
        CHECK(rel(d.bbar, h.bbar * std::conj(dz(ws))) < 1e-12);
    }
}

TEST_CASE("Shoikhet propagator") {
    const cplx u1 = std::polar(1.0, 0.4);
    for (cplx lam : {cplx(0.5), cplx(0.3, 0.2), cplx(1)}) {
        CHECK(std::abs(phi_shoikhet_center({lam}, u1, u1)) < 1e-15);
        const cplx ut = std::polar(1.0, 1.9);
        CHECK(std::abs(phi_shoikhet_center({lam}, ut, u1) - 1.5 / (2 * kPi)) < 1e-14);
    }
    CHECK_THROWS_AS(phi_shoikhet_center({0.5}, 0.0, u1), SingularityError);

    std::mt19937 rng(16);
    std::uniform_real_distribution<double> A(-kPi, kPi);
    for (int k = 0; k < 10; ++k) {
        const cplx ws = random_disk(rng), wt = random_disk(rng), lam(0.3, 0.2), r = std::polar(1.0, A(rng));
        const auto a = dphi_shoikhet({lam}, ws, wt), b = dphi_shoikhet({lam}, r * ws, r * wt);
        CHECK(rel(b.a * r, a.a) < 1e-12);
        CHECK(rel(b.abar * std::conj(r), a.abar) < 1e-12);
        CHECK(rel(b.b * r, a.b) < 1e-12);
        CHECK(rel(b.bbar * std::conj(r), a.bbar) < 1e-12);
        const auto c = dphi_shoikhet_center({lam}, wt), e = dphi_shoikhet_center({lam}, r * wt);
        CHECK(rel(e.a * r, c.a) < 1e-12);
        CHECK(rel(e.abar * std::conj(r), c.abar) < 1e-12);
    }
}

TEST_CASE("central form is transitive") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> R(0.1, 0.9), A(-0.5, 0.5);
    for (int k = 0; k < 10; ++k) {
        const cplx x = std::polar(R(rng), A(rng)), y = std::polar(R(rng), A(rng)), z = std::polar(R(rng), A(rng));
        const cplx lam(0.3, 0.2);
        CHECK(std::abs(phi_central({lam}, x, y) + phi_central({lam}, y, z) - phi_central({lam}, x, z)) < 1e-14);
    }
}

}
