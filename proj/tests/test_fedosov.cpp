#include "doctest.h"
#include "kw/fedosov.hpp"
#include "kw/verify.hpp"

using namespace kw;

namespace {

const std::vector<std::string> xy{"x", "y"};
Poly P(const std::string& s) { return parse_poly(s, 2, xy); }

// Constant part in v and dx: the complement of the Poincare homotopy.
WeylElement constant_part(const WeylElement& a) {
    WeylElement r(a.dim(), a.trunc());
    for (auto& [k, c] : a.terms())
        if (k.deg_v() == 0 && k.deg_a() == 0) r.add(k, c);
    return r;
}

WeylElement hbar_part(const WeylElement& a, int h) {
    WeylElement r(a.dim(), a.trunc());
    for (auto& [k, c] : a.terms())
        if (k.h == h) r.add(k, c);
    return r;
}

Poly function_part(const WeylElement& a, int h) {
    Poly r(a.dim());
    const auto s = sigma(a);
    for (auto& [k, c] : s.terms())
        if (k.h == h) r += c;
    return r;
}

// Symplectic connection with Gamma^l_{jk} = Pi^{li} S_{ijk}, S symmetric.
FedosovInput curved() {
    std::vector<Poly> S(8, Poly(2));
    S[0] = P("y");
    S[1] = S[2] = S[4] = P("x*y");
    S[3] = S[5] = S[6] = P("1");
    S[7] = P("x");
    return symplectic_connection_input(2, S);
}

Poly bracket(const FedosovInput& in, const Poly& f, const Poly& g) {
    Poly r(2);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) r += f.derivative(a) * g.derivative(b) * in.pi[a][b];
    return r;
}

} // namespace

TEST_SUITE("fedosov") {

TEST_CASE("basic operators") {
    const int D = 4;
    CHECK(delta(WeylElement::v(2, D, 0)) == WeylElement::dx(2, D, 0));
    CHECK(delta_inv(WeylElement::dx(2, D, 1)) == WeylElement::v(2, D, 1));
    const auto f = WeylElement::function(2, D, P("x^2 + y"));
    const auto a = f + mul(WeylElement::v(2, D, 0), WeylElement::dx(2, D, 1)) + WeylElement::v(2, D, 1);
    CHECK(sigma(a) == f);
    for (unsigned s = 0; s < 20; ++s) {
        const auto b = random_element(2, 5, s);
        CHECK(delta_inv(delta_inv(b)).is_zero());
        CHECK(delta(delta(b)).is_zero());
        for (auto& [k, c] : b.terms()) CHECK(k.Deg() <= 5);
    }
}

TEST_CASE("Poincare lemma") {
    // delta^{-1} raises Deg by one, so compare with one spare degree.
    for (unsigned s = 0; s < 100; ++s) {
        const auto a = random_element(2, 6, s).truncated(7);
        CHECK(delta(delta_inv(a)) + delta_inv(delta(a)) + constant_part(a) == a);
    }
}

TEST_CASE("super-commutative product") {
    for (unsigned s = 0; s < 20; ++s) {
        const auto a = random_element(2, 5, s), b = random_element(2, 5, s + 100);
        for (int k1 = 0; k1 <= 2; ++k1)
            for (int k2 = 0; k2 <= 2; ++k2) {
                const auto x = a.form_part(k1), y = b.form_part(k2);
                const auto xy_ = mul(x, y), yx = mul(y, x);
                CHECK(((k1 * k2) % 2 ? xy_ == -yx : xy_ == yx));
            }
    }
}

TEST_CASE("fibrewise Weyl product") {
    const auto in = flat_input(2);
    const int D = 6;
    const auto v1 = WeylElement::v(2, D, 0), v2 = WeylElement::v(2, D, 1);
    WeylElement ih(2, D);
    ih.add({1, Mono{0, 0}, 0}, Poly::constant(2, GQ::i()));
    CHECK(commutator(v1, v2, in.pi) == ih);
    for (unsigned s = 0; s < 10; ++s) {
        const auto a = random_element(2, D, s), b = random_element(2, D, s + 1), c = random_element(2, D, s + 2);
        CHECK(weyl_product(weyl_product(a, b, in.pi), c, in.pi) == weyl_product(a, weyl_product(b, c, in.pi), in.pi));
        const auto a0 = hbar_part(a, 0), b0 = hbar_part(b, 0);
        CHECK(hbar_part(weyl_product(a0, b0, in.pi), 0) == mul(a0, b0));
    }
}

TEST_CASE("input validation") {
    auto in = flat_input(2);
    CHECK_NOTHROW(in.validate());
    auto om = in.omega_matrix();
    // omega_{ij} Pi^{kj} = delta_i^k
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) {
            GQ s;
            for (int j = 0; j < 2; ++j) s += om[i][j] * in.pi[k][j];
            CHECK(s == GQ(i == k ? 1 : 0));
        }
    auto bad = in;
    bad.pi[0][1] = GQ(2);
    CHECK_THROWS(bad.validate());
    auto tors = curved();
    tors.gamma[0][0][1] += P("x");
    CHECK_THROWS(tors.validate());
    CHECK_THROWS(flat_input(3));
}

TEST_CASE("connection identities") {
    const auto in = curved();
    const int D = 5;
    const auto R = curvature(in, D);
    CHECK(delta(R).is_zero());
    CHECK(nabla(R, in).low(D - 1).is_zero());
    for (unsigned s = 0; s < 20; ++s) {
        const auto a = random_element(2, D, s);
        CHECK((delta(nabla(a, in)) + nabla(delta(a), in)).is_zero());
        const auto a0 = a.form_part(0);
        CHECK(nabla(nabla(a0, in), in) == i_over_hbar_commutator(R, a0, in.pi));
    }
}

TEST_CASE("fixed point") {
    CHECK(solve_R(flat_input(2), 6).R.is_zero());

    // constant Omega = 3 hbar dx^1 dx^2
    const auto c = flat_input_with_omega(P("3"));
    CHECK(solve_R(c, 4).R == delta_inv(c.omega(4)));
    // from Deg 5 on, the quadratic term contributes (9/8) hbar^2 (v^2 dx^1 - v^1 dx^2)
    WeylElement extra(2, 5);
    extra.add({2, Mono{0, 1}, 0b01}, Poly::constant(2, GQ(mpq_class(9, 8))));
    extra.add({2, Mono{1, 0}, 0b10}, Poly::constant(2, GQ(mpq_class(-9, 8))));
    CHECK(solve_R(c, 5).R - delta_inv(c.omega(5)) == extra);

    for (auto in : {flat_input_with_omega(P("x*y + 1")), curved()}) {
        const int D = 5;
        const auto R = solve_R(in, D).R;
        CHECK(delta_inv(R).is_zero());
        const auto rhs = delta_inv(in.omega(D) + curvature(in, D) + nabla(R, in) +
                                   i_over_hbar_commutator(R, R, in.pi).scaled(GQ(mpq_class(1, 2))));
        CHECK(rhs.truncated(D) == R);
    }
}

TEST_CASE("Catalan tree expansion") {
    for (int n = 1; n <= 5; ++n) CHECK(catalan_number(n) == std::vector<long>{1, 1, 2, 5, 14}[n - 1]);
    auto curved_omega = curved();
    curved_omega.omega = flat_input_with_omega(P("x - 2*y^2")).omega;
    for (auto in : {flat_input_with_omega(P("x*y + 1")), curved_omega}) {
        const auto c = catalan_R(in, 5, 4);
        CHECK(c.trees_per_order == std::vector<long>{1, 1, 2, 5});
        CHECK(c.R == solve_R(in, 5).R);
    }
}

TEST_CASE("Fedosov differential") {
    for (auto in : {curved(), flat_input_with_omega(P("x*y"))}) {
        const int D = 5;
        const auto R = solve_R(in, D).R;
        for (unsigned s = 0; s < 8; ++s) {
            const auto a = random_element(2, D, s + 7);
            CHECK(fedosov_D(fedosov_D(a.form_part(0), in, R), in, R).low(D - 2).is_zero());
            const auto id = fedosov_D_inv(fedosov_D(a, in, R), in, R) + fedosov_D(fedosov_D_inv(a, in, R), in, R) +
                            fedosov_taylor(in, R, sigma(a));
            CHECK((id - a).low(D - 1).is_zero());
        }
        const auto tf = fedosov_taylor(in, R, WeylElement::function(2, D, P("x^2*y + y")));
        CHECK(fedosov_D(tf, in, R).low(D - 1).is_zero());
        CHECK(sigma(tf) == WeylElement::function(2, D, P("x^2*y + y")));
    }
}

TEST_CASE("flat star product is the Moyal product") {
    const auto in = flat_input(2);
    const auto f = P("x^2"), g = P("y^2");
    const auto s = fedosov_star(in, f, g, 6);
    CHECK(function_part(s, 0) == P("x^2*y^2"));
    CHECK(function_part(s, 1) == P("2*i*x*y"));
    CHECK(function_part(s, 2) == P("-1/2"));
    for (auto [a, b] : {std::pair{"x^3*y + y", "x*y^2 - x^2"}, std::pair{"x^2*y^2", "x^3 + y^3"}}) {
        const auto st = fedosov_star(in, P(a), P(b), 6);
        for (int h = 0; h <= 3; ++h) CHECK(function_part(st, h) == moyal_coefficient(P(a), P(b), h));
    }
}

TEST_CASE("star product axioms") {
    const auto f = P("x^2*y + y^2"), g = P("x*y - x^3");
    for (auto in : {flat_input_with_omega(P("3")), flat_input_with_omega(P("x*y")), curved()}) {
        const int D = 6;
        const auto fg = fedosov_star(in, f, g, D), gf = fedosov_star(in, g, f, D);
        CHECK(function_part(fg, 0) == f * g);
        CHECK(function_part(fg, 1) - function_part(gf, 1) == bracket(in, f, g) * GQ::i());
        const auto one = fedosov_star(in, P("1"), f, D);
        CHECK(function_part(one, 0) == f);
        for (int h = 1; 2 * h <= D; ++h) CHECK(function_part(one, h).is_zero());
    }
}

TEST_CASE("associativity with a nonzero Omega") {
    for (auto c : {P("3"), P("x*y")}) {
        const auto in = flat_input_with_omega(c);
        const int D = 6;
        const auto R = solve_R(in, D).R;
        auto T = [&](const char* p) { return fedosov_taylor(in, R, WeylElement::function(2, D, P(p))); };
        const auto a = T("x^2*y"), b = T("y^2 + x"), e = T("x*y^2");
        const auto l = weyl_product(weyl_product(a, b, in.pi), e, in.pi);
        const auto r = weyl_product(a, weyl_product(b, e, in.pi), in.pi);
        CHECK(sigma(l - r).is_zero());
    }
}

}
