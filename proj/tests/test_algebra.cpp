#include "doctest.h"
#include "kw/algebra.hpp"

using namespace kw;

TEST_SUITE("algebra") {

TEST_CASE("Gaussian rationals") {
    const GQ a(mpq_class(1, 2), 3), b(2, -1);
    CHECK(a * b == GQ(4, mpq_class(11, 2)));
    CHECK((a / b) * b == a);
    CHECK(GQ::i() * GQ::i() == GQ(-1));
    CHECK(a.conj() == GQ(mpq_class(1, 2), -3));
}

TEST_CASE("polynomial parser") {
    const auto x = Poly::variable(3, 0), y = Poly::variable(3, 1), z = Poly::variable(3, 2);
    const auto one = Poly::constant(3, GQ(1));
    const auto p = parse_poly("3/2*x^2*y - i*z + (x+1)^2", 3, {"x", "y", "z"});
    const auto q = x * x * y * GQ(mpq_class(3, 2)) - z * GQ::i() + (x + one) * (x + one);
    CHECK(p == q);
    CHECK(parse_poly("x1*x3 - 2", 3) == x * z - one * GQ(2));
    CHECK(parse_poly("-(y)", 3, {"x", "y", "z"}) == y * GQ(-1));
    CHECK(parse_poly("0", 3).is_zero());
    CHECK_THROWS_AS(parse_poly("x +", 3), std::invalid_argument);
    CHECK_THROWS_AS(parse_poly("w", 3, {"x", "y", "z"}), std::invalid_argument);
    CHECK_THROWS_AS(parse_poly("x^", 3, {"x", "y", "z"}), std::invalid_argument);
    CHECK_THROWS_AS(parse_poly("1/0", 3), std::invalid_argument);
}

TEST_CASE("derivatives") {
    const auto p = parse_poly("x^3*y^2 + 5*y", 2, {"x", "y"});
    CHECK(p.derivative(0) == parse_poly("3*x^2*y^2", 2, {"x", "y"}));
    CHECK(p.derivative(Mono{1, 1}) == parse_poly("6*x^2*y", 2, {"x", "y"}));
    CHECK(p.degree() == 5);
}

}
