#include <map>
#include <random>

#include "doctest.h"
#include "kw/starprod.hpp"
#include "kw/verify.hpp"

using namespace kw;

namespace {

Poly var(int d, int i) { return Poly::variable(d, i); }
Poly P(const std::string& s, int d) { return parse_poly(s, d, d == 3 ? std::vector<std::string>{"x", "y", "z"} : std::vector<std::string>{"x", "y"}); }

Poly random_poly(std::mt19937& rng, int d, int deg) {
    std::uniform_int_distribution<int> c(-3, 3), e(0, deg);
    Poly p(d);
    for (int k = 0; k < 4; ++k) {
        Mono m(d, 0);
        int left = deg;
        for (int i = 0; i < d; ++i) {
            m[i] = std::min(left, e(rng));
            left -= m[i];
        }
        p.add_term(m, GQ(c(rng)));
    }
    return p;
}

// Pi^{ab} Pi^{cd} d_a d_c f d_b d_d g
Poly graph1_left_oracle(const PolyVectorField& pi, const Poly& f, const Poly& g) {
    const int d = pi.dim();
    Poly r(d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c)
                for (int e = 0; e < d; ++e)
                    r += pi.component({a, b}) * pi.component({c, e}) * f.derivative(a).derivative(c) *
                         g.derivative(b).derivative(e);
    return r;
}

// d_{i2} Pi^{i1 l1} d_{i1} Pi^{i2 l2} d_{l1} f d_{l2} g
Poly graph2_oracle(const PolyVectorField& pi, const Poly& f, const Poly& g) {
    const int d = pi.dim();
    Poly r(d);
    for (int i1 = 0; i1 < d; ++i1)
        for (int l1 = 0; l1 < d; ++l1)
            for (int i2 = 0; i2 < d; ++i2)
                for (int l2 = 0; l2 < d; ++l2)
                    r += pi.component({i1, l1}).derivative(i2) * pi.component({i2, l2}).derivative(i1) *
                         f.derivative(l1) * g.derivative(l2);
    return r;
}

Poly bracket(const PolyVectorField& pi, const Poly& f, const Poly& g) {
    Poly r(pi.dim());
    for (int a = 0; a < pi.dim(); ++a)
        for (int b = 0; b < pi.dim(); ++b) r += pi.component({a, b}) * f.derivative(a) * g.derivative(b);
    return r;
}

struct TwoValentSource : WeightSource {
    cplx w1, w2;
    std::optional<WeightValue> raw_weight(const AdmissibleGraph&, cplx lambda) override {
        return WeightValue{two_valent_integral(TwoValentKind::InOut, w1, w2, {lambda}), 1e-3, std::nullopt, "quadrature"};
    }
};

} // namespace

TEST_SUITE("starprod") {

TEST_CASE("poly-vector fields are skew") {
    auto pi = so3_bivector();
    CHECK(pi.component({0, 1}) == var(3, 2));
    CHECK(pi.component({1, 0}) == var(3, 2) * GQ(-1));
    CHECK(pi.component({1, 1}).is_zero());
    PolyVectorField t(3, 2);
    t.set({2, 0, 1}, var(3, 0));
    CHECK(t.component({0, 1, 2}) == var(3, 0));
    CHECK(t.component({1, 0, 2}) == var(3, 0) * GQ(-1));
}

TEST_CASE("graph operators against hand expansions") {
    std::mt19937 rng(1);
    for (auto pi : {moyal_bivector(), so3_bivector()})
        for (int k = 0; k < 5; ++k) {
            const int d = pi.dim();
            const auto f = random_poly(rng, d, 3), g = random_poly(rng, d, 3);
            CHECK(graph_operator(graph1_left(), {pi, pi}).apply({f, g}) == graph1_left_oracle(pi, f, g));
            CHECK(graph_operator(graph2_wheel(), {pi, pi}).apply({f, g}) == graph2_oracle(pi, f, g));
        }
    CHECK_THROWS_AS(graph_operator(graph1_left(), {moyal_bivector()}), std::domain_error);
    CHECK_THROWS_AS(graph_operator(fan_graph(3), {moyal_bivector()}), std::domain_error);
}

TEST_CASE("HKR graph on the top poly-vector field") {
    for (int m = 2; m <= 4; ++m) {
        PolyVectorField top(m, m - 1);
        std::vector<int> idx(m);
        for (int i = 0; i < m; ++i) idx[i] = i;
        top.set(idx, Poly::constant(m, GQ(1)));
        std::vector<Poly> coords;
        for (int i = 0; i < m; ++i) coords.push_back(var(m, i));
        CHECK(graph_operator(fan_graph(m), {top}).apply(coords) == Poly::constant(m, GQ(1)));
    }
}

TEST_CASE("two derivatives on a linear vector field vanish") {
    const AdmissibleGraph g(3, 1, {{0, 3, 1}, {1, 0, 1}, {2, 0, 1}});
    const auto x = var(2, 0), y = var(2, 1);
    const auto lin = vector_field(2, {x + y, x * GQ(3)});
    const auto quad = vector_field(2, {x * y, y});
    const auto e1 = vector_field(2, {y * y, x}), e2 = vector_field(2, {x * x * y, y * y});
    CHECK(graph_operator(g, {lin, e1, e2}).is_zero());
    CHECK_FALSE(graph_operator(g, {quad, e1, e2}).is_zero());
}

TEST_CASE("U_2 on two vector fields vanishes through the loop weight") {
    const AdmissibleGraph loop(2, 0, {{0, 1, 1}, {1, 0, 1}});
    const auto x = var(2, 0), y = var(2, 1);
    const auto a = vector_field(2, {x * y, y * y}), b = vector_field(2, {x * x, x * y});
    const auto op = graph_operator(loop, {a, b});
    REQUIRE_FALSE(op.is_zero());
    TwoValentSource src;
    src.w1 = {0.2, 0.3};
    src.w2 = {-0.4, 0.1};
    const auto w = src.raw_weight(loop, {0.3, 0.2});
    REQUIRE(w);
    const auto u2 = op.apply({});
    for (auto& [e, c] : u2.terms()) CHECK(std::abs(w->value * c.to_complex()) < 1e-3 * std::abs(c.to_complex()));
}

TEST_CASE("Moyal star product with exact weights") {
    ExactTable exact;
    const auto s = star_order2(moyal_bivector(), {0.5}, exact);
    REQUIRE(s.exact());
    const auto x = var(2, 0), y = var(2, 1), one = Poly::constant(2, GQ(1));
    CHECK(star_term(s, 1, x, y) - star_term(s, 1, y, x) == Poly::constant(2, GQ::i()));
    CHECK(star_term(s, 2, x * x, y * y) == Poly::constant(2, GQ(mpq_class(-1, 2))));
    std::mt19937 rng(4);
    for (int k = 0; k < 10; ++k) {
        const auto f = random_poly(rng, 2, 4), g = random_poly(rng, 2, 4);
        CHECK(star_term(s, 0, f, g) == f * g);
        for (int h = 0; h <= 2; ++h) CHECK(star_term(s, h, f, g) == moyal_coefficient(f, g, h));
        CHECK(star_term(s, 1, f, g) - star_term(s, 1, g, f) == bracket(moyal_bivector(), f, g) * GQ::i());
        for (int h = 1; h <= 2; ++h) {
            CHECK(star_term(s, h, one, f).is_zero());
            CHECK(star_term(s, h, f, one).is_zero());
        }
        const auto r = associativity_residual(s, f, g, random_poly(rng, 2, 3), 2);
        for (auto& e : r) CHECK(e.exact_zero);
    }
}

TEST_CASE("order one for a linear Poisson structure") {
    ExactTable exact;
    const auto pi = so3_bivector();
    const auto s = star_order2(pi, {0.5}, exact, 1);
    std::mt19937 rng(5);
    for (int k = 0; k < 5; ++k) {
        const auto f = random_poly(rng, 3, 3), g = random_poly(rng, 3, 3), h = random_poly(rng, 3, 2);
        CHECK(star_term(s, 1, f, g) - star_term(s, 1, g, f) == bracket(pi, f, g) * GQ::i());
        const auto r = associativity_residual(s, f, g, h, 1);
        CHECK(r[0].exact_zero);
        CHECK(r[1].exact_zero);
    }
    try {
        (void)star_order2(pi, {0.5}, exact, 2);
        FAIL("expected missing weights");
    } catch (const MissingWeights& e) {
        CHECK(e.graphs.size() == 5);
    }
}

TEST_CASE("order two for a linear Poisson structure with sampled weights") {
    const auto pi = so3_bivector();
    auto chain = std::make_shared<ChainSource>();
    chain->add(std::make_shared<ExactTable>());
    McOptions o;
    o.sampler = Sampler::Sobol;
    auto mc = std::make_shared<McSource>(200000, 1, o);
    chain->add(mc);
    const auto s = star_order2(pi, {0.5}, *chain);
    CHECK_FALSE(s.exact());

    // independent term-by-term assembly: every labeled (2,2) graph sampled
    // on its own, compared within the combined statistical error
    const auto f = P("x*y", 3), g = P("z^2 + x", 3);
    CPoly oracle(3);
    std::map<Mono, double> var;
    const double pref = -1.0 / (2.0 * 2.0 * 2.0); // i^2 / 2! / (2! 2!)
    for (auto& gr : enumerate_graphs(2, 2, 2)) {
        const auto w = weight_mc(gr, {0.5}, 200000, 99, o);
        const auto t = to_cpoly(graph_operator(gr, {pi, pi}).apply({f, g}));
        for (auto& [e, c] : t.terms()) {
            oracle.add_term(e, pref * w.value * c);
            var[e] += std::norm(pref * c) * w.stderr_ * w.stderr_;
        }
    }
    for (auto& t : s.terms[2]) {
        const auto applied = to_cpoly(t.op.apply({f, g}));
        for (auto& [e, c] : applied.terms()) var[e] += std::norm(pref * c) * t.weight.stderr_ * t.weight.stderr_;
    }
    const auto b2 = star_term_numeric(s, 2, to_cpoly(f), to_cpoly(g));
    CHECK_FALSE(b2.is_zero());
    CPoly diff = b2 - oracle;
    for (auto& [e, c] : diff.terms()) CHECK(std::abs(c) <= 4 * std::sqrt(var[e]) + 1e-12);

    const auto r = associativity_residual(s, P("x", 3), P("y*z", 3), P("x*y", 3), 2);
    CHECK(r[1].max_abs < 1e-12);
    CHECK(r[2].max_ratio <= 3.0);
}

TEST_CASE("operators serialize to term lists") {
    const auto j = to_json(graph_operator(graph1_left(), {moyal_bivector(), moyal_bivector()}));
    REQUIRE(j.is_object());
    CHECK(j["arity"] == 2);
    CHECK(j["terms"].size() >= 1);
}

}
