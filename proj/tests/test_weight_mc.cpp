#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kw/weight_mc.hpp"

using namespace kw;

namespace {

McOptions sobol() {
    McOptions o;
    o.sampler = Sampler::Sobol;
    return o;
}

std::string temp_path(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("kw_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove(p);
    return p.string();
}

} // namespace

TEST_SUITE("weight_mc") {

TEST_CASE("fan graphs integrate to 1/m!") {
    const auto e1 = weight_mc(fan_graph(1), {0.5}, 20000, 1, sobol());
    CHECK(std::abs(e1.value - 1.0) < 1e-3);
    const auto e2 = weight_mc(fan_graph(2), {0.5}, 200000, 1, sobol());
    CHECK(std::abs(e2.value - 0.5) < 1e-3);
    CHECK(std::abs(e2.value - 0.5) <= 3 * e2.stderr_ + 1e-9);
    const auto e3 = weight_mc(fan_graph(3), {{0.3, 0.2}}, 200000, 1, sobol());
    CHECK(std::abs(e3.value - 1.0 / 6) < 2e-3);
}

TEST_CASE("degree rule returns exact zeros") {
    // dimension mismatch
    const AdmissibleGraph few(2, 2, {{0, 2, 1}, {1, 3, 1}});
    // a 1-valent aerial vertex next to two others
    const AdmissibleGraph leaf(3, 1, {{0, 1, 1}, {0, 3, 2}, {1, 0, 1}, {1, 3, 2}, {2, 3, 1}});
    CHECK(config_dimension(leaf) == 5);
    for (auto& g : {few, leaf}) {
        CHECK(vanishes_by_degree(g));
        const auto e = weight_mc(g, {0.3}, 1000, 1);
        CHECK(e.value == cplx(0));
        CHECK(e.stderr_ == 0.0);
        CHECK(e.n_samples == 0);
    }
    CHECK_FALSE(vanishes_by_degree(fan_graph(1)));
    CHECK_FALSE(vanishes_by_degree(graph2_wheel()));
}

TEST_CASE("estimates are reproducible and carry metadata") {
    const auto g = graph1_right();
    const auto a = weight_mc(g, {0.5}, 5000, 42), b = weight_mc(g, {0.5}, 5000, 42), c = weight_mc(g, {0.5}, 5000, 43);
    CHECK(a.value == b.value);
    CHECK(a.stderr_ == b.stderr_);
    CHECK(a.value != c.value);
    CHECK(a.stderr_ >= 0);
    CHECK(a.n_samples == 5000);
    CHECK(a.seed == 42);
    CHECK(a.key == canonical_key(g));
}

TEST_CASE("thread count does not change the estimate") {
    auto o = sobol();
    const auto a = weight_mc(graph2_wheel(), {0.5}, 20000, 3, o);
    o.threads = 3;
    const auto b = weight_mc(graph2_wheel(), {0.5}, 20000, 3, o);
    CHECK(std::abs(a.value - b.value) < 1e-12);
}

TEST_CASE("formality convention divides by star factorials") {
    auto o = sobol();
    const auto raw = weight_mc(fan_graph(3), {0.5}, 5000, 1, o);
    o.convention = Convention::Formality;
    const auto fo = weight_mc(fan_graph(3), {0.5}, 5000, 1, o);
    CHECK(formality_factor(fan_graph(3)) == doctest::Approx(1.0 / 6));
    CHECK(std::abs(fo.value - raw.value / 6.0) < 1e-14);
    CHECK(convention_from_string(to_string(Convention::Formality)) == Convention::Formality);
    CHECK_THROWS(convention_from_string("other"));
}

TEST_CASE("top form is invariant under the group action") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> X(-2, 2), Y(0.2, 2), P(0.2, 4);
    for (auto& g : {graph2_wheel(), graph1_left(), graph1_right()})
        for (int k = 0; k < 10; ++k) {
            std::vector<cplx> z{cplx(0, 1), cplx(X(rng), Y(rng))};
            std::vector<double> r{X(rng), X(rng)};
            std::sort(r.begin(), r.end());
            const double p = P(rng), q = X(rng);
            std::vector<cplx> z2;
            std::vector<double> r2;
            for (auto w : z) z2.push_back(p * w + q);
            for (auto x : r) r2.push_back(p * x + q);
            const cplx lam(0.3, 0.2);
            const cplx a = top_form(g, {lam}, z, r), b = top_form(g, {lam}, z2, r2);
            const double scale = std::pow(p, config_dimension(g));
            CHECK(std::abs(a - b * scale) <= 1e-10 * std::max(1.0, std::abs(a)));
        }
}

TEST_CASE("Kontsevich weights are real") {
    for (auto& g : {graph1_right(), graph2_wheel()}) {
        const auto e = weight_mc(g, {0.5}, 100000, 2, sobol());
        CHECK(std::abs(e.value.imag()) <= 3 * e.stderr_im + 1e-12);
    }
}

TEST_CASE("graphs with an even number of aerial vertices and at most one ground vertex") {
    const std::vector<AdmissibleGraph> family{
        AdmissibleGraph(2, 0, {{0, 1, 1}, {1, 0, 1}}),
        AdmissibleGraph(2, 1, {{0, 1, 1}, {0, 2, 2}, {1, 2, 1}}),
        AdmissibleGraph(2, 1, {{0, 1, 1}, {0, 2, 2}, {1, 0, 1}}),
    };
    for (auto& g : family) {
        CAPTURE(g.to_text());
        const auto e = weight_mc(g, {0.5}, 100000, 3);
        CHECK(std::abs(e.value) <= 3 * e.stderr_ + 1e-12);
    }
}

TEST_CASE("lambda polynomial fit") {
    const std::vector<cplx> nodes{0.0, 1.0, 0.5};
    const auto f = weight_poly_fit(fan_graph(2), 2, nodes, 100000, 1, sobol());
    CHECK(std::abs(f.coeffs[0] - 0.5) < 1e-3);
    CHECK(std::abs(f.coeffs[1]) < 3e-3);
    CHECK(std::abs(f.coeffs[2]) < 3e-3);
    CHECK_THROWS_AS(weight_poly_fit(fan_graph(2), 2, {0.0, 1.0}, 1000, 1), std::invalid_argument);
    CHECK(eval_poly({1.0, 2.0, 3.0}, 2.0) == cplx(17));
}

TEST_CASE("conjugation relation between fitted coefficients") {
    // conj(a_n) = (-1)^n sum_{l >= n} C(l, n) a_l
    const auto g = graph1_right();
    const int D = 4;
    const std::vector<cplx> nodes{0.0, 1.0, 0.5, {0.3, 0.2}, {0.7, -0.4}};
    const auto f = weight_poly_fit(g, D, nodes, 50000, 4);
    for (int n = 0; n <= D; ++n) {
        cplx rhs = 0;
        double var = f.stderr_[n] * f.stderr_[n];
        for (int l = n; l <= D; ++l) {
            const double c = std::tgamma(l + 1) / (std::tgamma(n + 1) * std::tgamma(l - n + 1));
            rhs += c * f.coeffs[l];
            var += c * c * f.stderr_[l] * f.stderr_[l];
        }
        if (n % 2) rhs = -rhs;
        CHECK(std::abs(std::conj(f.coeffs[n]) - rhs) <= 3 * std::sqrt(var) + 1e-12);
    }
}

TEST_CASE("two-valent disk integrals") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> R(0.05, 0.85), A(-3.1, 3.1);
    for (int k = 0; k < 3; ++k) {
        const cplx w1 = std::polar(R(rng), A(rng)), w2 = std::polar(R(rng), A(rng));
        CHECK(std::abs(two_valent_integral(TwoValentKind::InOut, w1, w2, {{0.3, 0.2}})) < 1e-3);
        CHECK(std::abs(two_valent_integral(TwoValentKind::InOut, w1, w2, {{0.3, 0.2}}, PropagatorFamily::Shoikhet)) <
              1e-3);
        CHECK(std::abs(two_valent_integral(TwoValentKind::InIn, w1, w2, {1.0})) < 1e-10);
        const cplx oo = two_valent_integral(TwoValentKind::OutOut, w1, w2, {0.5});
        CHECK(std::abs(oo - out_out_closed_form(w1, w2)) < 1e-3);
    }
    CHECK_THROWS_AS(two_valent_integral(TwoValentKind::InOut, 0.2, 0.2, {0.5}), SingularityError);
    CHECK(two_valent_kind_from_string("out-out") == TwoValentKind::OutOut);
    CHECK_THROWS_AS(two_valent_kind_from_string("sideways"), std::invalid_argument);
}

TEST_CASE("weight cache") {
    const auto path = temp_path("cache");
    WeightCache c(path);
    const auto e = weight_mc(graph1_right(), {0.5}, 2000, 7);
    c.put(e);
    const auto got = c.get({e.key, e.lambda, 7, 2000, Convention::Raw});
    REQUIRE(got);
    CHECK(got->value == e.value);
    CHECK(got->stderr_ == e.stderr_);
    CHECK_FALSE(c.get({e.key, {0.5, 1e-9}, 7, 2000, Convention::Raw}));
    CHECK_FALSE(c.get({e.key, e.lambda, 8, 2000, Convention::Raw}));
    CHECK_FALSE(c.get({e.key, e.lambda, 7, 2000, Convention::Formality}));

    const auto e2 = weight_mc(graph1_right(), {0.5}, 2000, 8);
    c.put(e2);
    const auto pooled = c.get_pooled(e.key, e.lambda, Convention::Raw);
    REQUIRE(pooled);
    CHECK(pooled->n_samples == 4000);

    { std::ofstream(path, std::ios::app) << "{not json\n"; }
    WeightCache reread(path);
    CHECK(reread.get({e.key, e.lambda, 8, 2000, Convention::Raw}));
    CHECK(reread.skipped_records() == 1);
    std::filesystem::remove(path);
}

TEST_CASE("pooling equal estimates halves the variance") {
    WeightEstimate a, b;
    a.value = 1.0;
    b.value = 2.0;
    a.stderr_ = a.stderr_re = b.stderr_ = b.stderr_re = 0.2;
    a.n_samples = b.n_samples = 100;
    const auto p = pool(a, b);
    CHECK(p.value.real() == doctest::Approx(1.5));
    CHECK(p.stderr_ * p.stderr_ == doctest::Approx(0.02));
    CHECK(p.n_samples == 200);
}

}
