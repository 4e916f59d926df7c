#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "kw/graphs.hpp"

using namespace kw;

namespace {

// Admissible graphs with every aerial vertex of out-degree 2, counted by
// running over all target pairs directly.
long brute_force_count(int n, int m) {
    const int V = n + m;
    long pairs = 0;
    for (int v = 0; v < n; ++v) {
        long c = 0;
        for (int a = 0; a < V; ++a)
            for (int b = 0; b < V; ++b)
                if (a != v && b != v && a != b) ++c;
        pairs = v == 0 ? c : pairs * c;
    }
    return n == 0 ? 0 : pairs;
}

void check_invariants(const AdmissibleGraph& g) {
    CHECK(2 * g.n() + 2 - g.m() >= 0);
    for (int v = 0; v < g.n(); ++v) {
        std::vector<int> labels;
        for (auto& e : g.edges())
            if (e.src == v) labels.push_back(e.label);
        std::sort(labels.begin(), labels.end());
        for (std::size_t k = 0; k < labels.size(); ++k) CHECK(labels[k] == static_cast<int>(k) + 1);
    }
    for (auto& e : g.edges()) {
        CHECK(g.is_aerial(e.src));
        CHECK(e.src != e.dst);
        CHECK((g.is_aerial(e.dst) || g.is_ground(e.dst)));
    }
}

} // namespace

TEST_SUITE("graphs") {

TEST_CASE("enumeration counts") {
    CHECK(enumerate_graphs(1, 2, 2).size() == 2);
    CHECK(enumerate_graphs(0, 2, 2).empty());
    for (int n = 1; n <= 2; ++n)
        for (int m = 0; m <= 3; ++m) {
            CAPTURE(n);
            CAPTURE(m);
            CHECK(static_cast<long>(enumerate_graphs(n, m, 2).size()) == brute_force_count(n, m));
        }
    CHECK_THROWS_AS(enumerate_graphs(1, 5, 2), std::domain_error);
}

TEST_CASE("parallel edges are opt-in") {
    const auto with = enumerate_graphs(2, 1, 2, true), without = enumerate_graphs(2, 1, 2, false);
    CHECK(with.size() > without.size());
    for (auto& g : without) CHECK_FALSE(g.has_parallel_edges());
    CHECK(std::any_of(with.begin(), with.end(), [](auto& g) { return g.has_parallel_edges(); }));
}

TEST_CASE("enumerated graphs are admissible") {
    for (int n = 0; n <= 3; ++n)
        for (int m = 0; m <= 3; ++m)
            if (2 * n + 2 - m >= 0)
                for (auto& g : enumerate_graphs(n, m, 2)) check_invariants(g);
}

TEST_CASE("the three pictured (2,2) shapes occur") {
    std::set<GraphKey> keys;
    for (auto& g : enumerate_graphs(2, 2, 2)) keys.insert(canonical_key(g));
    for (auto& g : {graph1_left(), graph1_right(), graph2_wheel()}) CHECK(keys.count(canonical_key(g)) == 1);
    CHECK(canonical_key(graph1_left()) != canonical_key(graph1_right()));
    CHECK(canonical_key(graph1_left()) != canonical_key(graph2_wheel()));
}

TEST_CASE("canonical key is invariant under aerial relabeling") {
    std::mt19937 rng(7);
    std::vector<AdmissibleGraph> pool;
    for (auto& g : enumerate_graphs(3, 2, 2)) pool.push_back(g);
    for (auto& g : enumerate_graphs(3, 0, 2)) pool.push_back(g);
    for (int trial = 0; trial < 100; ++trial) {
        const auto& g = pool[rng() % pool.size()];
        std::vector<int> perm(g.n());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        const auto h = permute_aerial(g, perm);
        check_invariants(h);
        CHECK(canonical_key(h) == canonical_key(g));
    }
    CHECK(canonical_key(permute_aerial(wheel_graph(2), {0, 2, 1})) == canonical_key(wheel_graph(2)));
    CHECK(canonical_key(graph2_wheel()) == canonical_key(graph2_wheel()));
}

TEST_CASE("canonical keys separate non-isomorphic graphs") {
    // Brute-force isomorphism over aerial permutations on the (2,2) list.
    auto gs = enumerate_graphs(2, 2, 2);
    for (std::size_t a = 0; a < gs.size(); ++a)
        for (std::size_t b = a + 1; b < gs.size(); ++b) {
            const bool iso = gs[a] == gs[b] || permute_aerial(gs[a], {1, 0}) == gs[b];
            CHECK((canonical_key(gs[a]) == canonical_key(gs[b])) == iso);
        }
}

TEST_CASE("wheel and rim graphs") {
    for (int n = 2; n <= 5; ++n) {
        const auto w = wheel_graph(n);
        CHECK(w.n() == n + 1);
        CHECK(w.m() == 0);
        CHECK(w.edges().size() == static_cast<std::size_t>(2 * n));
        CHECK(w.star_size(0) == n);
    }
    const auto r = rim_graph(2);
    CHECK(r.n() == 2);
    CHECK(r.edges().size() == 2);
    CHECK_THROWS_AS(wheel_graph(1), std::domain_error);
}

TEST_CASE("serialization round-trips") {
    for (auto& g : enumerate_graphs(2, 2, 2)) {
        CHECK(AdmissibleGraph::from_text(g.to_text()) == g);
        CHECK(AdmissibleGraph::from_json(g.to_json()) == g);
        CHECK(AdmissibleGraph::from_json(nlohmann::json::parse(g.to_json().dump())) == g);
    }
    CHECK(graph2_wheel().to_text() == "K(2,2)[0>1#1, 0>2#2, 1>0#1, 1>3#2]");
    CHECK_THROWS_AS(AdmissibleGraph::from_text("K(1,2)[0>0#1]"), std::domain_error);
    CHECK_THROWS_AS(AdmissibleGraph::from_text("K(1,2)[1>0#1]"), std::domain_error);
    CHECK_THROWS_AS(AdmissibleGraph::from_text("K(1,2)[0>1#2]"), std::domain_error);
    CHECK_THROWS_AS(AdmissibleGraph::from_text("nonsense"), std::invalid_argument);
}

TEST_CASE("weight classes") {
    // Swapping the two labels of a vertex flips the sign of the weight form.
    const AdmissibleGraph swapped(1, 2, {{0, 1, 2}, {0, 2, 1}});
    const auto c = weight_class(swapped), f = weight_class(fan_graph(2));
    CHECK(c.rep == f.rep);
    CHECK(c.sign == -f.sign);
    // Relabeling the two aerial vertices of a (2,2) graph.
    const auto g = graph2_wheel(), h = permute_aerial(g, {1, 0});
    CHECK(weight_class(g).rep == weight_class(h).rep);
}

TEST_CASE("Shoikhet graphs") {
    ShoikhetGraph s{AdmissibleGraph(1, 1, {{0, 1, 1}}), {0}};
    CHECK_NOTHROW(s.validate());
    CHECK(s.center_star() == 1);
    ShoikhetGraph bad{AdmissibleGraph(1, 1, {{0, 1, 1}}), {5}};
    CHECK_THROWS(bad.validate());
}

}
