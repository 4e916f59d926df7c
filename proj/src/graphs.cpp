#include "kw/graphs.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>

#include <functional>

namespace kw {

AdmissibleGraph::AdmissibleGraph(int n, int m, std::vector<Edge> edges)
    : n_(n), m_(m), edges_(std::move(edges)) {
    std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.src, a.label) < std::tie(b.src, b.label);
    });
    validate();
}

void AdmissibleGraph::validate() const {
    if (n_ < 0 || m_ < 0)
        throw std::domain_error("graph: negative vertex count");
    if (2 * n_ + 2 - m_ < 0)
        throw std::domain_error("graph: 2n+2-m < 0");
    std::map<int, std::vector<int>> labels;
    for (const auto& e : edges_) {
        if (!is_aerial(e.src))
            throw std::domain_error("graph: edge source must be aerial");
        if (e.dst < 0 || e.dst >= n_ + m_)
            throw std::domain_error("graph: edge target out of range");
        if (e.src == e.dst)
            throw std::domain_error("graph: short loop");
        labels[e.src].push_back(e.label);
    }
    for (auto& [v, ls] : labels) {
        std::sort(ls.begin(), ls.end());
        for (std::size_t k = 0; k < ls.size(); ++k)
            if (ls[k] != static_cast<int>(k) + 1)
                throw std::domain_error("graph: star labels of vertex " + std::to_string(v) +
                                        " are not 1..#Star");
    }
}

int AdmissibleGraph::star_size(int v) const {
    return static_cast<int>(std::count_if(edges_.begin(), edges_.end(),
                                          [v](const Edge& e) { return e.src == v; }));
}

int AdmissibleGraph::in_degree(int v) const {
    return static_cast<int>(std::count_if(edges_.begin(), edges_.end(),
                                          [v](const Edge& e) { return e.dst == v; }));
}

std::vector<Edge> AdmissibleGraph::wedge_order() const { return edges_; }

int AdmissibleGraph::target(int v, int label) const {
    for (const auto& e : edges_)
        if (e.src == v && e.label == label)
            return e.dst;
    throw std::out_of_range("graph: no such edge");
}

bool AdmissibleGraph::has_parallel_edges() const {
    std::set<std::pair<int, int>> seen;
    for (const auto& e : edges_)
        if (!seen.insert({e.src, e.dst}).second)
            return true;
    return false;
}

std::string AdmissibleGraph::to_text() const {
    std::ostringstream os;
    os << "K(" << n_ << ',' << m_ << ")[";
    for (std::size_t k = 0; k < edges_.size(); ++k) {
        if (k)
            os << ", ";
        os << edges_[k].src << '>' << edges_[k].dst << '#' << edges_[k].label;
    }
    os << ']';
    return os.str();
}

AdmissibleGraph AdmissibleGraph::from_text(const std::string& s) {
    static const std::regex head(R"(^\s*K\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*\[(.*)\]\s*$)");
    static const std::regex edge(R"(^\s*(\d+)\s*>\s*(\d+)\s*#\s*(\d+)\s*$)");
    std::smatch mh;
    if (!std::regex_match(s, mh, head))
        throw std::invalid_argument("graph text: expected K(n,m)[s>t#l, ...]");
    int n = std::stoi(mh[1]), m = std::stoi(mh[2]);
    std::vector<Edge> es;
    std::string body = mh[3];
    std::stringstream ss(body);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.find_first_not_of(" \t") == std::string::npos)
            continue;
        std::smatch me;
        if (!std::regex_match(tok, me, edge))
            throw std::invalid_argument("graph text: bad edge '" + tok + "'");
        es.push_back({std::stoi(me[1]), std::stoi(me[2]), std::stoi(me[3])});
    }
    return AdmissibleGraph(n, m, std::move(es));
}

nlohmann::json AdmissibleGraph::to_json() const {
    nlohmann::json j{{"n", n_}, {"m", m_}, {"edges", nlohmann::json::array()}};
    for (const auto& e : edges_)
        j["edges"].push_back({{"src", e.src}, {"dst", e.dst}, {"label", e.label}});
    return j;
}

AdmissibleGraph AdmissibleGraph::from_json(const nlohmann::json& j) {
    std::vector<Edge> es;
    for (const auto& e : j.at("edges"))
        es.push_back({e.at("src").get<int>(), e.at("dst").get<int>(), e.at("label").get<int>()});
    return AdmissibleGraph(j.at("n").get<int>(), j.at("m").get<int>(), std::move(es));
}

bool operator==(const AdmissibleGraph& a, const AdmissibleGraph& b) {
    return a.n_ == b.n_ && a.m_ == b.m_ && a.edges_ == b.edges_;
}

void ShoikhetGraph::validate() const {
    for (int t : center_targets)
        if (t < 0 || t >= base.n() + base.m())
            throw std::domain_error("shoikhet graph: bad center target");
    for (const auto& e : base.edges())
        if (e.dst < 0)
            throw std::domain_error("shoikhet graph: the centre is never a target");
}

std::vector<AdmissibleGraph> enumerate_graphs(int n, int m, int out_degree, bool allow_parallel) {
    if (n < 0 || m < 0 || 2 * n + 2 - m < 0)
        throw std::domain_error("enumerate_graphs: invalid (n, m)");
    if (out_degree < 0)
        throw std::domain_error("enumerate_graphs: negative out-degree");
    std::vector<AdmissibleGraph> out;
    if (n == 0)
        return out;
    const int nv = n + m;
    // Per aerial vertex: ordered target tuples (label k -> tuple[k-1]).
    std::vector<std::vector<std::vector<int>>> choices(n);
    for (int v = 0; v < n; ++v) {
        std::vector<int> cur(out_degree, 0);
        std::function<void(int)> rec = [&](int k) {
            if (k == out_degree) {
                choices[v].push_back(cur);
                return;
            }
            for (int t = 0; t < nv; ++t) {
                if (t == v)
                    continue;
                if (!allow_parallel && std::find(cur.begin(), cur.begin() + k, t) != cur.begin() + k)
                    continue;
                cur[k] = t;
                rec(k + 1);
            }
        };
        rec(0);
        if (choices[v].empty())
            return out;
    }
    std::vector<std::size_t> idx(n, 0);
    while (true) {
        std::vector<Edge> es;
        for (int v = 0; v < n; ++v)
            for (int k = 0; k < out_degree; ++k)
                es.push_back({v, choices[v][idx[v]][k], k + 1});
        out.emplace_back(n, m, std::move(es));
        int v = n - 1;
        while (v >= 0 && ++idx[v] == choices[v].size())
            idx[v--] = 0;
        if (v < 0)
            break;
    }
    return out;
}

AdmissibleGraph permute_aerial(const AdmissibleGraph& g, const std::vector<int>& perm) {
    auto map = [&](int v) { return g.is_aerial(v) ? perm[v] : v; };
    std::vector<Edge> es;
    for (const auto& e : g.edges())
        es.push_back({map(e.src), map(e.dst), e.label});
    return AdmissibleGraph(g.n(), g.m(), std::move(es));
}

namespace {

// Colour refinement on aerial vertices; ground vertices keep their
// position as a fixed colour.
std::vector<long> refine(const AdmissibleGraph& g) {
    const int n = g.n(), nv = n + g.m();
    std::vector<long> col(nv);
    for (int v = 0; v < nv; ++v)
        col[v] = g.is_aerial(v) ? 0 : 1000 + (v - n);
    for (int v = 0; v < n; ++v)
        col[v] = g.star_size(v) * 64 + g.in_degree(v);
    for (int round = 0; round < n; ++round) {
        std::map<std::vector<long>, long> ids;
        std::vector<std::vector<long>> sig(n);
        for (int v = 0; v < n; ++v) {
            sig[v].push_back(col[v]);
            // outgoing by label, then sorted incoming (colour, label)
            for (const auto& e : g.edges())
                if (e.src == v)
                    sig[v].push_back(col[e.dst]);
            std::vector<long> in;
            for (const auto& e : g.edges())
                if (e.dst == v)
                    in.push_back(col[e.src] * 16 + e.label);
            std::sort(in.begin(), in.end());
            sig[v].push_back(-1);
            sig[v].insert(sig[v].end(), in.begin(), in.end());
        }
        for (int v = 0; v < n; ++v)
            ids.emplace(sig[v], 0);
        long next = 0;
        for (auto& [s, id] : ids)
            id = next++;
        std::vector<long> nc = col;
        for (int v = 0; v < n; ++v)
            nc[v] = ids[sig[v]];
        if (nc == col)
            break;
        col = nc;
    }
    return col;
}

} // namespace

GraphKey canonical_key(const AdmissibleGraph& g) {
    const int n = g.n();
    auto col = refine(g);
    // Vertices ordered by colour; exhaustive search only inside colour classes.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return col[a] < col[b]; });
    std::vector<std::pair<int, int>> classes;
    for (int i = 0; i < n;) {
        int j = i;
        while (j < n && col[order[j]] == col[order[i]])
            ++j;
        classes.push_back({i, j});
        i = j;
    }
    std::string best;
    bool have = false;
    std::function<void(std::size_t)> rec = [&](std::size_t c) {
        if (c == classes.size()) {
            std::vector<int> perm(n);
            for (int pos = 0; pos < n; ++pos)
                perm[order[pos]] = pos;
            auto s = permute_aerial(g, perm).to_text();
            if (!have || s < best) {
                best = s;
                have = true;
            }
            return;
        }
        auto [lo, hi] = classes[c];
        std::sort(order.begin() + lo, order.begin() + hi);
        do {
            rec(c + 1);
        } while (std::next_permutation(order.begin() + lo, order.begin() + hi));
    };
    rec(0);
    return have ? best : g.to_text();
}

SignedClass weight_class(const AdmissibleGraph& g) {
    const int n = g.n();
    if (n > 6)
        throw std::domain_error("weight_class: too many aerial vertices");
    std::vector<int> k(n);
    for (int v = 0; v < n; ++v)
        k[v] = g.star_size(v);

    SignedClass best{g, 1};
    std::string best_text = g.to_text();

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        // reordering the blocks of edge forms
        int sigma_sign = 1;
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v)
                if (perm[u] > perm[v] && (k[u] * k[v]) % 2)
                    sigma_sign = -sigma_sign;
        auto h = permute_aerial(g, perm);
        // every combination of per-vertex label permutations
        std::vector<std::vector<int>> lp(n);
        for (int v = 0; v < n; ++v) {
            lp[v].resize(h.star_size(v));
            std::iota(lp[v].begin(), lp[v].end(), 1);
        }
        std::function<void(int, int)> rec = [&](int v, int sgn) {
            if (v == n) {
                std::vector<Edge> es;
                for (const auto& e : h.edges())
                    es.push_back({e.src, e.dst, lp[e.src][e.label - 1]});
                AdmissibleGraph c(n, g.m(), std::move(es));
                auto t = c.to_text();
                if (t < best_text) {
                    best_text = t;
                    best = {c, sgn};
                }
                return;
            }
            auto& p = lp[v];
            std::sort(p.begin(), p.end());
            do {
                int inv = 0;
                for (std::size_t a = 0; a < p.size(); ++a)
                    for (std::size_t b = a + 1; b < p.size(); ++b)
                        inv += p[a] > p[b];
                rec(v + 1, inv % 2 ? -sgn : sgn);
            } while (std::next_permutation(p.begin(), p.end()));
        };
        rec(0, sigma_sign);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

AdmissibleGraph wheel_graph(int n) {
    if (n < 2)
        throw std::domain_error("wheel_graph: n >= 2 required");
    std::vector<Edge> es;
    for (int k = 1; k <= n; ++k)
        es.push_back({0, k, k});
    for (int k = 1; k <= n; ++k)
        es.push_back({k, k % n + 1, 1});
    return AdmissibleGraph(n + 1, 0, std::move(es));
}

AdmissibleGraph rim_graph(int n) {
    if (n < 2)
        throw std::domain_error("rim_graph: n >= 2 required");
    std::vector<Edge> es;
    for (int k = 0; k < n; ++k)
        es.push_back({k, (k + 1) % n, 1});
    return AdmissibleGraph(n, 0, std::move(es));
}

AdmissibleGraph graph1_left() {
    return AdmissibleGraph(2, 2, {{0, 2, 1}, {0, 3, 2}, {1, 2, 1}, {1, 3, 2}});
}

AdmissibleGraph graph1_right() {
    return AdmissibleGraph(2, 2, {{0, 2, 1}, {0, 3, 2}, {1, 0, 1}, {1, 3, 2}});
}

AdmissibleGraph graph2_wheel() {
    return AdmissibleGraph(2, 2, {{0, 1, 1}, {0, 2, 2}, {1, 0, 1}, {1, 3, 2}});
}

AdmissibleGraph fan_graph(int m) {
    std::vector<Edge> es;
    for (int k = 1; k <= m; ++k)
        es.push_back({0, k, k});
    return AdmissibleGraph(1, m, std::move(es));
}

} // namespace kw
