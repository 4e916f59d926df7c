#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace kw {

// Vertex ids: aerial (type I) vertices are 0..n-1, ground (type II)
// vertices are n..n+m-1 in their fixed order on the real line.
struct Edge {
    int src = 0;
    int dst = 0;
    int label = 1; // 1-based position within Star(src)

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

class AdmissibleGraph {
public:
    AdmissibleGraph() = default;
    AdmissibleGraph(int n, int m, std::vector<Edge> edges);

    int n() const { return n_; }
    int m() const { return m_; }
    const std::vector<Edge>& edges() const { return edges_; }

    bool is_aerial(int v) const { return v >= 0 && v < n_; }
    bool is_ground(int v) const { return v >= n_ && v < n_ + m_; }

    int star_size(int v) const;
    int in_degree(int v) const;
    // Edges sorted by (source, label): the wedge order of the weight form.
    std::vector<Edge> wedge_order() const;
    // Target of edge `label` leaving `v`.
    int target(int v, int label) const;

    bool has_parallel_edges() const;

    std::string to_text() const;
    static AdmissibleGraph from_text(const std::string& s);
    nlohmann::json to_json() const;
    static AdmissibleGraph from_json(const nlohmann::json& j);

    friend bool operator==(const AdmissibleGraph& a, const AdmissibleGraph& b);

private:
    void validate() const;

    int n_ = 0;
    int m_ = 0;
    std::vector<Edge> edges_;
};

// Marked central vertex 0 of a Shoikhet graph is stored as id -1; its
// outgoing edges are the out-form degree. Nothing may target it.
struct ShoikhetGraph {
    AdmissibleGraph base;
    std::vector<int> center_targets;

    int center_star() const { return static_cast<int>(center_targets.size()); }
    void validate() const;
};

using GraphKey = std::string;

std::vector<AdmissibleGraph> enumerate_graphs(int n, int m, int out_degree,
                                              bool allow_parallel = false);

GraphKey canonical_key(const AdmissibleGraph& g);

// Hub 0 with n spokes to rim vertices 1..n, rim edge k -> k+1 (cyclic).
AdmissibleGraph wheel_graph(int n);
// Rim only: n vertices, each pointing at the next.
AdmissibleGraph rim_graph(int n);

// Relabel aerial vertices: vertex v becomes perm[v]; labels travel along.
AdmissibleGraph permute_aerial(const AdmissibleGraph& g, const std::vector<int>& perm);

// Representative of g up to aerial relabeling and per-vertex label
// permutations; the weight form satisfies W(g) = sign * W(rep).
struct SignedClass {
    AdmissibleGraph rep;
    int sign = 1;
};
SignedClass weight_class(const AdmissibleGraph& g);

// The three (2,2) shapes pictured for the order-2 star product.
AdmissibleGraph graph1_left();
AdmissibleGraph graph1_right();
AdmissibleGraph graph2_wheel();
AdmissibleGraph fan_graph(int m);

} // namespace kw
