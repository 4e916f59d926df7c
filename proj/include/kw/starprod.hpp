#pragma once

#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kw/algebra.hpp"
#include "kw/graphs.hpp"
#include "kw/weight_mc.hpp"

namespace kw {

// k-vector field (k = degree + 1 slots) stored on strictly increasing
// index tuples; other orderings are recovered by skew-symmetry.
class PolyVectorField {
public:
    PolyVectorField(int d, int degree) : d_(d), degree_(degree) {}

    int dim() const { return d_; }
    int degree() const { return degree_; }
    int slots() const { return degree_ + 1; }

    // Sets the component on the (reordered) tuple, with the sign of the sort.
    void set(std::vector<int> idx, const Poly& p);
    // Component for an arbitrary tuple (0 if an index repeats).
    Poly component(std::vector<int> idx) const;
    const std::map<std::vector<int>, Poly>& components() const { return c_; }

private:
    int d_, degree_;
    std::map<std::vector<int>, Poly> c_;
};

// Constant bivector with Pi^{12} = 1 on R^2.
PolyVectorField moyal_bivector(int d = 2);
// Pi^{ij} = eps^{ijk} x_k on R^3 (linear, Poisson).
PolyVectorField so3_bivector();
PolyVectorField vector_field(int d, const std::vector<Poly>& comps);

// Sum of terms  coeff * prod_slot d^{alpha_slot}(f_slot).
template <class S> struct PolyDiffOperatorT {
    int arity = 0;
    int d = 0;
    std::map<std::vector<Mono>, PolyT<S>> terms;

    bool is_zero() const { return terms.empty(); }
    void add(const std::vector<Mono>& alphas, const PolyT<S>& c) {
        if (c.is_zero()) return;
        auto it = terms.find(alphas);
        if (it == terms.end()) {
            terms.emplace(alphas, c);
            return;
        }
        it->second += c;
        if (it->second.is_zero()) terms.erase(it);
    }
    PolyT<S> apply(const std::vector<PolyT<S>>& args) const {
        PolyT<S> r(d);
        for (auto& [alphas, c] : terms) {
            PolyT<S> t = c;
            for (int s = 0; s < arity && !t.is_zero(); ++s) t = t * args[s].derivative(alphas[s]);
            r += t;
        }
        return r;
    }
};
using PolyDiffOperator = PolyDiffOperatorT<GQ>;

// U_Gamma: sum over index assignments of the edges.
PolyDiffOperator graph_operator(const AdmissibleGraph& g, const std::vector<PolyVectorField>& gammas);

nlohmann::json to_json(const PolyDiffOperator& op);

// ---- weight sources ----
struct WeightValue {
    cplx value{};
    double stderr_ = 0.0;
    std::optional<GQ> exact;
    std::string origin; // "table", "cache", "mc", "quadrature"
};

class WeightSource {
public:
    virtual ~WeightSource() = default;
    // Raw weight (no 1/|Star|! factors) of g at lambda, if available.
    virtual std::optional<WeightValue> raw_weight(const AdmissibleGraph& g, cplx lambda) = 0;
};

// Known exact values: the fan graphs (1,m) and, at lambda = 1/2, the
// (2,2) graph with both vertices on the two ground points.
class ExactTable : public WeightSource {
public:
    std::optional<WeightValue> raw_weight(const AdmissibleGraph& g, cplx lambda) override;
};

class CacheSource : public WeightSource {
public:
    explicit CacheSource(const WeightCache& c) : cache_(c) {}
    std::optional<WeightValue> raw_weight(const AdmissibleGraph& g, cplx lambda) override;

private:
    const WeightCache& cache_;
};

// Fresh MC per symmetry class, memoised; optionally appends to a cache.
class McSource : public WeightSource {
public:
    McSource(std::uint64_t n_samples, std::uint64_t seed, McOptions opt = {},
             WeightCache* sink = nullptr)
        : n_(n_samples), seed_(seed), opt_(opt), sink_(sink) {}
    std::optional<WeightValue> raw_weight(const AdmissibleGraph& g, cplx lambda) override;

private:
    std::uint64_t n_, seed_;
    McOptions opt_;
    WeightCache* sink_;
    std::map<std::pair<std::string, std::pair<double, double>>, WeightValue> memo_;
};

// First source that answers wins. Degree-zero graphs short-circuit to 0.
class ChainSource : public WeightSource {
public:
    void add(std::shared_ptr<WeightSource> s) { chain_.push_back(std::move(s)); }
    std::optional<WeightValue> raw_weight(const AdmissibleGraph& g, cplx lambda) override;

private:
    std::vector<std::shared_ptr<WeightSource>> chain_;
};

// ---- star product ----
struct WeightedOperator {
    std::string graph;      // text form of the labeled graph
    std::string weight_key; // text form of its symmetry-class representative
    int sign = 1;           // W(graph) = sign * W(representative)
    GQ prefactor;           // i^k / k! * prod 1/|Star|!
    WeightValue weight;     // raw weight of the representative
    PolyDiffOperator op;    // B_Gamma(Pi, ..., Pi)
};

struct StarProductSeries {
    int d = 0;
    int order = 0;
    cplx lambda{0.5, 0.0};
    // terms[k]: the operators summing to B_k (k >= 1)
    std::vector<std::vector<WeightedOperator>> terms;

    bool exact() const;
};

class MissingWeights : public std::runtime_error {
public:
    MissingWeights(std::vector<std::string> graphs);
    std::vector<std::string> graphs;
};

// B_0 .. B_order (order <= 2) from enumerate_graphs(k, 2, 2).
StarProductSeries star_order2(const PolyVectorField& pi, LambdaParam lam, WeightSource& weights,
                              int order = 2);

// Exact B_k(f, g) (requires exact weights).
Poly star_term(const StarProductSeries& s, int k, const Poly& f, const Poly& g);
CPoly star_term_numeric(const StarProductSeries& s, int k, const CPoly& f, const CPoly& g,
                        const std::map<std::string, cplx>& override_weights = {});

struct Residual {
    int order = 0;
    CPoly value;            // residual polynomial at this hbar order
    double max_abs = 0;     // max |coefficient|
    double max_ratio = 0;   // max |coefficient| / propagated sigma
    bool exact = false;     // computed with exact weights only
    bool exact_zero = false;
};

// Coefficients of (f*g)*h - f*(g*h) for hbar^0..order.
std::vector<Residual> associativity_residual(const StarProductSeries& s, const Poly& f,
                                             const Poly& g, const Poly& h, int order);

} // namespace kw
