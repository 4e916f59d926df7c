#include "kw/starprod.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace kw {

namespace {

// Sort idx in place; returns the permutation sign, or 0 on a repeat.
int sort_sign(std::vector<int>& idx) {
    int sign = 1;
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j + 1 < idx.size() - i; ++j)
            if (idx[j] > idx[j + 1]) {
                std::swap(idx[j], idx[j + 1]);
                sign = -sign;
            }
    for (std::size_t i = 0; i + 1 < idx.size(); ++i)
        if (idx[i] == idx[i + 1]) return 0;
    return sign;
}

GQ factorial(int k) {
    GQ r(1);
    for (int i = 2; i <= k; ++i) r *= GQ(i);
    return r;
}

GQ ipow(int k) {
    static const GQ tab[4] = {GQ(1), GQ(0, 1), GQ(-1), GQ(0, -1)};
    return tab[((k % 4) + 4) % 4];
}

bool is_half(cplx l) { return std::abs(l - cplx(0.5, 0.0)) < 1e-15; }

} // namespace

void PolyVectorField::set(std::vector<int> idx, const Poly& p) {
    if (static_cast<int>(idx.size()) != slots())
        throw std::domain_error("polyvector: wrong number of indices");
    const int s = sort_sign(idx);
    if (s == 0) throw std::domain_error("polyvector: repeated index");
    c_[idx] = s > 0 ? p : p * GQ(-1);
}

Poly PolyVectorField::component(std::vector<int> idx) const {
    if (static_cast<int>(idx.size()) != slots())
        throw std::domain_error("polyvector: wrong number of indices");
    const int s = sort_sign(idx);
    if (s == 0) return Poly(d_);
    auto it = c_.find(idx);
    if (it == c_.end()) return Poly(d_);
    return s > 0 ? it->second : it->second * GQ(-1);
}

PolyVectorField moyal_bivector(int d) {
    if (d < 2 || d % 2) throw std::domain_error("moyal_bivector: even d >= 2");
    PolyVectorField pi(d, 1);
    for (int k = 0; k < d; k += 2) pi.set({k, k + 1}, Poly::constant(d, GQ(1)));
    return pi;
}

PolyVectorField so3_bivector() {
    PolyVectorField pi(3, 1);
    pi.set({0, 1}, Poly::variable(3, 2));
    pi.set({1, 2}, Poly::variable(3, 0));
    pi.set({2, 0}, Poly::variable(3, 1));
    return pi;
}

PolyVectorField vector_field(int d, const std::vector<Poly>& comps) {
    if (static_cast<int>(comps.size()) != d) throw std::domain_error("vector_field: need d components");
    PolyVectorField v(d, 0);
    for (int i = 0; i < d; ++i) v.set({i}, comps[i]);
    return v;
}

PolyDiffOperator graph_operator(const AdmissibleGraph& g, const std::vector<PolyVectorField>& gammas) {
    const int n = g.n(), m = g.m();
    if (static_cast<int>(gammas.size()) != n)
        throw std::domain_error("graph_operator: one polyvector field per aerial vertex");
    if (n == 0) throw std::domain_error("graph_operator: no aerial vertices");
    const int d = gammas[0].dim();
    for (int v = 0; v < n; ++v) {
        if (gammas[v].dim() != d) throw std::domain_error("graph_operator: dimension mismatch");
        if (gammas[v].slots() != g.star_size(v))
            throw std::domain_error("graph_operator: vertex " + std::to_string(v) + " has " +
                                    std::to_string(g.star_size(v)) + " edges but its field has " +
                                    std::to_string(gammas[v].slots()) + " slots");
    }
    const auto edges = g.wedge_order();
    const int E = static_cast<int>(edges.size());

    PolyDiffOperator op;
    op.arity = m;
    op.d = d;
    std::vector<int> I(E, 0);
    while (true) {
        Poly coeff = Poly::constant(d, GQ(1));
        for (int v = 0; v < n && !coeff.is_zero(); ++v) {
            std::vector<int> up;
            Mono alpha(d, 0);
            for (int e = 0; e < E; ++e) {
                if (edges[e].src == v) up.push_back(I[e]); // label order
                if (edges[e].dst == v) alpha[I[e]]++;
            }
            coeff = coeff * gammas[v].component(up).derivative(alpha);
        }
        if (!coeff.is_zero()) {
            std::vector<Mono> alphas(m, Mono(d, 0));
            for (int e = 0; e < E; ++e)
                if (g.is_ground(edges[e].dst)) alphas[edges[e].dst - n][I[e]]++;
            op.add(alphas, coeff);
        }
        int k = 0;
        while (k < E && ++I[k] == d) I[k++] = 0;
        if (k == E) break;
    }
    return op;
}

nlohmann::json to_json(const PolyDiffOperator& op) {
    nlohmann::json terms = nlohmann::json::array();
    for (auto& [alphas, c] : op.terms) terms.push_back({{"derivatives", alphas}, {"coefficient", c.str()}});
    return {{"arity", op.arity}, {"dim", op.d}, {"terms", terms}};
}

// ---- weight sources ----

std::optional<WeightValue> ExactTable::raw_weight(const AdmissibleGraph& g, cplx lambda) {
    const int n = g.n(), m = g.m();
    auto label_sign = [&](int v) {
        std::vector<int> t;
        for (int l = 1; l <= g.star_size(v); ++l) t.push_back(g.target(v, l));
        return sort_sign(t);
    };
    auto all_ground = [&](int v) {
        for (int l = 1; l <= g.star_size(v); ++l)
            if (!g.is_ground(g.target(v, l))) return false;
        return g.star_size(v) == m;
    };
    // Fan (1,m): 1/m! for every lambda.
    if (n == 1 && m >= 1 && all_ground(0)) {
        const int s = label_sign(0);
        if (s == 0) return std::nullopt;
        GQ w = GQ(s) / factorial(m);
        return WeightValue{w.to_complex(), 0.0, w, "table"};
    }
    // Both aerial vertices on both ground points: 1/4 at lambda = 1/2.
    if (n == 2 && m == 2 && is_half(lambda) && all_ground(0) && all_ground(1)) {
        const int s = label_sign(0) * label_sign(1);
        if (s == 0) return std::nullopt;
        GQ w = GQ(mpq_class(s, 4));
        return WeightValue{w.to_complex(), 0.0, w, "table"};
    }
    return std::nullopt;
}

std::optional<WeightValue> CacheSource::raw_weight(const AdmissibleGraph& g, cplx lambda) {
    auto e = cache_.get_pooled(canonical_key(g), lambda, Convention::Raw);
    if (!e) return std::nullopt;
    return WeightValue{e->value, e->stderr_, std::nullopt, "cache"};
}

std::optional<WeightValue> McSource::raw_weight(const AdmissibleGraph& g, cplx lambda) {
    auto key = std::make_pair(canonical_key(g), std::make_pair(lambda.real(), lambda.imag()));
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    McOptions o = opt_;
    o.convention = Convention::Raw;
    auto e = weight_mc(g, LambdaParam{lambda}, n_, seed_, o);
    if (sink_) sink_->put(e);
    WeightValue w{e.value, e.stderr_, std::nullopt, "mc"};
    memo_[key] = w;
    return w;
}

std::optional<WeightValue> ChainSource::raw_weight(const AdmissibleGraph& g, cplx lambda) {
    if (static_cast<int>(g.edges().size()) != config_dimension(g))
        return WeightValue{0.0, 0.0, GQ(0), "degree"};
    for (auto& s : chain_)
        if (auto w = s->raw_weight(g, lambda)) return w;
    return std::nullopt;
}

// ---- star product ----

bool StarProductSeries::exact() const {
    for (auto& ts : terms)
        for (auto& t : ts)
            if (!t.weight.exact) return false;
    return true;
}

MissingWeights::MissingWeights(std::vector<std::string> gs)
    : std::runtime_error([&] {
          std::string s = "missing weights for " + std::to_string(gs.size()) + " graph(s):";
          for (auto& g : gs) s += " " + g;
          return s;
      }()),
      graphs(std::move(gs)) {}

StarProductSeries star_order2(const PolyVectorField& pi, LambdaParam lam, WeightSource& weights,
                              int order) {
    if (pi.degree() != 1) throw std::domain_error("star_order2: Pi must be a bivector");
    if (order < 0 || order > 2) throw std::domain_error("star_order2: order must be 0, 1 or 2");
    StarProductSeries s;
    s.d = pi.dim();
    s.order = order;
    s.lambda = lam.lambda;
    s.terms.resize(order + 1);
    std::vector<std::string> missing;
    for (int k = 1; k <= order; ++k) {
        for (const auto& g : enumerate_graphs(k, 2, 2, false)) {
            auto op = graph_operator(g, std::vector<PolyVectorField>(k, pi));
            if (op.is_zero()) continue;
            GQ star = GQ(1);
            for (int v = 0; v < k; ++v) star *= factorial(g.star_size(v));
            auto cls = weight_class(g);
            WeightedOperator t;
            t.graph = g.to_text();
            t.weight_key = cls.rep.to_text();
            t.sign = cls.sign;
            t.prefactor = ipow(k) / (factorial(k) * star);
            t.op = std::move(op);
            auto w = weights.raw_weight(cls.rep, lam.lambda);
            if (!w) {
                missing.push_back(t.weight_key);
                continue;
            }
            t.weight = *w;
            s.terms[k].push_back(std::move(t));
        }
    }
    if (!missing.empty()) {
        std::sort(missing.begin(), missing.end());
        missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
        throw MissingWeights(missing);
    }
    return s;
}

Poly star_term(const StarProductSeries& s, int k, const Poly& f, const Poly& g) {
    if (k == 0) return f * g;
    if (k > s.order) throw std::domain_error("star_term: order beyond truncation");
    Poly r(s.d);
    for (const auto& t : s.terms[k]) {
        if (!t.weight.exact) throw std::domain_error("star_term: weight of " + t.graph + " is not exact");
        const GQ c = t.prefactor * GQ(t.sign) * *t.weight.exact;
        r += t.op.apply({f, g}) * c;
    }
    return r;
}

namespace {

CPoly apply_numeric(const PolyDiffOperator& op, const CPoly& f, const CPoly& g) {
    CPoly r(op.d);
    for (auto& [alphas, c] : op.terms) {
        CPoly t = to_cpoly(c);
        t = t * f.derivative(alphas[0]);
        if (t.is_zero()) continue;
        t = t * g.derivative(alphas[1]);
        r += t;
    }
    return r;
}

} // namespace

CPoly star_term_numeric(const StarProductSeries& s, int k, const CPoly& f, const CPoly& g,
                        const std::map<std::string, cplx>& override_weights) {
    if (k == 0) return f * g;
    if (k > s.order) throw std::domain_error("star_term: order beyond truncation");
    CPoly r(s.d);
    for (const auto& t : s.terms[k]) {
        cplx w = t.weight.value;
        if (auto it = override_weights.find(t.weight_key); it != override_weights.end()) w = it->second;
        const cplx c = t.prefactor.to_complex() * double(t.sign) * w;
        r += apply_numeric(t.op, f, g) * c;
    }
    return r;
}

std::vector<Residual> associativity_residual(const StarProductSeries& s, const Poly& f,
                                             const Poly& g, const Poly& h, int order) {
    if (order > s.order) throw std::domain_error("associativity_residual: order beyond truncation");
    std::vector<Residual> out(order + 1);

    if (s.exact()) {
        std::vector<Poly> fg(order + 1), gh(order + 1);
        for (int a = 0; a <= order; ++a) {
            fg[a] = star_term(s, a, f, g);
            gh[a] = star_term(s, a, g, h);
        }
        for (int r = 0; r <= order; ++r) {
            Poly res(s.d);
            for (int a = 0; a <= r; ++a) {
                res += star_term(s, r - a, fg[a], h);
                res -= star_term(s, r - a, f, gh[a]);
            }
            auto& R = out[r];
            R.order = r;
            R.exact = true;
            R.exact_zero = res.is_zero();
            R.value = to_cpoly(res);
            for (auto& [e, c] : R.value.terms()) R.max_abs = std::max(R.max_abs, std::abs(c));
            R.max_ratio = R.exact_zero ? 0.0 : INFINITY;
        }
        return out;
    }

    const CPoly F = to_cpoly(f), G = to_cpoly(g), H = to_cpoly(h);
    auto compute = [&](const std::map<std::string, cplx>& ov) {
        std::vector<CPoly> fg(order + 1), gh(order + 1), res(order + 1);
        for (int a = 0; a <= order; ++a) {
            fg[a] = star_term_numeric(s, a, F, G, ov);
            gh[a] = star_term_numeric(s, a, G, H, ov);
        }
        for (int r = 0; r <= order; ++r) {
            CPoly x(s.d);
            for (int a = 0; a <= r; ++a) {
                x += star_term_numeric(s, r - a, fg[a], H, ov);
                x -= star_term_numeric(s, r - a, F, gh[a], ov);
            }
            res[r] = x;
        }
        return res;
    };
    const auto base = compute({});

    // Linear propagation: shift one weight class by its stderr at a time.
    std::map<std::string, std::pair<cplx, double>> classes;
    for (auto& ts : s.terms)
        for (auto& t : ts)
            if (t.weight.stderr_ > 0) classes[t.weight_key] = {t.weight.value, t.weight.stderr_};
    std::vector<std::map<Mono, double>> var(order + 1);
    for (auto& [key, ws] : classes) {
        const auto shifted = compute({{key, ws.first + ws.second}});
        for (int r = 0; r <= order; ++r) {
            CPoly diff = shifted[r] - base[r];
            for (auto& [e, c] : diff.terms()) var[r][e] += std::norm(c);
        }
    }
    for (int r = 0; r <= order; ++r) {
        auto& R = out[r];
        R.order = r;
        R.value = base[r];
        for (auto& [e, c] : R.value.terms()) {
            const double a = std::abs(c);
            R.max_abs = std::max(R.max_abs, a);
            const double sig = std::sqrt(var[r].count(e) ? var[r][e] : 0.0);
            // rounding floor for coefficients that cancel identically
            const double ratio = a <= 1e-12 ? 0.0 : (sig > 0 ? a / sig : INFINITY);
            R.max_ratio = std::max(R.max_ratio, ratio);
        }
        R.exact_zero = R.max_abs == 0.0;
    }
    return out;
}

} // namespace kw
