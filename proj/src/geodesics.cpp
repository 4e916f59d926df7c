#include "kw/geodesics.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "kw/fedosov.hpp"

namespace kw {

namespace {

int mono_degree(const Mono& e, int nvars) {
    int s = 0;
    for (int k = 0; k < nvars; ++k) s += e[k];
    return s;
}

GQ rational(long p, long q) {
    mpq_class r(p, q);
    r.canonicalize();
    return GQ(r);
}

GQ factorial(int n) {
    mpz_class f = 1;
    for (int k = 2; k <= n; ++k) f *= k;
    return GQ(mpq_class(f));
}

// Exact inverse of a constant matrix.
std::vector<std::vector<GQ>> invert(std::vector<std::vector<GQ>> a) {
    const int n = static_cast<int>(a.size());
    std::vector<std::vector<GQ>> inv(n, std::vector<GQ>(n, GQ(0)));
    for (int i = 0; i < n; ++i) inv[i][i] = GQ(1);
    for (int c = 0; c < n; ++c) {
        int p = c;
        while (p < n && a[p][c].is_zero()) ++p;
        if (p == n) throw std::domain_error("metric: degenerate at the base point");
        std::swap(a[p], a[c]);
        std::swap(inv[p], inv[c]);
        const GQ s = a[c][c];
        for (int j = 0; j < n; ++j) {
            a[c][j] /= s;
            inv[c][j] /= s;
        }
        for (int r = 0; r < n; ++r) {
            if (r == c || a[r][c].is_zero()) continue;
            const GQ f = a[r][c];
            for (int j = 0; j < n; ++j) {
                a[r][j] -= f * a[c][j];
                inv[r][j] -= f * inv[c][j];
            }
        }
    }
    return inv;
}

GQ constant_term(const Poly& p, int d) {
    auto it = p.terms().find(Mono(d, 0));
    return it == p.terms().end() ? GQ(0) : it->second;
}

// cos of y_var as a jet
Poly cos_jet(int d, int var, int order) {
    Poly p(d);
    for (int k = 0; k <= order; k += 2) {
        Mono e(d, 0);
        e[var] = k;
        p.add_term(e, GQ((k / 2) % 2 ? -1 : 1) / factorial(k));
    }
    return p;
}

} // namespace

Poly jet_truncate(const Poly& p, int order, int nvars) {
    const int nv = nvars < 0 ? p.dim() : nvars;
    Poly r(p.dim());
    for (auto& [e, c] : p.terms())
        if (mono_degree(e, nv) <= order) r.add_term(e, c);
    return r;
}

Poly jet_mul(const Poly& a, const Poly& b, int order, int nvars) {
    Poly r(std::max(a.dim(), b.dim()));
    const int n = r.dim();
    const int d = nvars < 0 ? n : nvars;
    for (auto& [ea, ca] : a.terms()) {
        const int da = mono_degree(ea, d);
        if (da > order) continue;
        for (auto& [eb, cb] : b.terms()) {
            if (da + mono_degree(eb, d) > order) continue;
            Mono e(ea);
            for (int k = 0; k < n; ++k) e[k] += eb[k];
            r.add_term(e, ca * cb);
        }
    }
    return r;
}

MetricJet MetricJet::from_metric(std::vector<double> base, std::vector<std::vector<Poly>> g, int order) {
    MetricJet m;
    m.d = static_cast<int>(g.size());
    m.order = order;
    m.base = std::move(base);
    const int d = m.d, J = order + 1;
    for (auto& row : g)
        for (auto& p : row) p = jet_truncate(p, J);
    m.g = g;

    // g^{-1} = sum_k (-g0^{-1} N)^k g0^{-1}, N = g - g0
    std::vector<std::vector<GQ>> g0(d, std::vector<GQ>(d));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g0[i][j] = constant_term(g[i][j], d);
    const auto g0i = invert(g0);
    std::vector<std::vector<Poly>> M(d, std::vector<Poly>(d, Poly(d))), ginv(d, std::vector<Poly>(d, Poly(d)));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                Poly n = g[k][j] - Poly::constant(d, g0[k][j]);
                M[i][j] -= n * g0i[i][k];
            }
    auto term = std::vector<std::vector<Poly>>(d, std::vector<Poly>(d, Poly(d)));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) term[i][j] = Poly::constant(d, g0i[i][j]);
    for (int k = 0; k <= J; ++k) {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) ginv[i][j] += term[i][j];
        std::vector<std::vector<Poly>> next(d, std::vector<Poly>(d, Poly(d)));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                for (int l = 0; l < d; ++l) next[i][j] += jet_mul(M[i][l], term[l][j], J);
        term = std::move(next);
    }

    m.gamma.assign(d, std::vector<std::vector<Poly>>(d, std::vector<Poly>(d, Poly(d))));
    const GQ half = rational(1, 2);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k)
            for (int l = 0; l < d; ++l) {
                Poly s(d);
                for (int q = 0; q < d; ++q) {
                    Poly b = g[k][q].derivative(l) + g[l][q].derivative(k) - g[k][l].derivative(q);
                    s += jet_mul(ginv[i][q], b, order);
                }
                m.gamma[i][k][l] = s * half;
            }
    m.validate();
    return m;
}

void MetricJet::validate() const {
    if (d < 1 || static_cast<int>(g.size()) != d || static_cast<int>(base.size()) != d)
        throw std::domain_error("metric: inconsistent dimension");
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (!(g[i][j] == g[j][i])) throw std::domain_error("metric: not symmetric");
            for (int k = 0; k < d; ++k)
                if (!(gamma[k][i][j] == gamma[k][j][i])) throw std::domain_error("metric: torsion");
        }
}

MetricJet sphere_jet(int order) {
    // sin(pi/2 + y) = cos y, so g_22 = cos^2 y
    const int J = order + 1;
    auto c = cos_jet(2, 0, J);
    std::vector<std::vector<Poly>> g{{Poly::constant(2, GQ(1)), Poly(2)}, {Poly(2), jet_mul(c, c, J)}};
    return MetricJet::from_metric({M_PI / 2, 0.0}, g, order);
}

MetricJet poincare_jet(int order, const GQ& x1, const GQ& x2) {
    if (x2.im != 0 || x2.re <= 0 || x1.im != 0)
        throw std::domain_error("poincare: base point must be real with x2 > 0");
    // 1/(x2 + y)^2 = sum_k (k+1) (-y)^k / x2^{k+2}
    const int J = order + 1;
    Poly w(2);
    GQ pw = GQ(1) / (x2 * x2);
    for (int k = 0; k <= J; ++k) {
        Mono e{0, k};
        w.add_term(e, pw * GQ(long((k % 2 ? -1 : 1) * (k + 1))));
        pw = pw / x2;
    }
    std::vector<std::vector<Poly>> g{{w, Poly(2)}, {Poly(2), w}};
    return MetricJet::from_metric({x1.re.get_d(), x2.re.get_d()}, g, order);
}

MetricJet flat_jet(int d, int order) {
    std::vector<std::vector<Poly>> g(d, std::vector<Poly>(d, Poly(d)));
    for (int i = 0; i < d; ++i) g[i][i] = Poly::constant(d, GQ(1));
    return MetricJet::from_metric(std::vector<double>(d, 0.0), g, order);
}

// ---- tensors ----

namespace {
std::size_t flat_index(const std::vector<int>& lower, int d) {
    std::size_t k = 0;
    for (int c : lower) k = k * d + c;
    return k;
}
std::vector<int> unflatten(std::size_t k, int n, int d) {
    std::vector<int> t(n);
    for (int s = n - 1; s >= 0; --s) {
        t[s] = static_cast<int>(k % d);
        k /= d;
    }
    return t;
}
} // namespace

const Poly& CovariantTensorJet::at(const std::vector<int>& lower) const { return comps.at(flat_index(lower, d)); }
Poly& CovariantTensorJet::at(const std::vector<int>& lower) { return comps.at(flat_index(lower, d)); }

CovariantTensorJet christoffel_tensor(const MetricJet& m, int i) {
    CovariantTensorJet t{m.d, i, 2, {}};
    t.comps.resize(m.d * m.d);
    for (int a = 0; a < m.d; ++a)
        for (int b = 0; b < m.d; ++b) t.at({a, b}) = m.gamma[i][a][b];
    return t;
}

CovariantTensorJet nabla_lower(const CovariantTensorJet& t, const MetricJet& m) {
    const int d = t.d;
    CovariantTensorJet r{d, t.upper, t.n + 1, {}};
    std::size_t N = 1;
    for (int k = 0; k <= t.n; ++k) N *= d;
    r.comps.assign(N, Poly(d));
    for (std::size_t k = 0; k < N; ++k) {
        auto idx = unflatten(k, t.n + 1, d);
        const int c = idx[0];
        std::vector<int> rest(idx.begin() + 1, idx.end());
        Poly v = t.at(rest).derivative(c);
        for (int l = 0; l < t.n; ++l)
            for (int e = 0; e < d; ++e) {
                const Poly& G = m.gamma[e][c][rest[l]];
                if (G.is_zero()) continue;
                auto sw = rest;
                sw[l] = e;
                v -= jet_mul(G, t.at(sw), m.order);
            }
        r.comps[k] = jet_truncate(v, m.order);
    }
    return r;
}

CovariantTensorJet symmetrize(const CovariantTensorJet& t) {
    CovariantTensorJet r = t;
    std::vector<int> perm(t.n);
    long count = 0;
    std::iota(perm.begin(), perm.end(), 0);
    do ++count;
    while (std::next_permutation(perm.begin(), perm.end()));
    for (std::size_t k = 0; k < t.comps.size(); ++k) {
        auto idx = unflatten(k, t.n, t.d);
        Poly s(t.d);
        std::iota(perm.begin(), perm.end(), 0);
        do {
            std::vector<int> q(t.n);
            for (int a = 0; a < t.n; ++a) q[a] = idx[perm[a]];
            s += t.at(q);
        } while (std::next_permutation(perm.begin(), perm.end()));
        r.comps[k] = s * rational(1, count);
    }
    return r;
}

// ---- exponential map ----

std::vector<double> ExpMapSeries::eval(const std::vector<double>& v, double t) const {
    std::vector<double> x = base;
    for (int i = 0; i < d; ++i)
        for (auto& [e, c] : terms[i].terms()) {
            double m = c.re.get_d();
            for (int k = 0; k < d; ++k) m *= std::pow(t * v[k], e[k]);
            x[i] += m;
        }
    return x;
}

GQ ExpMapSeries::t_coefficient(int i, int k, const std::vector<GQ>& v) const {
    GQ s(0);
    for (auto& [e, c] : terms[i].terms()) {
        if (mono_degree(e, d) != k) continue;
        GQ m = c;
        for (int q = 0; q < d; ++q)
            for (int p = 0; p < e[q]; ++p) m *= v[q];
        s += m;
    }
    return s;
}

namespace {
void need_order(const MetricJet& m, int K) {
    if (K < 1) throw std::domain_error("exp map: order must be >= 1");
    if (m.order < K - 2) throw std::domain_error("exp map: jet order " + std::to_string(m.order) +
                                                 " too small for K = " + std::to_string(K));
}

// Restrict a polynomial in (y, v) to y = 0, keeping the v variables.
Poly at_base(const Poly& p, int d) {
    Poly r(d);
    for (auto& [e, c] : p.terms()) {
        if (mono_degree(e, d) != 0) continue;
        r.add_term(Mono(e.begin() + d, e.end()), c);
    }
    return r;
}

Poly lift(const Poly& p, int d) { // y-jet into (y, v) variables
    Poly r(2 * d);
    for (auto& [e, c] : p.terms()) {
        Mono f(2 * d, 0);
        std::copy(e.begin(), e.end(), f.begin());
        r.add_term(f, c);
    }
    return r;
}
} // namespace

ExpMapSeries exp_map_series(const MetricJet& m, int K) {
    need_order(m, K);
    const int d = m.d, n2 = 2 * d;
    ExpMapSeries s{d, K, m.base, std::vector<Poly>(d, Poly(d))};
    auto V = [&](int c) { return Poly::variable(n2, d + c); };
    // Gamma^c(v, v) as (y, v) polynomials
    std::vector<Poly> Gvv(d, Poly(n2));
    for (int c = 0; c < d; ++c)
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                if (!m.gamma[c][a][b].is_zero()) Gvv[c] += lift(m.gamma[c][a][b], d) * V(a) * V(b);
    for (int i = 0; i < d; ++i) {
        Poly lin(d);
        Mono e(d, 0);
        e[i] = 1;
        lin.add_term(e, GQ(1));
        s.terms[i] = lin;
        Poly A = Gvv[i]; // A_0
        for (int n = 0; n + 2 <= K; ++n) {
            s.terms[i] -= at_base(A, d) * (GQ(1) / factorial(n + 2));
            if (n + 3 > K) break;
            const int keep = K - 3 - n; // y-degree still needed
            Poly next(n2);
            for (int c = 0; c < d; ++c) {
                next += A.derivative(c) * V(c);
                next -= jet_mul(Gvv[c], A.derivative(d + c), keep, d);
            }
            A = jet_truncate(next, keep, d);
        }
    }
    return s;
}

ExpMapSeries exp_map_series_tensor(const MetricJet& m, int K, bool symmetrized) {
    need_order(m, K);
    const int d = m.d;
    ExpMapSeries s{d, K, m.base, std::vector<Poly>(d, Poly(d))};
    for (int i = 0; i < d; ++i) {
        Mono e(d, 0);
        e[i] = 1;
        s.terms[i].add_term(e, GQ(1));
        auto T = christoffel_tensor(m, i);
        for (int n = 0; n + 2 <= K; ++n) {
            auto U = symmetrized ? symmetrize(T) : T;
            const GQ f = GQ(1) / factorial(n + 2);
            for (std::size_t k = 0; k < U.comps.size(); ++k) {
                const GQ c = constant_term(U.comps[k], d);
                if (c.is_zero()) continue;
                Mono ve(d, 0);
                for (int q : unflatten(k, U.n, d)) ve[q] += 1;
                s.terms[i].add_term(ve, -(c * f));
            }
            if (n + 3 <= K) T = nabla_lower(T, m);
        }
    }
    return s;
}

Poly classical_fedosov_taylor(const MetricJet& m, int i, int K) {
    need_order(m, K);
    FedosovInput in;
    in.d = m.d;
    in.gamma = m.gamma;
    auto f = WeylElement::function(m.d, K, Poly::variable(m.d, i));
    auto tau = resolvent(f, in);
    // v-polynomial at y = 0; the x^i shift itself is the base point
    Poly r(m.d);
    for (auto& [k, c] : tau.terms()) {
        if (k.dx || k.h) continue;
        if (k.deg_v() == 0) continue;
        r.add_term(k.v, constant_term(c, m.d));
    }
    return r;
}

// ---- ODE oracle ----

ChristoffelFn sphere_christoffel() {
    return [](const double* x, double* G) {
        std::fill(G, G + 8, 0.0);
        const double s = std::sin(x[0]), c = std::cos(x[0]);
        G[0 * 4 + 1 * 2 + 1] = -s * c;
        G[1 * 4 + 0 * 2 + 1] = G[1 * 4 + 1 * 2 + 0] = c / s;
    };
}

ChristoffelFn poincare_christoffel() {
    return [](const double* x, double* G) {
        std::fill(G, G + 8, 0.0);
        const double w = -1.0 / x[1];
        G[0 * 4 + 0 * 2 + 1] = G[0 * 4 + 1 * 2 + 0] = w;
        G[1 * 4 + 1 * 2 + 1] = w;
        G[1 * 4 + 0 * 2 + 0] = -w;
    };
}

std::vector<double> geodesic_ode_oracle(const ChristoffelFn& gamma, int d, const std::vector<double>& x,
                                        const std::vector<double>& v, double t, int steps) {
    if (steps < 1) throw std::domain_error("ode: steps must be positive");
    const double h = t / steps;
    if (t != 0.0 && std::abs(h) < 1e-300) throw std::domain_error("ode: step underflow");
    std::vector<double> G(d * d * d);
    auto rhs = [&](const std::vector<double>& y, std::vector<double>& dy) {
        gamma(y.data(), G.data());
        for (int i = 0; i < d; ++i) {
            dy[i] = y[d + i];
            double a = 0;
            for (int p = 0; p < d; ++p)
                for (int q = 0; q < d; ++q) a += G[i * d * d + p * d + q] * y[d + p] * y[d + q];
            dy[d + i] = -a;
        }
    };
    std::vector<double> y(2 * d), k1(2 * d), k2(2 * d), k3(2 * d), k4(2 * d), tmp(2 * d);
    std::copy(x.begin(), x.end(), y.begin());
    std::copy(v.begin(), v.end(), y.begin() + d);
    for (int s = 0; s < steps; ++s) {
        rhs(y, k1);
        for (int k = 0; k < 2 * d; ++k) tmp[k] = y[k] + 0.5 * h * k1[k];
        rhs(tmp, k2);
        for (int k = 0; k < 2 * d; ++k) tmp[k] = y[k] + 0.5 * h * k2[k];
        rhs(tmp, k3);
        for (int k = 0; k < 2 * d; ++k) tmp[k] = y[k] + h * k3[k];
        rhs(tmp, k4);
        for (int k = 0; k < 2 * d; ++k) y[k] += h / 6.0 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]);
    }
    y.resize(d);
    return y;
}

double loglog_slope(const std::vector<double>& t, const std::vector<double>& err) {
    if (t.size() != err.size() || t.size() < 2) throw std::domain_error("slope: need two or more points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double a = std::log(t[k]), b = std::log(err[k]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace kw
