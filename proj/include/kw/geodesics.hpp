#pragma once

// Formal exponential map from iterated lower-index covariant derivatives of
// the Christoffel symbols, on exact polynomial jets around a base point.

#include <functional>
#include <string>
#include <vector>

#include "kw/algebra.hpp"

namespace kw {

// Drop monomials whose degree in the first `nvars` variables exceeds `order`.
Poly jet_truncate(const Poly& p, int order, int nvars = -1);
Poly jet_mul(const Poly& a, const Poly& b, int order, int nvars = -1);

struct MetricJet {
    int d = 0;
    int order = 0;                   // Christoffel jets valid to this degree
    std::vector<double> base;        // base point (numeric, for evaluation)
    std::vector<std::vector<Poly>> g; // g_{ij}(x0 + y), jets to order + 1
    std::vector<std::vector<std::vector<Poly>>> gamma; // Gamma^k_{ij}(x0 + y)

    // Levi-Civita symbols from metric jets valid to degree order + 1.
    static MetricJet from_metric(std::vector<double> base, std::vector<std::vector<Poly>> g, int order);
    void validate() const;
};

// Unit 2-sphere in (theta, phi) at theta = pi/2, phi = 0.
MetricJet sphere_jet(int order);
// Upper half-plane, metric (dx1^2 + dx2^2)/x2^2, at (x1, x2).
MetricJet poincare_jet(int order, const GQ& x1 = GQ(0), const GQ& x2 = GQ(1));
// Flat metric on R^d at the origin.
MetricJet flat_jet(int d, int order);

// a^{(i)}_{c_n ... c_1}: one upper index, n lower ones (leftmost = newest).
struct CovariantTensorJet {
    int d = 0;
    int upper = 0;
    int n = 0;
    std::vector<Poly> comps; // index sum_k c_k d^(n-1-k), tuple read left to right

    const Poly& at(const std::vector<int>& lower) const;
    Poly& at(const std::vector<int>& lower);
};

CovariantTensorJet christoffel_tensor(const MetricJet& m, int i);
CovariantTensorJet nabla_lower(const CovariantTensorJet& t, const MetricJet& m);
// Average over all orderings of the lower indices.
CovariantTensorJet symmetrize(const CovariantTensorJet& t);

// phi^i(x0, v) = x0^i + terms[i](v), polynomial in v of degree <= K.
struct ExpMapSeries {
    int d = 0;
    int K = 0;
    std::vector<double> base;
    std::vector<Poly> terms;

    // Point phi(x0, t v).
    std::vector<double> eval(const std::vector<double>& v, double t = 1.0) const;
    // Coefficient of t^k in phi^i(x0, t v) for rational v.
    GQ t_coefficient(int i, int k, const std::vector<GQ>& v) const;
};

// Contracted recursion A_{n+1} = v.d_y A_n - Gamma(v,v).d_v A_n.
ExpMapSeries exp_map_series(const MetricJet& m, int K);
// Same series through full tensors nabla^n Gamma (small K only).
ExpMapSeries exp_map_series_tensor(const MetricJet& m, int K, bool symmetrized = false);
// tau(x^i) = (1 - delta^{-1} nabla)^{-1} x^i in the commutative formal Weyl algebra.
Poly classical_fedosov_taylor(const MetricJet& m, int i, int K);

// Christoffel symbols as a callable: G[k*d*d + i*d + j] = Gamma^k_{ij}(x).
using ChristoffelFn = std::function<void(const double* x, double* G)>;
ChristoffelFn sphere_christoffel();
ChristoffelFn poincare_christoffel();

// Classical RK4 on the geodesic equations.
std::vector<double> geodesic_ode_oracle(const ChristoffelFn& gamma, int d, const std::vector<double>& x,
                                        const std::vector<double>& v, double t, int steps);

// Least-squares slope of log err against log t.
double loglog_slope(const std::vector<double>& t, const std::vector<double>& err);

} // namespace kw
