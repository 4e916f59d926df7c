#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "kw/algebra.hpp"

namespace kw {

// Basis key of the formal Weyl algebra: hbar^h v^alpha dx^{mask}.
struct WeylKey {
    int h = 0;
    Mono v;
    unsigned dx = 0; // bit i set <=> dx^{i+1} present, wedge in increasing order

    int deg_v() const;
    int deg_a() const;
    int Deg() const { return deg_v() + 2 * h; }
    friend auto operator<=>(const WeylKey&, const WeylKey&) = default;
};

// Truncated element: terms with Deg > D are dropped. Coefficients are
// exact polynomials in the base coordinates x.
class WeylElement {
public:
    WeylElement(int d, int D) : d_(d), D_(D) {}

    static WeylElement function(int d, int D, const Poly& f, int h = 0);
    static WeylElement v(int d, int D, int i);  // v^{i+1}
    static WeylElement dx(int d, int D, int i); // dx^{i+1}

    int dim() const { return d_; }
    int trunc() const { return D_; }
    const std::map<WeylKey, Poly>& terms() const { return t_; }
    bool is_zero() const { return t_.empty(); }

    void add(const WeylKey& k, const Poly& c);
    WeylElement& operator+=(const WeylElement& o);
    WeylElement& operator-=(const WeylElement& o);
    WeylElement operator-() const;
    friend WeylElement operator+(WeylElement a, const WeylElement& b) { return a += b; }
    friend WeylElement operator-(WeylElement a, const WeylElement& b) { return a -= b; }
    WeylElement scaled(const GQ& c) const;
    WeylElement scaled(const Poly& c) const;
    friend bool operator==(const WeylElement& a, const WeylElement& b) { return a.t_ == b.t_; }

    // Drop terms above Deg D (and set the truncation to D).
    WeylElement truncated(int D) const;
    // Only terms with Deg <= D (truncation unchanged).
    WeylElement low(int D) const;
    // Terms of form degree k.
    WeylElement form_part(int k) const;
    int max_form_degree() const;

    std::string str() const;

private:
    int d_, D_;
    std::map<WeylKey, Poly> t_;
};

// Super-commutative product (v commutative, dx exterior).
WeylElement mul(const WeylElement& a, const WeylElement& b);

WeylElement delta(const WeylElement& a);
WeylElement delta_inv(const WeylElement& a);
WeylElement sigma(const WeylElement& a);

// Constant Poisson tensor in the fibre directions.
using Matrix = std::vector<std::vector<GQ>>;

// a o b = . exp(hbar P)(a (x) b), P = (i/2) Pi^{kl} d_{v^k} (x) d_{v^l}.
WeylElement weyl_product(const WeylElement& a, const WeylElement& b, const Matrix& pi);
// Graded commutator a o b - (-1)^{k1 k2} b o a.
WeylElement commutator(const WeylElement& a, const WeylElement& b, const Matrix& pi);
// (i/hbar)[a, b]; the hbar^0 part must cancel (checked).
WeylElement i_over_hbar_commutator(const WeylElement& a, const WeylElement& b, const Matrix& pi);

struct FedosovInput {
    int d = 2;
    Matrix pi;                                  // Pi^{ij}, constant, nondegenerate
    std::vector<std::vector<std::vector<Poly>>> gamma; // Gamma[k][i][j] = Gamma^k_{ij}(x)
    std::function<WeylElement(int D)> omega;    // closed 2-form in hbar * Omega^2, given per truncation

    Matrix omega_matrix() const; // omega_{ij} with omega_{ij} Pi^{kj} = delta_i^k
    void validate() const;
};

FedosovInput flat_input(int d = 2);
// Flat R^2 with Omega = hbar * c(x) dx^1 dx^2.
FedosovInput flat_input_with_omega(const Poly& c);
// Symplectic torsion-free connection Gamma^l_{jk} = Pi^{li} S_{ijk} from a
// totally symmetric polynomial tensor S (flattened index i*d*d + j*d + k).
FedosovInput symplectic_connection_input(int d, const std::vector<Poly>& S);

WeylElement nabla(const WeylElement& a, const FedosovInput& in);
// R = 1/4 omega_{kr} R^r_{lij} v^k v^l dx^i dx^j
WeylElement curvature(const FedosovInput& in, int D);

struct FixedPointResult {
    WeylElement R;
    int iterations = 0;
};
FixedPointResult solve_R(const FedosovInput& in, int D, int max_iter = 64);

// Sum over full binary trees with up to `max_leaves` leaves of the
// commutative operation (i/2hbar)(1 - delta^{-1} nabla)^{-1} delta^{-1}[.,.]
// applied to z = (1 - delta^{-1} nabla)^{-1} delta^{-1}(Omega + R).
struct CatalanResult {
    WeylElement R;
    std::vector<long> trees_per_order; // index n-1 for n leaves
};
CatalanResult catalan_R(const FedosovInput& in, int D, int max_leaves);
long catalan_number(int n);

// (1 - delta^{-1} nabla)^{-1} applied to a.
WeylElement resolvent(const WeylElement& a, const FedosovInput& in);

WeylElement fedosov_D(const WeylElement& a, const FedosovInput& in, const WeylElement& R);
WeylElement fedosov_D_inv(const WeylElement& a, const FedosovInput& in, const WeylElement& R);
WeylElement fedosov_taylor(const FedosovInput& in, const WeylElement& R, const WeylElement& f);
WeylElement fedosov_taylor(const FedosovInput& in, const Poly& f, int D);
// sigma(tau f o tau g); coefficients of hbar^h are exact for 2h <= D.
WeylElement fedosov_star(const FedosovInput& in, const Poly& f, const Poly& g, int D);

// Random element with small integer coefficients (tests, CLI).
WeylElement random_element(int d, int D, unsigned seed, int max_terms = 8, int x_degree = 2);

} // namespace kw
