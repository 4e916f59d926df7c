#include "kw/fedosov.hpp"

#include <bit>
#include <random>
#include <sstream>
#include <stdexcept>

namespace kw {

int WeylKey::deg_v() const {
    int s = 0;
    for (int x : v) s += x;
    return s;
}
int WeylKey::deg_a() const { return std::popcount(dx); }

namespace {

// dx^A ^ dx^B with both in increasing order.
int wedge_sign(unsigned A, unsigned B) {
    int inv = 0;
    for (unsigned b = B; b; b &= b - 1) {
        const int j = std::countr_zero(b);
        inv += std::popcount(A >> (j + 1));
    }
    return inv % 2 ? -1 : 1;
}

int below(unsigned M, int i) { return std::popcount(M & ((1u << i) - 1u)); }

GQ frac(long p, long q) {
    mpq_class r(p, q);
    r.canonicalize();
    return GQ(r);
}

} // namespace

WeylElement WeylElement::function(int d, int D, const Poly& f, int h) {
    WeylElement e(d, D);
    e.add({h, Mono(d, 0), 0u}, f);
    return e;
}

WeylElement WeylElement::v(int d, int D, int i) {
    WeylElement e(d, D);
    Mono m(d, 0);
    m[i] = 1;
    e.add({0, m, 0u}, Poly::constant(d, GQ(1)));
    return e;
}

WeylElement WeylElement::dx(int d, int D, int i) {
    WeylElement e(d, D);
    e.add({0, Mono(d, 0), 1u << i}, Poly::constant(d, GQ(1)));
    return e;
}

void WeylElement::add(const WeylKey& k, const Poly& c) {
    if (c.is_zero() || k.Deg() > D_) return;
    if (k.h < 0) throw std::logic_error("weyl: negative hbar power survived");
    auto it = t_.find(k);
    if (it == t_.end()) {
        t_.emplace(k, c);
        return;
    }
    it->second += c;
    if (it->second.is_zero()) t_.erase(it);
}

WeylElement& WeylElement::operator+=(const WeylElement& o) {
    D_ = std::min(D_, o.D_);
    for (auto it = t_.begin(); it != t_.end();)
        it = it->first.Deg() > D_ ? t_.erase(it) : std::next(it);
    for (auto& [k, c] : o.t_) add(k, c);
    return *this;
}

WeylElement& WeylElement::operator-=(const WeylElement& o) { return *this += -o; }

WeylElement WeylElement::operator-() const { return scaled(GQ(-1)); }

WeylElement WeylElement::scaled(const GQ& c) const {
    WeylElement r(d_, D_);
    if (c.is_zero()) return r;
    for (auto& [k, p] : t_) r.t_.emplace(k, p * c);
    return r;
}

WeylElement WeylElement::scaled(const Poly& c) const {
    WeylElement r(d_, D_);
    for (auto& [k, p] : t_) r.add(k, p * c);
    return r;
}

WeylElement WeylElement::truncated(int D) const {
    WeylElement r(d_, D);
    for (auto& [k, p] : t_) r.add(k, p);
    return r;
}

WeylElement WeylElement::low(int D) const {
    WeylElement r(d_, D_);
    for (auto& [k, p] : t_)
        if (k.Deg() <= D) r.t_.emplace(k, p);
    return r;
}

WeylElement WeylElement::form_part(int k) const {
    WeylElement r(d_, D_);
    for (auto& [key, p] : t_)
        if (key.deg_a() == k) r.t_.emplace(key, p);
    return r;
}

int WeylElement::max_form_degree() const {
    int m = -1;
    for (auto& [k, p] : t_) m = std::max(m, k.deg_a());
    return m;
}

std::string WeylElement::str() const {
    if (t_.empty()) return "0";
    std::ostringstream o;
    bool first = true;
    for (auto& [k, p] : t_) {
        if (!first) o << " + ";
        first = false;
        o << "[" << p.str() << "]";
        if (k.h) o << "*h^" << k.h;
        for (int i = 0; i < d_; ++i)
            if (k.v[i]) o << "*v" << i + 1 << (k.v[i] > 1 ? "^" + std::to_string(k.v[i]) : "");
        for (int i = 0; i < d_; ++i)
            if (k.dx >> i & 1u) o << "*dx" << i + 1;
    }
    return o.str();
}

WeylElement mul(const WeylElement& a, const WeylElement& b) {
    const int d = a.dim();
    WeylElement r(d, std::min(a.trunc(), b.trunc()));
    for (auto& [ka, ca] : a.terms())
        for (auto& [kb, cb] : b.terms()) {
            if (ka.dx & kb.dx) continue;
            if (ka.Deg() + kb.Deg() > r.trunc()) continue;
            WeylKey k{ka.h + kb.h, ka.v, ka.dx | kb.dx};
            for (int i = 0; i < d; ++i) k.v[i] += kb.v[i];
            r.add(k, ca * cb * GQ(wedge_sign(ka.dx, kb.dx)));
        }
    return r;
}

WeylElement delta(const WeylElement& a) {
    const int d = a.dim();
    WeylElement r(d, a.trunc());
    for (auto& [k, c] : a.terms())
        for (int i = 0; i < d; ++i) {
            if (k.v[i] == 0 || (k.dx >> i & 1u)) continue;
            WeylKey n = k;
            n.v[i] -= 1;
            n.dx |= 1u << i;
            const int s = below(k.dx, i) % 2 ? -1 : 1;
            r.add(n, c * GQ(long(k.v[i]) * s));
        }
    return r;
}

WeylElement delta_inv(const WeylElement& a) {
    const int d = a.dim();
    WeylElement r(d, a.trunc());
    for (auto& [k, c] : a.terms()) {
        const int s = k.deg_v(), q = k.deg_a();
        if (q == 0) continue;
        for (int i = 0; i < d; ++i) {
            if (!(k.dx >> i & 1u)) continue;
            WeylKey n = k;
            n.v[i] += 1;
            n.dx &= ~(1u << i);
            const long sg = below(k.dx, i) % 2 ? -1 : 1;
            r.add(n, c * frac(sg, s + q));
        }
    }
    return r;
}

WeylElement sigma(const WeylElement& a) {
    WeylElement r(a.dim(), a.trunc());
    for (auto& [k, c] : a.terms())
        if (k.dx == 0 && k.deg_v() == 0) r.add(k, c);
    return r;
}

namespace {

// Coefficient of d^k/dv^{idx...} on v^alpha, writing the new exponent into out.
bool vderiv(const Mono& alpha, const std::vector<int>& idx, Mono& out, long& factor) {
    out = alpha;
    factor = 1;
    for (int i : idx) {
        if (out[i] == 0) return false;
        factor *= out[i];
        out[i] -= 1;
    }
    return true;
}

WeylElement product_with_trunc(const WeylElement& a, const WeylElement& b, const Matrix& pi, int D) {
    const int d = a.dim();
    WeylElement r(d, D);
    const GQ half_i(0, mpq_class(1, 2));
    for (auto& [ka, ca] : a.terms())
        for (auto& [kb, cb] : b.terms()) {
            if (ka.dx & kb.dx) continue;
            if (ka.Deg() + kb.Deg() > D) continue;
            const Poly cab = ca * cb * GQ(wedge_sign(ka.dx, kb.dx));
            const int kmax = std::min(ka.deg_v(), kb.deg_v());
            GQ pref(1); // (i/2)^k / k!
            for (int k = 0; k <= kmax; ++k) {
                if (k > 0) pref = pref * half_i / GQ(k);
                // all index sequences (i_1..i_k), (j_1..j_k)
                std::vector<int> I(k, 0), J(k, 0);
                for (;;) {
                    GQ p = pref;
                    for (int s = 0; s < k && !p.is_zero(); ++s) p *= pi[I[s]][J[s]];
                    Mono va, vb;
                    long fa, fb;
                    if (!p.is_zero() && vderiv(ka.v, I, va, fa) && vderiv(kb.v, J, vb, fb)) {
                        WeylKey n{ka.h + kb.h + k, va, ka.dx | kb.dx};
                        for (int i = 0; i < d; ++i) n.v[i] += vb[i];
                        r.add(n, cab * (p * GQ(fa * fb)));
                    }
                    int s = 0;
                    while (s < 2 * k) {
                        int& x = s < k ? I[s] : J[s - k];
                        if (++x < d) break;
                        x = 0;
                        ++s;
                    }
                    if (s == 2 * k) break;
                }
            }
        }
    return r;
}

} // namespace

WeylElement weyl_product(const WeylElement& a, const WeylElement& b, const Matrix& pi) {
    if (a.dim() != b.dim() || static_cast<int>(pi.size()) != a.dim())
        throw std::domain_error("weyl_product: dimension mismatch");
    return product_with_trunc(a, b, pi, std::min(a.trunc(), b.trunc()));
}

namespace {
int parity(const WeylElement& a) {
    int p = -1;
    for (auto& [k, c] : a.terms()) {
        const int q = k.deg_a() % 2;
        if (p >= 0 && p != q) return -1;
        p = q;
    }
    return p < 0 ? 0 : p;
}

WeylElement graded_commutator(const WeylElement& a, const WeylElement& b, const Matrix& pi, int D) {
    // split into homogeneous form degrees so the sign is well defined
    WeylElement r(a.dim(), D);
    for (int ka = 0; ka <= a.max_form_degree(); ++ka) {
        auto A = a.form_part(ka);
        if (A.is_zero()) continue;
        for (int kb = 0; kb <= b.max_form_degree(); ++kb) {
            auto B = b.form_part(kb);
            if (B.is_zero()) continue;
            r += product_with_trunc(A, B, pi, D);
            auto ba = product_with_trunc(B, A, pi, D);
            if ((ka * kb) % 2) r += ba;
            else r -= ba;
        }
    }
    return r;
}
} // namespace

WeylElement commutator(const WeylElement& a, const WeylElement& b, const Matrix& pi) {
    (void)parity;
    return graded_commutator(a, b, pi, std::min(a.trunc(), b.trunc()));
}

WeylElement i_over_hbar_commutator(const WeylElement& a, const WeylElement& b, const Matrix& pi) {
    const int D = std::min(a.trunc(), b.trunc());
    auto c = graded_commutator(a, b, pi, D + 2);
    WeylElement r(a.dim(), D);
    for (auto& [k, p] : c.terms()) {
        if (k.h == 0) throw std::logic_error("i_over_hbar_commutator: hbar^0 part does not cancel");
        WeylKey n = k;
        n.h -= 1;
        r.add(n, p * GQ::i());
    }
    return r;
}

// ---- connection data ----

Matrix FedosovInput::omega_matrix() const {
    // invert Pi exactly (Gauss-Jordan over Gaussian rationals); omega = Pi^{-1}
    const int n = d;
    Matrix a = pi, inv(n, std::vector<GQ>(n, GQ(0)));
    for (int i = 0; i < n; ++i) inv[i][i] = GQ(1);
    for (int c = 0; c < n; ++c) {
        int p = c;
        while (p < n && a[p][c].is_zero()) ++p;
        if (p == n) throw std::domain_error("fedosov: Pi is degenerate");
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
    // omega_{ij} Pi^{kj} = delta_i^k, i.e. the transpose of Pi^{-1}; with this
    // sign nabla^2 = (i/hbar)[R, .] for the curvature formula below.
    Matrix w(n, std::vector<GQ>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) w[i][j] = inv[j][i];
    return w;
}

void FedosovInput::validate() const {
    if (d < 2 || d % 2 || d > 8) throw std::domain_error("fedosov: even dimension 2..8 required");
    if (static_cast<int>(pi.size()) != d) throw std::domain_error("fedosov: Pi has wrong size");
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (!(pi[i][j] + pi[j][i]).is_zero()) throw std::domain_error("fedosov: Pi not skew");
    (void)omega_matrix();
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                if (!(gamma[k][i][j] == gamma[k][j][i])) throw std::domain_error("fedosov: torsion");
}

FedosovInput flat_input(int d) {
    if (d < 2 || d > 8 || d % 2) throw std::domain_error("fedosov: dimension must be even, 2..8");
    FedosovInput in;
    in.d = d;
    in.pi.assign(d, std::vector<GQ>(d, GQ(0)));
    for (int k = 0; k < d; k += 2) {
        in.pi[k][k + 1] = GQ(1);
        in.pi[k + 1][k] = GQ(-1);
    }
    in.gamma.assign(d, std::vector<std::vector<Poly>>(d, std::vector<Poly>(d, Poly(d))));
    in.omega = [d](int D) { return WeylElement(d, D); };
    return in;
}

FedosovInput flat_input_with_omega(const Poly& c) {
    auto in = flat_input(2);
    in.omega = [c](int D) {
        WeylElement w(2, D);
        w.add({1, Mono(2, 0), 0b11u}, c);
        return w;
    };
    return in;
}

FedosovInput symplectic_connection_input(int d, const std::vector<Poly>& S) {
    auto in = flat_input(d);
    if (static_cast<int>(S.size()) != d * d * d) throw std::domain_error("fedosov: S needs d^3 entries");
    for (int l = 0; l < d; ++l)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                Poly g(d);
                for (int i = 0; i < d; ++i)
                    if (!in.pi[l][i].is_zero()) g += S[i * d * d + j * d + k] * in.pi[l][i];
                in.gamma[l][j][k] = g;
            }
    return in;
}

WeylElement nabla(const WeylElement& a, const FedosovInput& in) {
    const int d = a.dim();
    WeylElement r(d, a.trunc());
    for (auto& [k, c] : a.terms())
        for (int i = 0; i < d; ++i) {
            if (k.dx >> i & 1u) continue;
            const GQ s(below(k.dx, i) % 2 ? -1 : 1);
            WeylKey n = k;
            n.dx |= 1u << i;
            // dx^i d/dx^i
            r.add(n, c.derivative(i) * s);
            // - Gamma^m_{ij} dx^i v^j d/dv^m
            for (int m = 0; m < d; ++m) {
                if (k.v[m] == 0) continue;
                for (int j = 0; j < d; ++j) {
                    const Poly& g = in.gamma[m][i][j];
                    if (g.is_zero()) continue;
                    WeylKey q = n;
                    q.v[m] -= 1;
                    q.v[j] += 1;
                    r.add(q, c * g * (s * GQ(-long(k.v[m]))));
                }
            }
        }
    return r;
}

WeylElement curvature(const FedosovInput& in, int D) {
    const int d = in.d;
    const auto w = in.omega_matrix();
    auto& G = in.gamma;
    WeylElement R(d, D);
    for (int r = 0; r < d; ++r)
        for (int l = 0; l < d; ++l)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    if (i == j) continue;
                    Poly Rr = G[r][j][l].derivative(i) - G[r][i][l].derivative(j);
                    for (int m = 0; m < d; ++m) Rr += G[r][i][m] * G[m][j][l] - G[r][j][m] * G[m][i][l];
                    if (Rr.is_zero()) continue;
                    const unsigned mask = (1u << i) | (1u << j);
                    const long s = i < j ? 1 : -1;
                    for (int k = 0; k < d; ++k) {
                        if (w[k][r].is_zero()) continue;
                        Mono v(d, 0);
                        v[k] += 1;
                        v[l] += 1;
                        R.add({0, v, mask}, Rr * (w[k][r] * frac(s, 4)));
                    }
                }
    return R;
}

WeylElement resolvent(const WeylElement& a, const FedosovInput& in) {
    WeylElement x = a;
    for (int it = 0; it <= a.trunc() + 2; ++it) {
        WeylElement nx = a + delta_inv(nabla(x, in));
        if (nx == x) return x;
        x = std::move(nx);
    }
    throw std::runtime_error("resolvent: no fixed point within the iteration bound");
}

FixedPointResult solve_R(const FedosovInput& in, int D, int max_iter) {
    in.validate();
    const int d = in.d;
    const WeylElement src = in.omega(D) + curvature(in, D);
    WeylElement r(d, D);
    for (int it = 1; it <= max_iter; ++it) {
        WeylElement quad = i_over_hbar_commutator(r, r, in.pi).scaled(frac(1, 2));
        WeylElement nr = delta_inv(src + nabla(r, in) + quad);
        if (nr == r) return {r, it};
        r = std::move(nr);
    }
    throw std::runtime_error("solve_R: no fixed point within the iteration bound");
}

long catalan_number(int n) {
    // C_n = binom(2n-2, n-1)/n, n >= 1
    if (n < 1) return 0;
    long c = 1;
    for (int k = 0; k < n - 1; ++k) c = c * 2 * (2 * k + 1) / (k + 2);
    return c;
}

CatalanResult catalan_R(const FedosovInput& in, int D, int max_leaves) {
    in.validate();
    const WeylElement z = resolvent(delta_inv(in.omega(D) + curvature(in, D)), in);
    auto bullet = [&](const WeylElement& a, const WeylElement& b) {
        return resolvent(delta_inv(i_over_hbar_commutator(a, b, in.pi).scaled(frac(1, 2))), in);
    };
    std::vector<std::vector<WeylElement>> trees(max_leaves + 1);
    trees[1] = {z};
    CatalanResult out{WeylElement(in.d, D), {}};
    for (int n = 1; n <= max_leaves; ++n) {
        if (n > 1)
            for (int k = 1; k < n; ++k)
                for (auto& l : trees[k])
                    for (auto& r : trees[n - k]) trees[n].push_back(bullet(l, r));
        out.trees_per_order.push_back(static_cast<long>(trees[n].size()));
        for (auto& t : trees[n]) out.R += t;
    }
    return out;
}

WeylElement fedosov_D(const WeylElement& a, const FedosovInput& in, const WeylElement& R) {
    return -delta(a) + nabla(a, in) + i_over_hbar_commutator(R, a, in.pi);
}

namespace {
WeylElement resolvent_R(const WeylElement& a, const FedosovInput& in, const WeylElement& R) {
    WeylElement x = a;
    for (int it = 0; it <= a.trunc() + 2; ++it) {
        WeylElement nx = a + delta_inv(nabla(x, in) + i_over_hbar_commutator(R, x, in.pi));
        if (nx == x) return x;
        x = std::move(nx);
    }
    throw std::runtime_error("fedosov: no fixed point within the iteration bound");
}
} // namespace

WeylElement fedosov_D_inv(const WeylElement& a, const FedosovInput& in, const WeylElement& R) {
    return -resolvent_R(delta_inv(a), in, R);
}

WeylElement fedosov_taylor(const FedosovInput& in, const WeylElement& R, const WeylElement& f) {
    return resolvent_R(f, in, R);
}

WeylElement fedosov_taylor(const FedosovInput& in, const Poly& f, int D) {
    auto R = solve_R(in, D).R;
    return fedosov_taylor(in, R, WeylElement::function(in.d, D, f));
}

WeylElement fedosov_star(const FedosovInput& in, const Poly& f, const Poly& g, int D) {
    auto R = solve_R(in, D).R;
    auto tf = fedosov_taylor(in, R, WeylElement::function(in.d, D, f));
    auto tg = fedosov_taylor(in, R, WeylElement::function(in.d, D, g));
    return sigma(weyl_product(tf, tg, in.pi));
}

WeylElement random_element(int d, int D, unsigned seed, int max_terms, int x_degree) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> coef(-3, 3), nterm(1, max_terms);
    WeylElement e(d, D);
    const int T = nterm(rng);
    for (int t = 0; t < T; ++t) {
        const int h = std::uniform_int_distribution<int>(0, D / 2)(rng);
        const int dv = std::uniform_int_distribution<int>(0, D - 2 * h)(rng);
        Mono v(d, 0);
        for (int k = 0; k < dv; ++k) v[std::uniform_int_distribution<int>(0, d - 1)(rng)]++;
        const unsigned mask = std::uniform_int_distribution<unsigned>(0, (1u << d) - 1)(rng);
        Poly c(d);
        for (int k = 0; k < 3; ++k) {
            Mono xm(d, 0);
            const int dx = std::uniform_int_distribution<int>(0, x_degree)(rng);
            for (int q = 0; q < dx; ++q) xm[std::uniform_int_distribution<int>(0, d - 1)(rng)]++;
            mpq_class re(coef(rng), 1 + std::abs(coef(rng))), im(coef(rng), 2);
            re.canonicalize();
            im.canonicalize();
            c.add_term(xm, GQ(re, im));
        }
        e.add({h, v, mask}, c);
    }
    return e;
}

} // namespace kw
