#pragma once

// Exact Gaussian rationals and sparse multivariate polynomials over them
// (or over complex doubles, for expressions carrying sampled weights).

#include <complex>
#include <map>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace kw {

struct GQ {
    mpq_class re, im;

    GQ() = default;
    GQ(long r) : re(r), im(0) {}
    GQ(mpq_class r, mpq_class i = 0) : re(std::move(r)), im(std::move(i)) {}

    static GQ i() { return GQ(0, 1); }
    bool is_zero() const { return re == 0 && im == 0; }
    GQ conj() const { return GQ(re, -im); }
    std::complex<double> to_complex() const { return {re.get_d(), im.get_d()}; }
    std::string str() const;

    GQ& operator+=(const GQ& o) { re += o.re; im += o.im; return *this; }
    GQ& operator-=(const GQ& o) { re -= o.re; im -= o.im; return *this; }
    GQ& operator*=(const GQ& o) {
        mpq_class r = re * o.re - im * o.im;
        im = re * o.im + im * o.re;
        re = r;
        return *this;
    }
    GQ& operator/=(const GQ& o);
    friend GQ operator+(GQ a, const GQ& b) { return a += b; }
    friend GQ operator-(GQ a, const GQ& b) { return a -= b; }
    friend GQ operator*(GQ a, const GQ& b) { return a *= b; }
    friend GQ operator/(GQ a, const GQ& b) { return a /= b; }
    friend GQ operator-(const GQ& a) { return GQ(-a.re, -a.im); }
    friend bool operator==(const GQ& a, const GQ& b) { return a.re == b.re && a.im == b.im; }
};

template <class S> inline bool scalar_is_zero(const S& s) { return s == S(0); }
template <> inline bool scalar_is_zero<GQ>(const GQ& s) { return s.is_zero(); }

inline std::complex<double> to_cplx(const GQ& s) { return s.to_complex(); }
inline std::complex<double> to_cplx(const std::complex<double>& s) { return s; }

using Mono = std::vector<int>; // exponent per variable

template <class S> class PolyT {
public:
    PolyT() = default;
    explicit PolyT(int d) : d_(d) {}
    static PolyT constant(int d, S c) {
        PolyT p(d);
        p.add_term(Mono(d, 0), std::move(c));
        return p;
    }
    static PolyT variable(int d, int i) {
        PolyT p(d);
        Mono e(d, 0);
        e[i] = 1;
        p.add_term(e, S(1));
        return p;
    }
    static PolyT monomial(const Mono& e, S c = S(1)) {
        PolyT p(static_cast<int>(e.size()));
        p.add_term(e, std::move(c));
        return p;
    }

    int dim() const { return d_; }
    const std::map<Mono, S>& terms() const { return t_; }
    bool is_zero() const { return t_.empty(); }
    int degree() const {
        int m = -1;
        for (auto& [e, c] : t_) {
            int s = 0;
            for (int x : e) s += x;
            m = std::max(m, s);
        }
        return m;
    }

    void add_term(const Mono& e, S c) {
        if (scalar_is_zero(c)) return;
        auto it = t_.find(e);
        if (it == t_.end()) {
            t_.emplace(e, std::move(c));
            return;
        }
        it->second += c;
        if (scalar_is_zero(it->second)) t_.erase(it);
    }

    PolyT& operator+=(const PolyT& o) {
        adopt(o);
        for (auto& [e, c] : o.t_) add_term(e, c);
        return *this;
    }
    PolyT& operator-=(const PolyT& o) {
        adopt(o);
        for (auto& [e, c] : o.t_) add_term(e, -c);
        return *this;
    }
    PolyT& operator*=(const S& s) {
        if (scalar_is_zero(s)) { t_.clear(); return *this; }
        for (auto& [e, c] : t_) c *= s;
        return *this;
    }
    friend PolyT operator+(PolyT a, const PolyT& b) { return a += b; }
    friend PolyT operator-(PolyT a, const PolyT& b) { return a -= b; }
    friend PolyT operator*(PolyT a, const S& s) { return a *= s; }
    friend PolyT operator*(const S& s, PolyT a) { return a *= s; }
    friend PolyT operator*(const PolyT& a, const PolyT& b) {
        PolyT r(std::max(a.d_, b.d_));
        for (auto& [ea, ca] : a.t_)
            for (auto& [eb, cb] : b.t_) {
                Mono e(ea);
                for (std::size_t k = 0; k < e.size(); ++k) e[k] += eb[k];
                r.add_term(e, ca * cb);
            }
        return r;
    }
    friend bool operator==(const PolyT& a, const PolyT& b) { return a.t_ == b.t_; }

    PolyT derivative(int i) const {
        PolyT r(d_);
        for (auto& [e, c] : t_) {
            if (e[i] == 0) continue;
            Mono f(e);
            f[i] -= 1;
            r.add_term(f, c * S(e[i]));
        }
        return r;
    }
    // Apply prod_i d_i^{alpha_i}.
    PolyT derivative(const Mono& alpha) const {
        PolyT r = *this;
        for (std::size_t i = 0; i < alpha.size(); ++i)
            for (int k = 0; k < alpha[i]; ++k) r = r.derivative(static_cast<int>(i));
        return r;
    }

    std::string str(const std::vector<std::string>& names = {}) const;

private:
    void adopt(const PolyT& o) {
        if (d_ == 0) d_ = o.d_;
    }
    int d_ = 0;
    std::map<Mono, S> t_;
};

using Poly = PolyT<GQ>;
using CPoly = PolyT<std::complex<double>>;

inline CPoly to_cpoly(const Poly& p) {
    CPoly r(p.dim());
    for (auto& [e, c] : p.terms()) r.add_term(e, c.to_complex());
    return r;
}

// Parse "3/2*x^2*y - i*z + (x+1)^2". Variables are the given names or
// x1..xd; "i" is the imaginary unit.
PolyT<GQ> parse_poly(const std::string& s, int d, const std::vector<std::string>& names = {});

std::string scalar_str(const GQ& s);
std::string scalar_str(const std::complex<double>& s);

template <class S> std::string PolyT<S>::str(const std::vector<std::string>& names) const {
    if (t_.empty()) return "0";
    std::string out;
    for (auto& [e, c] : t_) {
        if (!out.empty()) out += " + ";
        out += "(" + scalar_str(c) + ")";
        for (std::size_t k = 0; k < e.size(); ++k) {
            if (e[k] == 0) continue;
            out += "*" + (k < names.size() ? names[k] : "x" + std::to_string(k + 1));
            if (e[k] > 1) out += "^" + std::to_string(e[k]);
        }
    }
    return out;
}

} // namespace kw
