#include "kw/algebra.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>

namespace kw {

GQ& GQ::operator/=(const GQ& o) {
    const mpq_class den = o.re * o.re + o.im * o.im;
    if (den == 0) throw std::domain_error("GQ: division by zero");
    mpq_class r = (re * o.re + im * o.im) / den;
    im = (im * o.re - re * o.im) / den;
    re = r;
    return *this;
}

std::string GQ::str() const {
    if (im == 0) return re.get_str();
    if (re == 0) return im.get_str() + "i";
    return re.get_str() + (im > 0 ? "+" : "") + im.get_str() + "i";
}

std::string scalar_str(const GQ& s) { return s.str(); }

std::string scalar_str(const std::complex<double>& s) {
    std::ostringstream o;
    o.precision(12);
    o << s.real() << (s.imag() < 0 ? "" : "+") << s.imag() << "i";
    return o.str();
}

} // namespace kw

namespace kw {

namespace {

class PolyParser {
public:
    PolyParser(const std::string& s, int d, const std::vector<std::string>& names)
        : s_(s), d_(d), names_(names) {}

    Poly run() {
        Poly p = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return p;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw std::invalid_argument("polynomial '" + s_ + "': " + why + " at position " + std::to_string(pos_));
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    mpz_class integer() {
        skip();
        const std::size_t b = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (b == pos_) fail("expected a number");
        return mpz_class(s_.substr(b, pos_ - b));
    }
    Poly expr() {
        Poly p(d_);
        bool neg = eat('-');
        if (!neg) eat('+');
        for (;;) {
            Poly t = term();
            if (neg) p -= t;
            else p += t;
            if (eat('+')) neg = false;
            else if (eat('-')) neg = true;
            else return p;
        }
    }
    Poly term() {
        Poly p = power();
        while (eat('*')) p = p * power();
        return p;
    }
    Poly power() {
        Poly b = factor();
        if (!eat('^')) return b;
        const mpz_class e = integer();
        if (e > 64) fail("exponent too large");
        Poly r = Poly::constant(d_, GQ(1));
        for (long k = 0; k < e.get_si(); ++k) r = r * b;
        return r;
    }
    Poly factor() {
        skip();
        if (eat('(')) {
            Poly p = expr();
            if (!eat(')')) fail("missing ')'");
            return p;
        }
        if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            mpq_class q(integer());
            if (eat('/')) {
                const mpz_class den = integer();
                if (den == 0) fail("division by zero");
                q /= den;
            }
            return Poly::constant(d_, GQ(q));
        }
        const std::size_t b = pos_;
        while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        const std::string id = s_.substr(b, pos_ - b);
        if (id.empty()) fail("expected a term");
        if (id == "i") return Poly::constant(d_, GQ::i());
        for (int k = 0; k < d_; ++k) {
            const std::string nm = k < static_cast<int>(names_.size()) ? names_[k] : "x" + std::to_string(k + 1);
            if (id == nm || id == "x" + std::to_string(k + 1)) return Poly::variable(d_, k);
        }
        fail("unknown variable '" + id + "'");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
    int d_;
    const std::vector<std::string>& names_;
};

} // namespace

PolyT<GQ> parse_poly(const std::string& s, int d, const std::vector<std::string>& names) {
    return PolyParser(s, d, names).run();
}

} // namespace kw
