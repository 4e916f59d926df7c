#include "kw/weight_series.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/binomial.hpp>

namespace kw {

namespace {

constexpr double kPi = std::numbers::pi;

// Neumaier compensated sum.
struct CompSum {
    double s = 0.0, c = 0.0;
    void add(double x) {
        const double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

double binom(int n, int k) { return boost::math::binomial_coefficient<double>(n, k); }

// r^{n+1} ln^k r, with the r -> 0 limit (n+1 > 0).
double rpow_log(int n, int k, double r) {
    if (r == 0.0) return 0.0;
    return std::pow(r, n + 1) * std::pow(std::log(r), k);
}

// sum_{L>N} L^k q^L for 0 <= q < 1.
double geometric_poly_tail(double q, int k, long N) {
    if (q == 0.0) return 0.0;
    const double rho = q * std::pow(1.0 + 1.0 / double(N), k);
    if (rho >= 1.0) return INFINITY;
    return std::pow(double(N + 1), k) * std::pow(q, double(N + 1)) / (1.0 - rho);
}

// integral_N^inf (1 + ln t)^k / t^2 dt
double log_square_tail(int k, long N) {
    const double l = 1.0 + std::log(double(N));
    double s = 0.0, f = 1.0;
    for (int j = 0; j <= k; ++j) {
        s += f * std::pow(l, k - j);
        f *= (k - j);
    }
    return s / double(N);
}

} // namespace

double oscillatory_delta(long k) { return k == 0 ? 2.0 * kPi : 0.0; }

double radial_log_integral(int n, int m, double a, double b) {
    if (m < 0) throw std::domain_error("radial_log_integral: m must be >= 0");
    auto ok = [&](double r) { return r >= 0.0 && r <= 1.0 && !(n <= -1 && r == 0.0); };
    if (!ok(a) || !ok(b)) throw std::domain_error("radial_log_integral: bounds outside (0,1]");
    if (a == b) return 0.0;
    if (n == -1) {
        // antiderivative ln^{m+1} r / (m+1)
        return (std::pow(std::log(a), m + 1) - std::pow(std::log(b), m + 1)) / (m + 1);
    }
    double s = 0.0, fact = 1.0;
    for (int j = 0; j <= m; ++j) {
        if (j > 0) fact *= j;
        const double c = (j % 2 ? -1.0 : 1.0) * fact / std::pow(double(n + 1), j + 1) * binom(m, j);
        s += c * (rpow_log(n, m - j, a) - rpow_log(n, m - j, b));
    }
    return s;
}

std::complex<double> geometric_series(std::complex<double> x, int terms) {
    const double ax = std::abs(x);
    if (ax == 1.0) throw std::domain_error("geometric_series: |x| = 1");
    std::complex<double> s = 0.0, p = 1.0;
    if (ax < 1.0) {
        for (int l = 0; l < terms; ++l, p *= x) s += p;
        return s;
    }
    const std::complex<double> y = 1.0 / x;
    p = y;
    for (int l = 0; l < terms; ++l, p *= y) s -= p;
    return s;
}

SeriesValue zeta_partial(int n, long N) {
    if (n < 2) throw std::domain_error("zeta_partial: n >= 2");
    CompSum s;
    for (long l = N; l >= 1; --l) s.add(std::pow(double(l), -n));
    // (N+1)^{1-n}/(n-1) <= tail <= N^{1-n}/(n-1)
    const double lo = std::pow(double(N + 1), 1 - n) / (n - 1);
    const double hi = std::pow(double(N), 1 - n) / (n - 1);
    SeriesValue r;
    r.partial = s.value();
    r.value = r.partial + 0.5 * (lo + hi);
    r.bound = 0.5 * (hi - lo) + 4e-16 * r.value;
    return r;
}

ZetaResult merkulov_wheel_zeta(int n, long N) {
    if (n < 2) throw std::domain_error("merkulov_wheel_zeta: n >= 2");
    // Hub at 0: every rim vertex contributes one coupled pair of geometric
    // series; TI forces a common index l, and each radial factor is
    // 2 * int_0^1 r^{2l+1} dr = 1/(l+1). The (2 pi / i)^n prefactor is stripped.
    CompSum s;
    for (long l = N - 1; l >= 0; --l) {
        double term = 1.0;
        for (int i = 0; i < n; ++i) {
            const double angular = oscillatory_delta(0) / (2.0 * kPi);
            term *= angular * 2.0 * radial_log_integral(int(2 * l + 1), 0, 1.0, 0.0);
        }
        s.add(term);
    }
    const double lo = std::pow(double(N + 1), 1 - n) / (n - 1);
    const double hi = std::pow(double(N), 1 - n) / (n - 1);
    ZetaResult r;
    r.partial = s.value();
    r.value = r.partial + 0.5 * (lo + hi);
    r.bound = 0.5 * (hi - lo) + 1e-14 * r.value;
    const std::complex<double> tpi(0.0, 2.0 * kPi);
    const double sign = ((n * (n - 1) / 2) % 2) ? -1.0 : 1.0;
    r.weight = sign * r.value / std::pow(tpi, n);
    return r;
}

ShadowSum shadow_sum(int n, double w_abs, long N) {
    if (n < 2) throw std::domain_error("shadow_sum: n >= 2");
    if (!(w_abs > 0.0 && w_abs <= 0.8)) throw std::domain_error("shadow_sum: need 0 < |w| <= 0.8");
    if (N < 1) throw std::domain_error("shadow_sum: N >= 1");
    const double x = w_abs * w_abs;

    std::vector<double> xp(N + 1), inv(N + 1), om(N + 1);
    xp[0] = 1.0;
    for (long l = 1; l <= N; ++l) {
        xp[l] = xp[l - 1] * x;
        inv[l] = 1.0 / double(l);
        om[l] = 1.0 - xp[l];
    }

    // Contributions grouped by the maximal index L = l_K before summation.
    std::vector<long double> tot(N + 1, 0.0L);
    std::vector<double> A(N + 1), G(N + 1);

    for (int m = 0; m < n; ++m) {
        for (int mp = 0; m + mp < n; ++mp) {
            const int K = m + mp + 1;
            const double coef = (mp % 2 ? -1.0 : 1.0) * binom(n, m) * binom(n - m, mp);
            // exponent of x^{l_i}: -1 at i=1, +1 for m+1 <= i <= K
            auto weight = [&](int i, long l) {
                double v = inv[l];
                int c = (i == 1 ? -1 : 0) + (i >= m + 1 && i <= K ? 1 : 0);
                if (c == 1 && !(i == K && m >= 1)) v *= xp[l];
                if (i < 2 || i > K) v *= om[l];
                return v;
            };
            if (K == 1) {
                for (long l = 1; l <= N; ++l) {
                    double p = 1.0;
                    for (int i = 1; i <= n; ++i) p *= weight(i, l);
                    tot[l] += coef * p;
                }
                continue;
            }
            for (long l1 = 1; l1 <= N; ++l1) {
                // strict chain l1 < l2 < ... < lK
                std::fill(A.begin() + l1, A.end(), 0.0);
                A[l1] = weight(1, l1);
                for (int i = 2; i <= K; ++i) {
                    double run = 0.0;
                    for (long l = l1; l <= N; ++l) {
                        const double prev = A[l];
                        double v = run * weight(i, l);
                        // x^{-l1} folded into the last strict index
                        if (i == K && m >= 1) v *= xp[l - l1];
                        A[l] = v;
                        run += prev;
                    }
                }
                // weak chain l1 <= l_n <= ... <= l_{K+1} <= l_K
                std::fill(G.begin() + l1, G.end(), 1.0);
                for (int j = n; j > K; --j) {
                    double run = 0.0;
                    for (long l = l1; l <= N; ++l) {
                        run += weight(j, l) * G[l];
                        G[l] = run;
                    }
                }
                for (long l = l1 + 1; l <= N; ++l) tot[l] += coef * A[l] * G[l];
            }
        }
    }

    CompSum s;
    for (long l = 1; l <= N; ++l) s.add(double(tot[l]));

    // Tail over L > N, block by block (see README for the derivation).
    double bound = 0.0;
    for (int m = 0; m < n; ++m) {
        for (int mp = 0; m + mp < n; ++mp) {
            const int K = m + mp + 1;
            const double c = binom(n, m) * binom(n - m, mp);
            double t;
            if (K == 1) {
                t = std::pow(double(N), 1 - n) / (n - 1);
            } else if (m == 0) {
                t = geometric_poly_tail(x, std::max(n - 2, 0), N);
            } else {
                t = 2.0 * x / (1.0 - x) * log_square_tail(n - 2, N) +
                    geometric_poly_tail(std::sqrt(x), std::max(n - 3, 0), N) / (1.0 - x);
            }
            bound += c * t;
        }
    }

    ShadowSum r;
    r.n = n;
    r.w_abs = w_abs;
    r.N = N;
    r.partial = s.value();
    r.value = r.partial;
    r.bound = bound + 1e-13 * std::abs(r.value);
    return r;
}

SeriesValue two_wheel_shadow(double w_abs, long N) {
    if (!(w_abs > 0.0 && w_abs <= 0.8)) throw std::domain_error("two_wheel_shadow: need 0 < |w| <= 0.8");
    if (N < 64) throw std::domain_error("two_wheel_shadow: N >= 64");
    const double x = w_abs * w_abs;
    std::vector<double> xp(N + 1);
    xp[0] = 1.0;
    for (long l = 1; l <= N; ++l) xp[l] = xp[l - 1] * x;

    // sum (1-x^m)^2/(2m^2) - sum_{L2>L1} (2 - x^{L1}) x^{L2}/(L1 L2) + sum x^m H_m / m
    CompSum s;
    for (long l = N; l >= 1; --l) {
        const double om = 1.0 - xp[l];
        s.add(om * om / (2.0 * double(l) * double(l)));
    }
    double H = 0.0, P = 0.0; // H_{L2-1}, sum_{L1<L2} x^{L1}/L1
    CompSum b, c;
    for (long l2 = 1; l2 <= N; ++l2) {
        b.add(xp[l2] / double(l2) * (2.0 * H - P));
        H += 1.0 / double(l2);
        P += xp[l2] / double(l2);
        c.add(xp[l2] * H / double(l2));
    }
    const double A = s.value(), B = b.value(), C = c.value();

    // tail of the first series lies in [(1-x^{N+1})^2/(2(N+1)), 1/(2N)]
    const double lo = std::pow(1.0 - std::pow(x, double(N + 1)), 2) / (2.0 * double(N + 1));
    const double hi = 1.0 / (2.0 * double(N));
    SeriesValue r;
    r.partial = A - B + C;
    r.value = r.partial + 0.5 * (lo + hi);
    // slices of the other two series are below 2 x^L and x^L (H_L <= L)
    r.bound = 0.5 * (hi - lo) + 3.0 * geometric_poly_tail(x, 0, N) + 1e-14;
    return r;
}

HarmonicIdentity harmonic_identity(int m) {
    if (m < 1) throw std::domain_error("harmonic_identity: m >= 1 (m = 0 gives zeta(2))");
    HarmonicIdentity r;
    // lhs: exact partial sum up to L plus the telescoped remainder
    // sum_{l>L} 1/(l(m+l)) = (1/m) sum_{k=L+1}^{L+m} 1/k.
    const int L = 2 * m;
    mpq_class part = 0, rem = 0;
    for (int l = 1; l <= L; ++l) part += mpq_class(1, l * (m + l));
    for (int k = L + 1; k <= L + m; ++k) rem += mpq_class(1, k);
    r.lhs = part + rem / m;
    r.lhs.canonicalize();

    mpq_class merk = 0;
    for (int l = 1; l < m; ++l) merk += mpq_class(2, l);
    merk /= m;
    for (int l2 = 1; 2 * l2 < m; ++l2) merk -= mpq_class(1, l2 * (m - l2));
    mpq_class sq(1, m * m);
    if (m % 2) merk += sq;
    else merk -= sq;
    merk.canonicalize();
    r.rhs_merk = merk;

    mpq_class h = 0;
    for (int l = 1; l <= m; ++l) h += mpq_class(1, l);
    r.rhs_harm = h / m;
    r.rhs_harm.canonicalize();
    return r;
}

VanishingTerms merkulov_vanishing_check(const std::vector<std::complex<double>>& f_coeffs,
                                        std::complex<double> p) {
    if (!(std::abs(p) < 1.0)) throw std::domain_error("merkulov_vanishing_check: |p| < 1");
    using C = std::complex<double>;
    const C I(0.0, 1.0);
    const double rp = std::abs(p);
    // dwbar ^ dw = 2i r dr dphi; f(wbar) = sum a_n r^n e^{-i n phi}
    VanishingTerms t;
    for (std::size_t k = 0; k < f_coeffs.size(); ++k) {
        const C an = f_coeffs[k];
        const int n = int(k);
        if (an == 0.0) continue;
        // |w| < |p|: 1/(w-p) = -(1/p) sum_j (w/p)^j, TI forces j = n
        t.inner += 2.0 * I * an * (-1.0 / p) * std::pow(p, -n) * oscillatory_delta(0) *
                   radial_log_integral(2 * n + 1, 0, rp, 0.0);
        // |w| > |p|: 1/(w-p) = sum_j p^j / w^{j+1}; TI needs n + j + 1 = 0
        for (int j = 0; j <= n + 1; ++j)
            t.outer += 2.0 * I * an * std::pow(p, j) * oscillatory_delta(n + j + 1) *
                       radial_log_integral(n - j, 0, 1.0, rp);
        // conj(p)/(1 - w conj(p)) = conj(p) sum_j (w conj p)^j, TI forces j = n
        t.coupled += 2.0 * I * an * std::conj(p) * std::pow(std::conj(p), n) * oscillatory_delta(0) *
                     radial_log_integral(2 * n + 1, 0, 1.0, 0.0);
    }
    t.total = t.inner + t.outer + t.coupled;
    return t;
}

ResidueCheck residue_formula_check(double alpha, double beta) {
    if (alpha + 1.0 <= 0.0) throw std::domain_error("residue_formula_check: need alpha > -1");
    boost::math::quadrature::tanh_sinh<double> ts;
    // x = tan(u) maps R to (-pi/2, pi/2) and absorbs 1/(1+x^2)
    auto f = [&](double u) { return std::atan(alpha * std::tan(u) + beta); };
    ResidueCheck r;
    r.quadrature = ts.integrate(f, -kPi / 2, kPi / 2);
    r.closed_form = kPi * std::atan(beta / (alpha + 1.0));
    return r;
}

} // namespace kw
