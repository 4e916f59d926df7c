#pragma once

#include <complex>
#include <vector>

#include <gmpxx.h>

namespace kw {

double oscillatory_delta(long k);

// Oriented radial integral from b to a of r^n ln^m(r) dr (a, b in [0,1]).
double radial_log_integral(int n, int m, double a, double b);

// Partial sum of 1/(1-x) using the branch valid for |x|<1 or |x|>1.
std::complex<double> geometric_series(std::complex<double> x, int terms);

struct SeriesValue {
    double value = 0.0;
    double bound = 0.0; // rigorous truncation bound
    double partial = 0.0;
};

struct ZetaResult : SeriesValue {
    std::complex<double> weight; // (-1)^{n(n-1)/2} zeta(n) / (2 pi i)^n
};

ZetaResult merkulov_wheel_zeta(int n, long N);
// Plain partial sum of 1/l^n plus the integral-tail bracket; used as an
// independent reference.
SeriesValue zeta_partial(int n, long N);

struct ShadowSum : SeriesValue {
    int n = 0;
    double w_abs = 0.0;
    long N = 0;
};

ShadowSum shadow_sum(int n, double w_abs, long N);

// Corrected four-series combination of the 2-wheel shadow (x = |w|^2).
SeriesValue two_wheel_shadow(double w_abs, long N);

struct HarmonicIdentity {
    mpq_class lhs, rhs_merk, rhs_harm;
    bool all_equal() const { return lhs == rhs_merk && rhs_merk == rhs_harm; }
};

HarmonicIdentity harmonic_identity(int m);

// Term-by-term recipe value of the disk integral of
// f(conj w) (1/(w-p) + conj(p)/(1 - w conj p)) dwbar ^ dw.
struct VanishingTerms {
    std::complex<double> inner, outer, coupled, total;
};
VanishingTerms merkulov_vanishing_check(const std::vector<std::complex<double>>& f_coeffs,
                                        std::complex<double> p);

// Residue identity: integral over R of arctan(alpha x + beta)/(1+x^2).
struct ResidueCheck {
    double quadrature, closed_form;
};
ResidueCheck residue_formula_check(double alpha, double beta);

} // namespace kw
