#pragma once

#include <complex>
#include <stdexcept>

namespace kw {

using cplx = std::complex<double>;

// lambda = 1/2: Kontsevich (arg) propagator, 1: logarithmic, 0: anti-logarithmic.
struct LambdaParam {
    cplx lambda{0.5, 0.0};
};

struct SingularityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kSingularGuard = 1e-12;

// Partials of phi^lambda(s,t): a = d/dt, abar = d/dtbar, b = d/ds, bbar = d/dsbar.
struct OneForm {
    cplx a, abar, b, bbar;

    // Real components of the target / source differentials.
    cplx target_dx() const { return a + abar; }
    cplx target_dy() const { return cplx(0, 1) * (a - abar); }
    cplx source_dx() const { return b + bbar; }
    cplx source_dy() const { return cplx(0, 1) * (b - bbar); }
};

// Upper half-plane, principal branch of ln. Ground points (Im = 0) are
// allowed for the target/source as limits; see propagators.cpp.
cplx phi_lambda_H(LambdaParam lam, cplx s, cplx t);
OneForm dphi_H(LambdaParam lam, cplx s, cplx t);

// Unit disk; the point 1 is the image of infinity.
cplx to_disk(cplx z);
cplx to_halfplane(cplx w);
cplx phi_log_disk(cplx ws, cplx wt);
cplx phi_lambda_disk(LambdaParam lam, cplx ws, cplx wt);
OneForm dphi_disk(LambdaParam lam, cplx ws, cplx wt);

// Shoikhet propagator phi(ws,wt) - phi(ws,0); the marked centre as a
// source has its own formula, normalised by the fixed unit vector u1.
cplx phi_shoikhet(LambdaParam lam, cplx ws, cplx wt);
cplx phi_shoikhet_center(LambdaParam lam, cplx wt, cplx u1);
OneForm dphi_shoikhet(LambdaParam lam, cplx ws, cplx wt);
OneForm dphi_shoikhet_center(LambdaParam lam, cplx wt);
// Central form (1/2 pi i)[lam ln(ws/wt) - (1-lam) ln(conj ws / conj wt)].
cplx phi_central(LambdaParam lam, cplx ws, cplx wt);

} // namespace kw
