#include "kw/propagators.hpp"

#include <cmath>
#include <numbers>

namespace kw {

namespace {

const cplx I(0.0, 1.0);
const cplx TWO_PI_I(0.0, 2.0 * std::numbers::pi);

void guard_pair(cplx s, cplx t) {
    if (std::abs(s - t) < kSingularGuard)
        throw SingularityError("propagator: coincident points");
}

void guard_H_source(cplx s) {
    if (!(s.imag() > 0.0))
        throw std::domain_error("propagator: source must lie in the open upper half-plane");
}

void guard_disk(cplx w) {
    if (std::abs(w) > 1.0 + 1e-14)
        throw std::domain_error("propagator: point outside the closed unit disk");
    if (std::abs(w - 1.0) < kSingularGuard)
        throw SingularityError("propagator: the point 1 is the image of infinity");
}

// phi = (1/2 pi i)[lam F - (1-lam) conj(F)] for a log F with partials
// (Ft, Fs, Fsb) holomorphic in the target.
OneForm combine(cplx lam, cplx Ft, cplx Fs, cplx Fsb) {
    OneForm f;
    f.a = lam * Ft / TWO_PI_I;
    f.abar = -(1.0 - lam) * std::conj(Ft) / TWO_PI_I;
    f.b = (lam * Fs - (1.0 - lam) * std::conj(Fsb)) / TWO_PI_I;
    f.bbar = (lam * Fsb - (1.0 - lam) * std::conj(Fs)) / TWO_PI_I;
    return f;
}

} // namespace

cplx phi_lambda_H(LambdaParam lam, cplx s, cplx t) {
    guard_H_source(s);
    if (t.imag() < 0.0)
        throw std::domain_error("propagator: target below the real axis");
    guard_pair(s, t);
    const cplx L = std::log((t - s) / (t - std::conj(s)));
    return (lam.lambda * L - (1.0 - lam.lambda) * std::conj(L)) / TWO_PI_I;
}

OneForm dphi_H(LambdaParam lam, cplx s, cplx t) {
    guard_H_source(s);
    if (t.imag() < 0.0)
        throw std::domain_error("propagator: target below the real axis");
    guard_pair(s, t);
    const cplx sb = std::conj(s);
    // F = ln(t-s) - ln(t-sb)
    const cplx Ft = 1.0 / (t - s) - 1.0 / (t - sb);
    const cplx Fs = -1.0 / (t - s);
    const cplx Fsb = 1.0 / (t - sb);
    return combine(lam.lambda, Ft, Fs, Fsb);
}

cplx to_disk(cplx z) { return (z - I) / (z + I); }
cplx to_halfplane(cplx w) { return I * (1.0 + w) / (1.0 - w); }

namespace {
cplx lnX(cplx ws, cplx wt) {
    const cplx wsb = std::conj(ws);
    return std::log((1.0 - wsb) * (ws - wt) / ((1.0 - ws) * (1.0 - wsb * wt)));
}
} // namespace

cplx phi_log_disk(cplx ws, cplx wt) {
    guard_disk(ws);
    guard_disk(wt);
    guard_pair(ws, wt);
    return lnX(ws, wt) / TWO_PI_I;
}

cplx phi_lambda_disk(LambdaParam lam, cplx ws, cplx wt) {
    guard_disk(ws);
    guard_disk(wt);
    guard_pair(ws, wt);
    const cplx L = lnX(ws, wt);
    return (lam.lambda * L - (1.0 - lam.lambda) * std::conj(L)) / TWO_PI_I;
}

OneForm dphi_disk(LambdaParam lam, cplx ws, cplx wt) {
    guard_disk(ws);
    guard_disk(wt);
    guard_pair(ws, wt);
    const cplx wsb = std::conj(ws);
    const cplx Ft = -1.0 / (ws - wt) + wsb / (1.0 - wsb * wt);
    const cplx Fs = 1.0 / (ws - wt) + 1.0 / (1.0 - ws);
    const cplx Fsb = -1.0 / (1.0 - wsb) + wt / (1.0 - wsb * wt);
    return combine(lam.lambda, Ft, Fs, Fsb);
}

cplx phi_shoikhet(LambdaParam lam, cplx ws, cplx wt) {
    if (std::abs(ws) < kSingularGuard)
        throw SingularityError("shoikhet: use the centre formula for the marked vertex");
    guard_pair(ws, wt);
    const cplx L = std::log((ws - wt) / (ws * (1.0 - std::conj(ws) * wt)));
    return (lam.lambda * L - (1.0 - lam.lambda) * std::conj(L)) / TWO_PI_I;
}

cplx phi_shoikhet_center(LambdaParam lam, cplx wt, cplx u1) {
    if (std::abs(wt) < kSingularGuard)
        throw SingularityError("shoikhet: target at the centre");
    const cplx L = std::log(wt / u1);
    return (lam.lambda * L - (1.0 - lam.lambda) * std::conj(L)) / TWO_PI_I;
}

OneForm dphi_shoikhet(LambdaParam lam, cplx ws, cplx wt) {
    if (std::abs(ws) < kSingularGuard)
        throw SingularityError("shoikhet: use the centre formula for the marked vertex");
    guard_pair(ws, wt);
    const cplx wsb = std::conj(ws);
    const cplx Ft = -1.0 / (ws - wt) + wsb / (1.0 - wsb * wt);
    const cplx Fs = 1.0 / (ws - wt) - 1.0 / ws;
    const cplx Fsb = wt / (1.0 - wsb * wt);
    return combine(lam.lambda, Ft, Fs, Fsb);
}

OneForm dphi_shoikhet_center(LambdaParam lam, cplx wt) {
    if (std::abs(wt) < kSingularGuard)
        throw SingularityError("shoikhet: target at the centre");
    return combine(lam.lambda, 1.0 / wt, 0.0, 0.0);
}

cplx phi_central(LambdaParam lam, cplx ws, cplx wt) {
    if (std::abs(ws) < kSingularGuard || std::abs(wt) < kSingularGuard)
        throw SingularityError("central propagator: point at the centre");
    const cplx L = std::log(ws / wt);
    return (lam.lambda * L - (1.0 - lam.lambda) * std::conj(L)) / TWO_PI_I;
}

} // namespace kw
