#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kw/graphs.hpp"
#include "kw/propagators.hpp"

namespace kw {

enum class Convention {
    Raw,       // integral of the wedge of dphi, (1/2pi)^|E| folded into dphi
    Formality, // Raw times prod_v 1/|Star(v)|!
};

std::string to_string(Convention c);
Convention convention_from_string(const std::string& s);

enum class Sampler { Plain, Sobol };

struct WeightEstimate {
    cplx value{};
    double stderr_ = 0.0; // |complex| standard error of the mean
    double stderr_re = 0.0;
    double stderr_im = 0.0;
    std::uint64_t n_samples = 0;
    std::uint64_t seed = 0;
    GraphKey key;
    cplx lambda{};
    Convention convention = Convention::Raw;
};

struct McOptions {
    Convention convention = Convention::Raw;
    Sampler sampler = Sampler::Plain;
    unsigned threads = 1;
    int max_retries = 64;
};

// Real dimension of C_{n,m}: 2n + m - 2.
int config_dimension(const AdmissibleGraph& g);
double formality_factor(const AdmissibleGraph& g);
// Edge count differs from the dimension, or a 1-valent aerial vertex can be
// integrated out: the weight is exactly 0 and no sampling happens.
bool vanishes_by_degree(const AdmissibleGraph& g);

// Orientation sign applied to every raw determinant; fixed so that the
// (1,m) fan graphs integrate to +1/m! (see README).
inline constexpr double kOrientationSign = 1.0;

WeightEstimate weight_mc(const AdmissibleGraph& g, LambdaParam lam, std::uint64_t n_samples,
                         std::uint64_t seed, const McOptions& opt = {});

// Same random configurations for every lambda (common random numbers).
std::vector<WeightEstimate> weight_mc_multi(const AdmissibleGraph& g,
                                            const std::vector<cplx>& lambdas,
                                            std::uint64_t n_samples, std::uint64_t seed,
                                            const McOptions& opt = {});

// Top-form density (determinant times sampling Jacobian) at one point of the
// unit cube [0,1)^d, for each lambda. Exposed for gauge-invariance tests.
// Returns false when the point hits the singular guard.
bool sample_integrand(const AdmissibleGraph& g, const std::vector<cplx>& lambdas,
                      const std::vector<double>& u, std::vector<cplx>& out);

// Determinant of the edge/coordinate coefficient matrix at an explicit
// configuration: aerial points z (z[0] is the gauge-fixed vertex) and ground
// points r. No Jacobian.
cplx top_form(const AdmissibleGraph& g, LambdaParam lam, const std::vector<cplx>& z,
              const std::vector<double>& r);

struct PolyFit {
    std::vector<cplx> coeffs;   // a_0..a_D, W(lambda) = sum a_i lambda^i
    std::vector<double> stderr_; // per coefficient, |complex|
    std::vector<double> stderr_re, stderr_im;
    std::uint64_t n_samples = 0;
};

PolyFit weight_poly_fit(const AdmissibleGraph& g, int degree_bound,
                        const std::vector<cplx>& samples, std::uint64_t n_samples,
                        std::uint64_t seed, const McOptions& opt = {});

cplx eval_poly(const std::vector<cplx>& c, cplx x);

// ---- two-valent disk integrals ----
enum class TwoValentKind { InOut, InIn, OutOut };
TwoValentKind two_valent_kind_from_string(const std::string& s);

enum class PropagatorFamily { Kontsevich, Shoikhet };

struct QuadOptions {
    int theta_panels = 48;
    int rho_panels = 24;
};

// in-out: dphi(w,w1) ^ dphi(w2,w); in-in: dphi(w1,w) ^ dphi(w2,w);
// out-out: dphi(w,w1) ^ dphi(w,w2); integrated over w in the unit disk
// with orientation dx ^ dy.
cplx two_valent_integral(TwoValentKind kind, cplx w1, cplx w2, LambdaParam lam,
                         PropagatorFamily fam = PropagatorFamily::Kontsevich,
                         const QuadOptions& q = {});

double out_out_closed_form(cplx w1, cplx w2);

// ---- persistent cache (JSON lines, append-only) ----
struct CacheKey {
    GraphKey key;
    cplx lambda;
    std::uint64_t seed = 0;
    std::uint64_t n_samples = 0;
    Convention convention = Convention::Raw;
};

class WeightCache {
public:
    explicit WeightCache(std::string path);

    // Exact key match on (graph key, lambda, seed, n_samples, convention).
    std::optional<WeightEstimate> get(const CacheKey& k) const;
    // All records for (graph key, lambda, convention), pooled.
    std::optional<WeightEstimate> get_pooled(const GraphKey& key, cplx lambda,
                                             Convention c) const;
    void put(const WeightEstimate& e);

    const std::string& path() const { return path_; }
    std::size_t skipped_records() const { return skipped_; }

private:
    std::vector<WeightEstimate> load() const;
    std::string path_;
    mutable std::size_t skipped_ = 0;
};

// Inverse-variance pooling.
WeightEstimate pool(const WeightEstimate& a, const WeightEstimate& b);

} // namespace kw
