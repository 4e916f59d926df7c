#include "kw/weight_mc.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/random/sobol.hpp>
#include <boost/random/uniform_01.hpp>

#include "json.hpp"

namespace kw {

using std::numbers::pi;

std::string to_string(Convention c) { return c == Convention::Raw ? "raw" : "formality"; }

Convention convention_from_string(const std::string& s) {
    if (s == "raw")
        return Convention::Raw;
    if (s == "formality")
        return Convention::Formality;
    throw std::invalid_argument("unknown convention '" + s + "'");
}

int config_dimension(const AdmissibleGraph& g) { return 2 * g.n() + g.m() - 2; }

bool vanishes_by_degree(const AdmissibleGraph& g) {
    if (static_cast<int>(g.edges().size()) != config_dimension(g)) return true;
    // A 1-valent aerial vertex integrates one 1-form over two dimensions once
    // the group fixes another aerial vertex or two ground vertices.
    if (g.n() < 2 && g.m() < 2) return false;
    for (int v = 0; v < g.n(); ++v)
        if (g.star_size(v) + g.in_degree(v) == 1) return true;
    return false;
}

double formality_factor(const AdmissibleGraph& g) {
    double f = 1.0;
    for (int v = 0; v < g.n(); ++v)
        for (int k = 2; k <= g.star_size(v); ++k)
            f /= k;
    return f;
}

namespace {

// LU with partial pivoting; matrices here are at most ~8x8.
cplx det(std::vector<cplx>& a, int d) {
    cplx res = 1.0;
    for (int c = 0; c < d; ++c) {
        int piv = c;
        for (int r = c + 1; r < d; ++r)
            if (std::abs(a[r * d + c]) > std::abs(a[piv * d + c]))
                piv = r;
        if (a[piv * d + c] == 0.0)
            return 0.0;
        if (piv != c) {
            for (int k = 0; k < d; ++k)
                std::swap(a[c * d + k], a[piv * d + k]);
            res = -res;
        }
        res *= a[c * d + c];
        for (int r = c + 1; r < d; ++r) {
            const cplx f = a[r * d + c] / a[c * d + c];
            for (int k = c; k < d; ++k)
                a[r * d + k] -= f * a[c * d + k];
        }
    }
    return res;
}

struct Config {
    std::vector<cplx> z;    // aerial, z[0] = i
    std::vector<double> r;  // ground, increasing
};

bool too_close(const Config& c) {
    for (std::size_t a = 0; a < c.z.size(); ++a) {
        for (std::size_t b = a + 1; b < c.z.size(); ++b)
            if (std::abs(c.z[a] - c.z[b]) < kSingularGuard)
                return true;
        for (double r : c.r)
            if (std::abs(c.z[a] - r) < kSingularGuard)
                return true;
    }
    for (std::size_t a = 1; a < c.r.size(); ++a)
        if (c.r[a] - c.r[a - 1] < kSingularGuard)
            return true;
    return false;
}

cplx top_form_config(const AdmissibleGraph& g, cplx lam, const Config& c, std::vector<cplx>& M) {
    const int n = g.n();
    const int d = config_dimension(g);
    if (d == 0)
        return 1.0;
    M.assign(static_cast<std::size_t>(d) * d, 0.0);
    auto point = [&](int v) -> cplx { return g.is_aerial(v) ? c.z[v] : cplx(c.r[v - n], 0.0); };
    int row = 0;
    for (const auto& e : g.edges()) {
        const OneForm f = dphi_H(LambdaParam{lam}, point(e.src), point(e.dst));
        cplx* R = &M[static_cast<std::size_t>(row) * d];
        if (e.src > 0) {
            R[2 * (e.src - 1)] += f.source_dx();
            R[2 * (e.src - 1) + 1] += f.source_dy();
        }
        if (g.is_aerial(e.dst)) {
            if (e.dst > 0) {
                R[2 * (e.dst - 1)] += f.target_dx();
                R[2 * (e.dst - 1) + 1] += f.target_dy();
            }
        } else {
            R[2 * (n - 1) + (e.dst - n)] += f.target_dx();
        }
        ++row;
    }
    return kOrientationSign * det(M, d);
}

// Map a point of the unit cube to a configuration; returns the Jacobian.
double map_cube(const AdmissibleGraph& g, const std::vector<double>& u, Config& c) {
    const int n = g.n(), m = g.m();
    c.z.assign(n, cplx(0.0, 1.0));
    c.r.assign(m, 0.0);
    double J = 1.0;
    for (int j = 1; j < n; ++j) {
        const double rho = u[2 * (j - 1)];
        const double th = 2.0 * pi * u[2 * (j - 1) + 1];
        const cplx w = std::polar(rho, th);
        c.z[j] = cplx(0.0, 1.0) * (1.0 + w) / (1.0 - w);
        const double q = std::norm(1.0 - w);
        J *= 2.0 * pi * rho * 4.0 / (q * q);
    }
    std::vector<double> us(u.begin() + 2 * (n - 1), u.begin() + 2 * (n - 1) + m);
    std::sort(us.begin(), us.end());
    double fact = 1.0;
    for (int k = 0; k < m; ++k) {
        c.r[k] = std::tan(pi * (us[k] - 0.5));
        J *= pi * (1.0 + c.r[k] * c.r[k]);
        fact *= (k + 1);
    }
    return J / fact;
}

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct Accum {
    std::vector<long double> sr, si, qr, qi;
    std::uint64_t n = 0;
    explicit Accum(std::size_t k = 0) : sr(k), si(k), qr(k), qi(k) {}
    void add(const std::vector<cplx>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            sr[i] += v[i].real();
            si[i] += v[i].imag();
            qr[i] += static_cast<long double>(v[i].real()) * v[i].real();
            qi[i] += static_cast<long double>(v[i].imag()) * v[i].imag();
        }
        ++n;
    }
    void merge(const Accum& o) {
        for (std::size_t i = 0; i < sr.size(); ++i) {
            sr[i] += o.sr[i];
            si[i] += o.si[i];
            qr[i] += o.qr[i];
            qi[i] += o.qi[i];
        }
        n += o.n;
    }
};

struct Moments {
    std::vector<cplx> mean;
    std::vector<double> se_re, se_im;
    std::uint64_t n = 0;
};

Moments finish(const Accum& a) {
    Moments m;
    m.n = a.n;
    const long double N = static_cast<long double>(a.n);
    for (std::size_t i = 0; i < a.sr.size(); ++i) {
        const long double mr = a.sr[i] / N, mi = a.si[i] / N;
        m.mean.emplace_back(static_cast<double>(mr), static_cast<double>(mi));
        const long double vr = std::max<long double>(0, a.qr[i] / N - mr * mr);
        const long double vi = std::max<long double>(0, a.qi[i] / N - mi * mi);
        const long double den = N > 1 ? N - 1 : 1;
        m.se_re.push_back(static_cast<double>(std::sqrt(vr / den)));
        m.se_im.push_back(static_cast<double>(std::sqrt(vi / den)));
    }
    return m;
}

using SampleFn = std::function<bool(const std::vector<double>&, std::vector<cplx>&)>;

constexpr std::uint64_t kChunk = 1u << 15;

// Plain MC: fixed chunking so results do not depend on the thread count.
Moments run_plain(int dim, std::size_t K, std::uint64_t N, std::uint64_t seed, const McOptions& opt,
                  const SampleFn& fn) {
    const std::uint64_t nchunks = (N + kChunk - 1) / kChunk;
    std::vector<Accum> parts(nchunks, Accum(K));
    std::atomic<std::uint64_t> next{0};
    std::mutex err_mu;
    std::exception_ptr err;
    auto worker = [&] {
        std::vector<double> u(dim);
        std::vector<cplx> out(K);
        for (;;) {
            const std::uint64_t c = next++;
            if (c >= nchunks)
                return;
            std::mt19937_64 rng(splitmix(seed ^ splitmix(c + 1)));
            std::uniform_real_distribution<double> U(0.0, 1.0);
            const std::uint64_t cnt = std::min(kChunk, N - c * kChunk);
            try {
                for (std::uint64_t s = 0; s < cnt; ++s) {
                    int tries = 0;
                    for (;;) {
                        for (auto& x : u)
                            x = U(rng);
                        if (fn(u, out))
                            break;
                        if (++tries > opt.max_retries)
                            throw SingularityError("weight_mc: sampler kept hitting the singular guard");
                    }
                    parts[c].add(out);
                }
            } catch (...) {
                std::lock_guard lk(err_mu);
                err = std::current_exception();
                next = nchunks;
                return;
            }
        }
    };
    const unsigned T = std::max(1u, opt.threads);
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < T; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    if (err)
        std::rethrow_exception(err);
    Accum total(K);
    for (const auto& p : parts)
        total.merge(p);
    return finish(total);
}

// Randomly shifted Sobol points; the error comes from the spread of the
// replicate means.
Moments run_sobol(int dim, std::size_t K, std::uint64_t N, std::uint64_t seed, const McOptions& opt,
                  const SampleFn& fn) {
    constexpr int R = 16;
    const std::uint64_t per = std::max<std::uint64_t>(1, N / R);
    std::vector<std::vector<cplx>> means(R, std::vector<cplx>(K));
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto worker = [&] {
        std::vector<double> u(dim), shift(dim);
        std::vector<cplx> out(K);
        for (;;) {
            const int rep = next++;
            if (rep >= R)
                return;
            std::mt19937_64 rng(splitmix(seed ^ splitmix(1000003ULL * (rep + 1))));
            std::uniform_real_distribution<double> U(0.0, 1.0);
            for (auto& s : shift)
                s = U(rng);
            boost::random::sobol q(static_cast<std::size_t>(dim));
            boost::random::uniform_01<double> U01;
            Accum acc(K);
            try {
                for (std::uint64_t s = 0; s < per; ++s) {
                    for (int k = 0; k < dim; ++k) {
                        double x = U01(q) + shift[k];
                        u[k] = x - std::floor(x);
                    }
                    if (!fn(u, out)) {
                        // jitter a guarded point inside its cell
                        for (auto& x : u)
                            x = std::fmod(x + 1e-9 * U(rng), 1.0);
                        if (!fn(u, out))
                            throw SingularityError("weight_mc: sobol point on the singular guard");
                    }
                    acc.add(out);
                }
            } catch (...) {
                std::lock_guard lk(err_mu);
                err = std::current_exception();
                next = R;
                return;
            }
            means[rep] = finish(acc).mean;
        }
    };
    const unsigned T = std::max(1u, opt.threads);
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < T; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    if (err)
        std::rethrow_exception(err);
    Accum total(K);
    for (const auto& mv : means)
        total.add(mv);
    Moments m = finish(total);
    m.n = per * R;
    return m;
}

Moments run(int dim, std::size_t K, std::uint64_t N, std::uint64_t seed, const McOptions& opt,
            const SampleFn& fn) {
    if (N == 0)
        throw std::invalid_argument("weight_mc: n_samples must be positive");
    return opt.sampler == Sampler::Sobol ? run_sobol(dim, K, N, seed, opt, fn)
                                         : run_plain(dim, K, N, seed, opt, fn);
}

WeightEstimate make_estimate(const AdmissibleGraph& g, cplx lam, const Moments& m, std::size_t i,
                             std::uint64_t seed, const McOptions& opt) {
    WeightEstimate e;
    const double f = opt.convention == Convention::Formality ? formality_factor(g) : 1.0;
    e.value = m.mean[i] * f;
    e.stderr_re = m.se_re[i] * f;
    e.stderr_im = m.se_im[i] * f;
    e.stderr_ = std::hypot(e.stderr_re, e.stderr_im);
    e.n_samples = m.n;
    e.seed = seed;
    e.key = canonical_key(g);
    e.lambda = lam;
    e.convention = opt.convention;
    return e;
}

} // namespace

bool sample_integrand(const AdmissibleGraph& g, const std::vector<cplx>& lambdas,
                      const std::vector<double>& u, std::vector<cplx>& out) {
    thread_local Config c;
    thread_local std::vector<cplx> M;
    const double J = map_cube(g, u, c);
    if (too_close(c) || !std::isfinite(J))
        return false;
    out.resize(lambdas.size());
    try {
        for (std::size_t i = 0; i < lambdas.size(); ++i)
            out[i] = top_form_config(g, lambdas[i], c, M) * J;
    } catch (const SingularityError&) {
        return false;
    }
    for (const auto& v : out)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            return false;
    return true;
}

cplx top_form(const AdmissibleGraph& g, LambdaParam lam, const std::vector<cplx>& z,
              const std::vector<double>& r) {
    Config c{z, r};
    std::vector<cplx> M;
    return top_form_config(g, lam.lambda, c, M);
}

std::vector<WeightEstimate> weight_mc_multi(const AdmissibleGraph& g, const std::vector<cplx>& lambdas,
                                            std::uint64_t n_samples, std::uint64_t seed,
                                            const McOptions& opt) {
    if (g.n() < 1)
        throw std::domain_error("weight_mc: at least one aerial vertex required");
    const int d = config_dimension(g);
    std::vector<WeightEstimate> res;
    if (vanishes_by_degree(g)) {
        for (auto lam : lambdas) {
            WeightEstimate e;
            e.seed = seed;
            e.key = canonical_key(g);
            e.lambda = lam;
            e.convention = opt.convention;
            res.push_back(e);
        }
        return res;
    }
    SampleFn fn = [&](const std::vector<double>& u, std::vector<cplx>& out) {
        return sample_integrand(g, lambdas, u, out);
    };
    const Moments m = run(d, lambdas.size(), n_samples, seed, opt, fn);
    for (std::size_t i = 0; i < lambdas.size(); ++i)
        res.push_back(make_estimate(g, lambdas[i], m, i, seed, opt));
    return res;
}

WeightEstimate weight_mc(const AdmissibleGraph& g, LambdaParam lam, std::uint64_t n_samples,
                         std::uint64_t seed, const McOptions& opt) {
    return weight_mc_multi(g, {lam.lambda}, n_samples, seed, opt).front();
}

cplx eval_poly(const std::vector<cplx>& c, cplx x) {
    cplx r = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it)
        r = r * x + *it;
    return r;
}

PolyFit weight_poly_fit(const AdmissibleGraph& g, int degree_bound, const std::vector<cplx>& samples,
                        std::uint64_t n_samples, std::uint64_t seed, const McOptions& opt) {
    const int D = degree_bound;
    const int k = static_cast<int>(samples.size());
    if (k < D + 1)
        throw std::invalid_argument("weight_poly_fit: need at least degree_bound+1 samples");
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b)
            if (std::abs(samples[a] - samples[b]) < 1e-12)
                throw std::invalid_argument("weight_poly_fit: sample points must be distinct");
    Eigen::MatrixXcd V(k, D + 1);
    for (int a = 0; a < k; ++a)
        for (int j = 0; j <= D; ++j)
            V(a, j) = std::pow(samples[a], j);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 0.0 || sv(0) / sv(sv.size() - 1) > 1e10)
        throw std::domain_error("weight_poly_fit: ill-conditioned sample set");
    const Eigen::MatrixXcd P = svd.solve(Eigen::MatrixXcd::Identity(k, k));

    PolyFit fit;
    const int d = config_dimension(g);
    if (static_cast<int>(g.edges().size()) != d) {
        fit.coeffs.assign(D + 1, 0.0);
        fit.stderr_.assign(D + 1, 0.0);
        fit.stderr_re.assign(D + 1, 0.0);
        fit.stderr_im.assign(D + 1, 0.0);
        return fit;
    }
    // Fit each sample's lambda-polynomial, then average the coefficients.
    SampleFn fn = [&](const std::vector<double>& u, std::vector<cplx>& out) {
        thread_local std::vector<cplx> vals;
        if (!sample_integrand(g, samples, u, vals))
            return false;
        Eigen::Map<const Eigen::VectorXcd> y(vals.data(), k);
        const Eigen::VectorXcd c = P * y;
        out.assign(c.data(), c.data() + D + 1);
        return true;
    };
    const Moments m = run(d, D + 1, n_samples, seed, opt, fn);
    const double f = opt.convention == Convention::Formality ? formality_factor(g) : 1.0;
    for (int j = 0; j <= D; ++j) {
        fit.coeffs.push_back(m.mean[j] * f);
        fit.stderr_re.push_back(m.se_re[j] * f);
        fit.stderr_im.push_back(m.se_im[j] * f);
        fit.stderr_.push_back(std::hypot(fit.stderr_re.back(), fit.stderr_im.back()));
    }
    fit.n_samples = m.n;
    return fit;
}

// ---------------- two-valent disk integrals ----------------

TwoValentKind two_valent_kind_from_string(const std::string& s) {
    if (s == "in-out")
        return TwoValentKind::InOut;
    if (s == "in-in")
        return TwoValentKind::InIn;
    if (s == "out-out")
        return TwoValentKind::OutOut;
    throw std::invalid_argument("unknown two-valent kind '" + s + "'");
}

double out_out_closed_form(cplx w1, cplx w2) {
    return std::arg((1.0 - w1 * std::conj(w2)) * (1.0 - w2) / (1.0 - w1)) / pi;
}

namespace {

OneForm edge_form(PropagatorFamily fam, LambdaParam lam, cplx s, cplx t) {
    return fam == PropagatorFamily::Kontsevich ? dphi_disk(lam, s, t) : dphi_shoikhet(lam, s, t);
}

// w-components of one edge form: (dx, dy).
std::pair<cplx, cplx> w_part(PropagatorFamily fam, LambdaParam lam, cplx s, cplx t, bool w_is_source) {
    const OneForm f = edge_form(fam, lam, s, t);
    if (w_is_source)
        return {f.source_dx(), f.source_dy()};
    return {f.target_dx(), f.target_dy()};
}

} // namespace

cplx two_valent_integral(TwoValentKind kind, cplx w1, cplx w2, LambdaParam lam, PropagatorFamily fam,
                         const QuadOptions& q) {
    if (std::abs(w1 - w2) < kSingularGuard)
        throw SingularityError("two_valent_integral: w1 == w2");
    for (cplx w : {w1, w2})
        if (std::abs(w) > 1.0 + 1e-14)
            throw std::domain_error("two_valent_integral: points must lie in the closed disk");

    auto density = [&](cplx w) -> cplx {
        std::pair<cplx, cplx> A, B;
        switch (kind) {
        case TwoValentKind::InOut:
            A = w_part(fam, lam, w, w1, true);
            B = w_part(fam, lam, w2, w, false);
            break;
        case TwoValentKind::InIn:
            A = w_part(fam, lam, w1, w, false);
            B = w_part(fam, lam, w2, w, false);
            break;
        case TwoValentKind::OutOut:
            A = w_part(fam, lam, w, w1, true);
            B = w_part(fam, lam, w, w2, true);
            break;
        }
        return A.first * B.second - A.second * B.first;
    };

    std::vector<cplx> sing{w1, w2};
    if (fam == PropagatorFamily::Kontsevich)
        sing.push_back(1.0);
    else
        sing.push_back(0.0);
    // drop duplicates (e.g. w1 == 0 for the Shoikhet centre)
    std::vector<cplx> pts;
    for (cplx p : sing)
        if (std::none_of(pts.begin(), pts.end(), [&](cplx o) { return std::abs(o - p) < 1e-14; }))
            pts.push_back(p);

    // Composite Gauss-Legendre in polar coordinates around each singular
    // point, glued by the partition of unity chi_k = d_k^-2 / sum_j d_j^-2.
    using GL = boost::math::quadrature::gauss<double, 10>;
    const auto& xs = GL::abscissa();
    const auto& ws = GL::weights();
    // nodes/weights on [-1,1] including the mirrored half
    std::vector<std::pair<double, double>> rule;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        rule.push_back({xs[i], ws[i]});
        if (xs[i] != 0.0)
            rule.push_back({-xs[i], ws[i]});
    }
    const int n_th = q.theta_panels, n_rho = q.rho_panels;
    cplx total = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const cplx p = pts[k];
        auto chi = [&](cplx w) {
            double num = 0.0, den = 0.0;
            for (std::size_t j = 0; j < pts.size(); ++j) {
                const double dj = std::norm(w - pts[j]);
                den += 1.0 / dj;
                if (j == k)
                    num = 1.0 / dj;
            }
            return num / den;
        };
        auto radius = [&](double th) {
            const double c = (std::conj(p) * std::polar(1.0, th)).real();
            const double disc = c * c + 1.0 - std::norm(p);
            return std::max(0.0, -c + std::sqrt(std::max(0.0, disc)));
        };
        double th0 = 0.0, th1 = 2.0 * pi;
        if (std::abs(p) > 1.0 - 1e-14) {
            const double mid = std::arg(-p);
            th0 = mid - pi / 2;
            th1 = mid + pi / 2;
        }
        const double hth = (th1 - th0) / n_th;
        for (int a = 0; a < n_th; ++a) {
            for (const auto& [xt, wt] : rule) {
                const double th = th0 + hth * (a + 0.5 * (xt + 1.0));
                const double R = radius(th);
                if (R <= 0.0)
                    continue;
                const cplx e = std::polar(1.0, th);
                cplx acc = 0.0;
                // panels graded geometrically towards rho = 0
                for (int b = 0; b < n_rho; ++b) {
                    const double lo = R * std::pow(double(b) / n_rho, 2.0);
                    const double hi = R * std::pow(double(b + 1) / n_rho, 2.0);
                    for (const auto& [xr, wr] : rule) {
                        const double rho = lo + (hi - lo) * 0.5 * (xr + 1.0);
                        const cplx w = p + rho * e;
                        bool bad = std::abs(w) >= 1.0;
                        for (cplx s : pts)
                            bad = bad || std::abs(w - s) < 1e-13;
                        if (bad)
                            continue;
                        acc += wr * 0.5 * (hi - lo) * chi(w) * density(w) * rho;
                    }
                }
                total += wt * 0.5 * hth * acc;
            }
        }
    }
    return total;
}

// ---------------- cache ----------------

WeightCache::WeightCache(std::string path) : path_(std::move(path)) {}

namespace {

nlohmann::json to_record(const WeightEstimate& e) {
    return {{"key", e.key},
            {"lambda", {e.lambda.real(), e.lambda.imag()}},
            {"value", {e.value.real(), e.value.imag()}},
            {"stderr", e.stderr_},
            {"stderr_re", e.stderr_re},
            {"stderr_im", e.stderr_im},
            {"n_samples", e.n_samples},
            {"seed", e.seed},
            {"convention", to_string(e.convention)}};
}

WeightEstimate from_record(const nlohmann::json& j) {
    WeightEstimate e;
    e.key = j.at("key").get<std::string>();
    e.lambda = {j.at("lambda").at(0).get<double>(), j.at("lambda").at(1).get<double>()};
    e.value = {j.at("value").at(0).get<double>(), j.at("value").at(1).get<double>()};
    e.stderr_ = j.at("stderr").get<double>();
    e.stderr_re = j.value("stderr_re", e.stderr_ / std::sqrt(2.0));
    e.stderr_im = j.value("stderr_im", e.stderr_ / std::sqrt(2.0));
    e.n_samples = j.at("n_samples").get<std::uint64_t>();
    e.seed = j.at("seed").get<std::uint64_t>();
    e.convention = convention_from_string(j.at("convention").get<std::string>());
    return e;
}

bool same_lambda(cplx a, cplx b) { return a == b; }

} // namespace

std::vector<WeightEstimate> WeightCache::load() const {
    std::vector<WeightEstimate> out;
    skipped_ = 0;
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        try {
            out.push_back(from_record(nlohmann::json::parse(line)));
        } catch (const std::exception& ex) {
            ++skipped_;
            std::cerr << "warning: skipping corrupt cache record in " << path_ << ": " << ex.what() << '\n';
        }
    }
    return out;
}

std::optional<WeightEstimate> WeightCache::get(const CacheKey& k) const {
    std::optional<WeightEstimate> hit;
    for (const auto& e : load())
        if (e.key == k.key && same_lambda(e.lambda, k.lambda) && e.seed == k.seed &&
            e.n_samples == k.n_samples && e.convention == k.convention)
            hit = e;
    return hit;
}

std::optional<WeightEstimate> WeightCache::get_pooled(const GraphKey& key, cplx lambda, Convention c) const {
    std::optional<WeightEstimate> acc;
    for (const auto& e : load())
        if (e.key == key && same_lambda(e.lambda, lambda) && e.convention == c)
            acc = acc ? pool(*acc, e) : e;
    return acc;
}

void WeightCache::put(const WeightEstimate& e) {
    std::ofstream out(path_, std::ios::app);
    if (!out)
        throw std::runtime_error("cache: cannot open " + path_ + " for writing");
    out << to_record(e).dump() << '\n';
}

WeightEstimate pool(const WeightEstimate& a, const WeightEstimate& b) {
    if (a.stderr_ == 0.0 || b.stderr_ == 0.0) {
        WeightEstimate r = a.stderr_ == 0.0 ? a : b;
        r.n_samples = a.n_samples + b.n_samples;
        return r;
    }
    auto comb = [](double sa, double sb) { return 1.0 / std::sqrt(1.0 / (sa * sa) + 1.0 / (sb * sb)); };
    const double wa = 1.0 / (a.stderr_ * a.stderr_), wb = 1.0 / (b.stderr_ * b.stderr_);
    WeightEstimate r = a;
    r.value = (wa * a.value + wb * b.value) / (wa + wb);
    r.stderr_ = 1.0 / std::sqrt(wa + wb);
    r.stderr_re = a.stderr_re > 0 && b.stderr_re > 0 ? comb(a.stderr_re, b.stderr_re) : 0.0;
    r.stderr_im = a.stderr_im > 0 && b.stderr_im > 0 ? comb(a.stderr_im, b.stderr_im) : 0.0;
    r.n_samples = a.n_samples + b.n_samples;
    return r;
}

} // namespace kw
