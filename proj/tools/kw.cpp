// kw: command-line front end. JSON reports on stdout; exit 0 pass,
// 1 check failure, 2 usage error.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "kw/fedosov.hpp"
#include "kw/geodesics.hpp"
#include "kw/starprod.hpp"
#include "kw/verify.hpp"
#include "kw/weight_mc.hpp"
#include "kw/weight_series.hpp"

using nlohmann::json;
using namespace kw;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Report {
    std::string command;
    json params = json::object();
    std::vector<Check> checks;
    json result = json::object();
    bool failed_extra = false;

    bool pass() const {
        if (failed_extra) return false;
        for (auto& c : checks)
            if (c.gated && !c.pass) return false;
        return true;
    }
};

struct Global {
    std::string format = "json";
    bool timing = false;
} G;

cplx parse_complex(const std::string& s) {
    std::istringstream in(s);
    double re = 0, im = 0;
    char comma = 0;
    if (!(in >> re)) throw UsageError("invalid complex number '" + s + "' (expected re,im)");
    if (in >> comma) {
        if (comma != ',' || !(in >> im)) throw UsageError("invalid complex number '" + s + "' (expected re,im)");
    }
    std::string rest;
    if (in >> rest) throw UsageError("invalid complex number '" + s + "'");
    if (!std::isfinite(re) || !std::isfinite(im)) throw UsageError("non-finite complex number '" + s + "'");
    return {re, im};
}

std::vector<double> parse_vector(const std::string& s, int d) {
    std::vector<double> v;
    std::stringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        try {
            v.push_back(std::stod(tok));
        } catch (...) {
            throw UsageError("invalid number '" + tok + "' in '" + s + "'");
        }
    }
    if (static_cast<int>(v.size()) != d) throw UsageError("expected " + std::to_string(d) + " components in '" + s + "'");
    return v;
}

AdmissibleGraph parse_graph(const std::string& s) {
    try {
        return AdmissibleGraph::from_text(s);
    } catch (const std::exception& e) {
        throw UsageError(std::string("unknown graph serialization: ") + e.what());
    }
}

Poly parse_poly_arg(const std::string& s, int d, const std::vector<std::string>& names) {
    try {
        return parse_poly(s, d, names);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
}

json cj(cplx z) { return json::array({z.real(), z.imag()}); }

json weyl_json(const WeylElement& a) {
    json arr = json::array();
    for (auto& [k, c] : a.terms()) {
        json dx = json::array();
        for (int i = 0; i < a.dim(); ++i)
            if (k.dx >> i & 1u) dx.push_back(i + 1);
        arr.push_back({{"hbar", k.h}, {"v", k.v}, {"dx", dx}, {"coefficient", c.str()}});
    }
    return arr;
}

json estimate_json(const WeightEstimate& e) {
    return {{"value", cj(e.value)},     {"stderr", e.stderr_}, {"stderr_re", e.stderr_re},
            {"stderr_im", e.stderr_im}, {"samples", e.n_samples}, {"key", e.key}};
}

void emit(const Report& r, std::uint64_t seed, double secs) {
    json j;
    j["schema"] = kReportSchema;
    j["command"] = r.command;
    j["seed"] = seed;
    j["parameters"] = r.params;
    auto& arr = j["checks"] = json::array();
    for (auto& c : r.checks)
        arr.push_back({{"name", c.name},
                       {"value", c.value},
                       {"target", c.target},
                       {"tolerance", c.tolerance},
                       {"pass", c.pass},
                       {"gated", c.gated}});
    j["result"] = r.result;
    j["pass"] = r.pass();
    if (G.timing) j["wall_time"] = secs;
    if (G.format == "json") {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::cout << r.command << "  " << r.params.dump() << "\n";
    for (auto& c : r.checks)
        std::printf("  %-4s %-60s value=%s target=%s tol=%g%s\n", c.pass ? "ok" : "FAIL", c.name.c_str(),
                    c.value.dump().c_str(), c.target.dump().c_str(), c.tolerance, c.gated ? "" : " (reported)");
    if (!r.result.empty()) std::cout << r.result.dump(2) << "\n";
    std::cout << (r.pass() ? "PASS" : "FAIL") << "\n";
}

McOptions mc_options(const std::string& sampler, const std::string& conv, unsigned threads) {
    McOptions o;
    if (sampler == "sobol") o.sampler = Sampler::Sobol;
    else if (sampler == "plain") o.sampler = Sampler::Plain;
    else throw UsageError("sampler must be plain or sobol");
    try {
        o.convention = convention_from_string(conv);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    o.threads = threads;
    return o;
}

PolyVectorField poisson_by_name(const std::string& n) {
    if (n == "moyal") return moyal_bivector(2);
    if (n == "so3") return so3_bivector();
    throw UsageError("poisson structure must be moyal or so3");
}

std::vector<std::string> var_names(int d) {
    if (d == 3) return {"x", "y", "z"};
    return {"x", "y"};
}

std::shared_ptr<WeightSource> weight_source(const std::string& kind, const std::string& cache, std::uint64_t samples,
                                            std::uint64_t seed, const McOptions& o,
                                            std::unique_ptr<WeightCache>& holder) {
    auto chain = std::make_shared<ChainSource>();
    chain->add(std::make_shared<ExactTable>());
    if (kind == "exact") return chain;
    if (kind == "mc") {
        chain->add(std::make_shared<McSource>(samples, seed, o));
        return chain;
    }
    if (kind == "cache") {
        if (cache.empty()) throw UsageError("--weights cache needs --cache or KW_CACHE");
        if (!std::filesystem::exists(cache)) throw UsageError("cache file '" + cache + "' does not exist");
        holder = std::make_unique<WeightCache>(cache);
        chain->add(std::make_shared<CacheSource>(*holder));
        return chain;
    }
    throw UsageError("--weights must be exact, mc or cache");
}

FedosovInput fedosov_input(const std::string& connection, const std::string& omega) {
    FedosovInput in = flat_input(2);
    if (connection == "curved") {
        // Gamma^l_{jk} = Pi^{li} S_{ijk} with a fixed polynomial S
        const auto x = Poly::variable(2, 0), y = Poly::variable(2, 1), one = Poly::constant(2, GQ(1));
        std::vector<Poly> S(8, Poly(2));
        S[0] = y;
        S[1] = S[2] = S[4] = x * y;
        S[3] = S[5] = S[6] = one;
        S[7] = x;
        in = symplectic_connection_input(2, S);
    } else if (connection != "flat") {
        throw UsageError("--connection must be flat or curved");
    }
    if (!omega.empty()) in.omega = flat_input_with_omega(parse_poly_arg(omega, 2, {"x", "y"})).omega;
    return in;
}

MetricJet metric_by_name(const std::string& n, int order, const std::string& x2) {
    if (n == "sphere") return sphere_jet(order);
    if (n == "poincare") {
        Poly p = parse_poly_arg(x2, 1, {"_"});
        if (p.degree() > 0) throw UsageError("--x2 must be a positive rational");
        auto it = p.terms().begin();
        if (it == p.terms().end() || it->second.re <= 0 || it->second.im != 0)
            throw UsageError("--x2 must be a positive rational");
        return poincare_jet(order, GQ(0), it->second);
    }
    if (n == "flat") return flat_jet(2, order);
    throw UsageError("--metric must be sphere, poincare or flat");
}

ChristoffelFn christoffel_by_name(const std::string& n) {
    if (n == "sphere") return sphere_christoffel();
    if (n == "poincare") return poincare_christoffel();
    if (n == "flat") return [](const double*, double* G) { std::fill(G, G + 8, 0.0); };
    throw UsageError("--metric must be sphere, poincare or flat");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph weights, star products, Fedosov quantization and formal exponential maps"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--format", G.format, "json or table")->check(CLI::IsMember({"json", "table"}));
    app.add_flag("--timing", G.timing, "include wall time in the report");

    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string cache;
    auto common = [&](CLI::App* s) {
        s->add_option("--seed", seed, "random seed");
        s->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 256u));
    };

    Report rep;
    std::function<void()> action;

    // graphs
    auto* graphs = app.add_subcommand("graphs", "admissible graphs");
    graphs->require_subcommand(1);
    int gn = 1, gm = 2, gout = 2;
    bool gpar = false;
    auto* genum = graphs->add_subcommand("enumerate", "list labeled admissible graphs");
    genum->add_option("--n", gn, "aerial vertices")->check(CLI::Range(0, 6));
    genum->add_option("--m", gm, "ground vertices")->check(CLI::Range(0, 8));
    genum->add_option("--out-degree", gout, "edges per aerial vertex")->check(CLI::Range(0, 6));
    genum->add_flag("--parallel", gpar, "allow parallel edges");
    genum->callback([&] {
        action = [&] {
            rep.command = "graphs enumerate";
            rep.params = {{"n", gn}, {"m", gm}, {"out_degree", gout}, {"parallel", gpar}};
            auto gs = enumerate_graphs(gn, gm, gout, gpar);
            json arr = json::array();
            std::set<std::string> classes;
            for (auto& g : gs) {
                auto wc = weight_class(g);
                classes.insert(wc.rep.to_text());
                arr.push_back({{"graph", g.to_text()}, {"key", canonical_key(g)}, {"class", wc.rep.to_text()},
                               {"class_sign", wc.sign}});
            }
            rep.result = {{"count", gs.size()}, {"classes", classes.size()}, {"graphs", arr}};
        };
    });

    // weight
    auto* weight = app.add_subcommand("weight", "graph weights");
    weight->require_subcommand(1);
    std::string wgraph, wlambda = "0.5,0", wsampler = "sobol", wconv = "raw";
    double wsamples = 1e6;
    auto* wmc = weight->add_subcommand("mc", "Monte Carlo weight of one graph");
    wmc->add_option("--graph", wgraph, "graph text, e.g. K(1,2)[0>1#1, 0>2#2]")->required();
    wmc->add_option("--lambda", wlambda, "interpolation parameter re,im");
    wmc->add_option("--samples", wsamples, "sample count");
    wmc->add_option("--sampler", wsampler, "plain or sobol");
    wmc->add_option("--convention", wconv, "raw or formality");
    wmc->add_option("--cache", cache, "JSON-lines weight cache")->envname("KW_CACHE");
    common(wmc);
    wmc->callback([&] {
        action = [&] {
            const auto g = parse_graph(wgraph);
            const cplx lam = parse_complex(wlambda);
            if (wsamples < 1 || wsamples > 1e12) throw UsageError("--samples out of range");
            const auto n = static_cast<std::uint64_t>(wsamples);
            const auto o = mc_options(wsampler, wconv, threads);
            rep.command = "weight mc";
            rep.params = {{"graph", g.to_text()}, {"lambda", cj(lam)}, {"samples", n}, {"sampler", wsampler},
                          {"convention", wconv}, {"seed", seed}};
            std::optional<WeightEstimate> e;
            bool cached = false;
            std::unique_ptr<WeightCache> wc;
            if (!cache.empty()) {
                wc = std::make_unique<WeightCache>(cache);
                e = wc->get({canonical_key(g), lam, seed, n, o.convention});
                cached = e.has_value();
            }
            if (!e) e = weight_mc(g, {lam}, n, seed, o);
            if (wc && !cached) wc->put(*e);
            rep.result = estimate_json(*e);
            rep.result["cached"] = cached;
        };
    });

    int fdeg = -1;
    std::vector<std::string> fnodes;
    auto* wfit = weight->add_subcommand("fit-lambda", "lambda-polynomial of a weight");
    wfit->add_option("--graph", wgraph, "graph text")->required();
    wfit->add_option("--degree", fdeg, "degree bound (default: edge count)");
    wfit->add_option("--nodes", fnodes, "interpolation nodes re,im (default 0..1 equispaced)");
    wfit->add_option("--samples", wsamples, "sample count");
    wfit->add_option("--sampler", wsampler, "plain or sobol");
    common(wfit);
    wfit->callback([&] {
        action = [&] {
            const auto g = parse_graph(wgraph);
            const int D = fdeg < 0 ? static_cast<int>(g.edges().size()) : fdeg;
            std::vector<cplx> nodes;
            for (auto& s : fnodes) nodes.push_back(parse_complex(s));
            if (nodes.empty())
                for (int k = 0; k <= D; ++k) nodes.push_back(D ? double(k) / D : 0.5);
            const auto n = static_cast<std::uint64_t>(wsamples);
            rep.command = "weight fit-lambda";
            json jn = json::array();
            for (auto z : nodes) jn.push_back(cj(z));
            rep.params = {{"graph", g.to_text()}, {"degree", D}, {"nodes", jn}, {"samples", n}, {"seed", seed}};
            PolyFit fit;
            try {
                fit = weight_poly_fit(g, D, nodes, n, seed, mc_options(wsampler, "raw", threads));
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            json co = json::array();
            for (int k = 0; k <= D; ++k) co.push_back({{"value", cj(fit.coeffs[k])}, {"stderr", fit.stderr_[k]}});
            rep.result = {{"coefficients", co}};
            // conjugation relation between the coefficients
            for (int k = 0; k <= D; ++k) {
                cplx rhs = 0;
                double var = fit.stderr_[k] * fit.stderr_[k];
                double b = 1;
                for (int l = k; l <= D; ++l) {
                    rhs += b * fit.coeffs[l];
                    var += b * b * fit.stderr_[l] * fit.stderr_[l];
                    b = b * (l + 1) / (l + 1 - k);
                }
                if (k % 2) rhs = -rhs;
                const double res = std::abs(std::conj(fit.coeffs[k]) - rhs), tol = 3 * std::sqrt(var) + 1e-12;
                rep.checks.push_back({"conjugation a_" + std::to_string(k), res, 0.0, tol, res <= tol});
            }
        };
    });

    std::string tkind = "in-out", tw1, tw2, tfam = "kontsevich";
    int tpanels = 48;
    auto* wtwo = weight->add_subcommand("two-valent", "two-valent disk integral");
    wtwo->add_option("--kind", tkind, "in-out, in-in or out-out");
    wtwo->add_option("--w1", tw1, "re,im")->required();
    wtwo->add_option("--w2", tw2, "re,im")->required();
    wtwo->add_option("--lambda", wlambda, "re,im");
    wtwo->add_option("--family", tfam, "kontsevich or shoikhet");
    wtwo->add_option("--panels", tpanels, "angular quadrature panels")->check(CLI::Range(2, 4096));
    wtwo->callback([&] {
        action = [&] {
            const cplx w1 = parse_complex(tw1), w2 = parse_complex(tw2), lam = parse_complex(wlambda);
            if (std::abs(w1) >= 1 || std::abs(w2) >= 1) throw UsageError("w1, w2 must lie in the open unit disk");
            TwoValentKind kind;
            try {
                kind = two_valent_kind_from_string(tkind);
            } catch (const std::exception& e) {
                throw UsageError(e.what());
            }
            if (tfam != "kontsevich" && tfam != "shoikhet") throw UsageError("--family must be kontsevich or shoikhet");
            const auto fam = tfam == "shoikhet" ? PropagatorFamily::Shoikhet : PropagatorFamily::Kontsevich;
            QuadOptions q;
            q.theta_panels = tpanels;
            const cplx v = two_valent_integral(kind, w1, w2, {lam}, fam, q);
            rep.command = "weight two-valent";
            rep.params = {{"kind", tkind}, {"w1", cj(w1)}, {"w2", cj(w2)}, {"lambda", cj(lam)}, {"family", tfam},
                          {"panels", tpanels}};
            rep.result = {{"value", cj(v)}};
            if (kind == TwoValentKind::OutOut) {
                const double cf = out_out_closed_form(w1, w2);
                rep.checks.push_back({"closed form", cj(v), cf, 1e-3, std::abs(v - cf) <= 1e-3});
            } else {
                rep.checks.push_back({"vanishing", std::abs(v), 0.0, 1e-3, std::abs(v) < 1e-3});
            }
        };
    });

    // series
    auto* series = app.add_subcommand("series", "wheel series");
    series->require_subcommand(1);
    int sn = 2, sm = 1;
    long sN = 100000;
    double sw = 0.3;
    auto* szeta = series->add_subcommand("zeta", "wheel recipe sum for zeta(n)");
    szeta->add_option("--n", sn)->check(CLI::Range(2, 20));
    szeta->add_option("--N", sN, "terms")->check(CLI::Range(10L, 100000000L));
    szeta->callback([&] {
        action = [&] {
            auto z = merkulov_wheel_zeta(sn, sN);
            auto ref = zeta_partial(sn, sN);
            rep.command = "series zeta";
            rep.params = {{"n", sn}, {"N", sN}};
            rep.result = {{"value", z.value}, {"bound", z.bound}, {"weight", cj(z.weight)}};
            rep.checks.push_back(
                {"vs plain partial sum", z.value, ref.value, z.bound + ref.bound, std::abs(z.value - ref.value) <= z.bound + ref.bound});
        };
    });
    auto* sshadow = series->add_subcommand("shadow", "shadow sum at |w|");
    sshadow->add_option("--n", sn)->check(CLI::Range(2, 8));
    sshadow->add_option("--w", sw, "|w|")->check(CLI::Range(0.01, 0.8));
    sshadow->add_option("--N", sN, "cutoff")->check(CLI::Range(16L, 200000L));
    sshadow->callback([&] {
        action = [&] {
            auto s = shadow_sum(sn, sw, sN);
            auto tw = two_wheel_shadow(sw, std::max(64L, sN));
            rep.command = "series shadow";
            rep.params = {{"n", sn}, {"w", sw}, {"N", sN}};
            rep.result = {{"value", s.value}, {"bound", s.bound}, {"two_wheel", {{"value", tw.value}, {"bound", tw.bound}}}};
        };
    });
    auto* sharm = series->add_subcommand("harmonic", "harmonic-number identities");
    sharm->add_option("--m", sm)->check(CLI::Range(1, 100000));
    sharm->callback([&] {
        action = [&] {
            auto h = harmonic_identity(sm);
            rep.command = "series harmonic";
            rep.params = {{"m", sm}};
            rep.result = {{"lhs", h.lhs.get_str()}, {"rhs", h.rhs_merk.get_str()}, {"rhs_harmonic", h.rhs_harm.get_str()},
                          {"pass", h.all_equal()}};
            rep.checks.push_back({"three expressions equal", h.lhs.get_str(), h.rhs_merk.get_str(), 0.0, h.all_equal()});
        };
    });

    // star
    auto* star = app.add_subcommand("star", "order-2 star products");
    star->require_subcommand(1);
    std::string spoisson = "moyal", sweights = "exact", sf, sg, sh, slambda = "0.5,0";
    int sorder = 2;
    double ssamples = 1e6;
    auto star_opts = [&](CLI::App* s) {
        s->add_option("--poisson", spoisson, "moyal or so3");
        s->add_option("--weights", sweights, "exact, mc or cache");
        s->add_option("--samples", ssamples, "MC samples per weight class");
        s->add_option("--lambda", slambda, "re,im");
        s->add_option("--cache", cache, "weight cache")->envname("KW_CACHE");
        common(s);
    };
    auto* sasm = star->add_subcommand("assemble", "B_1, B_2 as graph operators; optionally evaluate f*g");
    star_opts(sasm);
    sasm->add_option("--order", sorder)->check(CLI::Range(0, 2));
    sasm->add_option("--f", sf, "polynomial");
    sasm->add_option("--g", sg, "polynomial");
    auto* sassoc = star->add_subcommand("assoc", "associativity residual of (f*g)*h - f*(g*h)");
    star_opts(sassoc);
    sassoc->add_option("--f", sf)->required();
    sassoc->add_option("--g", sg)->required();
    sassoc->add_option("--third", sh, "third polynomial")->required();
    auto build_star = [&](std::unique_ptr<WeightCache>& holder) {
        auto pi = poisson_by_name(spoisson);
        auto o = mc_options("sobol", "raw", threads);
        auto src = weight_source(sweights, cache, static_cast<std::uint64_t>(ssamples), seed, o, holder);
        const cplx lam = parse_complex(slambda);
        rep.params = {{"poisson", spoisson}, {"weights", sweights}, {"lambda", cj(lam)}, {"seed", seed},
                      {"samples", static_cast<std::uint64_t>(ssamples)}};
        try {
            return star_order2(pi, {lam}, *src, sorder);
        } catch (const MissingWeights& e) {
            throw UsageError(std::string(e.what()) + " (use --weights mc or a populated cache)");
        }
    };
    sasm->callback([&] {
        action = [&] {
            std::unique_ptr<WeightCache> holder;
            auto s = build_star(holder);
            rep.command = "star assemble";
            rep.params["order"] = sorder;
            json orders = json::array();
            for (int k = 1; k <= s.order; ++k) {
                json terms = json::array();
                for (auto& t : s.terms[k])
                    terms.push_back({{"graph", t.graph},
                                     {"class", t.weight_key},
                                     {"sign", t.sign},
                                     {"prefactor", t.prefactor.str()},
                                     {"weight", {{"value", cj(t.weight.value)},
                                                 {"stderr", t.weight.stderr_},
                                                 {"exact", t.weight.exact ? json(t.weight.exact->str()) : json(nullptr)},
                                                 {"origin", t.weight.origin}}},
                                     {"operator", to_json(t.op)}});
                orders.push_back({{"order", k}, {"terms", terms}});
            }
            rep.result = {{"exact", s.exact()}, {"orders", orders}};
            if (!sf.empty() || !sg.empty()) {
                const int d = s.d;
                const auto f = parse_poly_arg(sf.empty() ? "1" : sf, d, var_names(d));
                const auto g = parse_poly_arg(sg.empty() ? "1" : sg, d, var_names(d));
                json ev = json::array();
                for (int k = 0; k <= s.order; ++k) {
                    if (s.exact()) ev.push_back({{"order", k}, {"value", star_term(s, k, f, g).str(var_names(d))}});
                    else
                        ev.push_back({{"order", k},
                                      {"value", star_term_numeric(s, k, to_cpoly(f), to_cpoly(g)).str(var_names(d))}});
                }
                rep.result["product"] = ev;
            }
        };
    });
    sassoc->callback([&] {
        action = [&] {
            std::unique_ptr<WeightCache> holder;
            auto s = build_star(holder);
            rep.command = "star assoc";
            const int d = s.d;
            const auto f = parse_poly_arg(sf, d, var_names(d)), g = parse_poly_arg(sg, d, var_names(d)),
                       h = parse_poly_arg(sh, d, var_names(d));
            rep.params["f"] = f.str(var_names(d));
            rep.params["g"] = g.str(var_names(d));
            rep.params["h"] = h.str(var_names(d));
            auto res = associativity_residual(s, f, g, h, 2);
            json arr = json::array();
            for (auto& r : res) {
                arr.push_back({{"order", r.order}, {"max_abs", r.max_abs}, {"max_ratio", r.max_ratio}, {"exact", r.exact},
                               {"residual", r.value.str(var_names(d))}});
                if (r.exact)
                    rep.checks.push_back({"order " + std::to_string(r.order) + " exact zero", r.exact_zero, true, 0.0,
                                          r.exact_zero});
                else if (r.order < 2)
                    rep.checks.push_back(
                        {"order " + std::to_string(r.order) + " max |residual|", r.max_abs, 0.0, 1e-12, r.max_abs <= 1e-12});
                else
                    rep.checks.push_back({"order 2 |residual|/sigma", r.max_ratio, 0.0, 3.0, r.max_ratio <= 3.0});
            }
            rep.result = {{"residuals", arr}};
        };
    });

    // fedosov
    auto* fed = app.add_subcommand("fedosov", "Fedosov quantization of flat R^2");
    fed->require_subcommand(1);
    std::string fconn = "flat", fomega, ff = "x", fg = "y";
    int fD = 5;
    bool fcat = false;
    auto* fsolve = fed->add_subcommand("solve", "fixed point R_Omega");
    fsolve->add_option("--connection", fconn, "flat or curved");
    fsolve->add_option("--omega", fomega, "c(x,y) in Omega = hbar c dx^1 dx^2");
    fsolve->add_option("--D", fD, "truncation in total degree")->check(CLI::Range(2, 8));
    fsolve->add_flag("--catalan", fcat, "compare with the Catalan tree expansion");
    fsolve->callback([&] {
        action = [&] {
            auto in = fedosov_input(fconn, fomega);
            rep.command = "fedosov solve";
            rep.params = {{"connection", fconn}, {"omega", fomega}, {"D", fD}};
            auto fp = solve_R(in, fD);
            rep.result = {{"iterations", fp.iterations}, {"R", weyl_json(fp.R)}};
            rep.checks.push_back({"normalisation delta^-1 R = 0", delta_inv(fp.R).is_zero(), true, 0.0,
                                  delta_inv(fp.R).is_zero()});
            if (fcat) {
                auto c = catalan_R(in, fD, std::max(1, fD - 1));
                rep.result["trees_per_order"] = c.trees_per_order;
                rep.checks.push_back({"Catalan expansion == fixed point", c.R == fp.R, true, 0.0, c.R == fp.R});
            }
        };
    });
    auto* fstar = fed->add_subcommand("star", "f * g from flat sections");
    fstar->add_option("--connection", fconn, "flat or curved");
    fstar->add_option("--omega", fomega, "c(x,y) in Omega = hbar c dx^1 dx^2");
    fstar->add_option("--f", ff);
    fstar->add_option("--g", fg);
    fstar->add_option("--D", fD, "truncation in total degree")->check(CLI::Range(2, 8));
    fstar->callback([&] {
        action = [&] {
            auto in = fedosov_input(fconn, fomega);
            const auto f = parse_poly_arg(ff, 2, {"x", "y"}), g = parse_poly_arg(fg, 2, {"x", "y"});
            rep.command = "fedosov star";
            rep.params = {{"connection", fconn}, {"omega", fomega}, {"f", f.str({"x", "y"})}, {"g", g.str({"x", "y"})},
                          {"D", fD}};
            auto st = fedosov_star(in, f, g, fD);
            json arr = json::array();
            for (int h = 0; 2 * h <= fD; ++h) {
                Poly c(2);
                for (auto& [k, p] : st.terms())
                    if (k.h == h) c += p;
                arr.push_back({{"hbar", h}, {"coefficient", c.str({"x", "y"})}});
            }
            rep.result = {{"exact_orders", arr}};
            if (fconn == "flat" && fomega.empty()) {
                bool ok = true;
                for (int h = 0; 2 * h <= fD; ++h) {
                    Poly c(2);
                    for (auto& [k, p] : st.terms())
                        if (k.h == h) c += p;
                    ok = ok && c == moyal_coefficient(f, g, h);
                }
                rep.checks.push_back({"equals Moyal product", ok, true, 0.0, ok});
            }
        };
    });

    // geodesic
    auto* geo = app.add_subcommand("geodesic", "formal exponential map");
    geo->require_subcommand(1);
    std::string gmetric = "sphere", gv = "1,0", gx2 = "1";
    int gK = 8, gsteps = 4000;
    double gt = 0.5;
    auto geo_opts = [&](CLI::App* s) {
        s->add_option("--metric", gmetric, "sphere, poincare or flat");
        s->add_option("--v", gv, "initial velocity a,b");
        s->add_option("--t", gt, "time")->check(CLI::Range(0.0, 10.0));
        s->add_option("--order", gK, "series order")->check(CLI::Range(1, 40));
        s->add_option("--x2", gx2, "half-plane base height (rational)");
    };
    auto* gexp = geo->add_subcommand("exp", "series phi(x0, t v)");
    geo_opts(gexp);
    gexp->callback([&] {
        action = [&] {
            auto m = metric_by_name(gmetric, gK, gx2);
            auto v = parse_vector(gv, 2);
            auto s = exp_map_series(m, gK);
            rep.command = "geodesic exp";
            rep.params = {{"metric", gmetric}, {"v", v}, {"t", gt}, {"order", gK}, {"base", m.base}};
            rep.result = {{"phi", {s.terms[0].str({"v1", "v2"}), s.terms[1].str({"v1", "v2"})}}, {"point", s.eval(v, gt)}};
        };
    });
    auto* gor = geo->add_subcommand("oracle", "series against RK4 integration");
    geo_opts(gor);
    gor->add_option("--steps", gsteps)->check(CLI::Range(1, 10000000));
    gor->callback([&] {
        action = [&] {
            auto m = metric_by_name(gmetric, gK, gx2);
            auto v = parse_vector(gv, 2);
            auto s = exp_map_series(m, gK);
            auto a = s.eval(v, gt);
            auto b = geodesic_ode_oracle(christoffel_by_name(gmetric), 2, m.base, v, gt, gsteps);
            const double err = std::hypot(a[0] - b[0], a[1] - b[1]);
            rep.command = "geodesic oracle";
            rep.params = {{"metric", gmetric}, {"v", v}, {"t", gt}, {"order", gK}, {"steps", gsteps}, {"base", m.base}};
            rep.result = {{"series", a}, {"ode", b}, {"error", err}};
            rep.checks.push_back({"series vs RK4", err, 0.0, 1e-8, err <= 1e-8});
        };
    });

    // verify
    auto* ver = app.add_subcommand("verify", "acceptance suite");
    ver->require_subcommand(1);
    bool vquick = false;
    std::vector<int> vonly;
    auto* vall = ver->add_subcommand("all", "run every acceptance criterion");
    vall->add_flag("--quick", vquick, "smaller sample counts");
    vall->add_option("--criterion", vonly, "restrict to these criteria")->check(CLI::Range(1, kCriterionCount));
    common(vall);
    vall->callback([&] {
        action = [&] {
            VerifyOptions o;
            o.quick = vquick;
            o.seed = seed;
            o.threads = threads;
            rep.command = "verify all";
            rep.params = {{"quick", vquick}, {"seed", seed}};
            json arr = json::array();
            for (int id = 1; id <= kCriterionCount; ++id) {
                if (!vonly.empty() && std::find(vonly.begin(), vonly.end(), id) == vonly.end()) continue;
                auto r = run_criterion(id, o);
                std::cerr << r.summary() << "\n";
                auto j = r.to_json();
                if (!G.timing) j.erase("seconds");
                arr.push_back(j);
                rep.checks.push_back({"criterion " + std::to_string(id) + ": " + r.title, r.pass(), true, 0.0, r.pass()});
            }
            rep.result = {{"criteria", arr}};
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    try {
        action();
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    emit(rep, seed, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return rep.pass() ? 0 : 1;
}
