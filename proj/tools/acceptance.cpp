// One line per acceptance criterion; nonzero exit if any fails.
#include <cstdio>
#include <cstdlib>
#include <string>

#include "kw/verify.hpp"

int main(int argc, char** argv) {
    kw::VerifyOptions opt;
    int only = 0;
    for (int a = 1; a < argc; ++a) {
        const std::string s = argv[a];
        if (s == "--quick") opt.quick = true;
        else if (s == "--criterion" && a + 1 < argc) only = std::atoi(argv[++a]);
        else if (s == "--seed" && a + 1 < argc) opt.seed = std::strtoull(argv[++a], nullptr, 10);
        else {
            std::fprintf(stderr, "usage: %s [--quick] [--criterion N] [--seed S]\n", argv[0]);
            return 2;
        }
    }
    bool ok = true;
    for (int id = 1; id <= kw::kCriterionCount; ++id) {
        if (only && id != only) continue;
        const auto r = kw::run_criterion(id, opt);
        std::printf("%s\n", r.summary().c_str());
        if (!r.pass())
            for (auto& c : r.checks)
                if (c.gated && !c.pass)
                    std::printf("    failed: %s value=%s target=%s tol=%g\n", c.name.c_str(), c.value.dump().c_str(),
                                c.target.dump().c_str(), c.tolerance);
        std::fflush(stdout);
        ok = ok && r.pass();
    }
    return ok ? 0 : 1;
}
