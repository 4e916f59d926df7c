#pragma once

// Acceptance checks shared by the CLI (`verify all`) and the ctest runner.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "kw/algebra.hpp"

namespace kw {

struct Check {
    std::string name;
    nlohmann::json value;
    nlohmann::json target;
    double tolerance = 0.0;
    bool pass = true;
    bool gated = true; // false: reported only
};

struct CriterionResult {
    int id = 0;
    std::string title;
    std::vector<Check> checks;
    std::string note;
    double seconds = 0.0;

    bool pass() const;
    std::string summary() const; // one line, no newline
    nlohmann::json to_json() const;
};

struct VerifyOptions {
    bool quick = false;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

inline constexpr int kCriterionCount = 11;
extern const char* const kReportSchema;

CriterionResult run_criterion(int id, const VerifyOptions& opt);
std::vector<CriterionResult> verify_all(const VerifyOptions& opt);

// Constant-Pi Moyal product on R^2 (Pi^{12} = 1): coefficient of hbar^h of
// f * g, written out from the binomial expansion of exp((i hbar/2) Pi d (x) d).
Poly moyal_coefficient(const Poly& f, const Poly& g, int h);

// Exact value of the nested angle integral over 0 < t_m < ... < t_1 < 1.
GQ nested_angle_volume(int m);

} // namespace kw
