#ifndef ROUGHMILL_EXPERIMENTS_HPP
#define ROUGHMILL_EXPERIMENTS_HPP

#include <string>
#include <vector>

#include "roughmill/config.hpp"

namespace roughmill {

// One pass/fail line of an experiment report.  `cmp` is "<=" or ">=" and
// states how `value` is held against `threshold`.
struct CheckResult {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    std::string cmp = "<=";
    bool pass = false;
};

struct ExperimentReport {
    std::string experiment;
    std::vector<CheckResult> checks;
    bool passed = false;
    double seconds = 0.0;
};

inline constexpr const char* kExperimentNames[] = {
    "lift-check", "convolve-check", "increments", "ergodicity", "averaging",
};

// Runs the named suite with the given configuration, writes its CSV data
// and a plain-text summary (<name>-summary.txt) under out_dir, and returns
// the structured pass/fail report.  Thresholds are the fixed acceptance
// thresholds; replica counts and seeds come from the configuration.
ExperimentReport run_experiment(const std::string& name, const Config& cfg,
                                const std::string& out_dir);

// The plain-text form written next to the CSVs.
std::string format_report(const ExperimentReport& r);

} // namespace roughmill

#endif
