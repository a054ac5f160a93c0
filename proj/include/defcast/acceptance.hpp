#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace defcast::acceptance {

struct Options {
    std::size_t rounds = 0;  // 0: the suite's own horizon
    std::size_t seeds = 0;   // 0: the suite's own seed count
};

struct Result {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

/// Suite names accepted by run(): neutrality, theorem4, capital, regret,
/// hoeffding, choice, calibration, mixture, oracle, all.
const std::vector<std::string>& suite_names();

/// Runs one suite (or all nine). Defensive runs shared by several suites
/// are computed once per call.
std::vector<Result> run(const std::string& suite, const Options& options);

/// "PASS  3 capital  <detail>" style line.
std::string format(const Result& r);

}  // namespace defcast::acceptance
