#pragma once

#include "ihgnn/hypergraph.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ihgnn::verify {

struct Options {
    std::uint64_t seed = 1;
    std::size_t expressivity_order = 3;
    const Hypergraph* hypergraph = nullptr; // rowsum also runs on this graph when set
};

struct CheckResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;  // worst value observed
    double threshold = 0.0;
    std::string detail;
    std::vector<std::string> operations; // library operations the check exercised
};

// rowsum, rate, uniqueness, nonconstant, expressivity, scaling, gradients,
// projection, bound, oversmoothing
const std::vector<std::string>& check_names();

// Throws ValidationError for an unknown name.
CheckResult run_check(std::string_view name, const Options& opts);
std::vector<CheckResult> run_all(const Options& opts);

} // namespace ihgnn::verify
