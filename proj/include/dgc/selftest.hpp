#pragma once

#include <string>
#include <vector>

namespace dgc {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Fast invariant checks on built-in synthetic fixtures.
std::vector<CheckResult> run_selftest();

}  // namespace dgc
