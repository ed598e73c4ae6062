#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace fsqkd {

struct SelfTestCase {
    int id;
    std::string name;
    std::function<std::pair<bool, std::string>()> run;  // (pass, detail)
};

/// The acceptance checks behind `fsqkd selftest`; one case per criterion.
std::vector<SelfTestCase> selftest_cases();

/// Runs the listed criteria (all when `only` is empty), printing one
/// pass/fail line each. Returns true when every executed case passed.
bool run_selftest(std::ostream& out, const std::vector<int>& only = {});

/// Directory holding the bundled experiment configurations. Resolution:
/// $FSQKD_CONFIG_DIR when set, else the location recorded at build time.
std::string bundled_config_dir();

}  // namespace fsqkd
