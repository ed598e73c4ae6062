// Acceptance suite: evaluates every criterion and prints one line per case.
// Exits nonzero when any fails. Also reachable as `fsqkd selftest`.

#include <iostream>

#include "fsqkd/selftest.hpp"

int main() {
    return fsqkd::run_selftest(std::cout) ? 0 : 1;
}
