// Acceptance suite: one pass/fail line per criterion, exit 0 iff all pass.

#include <iostream>

#include "inls/acceptance.hpp"

int main()
{
    inls::AcceptanceOptions opts;
    opts.on_result = [](const inls::CriterionResult &r) { std::cout << inls::format_result(r) << std::endl; };
    const auto report = inls::verify(opts);
    std::cout << (report.all_pass() ? "ALL PASS" : "FAILURES PRESENT") << std::endl;
    return report.all_pass() ? 0 : 1;
}
