#include <cstdio>
#include <string>

#include "rfspec/validation.hpp"

using namespace rfspec;

int main(int argc, char **argv) {
    SuiteOptions opt;
    if (argc > 1)
        opt.figure_dir = argv[1];
    int failed = 0;
    const auto criteria = all_criteria();
    for (const Criterion &c : criteria) {
        const CriterionResult r = run_criterion(c, opt);
        std::printf("%s criterion %d: %s (%.1f s)\n", r.passed() ? "PASS" : "FAIL", r.id,
                    r.title.c_str(), r.seconds);
        for (const SubCheck &c : r.checks)
            std::printf("    %s\n", format_check(c).c_str());
        if (!r.error.empty())
            std::printf("    error: %s\n", r.error.c_str());
        failed += r.passed() ? 0 : 1;
    }
    // the suite must notice a flipped coefficient in each closed form
    SuiteOptions mutated = opt;
    mutated.mutation = Mutation::usual_coefficient;
    const bool usual_caught = !run_criterion(find_criterion(3), mutated).passed();
    mutated.mutation = Mutation::total_coefficient;
    const bool total_caught = !run_criterion(find_criterion(1), mutated).passed();
    std::printf("%s mutation sensitivity: usual formula %s, total formula %s\n",
                usual_caught && total_caught ? "PASS" : "FAIL",
                usual_caught ? "caught" : "missed", total_caught ? "caught" : "missed");
    failed += usual_caught && total_caught ? 0 : 1;
    std::printf("%d of %zu checks failed\n", failed, criteria.size() + 1);
    return failed == 0 ? 0 : 1;
}
