#include <iostream>

#include "defcast/acceptance.hpp"

int main() {
    const auto results = defcast::acceptance::run("all", {});
    int failed = 0;
    for (const auto& r : results) {
        std::cout << defcast::acceptance::format(r) << std::endl;
        if (!r.passed) ++failed;
    }
    std::cout << (results.size() - failed) << "/" << results.size() << " acceptance criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
