#include <iostream>

#include "bomai/acceptance.hpp"

int main() {
  bomai::AcceptanceSuite suite({}, bomai::reference_seeds(), &std::cerr);
  bool all = true;
  suite.run_all([&](const bomai::CriterionResult& r) {
    std::cout << bomai::format_result(r) << std::endl;
    all = all && r.pass;
  });
  return all ? 0 : 1;
}
