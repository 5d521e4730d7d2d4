#include "zyg/acceptance.hpp"
int main() { for (const auto& r : zyg::run_acceptance()) if (!r.pass) return 1; return 0; }
