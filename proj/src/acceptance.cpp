#include "zyg/acceptance.hpp"
namespace zyg {
std::vector<CriterionResult> run_acceptance() { return {}; }
}
