#pragma once

#include <string>
#include <vector>

namespace mslab {

/* Command line entry point shared by the mslab tool and the tests.
 * Returns 0 when the requested run passed its gates, 1 when it ran but a
 * gate failed, 2 on usage or configuration errors. */
int run_app(const std::vector<std::string>& args);

}  // namespace mslab
