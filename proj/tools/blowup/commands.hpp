#pragma once

#include <string>

#include "config.hpp"

namespace cli {

struct Context {
    Config config;
    std::string out_dir = ".";
};

// Each returns the process exit code: 0 decided/success, 2 Unknown. Errors propagate as
// exceptions and are mapped to codes 1 and 3 by main.
int cmd_verdict(const Context& ctx);
int cmd_dist(const Context& ctx);
int cmd_laplace(const Context& ctx);
int cmd_simulate(const Context& ctx);
int cmd_h4check(const Context& ctx);
int cmd_odetime(const Context& ctx);

}  // namespace cli
