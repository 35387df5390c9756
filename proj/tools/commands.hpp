#pragma once

#include <string>
#include <vector>

#include "scenario.hpp"

namespace fbopt::tool {

struct RunContext {
    Scenario scenario;
    std::string out_dir{"out"};
    bool force{false};
};

/// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidInput = 2;
inline constexpr int kExitSynthesisFailure = 3;
inline constexpr int kExitDiverged = 4;

int cmd_check(const RunContext& ctx);
int cmd_solve_linear(const RunContext& ctx);
int cmd_fit_manifold(const RunContext& ctx);
int cmd_synthesize(const RunContext& ctx);
int cmd_simulate(const RunContext& ctx, const std::string& bundle_path);
int cmd_compare_baseline(const RunContext& ctx, const std::vector<double>& etas);
int cmd_bench(const RunContext& ctx);

}  // namespace fbopt::tool
