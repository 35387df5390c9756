#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "commands.hpp"
#include "fbopt/errors.hpp"
#include "fbopt/manifold.hpp"

using namespace fbopt;
using namespace fbopt::tool;

namespace {

struct GlobalArgs {
    std::string scenario;
    std::string out_dir{"out"};
    int seed{-1};
    int degree{-1};
    double horizon{-1};
    double step{-1};
    bool force{false};
};

void add_common(CLI::App* cmd, GlobalArgs* args, std::string* positional,
                bool with_positional = true) {
    if (with_positional)
        cmd->add_option("name", *positional,
                        "Built-in problem name (lq, pendulum-quadratic, "
                        "pendulum-logistic, example5)");
    cmd->add_option("--scenario", args->scenario, "Scenario file or built-in name");
    cmd->add_option("--out", args->out_dir, "Output directory");
    cmd->add_option("--seed", args->seed, "Override the scenario seed");
    cmd->add_option("--degree", args->degree, "Override both fit degrees");
    cmd->add_option("--horizon", args->horizon, "Override the simulation horizon [s]");
    cmd->add_option("--step", args->step, "Override the integrator step [s]");
    cmd->add_flag("--force", args->force, "Ignore scenario-hash mismatches");
}

RunContext make_context(const GlobalArgs& args, const std::string& positional) {
    std::string source = !args.scenario.empty() ? args.scenario : positional;
    if (source.empty())
        throw InvalidInput("no scenario given: pass a problem name or --scenario");
    RunContext ctx;
    ctx.scenario = load_scenario(source);
    ctx.out_dir = args.out_dir;
    ctx.force = args.force;
    if (args.seed >= 0) ctx.scenario.seed = static_cast<unsigned>(args.seed);
    if (args.degree >= 1) {
        ctx.scenario.fit.degree_pi = args.degree;
        ctx.scenario.fit.degree_gamma = args.degree;
    }
    if (args.horizon > 0) ctx.scenario.horizon = args.horizon;
    if (args.step > 0) ctx.scenario.step = args.step;
    return ctx;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"feedback-optimization controller synthesis and simulation"};
    app.require_subcommand(1);

    GlobalArgs args;
    std::string positional;
    std::string bundle_path;
    std::string etas_csv{"0.01,0.1,1"};

    CLI::App* check = app.add_subcommand("check", "Solvability screen (necessary conditions)");
    add_common(check, &args, &positional);
    CLI::App* solve = app.add_subcommand("solve-linear", "Exact linear regulator solve");
    add_common(solve, &args, &positional);
    CLI::App* fit = app.add_subcommand("fit-manifold", "Polynomial regulator-map fit");
    add_common(fit, &args, &positional);
    CLI::App* syn = app.add_subcommand("synthesize", "Observer-based controller synthesis");
    add_common(syn, &args, &positional);
    CLI::App* sim = app.add_subcommand("simulate", "Closed-loop simulation and artifacts");
    add_common(sim, &args, &positional);
    sim->add_option("--bundle", bundle_path, "Controller bundle to replay");
    CLI::App* cmp =
        app.add_subcommand("compare-baseline", "Internal-model vs gradient-flow baseline");
    add_common(cmp, &args, &positional);
    cmp->add_option("--etas", etas_csv, "Comma-separated baseline gains");
    CLI::App* bench = app.add_subcommand("bench", "check + synthesize + simulate");
    add_common(bench, &args, &positional);

    CLI11_PARSE(app, argc, argv);

    try {
        const RunContext ctx = make_context(args, positional);
        if (check->parsed()) return cmd_check(ctx);
        if (solve->parsed()) return cmd_solve_linear(ctx);
        if (fit->parsed()) return cmd_fit_manifold(ctx);
        if (syn->parsed()) return cmd_synthesize(ctx);
        if (sim->parsed()) return cmd_simulate(ctx, bundle_path);
        if (cmp->parsed()) {
            std::vector<double> etas;
            std::string item;
            std::istringstream is(etas_csv);
            while (std::getline(is, item, ',')) etas.push_back(std::stod(item));
            return cmd_compare_baseline(ctx, etas);
        }
        if (bench->parsed()) return cmd_bench(ctx);
    } catch (const FitFailure& e) {
        std::fprintf(stderr, "fit failure: %s\n", e.what());
        return kExitSynthesisFailure;
    } catch (const SynthesisError& e) {
        std::fprintf(stderr, "synthesis error: %s\n", e.what());
        return kExitSynthesisFailure;
    } catch (const NoSolution& e) {
        std::fprintf(stderr, "no solution: %s\n", e.what());
        return kExitSynthesisFailure;
    } catch (const NumericalFailure& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitSynthesisFailure;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInvalidInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInvalidInput;
    }
    return kExitOk;
}
