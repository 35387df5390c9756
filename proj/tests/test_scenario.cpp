#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "commands.hpp"
#include "fbopt/errors.hpp"
#include "fbopt/serialize.hpp"
#include "scenario.hpp"

using namespace fbopt;
using namespace fbopt::tool;

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("fbopt_scn_" + std::to_string(::getpid()) + "_" +
                std::to_string(rand()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("scenario round-trips through its canonical text form") {
    Scenario sc = default_scenario("pendulum-quadratic");
    sc.seed = 7;
    sc.fit.degree_gamma = 3;
    sc.x0 = {0.05, -0.01};
    const Scenario back = scenario_from_text(scenario_to_text(sc));
    CHECK(scenario_to_text(back) == scenario_to_text(sc));
    CHECK(scenario_hash(back) == scenario_hash(sc));
    CHECK(back.fit.degree_gamma == 3);
    CHECK(back.x0.size() == 2);
}

TEST_CASE("hash changes with any parameter") {
    Scenario a = default_scenario("lq");
    Scenario b = a;
    b.seed = 1;
    CHECK(scenario_hash(a) != scenario_hash(b));
    Scenario c = a;
    c.horizon += 1.0;
    CHECK(scenario_hash(a) != scenario_hash(c));
}

TEST_CASE("shipped scenario files parse and match the built-in defaults") {
    for (const char* name :
         {"lq", "example5", "pendulum-quadratic", "pendulum-logistic"}) {
        const fs::path file = fs::path(FBOPT_SOURCE_SCENARIO_DIR) / (std::string(name) + ".scn");
        REQUIRE(fs::exists(file));
        const Scenario sc = scenario_from_text(read_file(file.string()));
        CHECK(sc.problem == name);
        const Problem prob = build_problem(sc);
        CHECK(prob.name == name);
    }
}

TEST_CASE("comments and unknown spacing are tolerated") {
    const Scenario sc = scenario_from_text(
        "# a comment\nproblem = lq\n  sim.horizon =  12.5  # trailing\n");
    CHECK(sc.problem == "lq");
    CHECK(sc.horizon == 12.5);
}

TEST_CASE("missing problem key or bad start mode is rejected") {
    CHECK_THROWS_AS(scenario_from_text("sim.horizon = 3\n"), InvalidInput);
    CHECK_THROWS_AS(scenario_from_text("problem = lq\nsim.start = sideways\n"),
                    InvalidInput);
    CHECK_THROWS_AS(default_scenario("no-such-problem"), InvalidInput);
}

TEST_CASE("check command accepts every built-in instance") {
    for (const char* name : {"lq", "example5", "pendulum-quadratic"}) {
        TempDir tmp;
        RunContext ctx;
        ctx.scenario = default_scenario(name);
        ctx.out_dir = tmp.path.string();
        CHECK(cmd_check(ctx) == kExitOk);
    }
}

TEST_CASE("solve-linear emits a solution bundle") {
    TempDir tmp;
    RunContext ctx;
    ctx.scenario = default_scenario("lq");
    ctx.out_dir = tmp.path.string();
    CHECK(cmd_solve_linear(ctx) == kExitOk);
    const Bundle b =
        Bundle::from_text(read_file((tmp.path / "linear_solution.txt").string()));
    CHECK(b.get_string("kind") == "regulator-solution");
    CHECK(b.get_matrix("Gamma")(0, 0) == doctest::Approx(-1.0));
    CHECK(b.get_string("scenario_hash") == scenario_hash(ctx.scenario));
}

TEST_CASE("synthesize then simulate: bundle replay, hash guard, determinism") {
    TempDir tmp;
    RunContext ctx;
    ctx.scenario = default_scenario("lq");
    ctx.scenario.horizon = 10.0;
    ctx.out_dir = tmp.path.string();
    REQUIRE(cmd_synthesize(ctx) == kExitOk);
    const std::string bundle = (tmp.path / "controller.txt").string();

    REQUIRE(cmd_simulate(ctx, bundle) == kExitOk);
    const std::string csv1 = read_file((tmp.path / "trajectory.csv").string());
    CHECK(csv1.rfind("# scenario_hash ", 0) == 0);
    CHECK(csv1.find("t,x1,z1,z2,z3,w1,w2,u1,y1,g1\n") != std::string::npos);
    CHECK(fs::exists(tmp.path / "metrics.txt"));
    CHECK(fs::exists(tmp.path / "traj_g.svg"));
    CHECK(fs::exists(tmp.path / "traj_u.svg"));
    CHECK(fs::exists(tmp.path / "traj_w.svg"));
    CHECK(fs::exists(tmp.path / "traj_x.svg"));

    // Identical scenario + seed: byte-identical output.
    REQUIRE(cmd_simulate(ctx, bundle) == kExitOk);
    CHECK(read_file((tmp.path / "trajectory.csv").string()) == csv1);

    // A changed scenario must be refused unless forced.
    RunContext other = ctx;
    other.scenario.horizon = 11.0;
    CHECK_THROWS_AS(cmd_simulate(other, bundle), InvalidInput);
    other.force = true;
    CHECK(cmd_simulate(other, bundle) == kExitOk);
}

TEST_CASE("compare-baseline reports the tracking gap on the lq scenario") {
    TempDir tmp;
    RunContext ctx;
    ctx.scenario = default_scenario("lq");
    ctx.scenario.horizon = 40.0;
    ctx.out_dir = tmp.path.string();
    CHECK(cmd_compare_baseline(ctx, {0.1}) == kExitOk);
    const std::string table = read_file((tmp.path / "comparison.txt").string());
    CHECK(table.find("internal-model") != std::string::npos);
    CHECK(table.find("gradient-flow") != std::string::npos);
}

TEST_CASE("baseline comparison on a problem without the additive structure fails cleanly") {
    TempDir tmp;
    RunContext ctx;
    ctx.scenario = default_scenario("pendulum-quadratic");
    ctx.scenario.fit.degree_pi = ctx.scenario.fit.degree_gamma = 1;
    ctx.scenario.fit.collocation_per_basis = 10;
    ctx.out_dir = tmp.path.string();
    CHECK_THROWS_AS(cmd_compare_baseline(ctx, {0.1}), UnsupportedProblem);
}
