#include "scenario.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>

#include "fbopt/errors.hpp"
#include "fbopt/serialize.hpp"

namespace fbopt::tool {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_list(const std::vector<double>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += " ";
        out += fmt(v[i]);
    }
    return out;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::istringstream is(s);
    double v;
    while (is >> v) out.push_back(v);
    return out;
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const size_t a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string();
            const size_t b = s.find_last_not_of(" \t\r");
            return s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = value;
    }
    return kv;
}

}  // namespace

Scenario default_scenario(const std::string& problem) {
    Scenario sc;
    sc.problem = problem;
    if (problem == "lq") {
        sc.frequencies = {1.0};
        sc.amplitudes = {1.0};
        sc.fit.degree_pi = sc.fit.degree_gamma = 1;
        sc.fit.target_residual = 1e-8;
        sc.horizon = 60.0;
        sc.settle_tol = 1e-8;
    } else if (problem == "example5") {
        sc.frequencies = {};
        sc.amplitudes = {0.8};
        sc.fit.degree_pi = sc.fit.degree_gamma = 1;
        sc.fit.target_residual = 1e-8;
        sc.horizon = 20.0;
        sc.settle_tol = 1e-6;
    } else if (problem == "pendulum-quadratic") {
        sc.frequencies = {1.0, 10.0};
        sc.amplitudes = {1.0, 0.5};
        sc.fit.degree_pi = sc.fit.degree_gamma = 4;
        sc.fit.target_residual = 1e-5;
        sc.horizon = 30.0;
        sc.settle_tol = 1e-4;
        sc.x0 = {0.002, 0.0};
    } else if (problem == "pendulum-logistic") {
        sc.frequencies = {1.0, 10.0};
        sc.amplitudes = {1.0, 0.5};
        sc.fit.degree_pi = sc.fit.degree_gamma = 4;
        sc.fit.max_iterations = 60;
        sc.fit.target_residual = 1.0;
        sc.horizon = 30.0;
        sc.settle_tol = 1e-3;
        sc.start = "manifold";
    } else {
        throw InvalidInput("default_scenario: unknown problem '" + problem + "'");
    }
    return sc;
}

Scenario scenario_from_text(const std::string& text) {
    const auto kv = parse_kv(text);
    const auto it = kv.find("problem");
    if (it == kv.end()) throw InvalidInput("scenario: missing 'problem' key");
    Scenario sc = default_scenario(it->second);

    auto get = [&kv](const char* key, auto setter) {
        const auto f = kv.find(key);
        if (f != kv.end()) setter(f->second);
    };
    auto as_double = [](const std::string& s) { return std::stod(s); };
    auto as_int = [](const std::string& s) { return std::stoi(s); };

    get("pendulum.length", [&](const std::string& v) { sc.pendulum.length = as_double(v); });
    get("pendulum.mass", [&](const std::string& v) { sc.pendulum.mass = as_double(v); });
    get("pendulum.friction",
        [&](const std::string& v) { sc.pendulum.friction = as_double(v); });
    get("pendulum.gravity", [&](const std::string& v) { sc.pendulum.gravity = as_double(v); });
    get("pendulum.inertia", [&](const std::string& v) { sc.pendulum.inertia = as_double(v); });
    get("objective.lambda", [&](const std::string& v) { sc.lambda = as_double(v); });
    get("objective.kappa", [&](const std::string& v) { sc.kappa = as_double(v); });
    get("objective.mu", [&](const std::string& v) { sc.mu = as_double(v); });
    get("exo.frequencies", [&](const std::string& v) { sc.frequencies = parse_list(v); });
    get("exo.amplitudes", [&](const std::string& v) { sc.amplitudes = parse_list(v); });
    get("fit.degree_pi", [&](const std::string& v) { sc.fit.degree_pi = as_int(v); });
    get("fit.degree_gamma", [&](const std::string& v) { sc.fit.degree_gamma = as_int(v); });
    get("fit.collocation_per_basis",
        [&](const std::string& v) { sc.fit.collocation_per_basis = as_int(v); });
    get("fit.trajectory_samples",
        [&](const std::string& v) { sc.fit.trajectory_samples = as_int(v); });
    get("fit.trajectory_horizon",
        [&](const std::string& v) { sc.fit.trajectory_horizon = as_double(v); });
    get("fit.region_margin",
        [&](const std::string& v) { sc.fit.region_margin = as_double(v); });
    get("fit.max_iterations",
        [&](const std::string& v) { sc.fit.max_iterations = as_int(v); });
    get("fit.target_residual",
        [&](const std::string& v) { sc.fit.target_residual = as_double(v); });
    get("gains.feedback", [&](const std::string& v) {
        const auto lims = parse_list(v);
        if (lims.size() != 2) throw InvalidInput("scenario: gains.feedback needs two numbers");
        sc.feedback_region = Interval{lims[0], lims[1]};
    });
    get("gains.observer", [&](const std::string& v) {
        const auto lims = parse_list(v);
        if (lims.size() != 2) throw InvalidInput("scenario: gains.observer needs two numbers");
        sc.observer_region = Interval{lims[0], lims[1]};
    });
    get("sim.horizon", [&](const std::string& v) { sc.horizon = as_double(v); });
    get("sim.step", [&](const std::string& v) { sc.step = as_double(v); });
    get("sim.record_stride", [&](const std::string& v) { sc.record_stride = as_int(v); });
    get("sim.settle_tol", [&](const std::string& v) { sc.settle_tol = as_double(v); });
    get("sim.start", [&](const std::string& v) { sc.start = v; });
    get("sim.x0", [&](const std::string& v) { sc.x0 = parse_list(v); });
    get("sim.z0", [&](const std::string& v) { sc.z0 = parse_list(v); });
    get("seed", [&](const std::string& v) { sc.seed = static_cast<unsigned>(as_int(v)); });

    if (sc.start != "anchor" && sc.start != "manifold")
        throw InvalidInput("scenario: sim.start must be 'anchor' or 'manifold'");
    return sc;
}

std::string scenario_to_text(const Scenario& sc) {
    std::map<std::string, std::string> kv;
    kv["problem"] = sc.problem;
    kv["pendulum.length"] = fmt(sc.pendulum.length);
    kv["pendulum.mass"] = fmt(sc.pendulum.mass);
    kv["pendulum.friction"] = fmt(sc.pendulum.friction);
    kv["pendulum.gravity"] = fmt(sc.pendulum.gravity);
    kv["pendulum.inertia"] = fmt(sc.pendulum.inertia);
    kv["objective.lambda"] = fmt(sc.lambda);
    kv["objective.kappa"] = fmt(sc.kappa);
    kv["objective.mu"] = fmt(sc.mu);
    kv["exo.frequencies"] = fmt_list(sc.frequencies);
    kv["exo.amplitudes"] = fmt_list(sc.amplitudes);
    kv["fit.degree_pi"] = std::to_string(sc.fit.degree_pi);
    kv["fit.degree_gamma"] = std::to_string(sc.fit.degree_gamma);
    kv["fit.collocation_per_basis"] = std::to_string(sc.fit.collocation_per_basis);
    kv["fit.trajectory_samples"] = std::to_string(sc.fit.trajectory_samples);
    kv["fit.trajectory_horizon"] = fmt(sc.fit.trajectory_horizon);
    kv["fit.region_margin"] = fmt(sc.fit.region_margin);
    kv["fit.max_iterations"] = std::to_string(sc.fit.max_iterations);
    kv["fit.target_residual"] = fmt(sc.fit.target_residual);
    kv["gains.feedback"] = fmt(sc.feedback_region.lo) + " " + fmt(sc.feedback_region.hi);
    kv["gains.observer"] = fmt(sc.observer_region.lo) + " " + fmt(sc.observer_region.hi);
    kv["sim.horizon"] = fmt(sc.horizon);
    kv["sim.step"] = fmt(sc.step);
    kv["sim.record_stride"] = std::to_string(sc.record_stride);
    kv["sim.settle_tol"] = fmt(sc.settle_tol);
    kv["sim.start"] = sc.start;
    if (!sc.x0.empty()) kv["sim.x0"] = fmt_list(sc.x0);
    if (!sc.z0.empty()) kv["sim.z0"] = fmt_list(sc.z0);
    kv["seed"] = std::to_string(sc.seed);

    std::ostringstream os;
    for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
    return os.str();
}

std::string scenario_hash(const Scenario& sc) { return fnv1a_hex(scenario_to_text(sc)); }

Scenario load_scenario(const std::string& name_or_path) {
    namespace fs = std::filesystem;
    if (fs::exists(name_or_path) && fs::is_regular_file(name_or_path))
        return scenario_from_text(read_file(name_or_path));

    std::vector<fs::path> dirs;
    if (const char* env = std::getenv("FBOPT_SCENARIO_DIR")) dirs.emplace_back(env);
#ifdef FBOPT_SOURCE_SCENARIO_DIR
    dirs.emplace_back(FBOPT_SOURCE_SCENARIO_DIR);
#endif
    for (const auto& dir : dirs) {
        const fs::path candidate = dir / (name_or_path + ".scn");
        if (fs::exists(candidate)) return scenario_from_text(read_file(candidate.string()));
    }
    return default_scenario(name_or_path);
}

Problem build_problem(const Scenario& sc) {
    if (sc.problem == "example5") return scalar_example5();
    if (sc.problem == "lq") {
        Matrix A = Matrix::Constant(1, 1, -1.0);
        Matrix B = Matrix::Constant(1, 1, 1.0);
        Exosystem exo = harmonic_exosystem(sc.frequencies, sc.amplitudes);
        Matrix P = Matrix::Zero(1, exo.p);
        P(0, 0) = 1.0;
        Matrix C = Matrix::Identity(1, 1);
        Matrix Q = Matrix::Zero(1, exo.p);
        return lq_problem(A, B, P, C, Q, sc.lambda, std::move(exo));
    }
    if (sc.problem == "pendulum-quadratic")
        return pendulum_quadratic_problem(sc.pendulum, sc.frequencies, sc.amplitudes);
    if (sc.problem == "pendulum-logistic")
        return pendulum_logistic_problem(sc.pendulum, sc.frequencies, sc.amplitudes,
                                         sc.kappa, sc.mu);
    throw InvalidInput("build_problem: unknown problem '" + sc.problem + "'");
}

}  // namespace fbopt::tool
