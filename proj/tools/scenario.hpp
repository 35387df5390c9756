#pragma once

#include <string>
#include <vector>

#include "fbopt/instances.hpp"
#include "fbopt/manifold.hpp"
#include "fbopt/model.hpp"
#include "fbopt/types.hpp"

namespace fbopt::tool {

/// Fully resolved run configuration. Serializes to a flat key = value text
/// format; the canonical serialization (sorted keys) is what gets hashed and
/// embedded in every artifact.
struct Scenario {
    std::string problem{"lq"};

    PendulumParams pendulum{};
    double lambda{0.0};  // quadratic input weight (lq)
    double kappa{1.0};   // logistic weight
    double mu{0.5};      // logistic steepness

    std::vector<double> frequencies{1.0};
    std::vector<double> amplitudes{1.0};

    FitOptions fit{};

    Interval feedback_region{-3.0, -2.0};
    Interval observer_region{-2.0, -1.0};

    double horizon{30.0};
    double step{1e-3};
    int record_stride{10};
    double settle_tol{1e-6};
    std::string start{"anchor"};  // anchor | manifold
    std::vector<double> x0;       // optional explicit overrides
    std::vector<double> z0;

    unsigned seed{0};
};

/// Baseline defaults for each built-in problem name.
Scenario default_scenario(const std::string& problem);

Scenario scenario_from_text(const std::string& text);

/// Canonical serialization: sorted keys, 17-digit floats.
std::string scenario_to_text(const Scenario& sc);

std::string scenario_hash(const Scenario& sc);

/// Resolve a CLI argument: an existing file path, or a built-in name looked up
/// under FBOPT_SCENARIO_DIR / the compiled-in scenarios directory, falling
/// back to the built-in defaults.
Scenario load_scenario(const std::string& name_or_path);

Problem build_problem(const Scenario& sc);

}  // namespace fbopt::tool
