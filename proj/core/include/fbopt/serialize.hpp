#pragma once

#include <map>
#include <string>

#include "fbopt/linear_controller.hpp"
#include "fbopt/manifold.hpp"
#include "fbopt/sim.hpp"
#include "fbopt/types.hpp"

namespace fbopt {

/// Plain-text container: scalar `key value` lines plus named row-major matrix
/// blocks introduced by `matrix <name> <rows> <cols>`. Values round-trip
/// bit-exactly (printed with 17 significant digits).
struct Bundle {
    std::map<std::string, std::string> scalars;
    std::map<std::string, Matrix> matrices;

    void set_scalar(const std::string& key, const std::string& value);
    void set_scalar(const std::string& key, double value);
    void set_scalar(const std::string& key, int value);
    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    int get_int(const std::string& key) const;
    const Matrix& get_matrix(const std::string& key) const;
    bool has(const std::string& key) const;

    std::string to_text() const;
    static Bundle from_text(const std::string& text);
};

Bundle manifold_to_bundle(const ManifoldSolution& sol);
ManifoldSolution manifold_from_bundle(const Bundle& b);

/// Gains + manifold + scenario hash; enough to rebuild the dynamic controller
/// against a problem reconstructed from the same scenario.
Bundle controller_to_bundle(const Matrix& K, const Matrix& L1, const Matrix& L2,
                            const ManifoldSolution& manifold, const std::string& scenario_hash);

Bundle linear_controller_to_bundle(const LinearController& ctrl,
                                   const std::string& scenario_hash);
LinearController linear_controller_from_bundle(const Bundle& b);

std::string trajectory_to_csv(const Trajectory& traj);

/// Write via a temporary file in the same directory followed by rename.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

/// FNV-1a 64-bit hash, rendered as 0x-prefixed hex.
std::string fnv1a_hex(const std::string& payload);

}  // namespace fbopt
