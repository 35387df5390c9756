#include "fbopt/serialize.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fbopt/errors.hpp"

namespace fbopt {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void Bundle::set_scalar(const std::string& key, const std::string& value) {
    scalars[key] = value;
}
void Bundle::set_scalar(const std::string& key, double value) { scalars[key] = fmt_double(value); }
void Bundle::set_scalar(const std::string& key, int value) { scalars[key] = std::to_string(value); }

std::string Bundle::get_string(const std::string& key) const {
    auto it = scalars.find(key);
    if (it == scalars.end()) throw InvalidInput("bundle: missing scalar '" + key + "'");
    return it->second;
}
double Bundle::get_double(const std::string& key) const { return std::stod(get_string(key)); }
int Bundle::get_int(const std::string& key) const { return std::stoi(get_string(key)); }

const Matrix& Bundle::get_matrix(const std::string& key) const {
    auto it = matrices.find(key);
    if (it == matrices.end()) throw InvalidInput("bundle: missing matrix '" + key + "'");
    return it->second;
}
bool Bundle::has(const std::string& key) const {
    return scalars.count(key) > 0 || matrices.count(key) > 0;
}

std::string Bundle::to_text() const {
    std::ostringstream os;
    os << "format fbopt-bundle-v1\n";
    for (const auto& [k, v] : scalars) os << k << " " << v << "\n";
    for (const auto& [k, M] : matrices) {
        os << "matrix " << k << " " << M.rows() << " " << M.cols() << "\n";
        for (Eigen::Index i = 0; i < M.rows(); ++i) {
            for (Eigen::Index j = 0; j < M.cols(); ++j)
                os << (j ? " " : "") << fmt_double(M(i, j));
            os << "\n";
        }
    }
    return os.str();
}

Bundle Bundle::from_text(const std::string& text) {
    Bundle b;
    std::istringstream is(text);
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (first) {
            std::string fmtv;
            ls >> fmtv;
            if (key != "format" || fmtv != "fbopt-bundle-v1")
                throw InvalidInput("bundle: unrecognized format header");
            first = false;
            continue;
        }
        if (key == "matrix") {
            std::string name;
            Eigen::Index rows, cols;
            if (!(ls >> name >> rows >> cols))
                throw InvalidInput("bundle: malformed matrix header");
            Matrix M(rows, cols);
            for (Eigen::Index i = 0; i < rows; ++i) {
                if (!std::getline(is, line))
                    throw InvalidInput("bundle: truncated matrix '" + name + "'");
                std::istringstream rs(line);
                for (Eigen::Index j = 0; j < cols; ++j)
                    if (!(rs >> M(i, j)))
                        throw InvalidInput("bundle: short row in matrix '" + name + "'");
            }
            b.matrices[name] = std::move(M);
        } else {
            std::string rest;
            std::getline(ls, rest);
            const size_t pos = rest.find_first_not_of(' ');
            b.scalars[key] = pos == std::string::npos ? "" : rest.substr(pos);
        }
    }
    if (first) throw InvalidInput("bundle: empty input");
    return b;
}

Bundle manifold_to_bundle(const ManifoldSolution& sol) {
    Bundle b;
    b.set_scalar("kind", std::string("manifold"));
    b.set_scalar("ordering", std::string("graded-lex-desc"));
    b.set_scalar("p", sol.pi.input_dim());
    b.set_scalar("degree_pi", sol.pi.degree());
    b.set_scalar("degree_gamma", sol.gamma.degree());
    b.set_scalar("training_residual", sol.report.training_residual);
    b.set_scalar("validation_residual", sol.report.validation_residual);
    b.set_scalar("f_scale", sol.report.f_scale);
    b.set_scalar("iterations", sol.report.iterations);
    b.set_scalar("collocation_count", sol.report.collocation_count);
    b.set_scalar("validation_count", sol.report.validation_count);
    b.set_scalar("domain_violations", sol.report.domain_violations);
    b.set_scalar("converged", sol.report.converged ? 1 : 0);
    b.matrices["pi_coeffs"] = sol.pi.coeffs;
    b.matrices["gamma_coeffs"] = sol.gamma.coeffs;
    b.matrices["x_offset"] = sol.x_offset;
    b.matrices["u_offset"] = sol.u_offset;
    return b;
}

ManifoldSolution manifold_from_bundle(const Bundle& b) {
    if (b.get_string("ordering") != "graded-lex-desc")
        throw InvalidInput("manifold bundle: unknown monomial ordering");
    ManifoldSolution sol;
    const int p = b.get_int("p");
    const Matrix& cp = b.get_matrix("pi_coeffs");
    const Matrix& cg = b.get_matrix("gamma_coeffs");
    sol.pi = PolyMap::zeros(p, static_cast<int>(cp.rows()), b.get_int("degree_pi"));
    sol.gamma = PolyMap::zeros(p, static_cast<int>(cg.rows()), b.get_int("degree_gamma"));
    if (sol.pi.coeffs.cols() != cp.cols() || sol.gamma.coeffs.cols() != cg.cols())
        throw InvalidInput("manifold bundle: coefficient count mismatch");
    sol.pi.coeffs = cp;
    sol.gamma.coeffs = cg;
    sol.x_offset = b.get_matrix("x_offset").col(0);
    sol.u_offset = b.get_matrix("u_offset").col(0);
    sol.report.training_residual = b.get_double("training_residual");
    sol.report.validation_residual = b.get_double("validation_residual");
    sol.report.f_scale = b.get_double("f_scale");
    sol.report.iterations = b.get_int("iterations");
    sol.report.collocation_count = b.get_int("collocation_count");
    sol.report.validation_count = b.get_int("validation_count");
    sol.report.domain_violations = b.get_int("domain_violations");
    sol.report.converged = b.get_int("converged") != 0;
    return sol;
}

Bundle controller_to_bundle(const Matrix& K, const Matrix& L1, const Matrix& L2,
                            const ManifoldSolution& manifold,
                            const std::string& scenario_hash) {
    Bundle b = manifold_to_bundle(manifold);
    b.set_scalar("kind", std::string("dynamic-controller"));
    b.set_scalar("scenario_hash", scenario_hash);
    b.matrices["K"] = K;
    b.matrices["L1"] = L1;
    b.matrices["L2"] = L2;
    return b;
}

Bundle linear_controller_to_bundle(const LinearController& ctrl,
                                   const std::string& scenario_hash) {
    Bundle b;
    b.set_scalar("kind", std::string("linear-controller"));
    b.set_scalar("scenario_hash", scenario_hash);
    b.matrices["Ac"] = ctrl.Ac;
    b.matrices["Bc"] = ctrl.Bc;
    b.matrices["Cc"] = ctrl.Cc;
    b.matrices["K"] = ctrl.K;
    b.matrices["L1"] = ctrl.L1;
    b.matrices["L2"] = ctrl.L2;
    b.matrices["Pi"] = ctrl.Pi;
    b.matrices["Gamma"] = ctrl.Gamma;
    return b;
}

LinearController linear_controller_from_bundle(const Bundle& b) {
    if (b.get_string("kind") != "linear-controller")
        throw InvalidInput("bundle: not a linear controller");
    LinearController c;
    c.Ac = b.get_matrix("Ac");
    c.Bc = b.get_matrix("Bc");
    c.Cc = b.get_matrix("Cc");
    c.K = b.get_matrix("K");
    c.L1 = b.get_matrix("L1");
    c.L2 = b.get_matrix("L2");
    c.Pi = b.get_matrix("Pi");
    c.Gamma = b.get_matrix("Gamma");
    return c;
}

std::string trajectory_to_csv(const Trajectory& traj) {
    std::ostringstream os;
    os << "t";
    auto emit_header = [&os](const char* base, Eigen::Index count) {
        for (Eigen::Index i = 1; i <= count; ++i) os << "," << base << i;
    };
    emit_header("x", traj.x.cols());
    emit_header("z", traj.z.cols());
    emit_header("w", traj.w.cols());
    emit_header("u", traj.u.cols());
    emit_header("y", traj.y.cols());
    emit_header("g", traj.g.cols());
    os << "\n";
    for (int i = 0; i < traj.samples(); ++i) {
        os << fmt_double(traj.t[static_cast<size_t>(i)]);
        auto emit_row = [&os, i](const Matrix& M) {
            for (Eigen::Index j = 0; j < M.cols(); ++j) os << "," << fmt_double(M(i, j));
        };
        emit_row(traj.x);
        emit_row(traj.z);
        emit_row(traj.w);
        emit_row(traj.u);
        emit_row(traj.y);
        emit_row(traj.g);
        os << "\n";
    }
    return os.str();
}

void atomic_write_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw InvalidInput("atomic_write_file: cannot open " + tmp.string());
        os << content;
    }
    fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InvalidInput("read_file: cannot open " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::string fnv1a_hex(const std::string& payload) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : payload) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "0x%016" PRIx64, h);
    return buf;
}

}  // namespace fbopt
