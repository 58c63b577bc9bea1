#include "romfv/pod_basis.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "romfv/error.hpp"

namespace romfv {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd cell_weights(const Mesh& mesh, int comps) {
    VectorXd w(static_cast<Eigen::Index>(mesh.n_cells()) * comps);
    for (Index c = 0; c < mesh.n_cells(); ++c) {
        for (int k = 0; k < comps; ++k) w[static_cast<Eigen::Index>(c) * comps + k] = mesh.volume(c);
    }
    return w;
}

double parse_double(std::string_view text, const std::filesystem::path& path, std::size_t line) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ParseError(fmt::format("{}: cannot parse number '{}'", path.string(), text), line);
    }
    return value;
}

}  // namespace

std::string_view to_string(BasisKind kind) {
    switch (kind) {
        case BasisKind::velocity: return "velocity";
        case BasisKind::pressure: return "pressure";
        case BasisKind::supremizer: return "supremizer";
        case BasisKind::enriched_velocity: return "enriched-velocity";
    }
    return "?";
}

BasisKind basis_kind_from_string(std::string_view text) {
    for (BasisKind k : {BasisKind::velocity, BasisKind::pressure, BasisKind::supremizer, BasisKind::enriched_velocity}) {
        if (text == to_string(k)) return k;
    }
    throw ConfigError(fmt::format("unknown basis kind '{}'", text));
}

double inner_product(const Mesh& mesh, int comps, const VectorXd& a, const VectorXd& b) {
    const auto n = static_cast<Eigen::Index>(mesh.n_cells()) * comps;
    if (a.size() != n || b.size() != n) {
        throw ConfigError(fmt::format("inner product of vectors of length {} and {}, expected {}", a.size(), b.size(), n));
    }
    double s = 0.0;
    for (Index c = 0; c < mesh.n_cells(); ++c) {
        double d = 0.0;
        for (int k = 0; k < comps; ++k) {
            const auto i = static_cast<Eigen::Index>(c) * comps + k;
            d += a[i] * b[i];
        }
        s += mesh.volume(c) * d;
    }
    return s;
}

double inner_product(const Field& a, const Field& b) {
    if (a.rank() != b.rank()) throw ConfigError("inner product of fields with different rank");
    if (a.mesh_ptr() != b.mesh_ptr() && !(a.mesh() == b.mesh())) {
        throw ConfigError("inner product of fields on different meshes");
    }
    return inner_product(a.mesh(), a.n_components(), a.values(), b.values());
}

MatrixXd gram_matrix(const Mesh& mesh, int comps, const MatrixXd& x, const MatrixXd& y) {
    return x.transpose() * (cell_weights(mesh, comps).asDiagonal() * y);
}

MatrixXd correlation_matrix(const SnapshotSet& snapshots) {
    if (snapshots.size() == 0) throw ConfigError("correlation matrix of an empty snapshot set");
    const int comps = components(snapshots.rank());
    const MatrixXd y = cell_weights(snapshots.mesh(), comps).cwiseSqrt().asDiagonal() * snapshots.matrix();
    MatrixXd c = MatrixXd::Zero(y.cols(), y.cols());
    c.selfadjointView<Eigen::Lower>().rankUpdate(y.transpose());
    return c.selfadjointView<Eigen::Lower>();
}

Field PodBasis::mode(Index j) const {
    if (j >= size()) throw ConfigError(fmt::format("mode {} requested from a basis of {} modes", j, size()));
    const auto c = static_cast<Eigen::Index>(j);
    return {mesh, rank, modes.col(c), scale_data(bcs, bc_weights[c])};
}

PodBasis PodBasis::head(Index k) const {
    if (k > size()) throw ConfigError(fmt::format("cannot take {} modes from a basis of {}", k, size()));
    PodBasis out = *this;
    out.modes = modes.leftCols(static_cast<Eigen::Index>(k));
    out.bc_weights = bc_weights.head(static_cast<Eigen::Index>(k));
    return out;
}

Field PodBasis::combine(const VectorXd& coeffs) const {
    if (coeffs.size() != modes.cols()) {
        throw ConfigError(fmt::format("{} coefficients for a basis of {} modes", coeffs.size(), modes.cols()));
    }
    return {mesh, rank, modes * coeffs, scale_data(bcs, bc_weights.dot(coeffs))};
}

PodBasis compute_pod(const SnapshotSet& snapshots, Index n_modes, const BoundaryConditions& bcs, BasisKind kind) {
    const MatrixXd c = correlation_matrix(snapshots);
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(c);
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of the correlation matrix failed");
    const auto ns = c.rows();
    VectorXd lambda = eig.eigenvalues().reverse().cwiseMax(0.0);
    const MatrixXd q = eig.eigenvectors().rowwise().reverse();

    const double lmax = lambda[0];
    Index rank = 0;
    while (rank < static_cast<Index>(ns) && lambda[static_cast<Eigen::Index>(rank)] > kRankTolerance * lmax) ++rank;
    if (n_modes < 1 || n_modes > rank) {
        throw ConfigError(fmt::format("requested {} modes but the snapshot set has numerical rank {}", n_modes, rank));
    }

    PodBasis basis{snapshots.mesh_ptr(), snapshots.rank(), kind, bcs, {}, {}, lambda, VectorXd(ns)};
    const auto k = static_cast<Eigen::Index>(n_modes);
    basis.modes = snapshots.matrix() * q.leftCols(k);
    basis.bc_weights = q.leftCols(k).colwise().sum().transpose();
    const int comps = components(snapshots.rank());
    for (Eigen::Index j = 0; j < k; ++j) {
        const double norm = std::sqrt(inner_product(snapshots.mesh(), comps, basis.modes.col(j), basis.modes.col(j)));
        Eigen::Index peak = 0;
        basis.modes.col(j).cwiseAbs().maxCoeff(&peak);
        const double scale = (basis.modes(peak, j) < 0.0 ? -1.0 : 1.0) / norm;
        basis.modes.col(j) *= scale;
        basis.bc_weights[j] *= scale;
    }
    // Symmetric re-orthonormalisation removes the round-off of the snapshot method in
    // weak modes while changing each mode as little as possible.
    const MatrixXd g = gram_matrix(snapshots.mesh(), comps, basis.modes, basis.modes);
    const MatrixXd g_inv_sqrt = Eigen::SelfAdjointEigenSolver<MatrixXd>(g).operatorInverseSqrt();
    basis.modes = basis.modes * g_inv_sqrt;
    basis.bc_weights = g_inv_sqrt * basis.bc_weights;
    double running = 0.0;
    const double total = lambda.sum();
    for (Eigen::Index i = 0; i < ns; ++i) {
        running += lambda[i];
        basis.cumulative[i] = running / total;
    }
    return basis;
}

double projection_error(const PodBasis& basis, const SnapshotSet& snapshots, Index k) {
    const int comps = components(basis.rank);
    const MatrixXd phi = basis.modes.leftCols(static_cast<Eigen::Index>(k));
    const MatrixXd s = snapshots.matrix();
    const MatrixXd residual = s - phi * gram_matrix(snapshots.mesh(), comps, phi, s);
    return gram_matrix(snapshots.mesh(), comps, residual, residual).trace();
}

std::filesystem::path eigenvalue_sidecar(const std::filesystem::path& path) {
    auto p = path;
    return p.replace_extension(".eigen.csv");
}

void write_basis(const std::filesystem::path& path, const PodBasis& basis) {
    std::vector<SnapshotRecord> records;
    for (Eigen::Index j = 0; j < basis.modes.cols(); ++j) {
        records.push_back({basis.bc_weights[j], static_cast<double>(j + 1), basis.modes.col(j)});
    }
    write_snapshots(path, SnapshotSet(basis.mesh, basis.rank, basis.size(), 1, std::move(records)));
    const auto csv = eigenvalue_sidecar(path);
    std::ofstream out(csv);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", csv.string()));
    out << "index,lambda,cumulative\n";
    for (Eigen::Index i = 0; i < basis.eigenvalues.size(); ++i) {
        out << fmt::format("{},{:.17g},{:.17g}\n", i + 1, basis.eigenvalues[i], basis.cumulative[i]);
    }
    if (!out) throw IoError(fmt::format("failed writing '{}'", csv.string()));
}

PodBasis read_basis(const std::filesystem::path& path, std::shared_ptr<const Mesh> mesh, const BoundaryConditions& bcs,
                    BasisKind kind) {
    const SnapshotSet set = read_snapshots(path, std::move(mesh));
    PodBasis basis{set.mesh_ptr(), set.rank(), kind, bcs, set.matrix(), VectorXd(set.size()), {}, {}};
    for (Index j = 0; j < set.size(); ++j) basis.bc_weights[static_cast<Eigen::Index>(j)] = set[j].mu;

    const auto csv = eigenvalue_sidecar(path);
    std::ifstream in(csv);
    if (!in) throw IoError(fmt::format("cannot open eigenvalue sidecar '{}'", csv.string()));
    std::string line;
    std::getline(in, line);
    if (line != "index,lambda,cumulative") throw ParseError(fmt::format("{}: unexpected header", csv.string()), 1);
    std::vector<double> lambda;
    std::vector<double> cumulative;
    for (std::size_t no = 2; std::getline(in, line); ++no) {
        if (line.empty()) continue;
        const auto a = line.find(',');
        const auto b = line.find(',', a + 1);
        if (a == std::string::npos || b == std::string::npos) {
            throw ParseError(fmt::format("{}: expected three columns", csv.string()), no);
        }
        lambda.push_back(parse_double(std::string_view(line).substr(a + 1, b - a - 1), csv, no));
        cumulative.push_back(parse_double(std::string_view(line).substr(b + 1), csv, no));
    }
    basis.eigenvalues = Eigen::Map<const VectorXd>(lambda.data(), static_cast<Eigen::Index>(lambda.size()));
    basis.cumulative = Eigen::Map<const VectorXd>(cumulative.data(), static_cast<Eigen::Index>(cumulative.size()));
    return basis;
}

}  // namespace romfv
