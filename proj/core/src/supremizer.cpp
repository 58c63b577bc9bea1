#include "romfv/supremizer.hpp"

#include <fmt/format.h>

#include "romfv/error.hpp"
#include "romfv/fv_matrices.hpp"
#include "romfv/fv_operators.hpp"

namespace romfv {

using Eigen::VectorXd;

SupremizerSolver::SupremizerSolver(std::shared_ptr<const Mesh> mesh)
    : mesh_(std::move(mesh)), bcs_(all_fixed_zero(*mesh_, Rank::vector)) {
    laplacian_ = laplacian_map(Field::uniform(mesh_, Rank::vector, {0.0, 0.0}, bcs_)).matrix;
    laplacian_.makeCompressed();
    lu_.compute(laplacian_);
    if (lu_.info() != Eigen::Success) throw NumericalError("supremizer Laplacian is singular: " + lu_.lastErrorMessage());
}

SupremizerSolution SupremizerSolver::solve(const Field& pressure) const {
    if (pressure.rank() != Rank::scalar) throw ConfigError("supremizer input must be a scalar field");
    if (pressure.mesh_ptr() != mesh_ && !(pressure.mesh() == *mesh_)) {
        throw ConfigError("supremizer input lives on a different mesh");
    }
    const VectorXd rhs = -gauss_gradient(pressure, Form::extensive);
    const double scale = rhs.norm();
    Field s(mesh_, Rank::vector, VectorXd::Zero(rhs.size()), bcs_);
    if (scale == 0.0) return {std::move(s), 0.0, 0.0};
    VectorXd x = lu_.solve(rhs);
    if (lu_.info() != Eigen::Success) throw NumericalError("supremizer solve failed");
    const double residual = (laplacian_ * x - rhs).norm() / scale;
    if (!(residual <= 1e-8)) throw NumericalError(fmt::format("supremizer residual {:.3e} exceeds 1e-8", residual));
    s = s.with_values(std::move(x));
    const double pairing = -pressure.values().dot(divergence_flux(s, Form::extensive));
    return {std::move(s), residual, pairing};
}

SupremizerSolution solve_supremizer(const Field& pressure) {
    return SupremizerSolver(pressure.mesh_ptr()).solve(pressure);
}

std::string_view to_string(EnrichmentStrategy strategy) {
    return strategy == EnrichmentStrategy::exact ? "exact" : "approximate";
}

EnrichmentStrategy enrichment_from_string(std::string_view text) {
    if (text == "exact") return EnrichmentStrategy::exact;
    if (text == "approximate") return EnrichmentStrategy::approximate;
    throw ConfigError(fmt::format("unknown enrichment strategy '{}' (expected exact or approximate)", text));
}

PodBasis exact_supremizer_basis(const PodBasis& pressure_basis) {
    if (pressure_basis.rank != Rank::scalar) throw ConfigError("exact enrichment needs a pressure basis");
    const SupremizerSolver solver(pressure_basis.mesh);
    const Mesh& mesh = *pressure_basis.mesh;
    PodBasis out{pressure_basis.mesh, Rank::vector, BasisKind::supremizer, all_fixed_zero(mesh, Rank::vector),
                 Eigen::MatrixXd(static_cast<Eigen::Index>(2 * mesh.n_cells()), pressure_basis.modes.cols()),
                 VectorXd::Zero(pressure_basis.modes.cols()), {}, {}};
    for (Index j = 0; j < pressure_basis.size(); ++j) {
        const VectorXd s = solver.solve(pressure_basis.mode(j)).field.values();
        const double norm = std::sqrt(inner_product(mesh, 2, s, s));
        if (norm == 0.0) throw NumericalError(fmt::format("degenerate supremizer set: pressure mode {} has no gradient", j));
        out.modes.col(static_cast<Eigen::Index>(j)) = s / norm;
    }
    return out;
}

PodBasis approximate_supremizer_basis(const SnapshotSet& pressure_snapshots, const BoundaryConditions& pressure_bcs,
                                      Index n_modes) {
    if (pressure_snapshots.rank() != Rank::scalar) throw ConfigError("approximate enrichment needs pressure snapshots");
    if (n_modes > pressure_snapshots.size()) {
        throw ConfigError(fmt::format("{} supremizer modes requested from {} pressure snapshots", n_modes,
                                      pressure_snapshots.size()));
    }
    const SupremizerSolver solver(pressure_snapshots.mesh_ptr());
    std::vector<SnapshotRecord> records;
    records.reserve(pressure_snapshots.size());
    bool any = false;
    for (const SnapshotRecord& r : pressure_snapshots.records()) {
        SupremizerSolution s = solver.solve(Field(pressure_snapshots.mesh_ptr(), Rank::scalar, r.values, pressure_bcs));
        any = any || s.field.values().cwiseAbs().maxCoeff() > 0.0;
        records.push_back({r.mu, r.t, s.field.values()});
    }
    if (!any) throw NumericalError("degenerate supremizer set: every pressure snapshot has zero gradient");
    const SnapshotSet set(pressure_snapshots.mesh_ptr(), Rank::vector, pressure_snapshots.n_params(),
                          pressure_snapshots.n_times(), std::move(records));
    return compute_pod(set, n_modes, all_fixed_zero(set.mesh(), Rank::vector), BasisKind::supremizer);
}

PodBasis enrich(const PodBasis& velocity, const PodBasis& supremizers) {
    if (velocity.rank != Rank::vector || supremizers.rank != Rank::vector) {
        throw ConfigError("enrichment needs vector velocity and supremizer bases");
    }
    if (velocity.mesh != supremizers.mesh && !(*velocity.mesh == *supremizers.mesh)) {
        throw ConfigError("velocity and supremizer bases live on different meshes");
    }
    PodBasis out = velocity;
    out.kind = BasisKind::enriched_velocity;
    out.modes.resize(velocity.modes.rows(), velocity.modes.cols() + supremizers.modes.cols());
    out.modes << velocity.modes, supremizers.modes;
    out.bc_weights = VectorXd::Zero(out.modes.cols());
    out.bc_weights.head(velocity.modes.cols()) = velocity.bc_weights;
    return out;
}

PodBasis enrich_velocity_space(const PodBasis& velocity, const PodBasis& pressure_basis) {
    return enrich(velocity, exact_supremizer_basis(pressure_basis));
}

PodBasis enrich_velocity_space(const PodBasis& velocity, const SnapshotSet& pressure_snapshots,
                               const BoundaryConditions& pressure_bcs, Index n_supremizers) {
    return enrich(velocity, approximate_supremizer_basis(pressure_snapshots, pressure_bcs, n_supremizers));
}

}  // namespace romfv
