#pragma once

#include <memory>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "romfv/pod_basis.hpp"

namespace romfv {

struct SupremizerSolution {
    Field field;
    double residual = 0.0;  // ||A s + B p|| / ||B p||
    double pairing = 0.0;   // -<p, div s>, positive for a useful supremizer
};

/// Solves lap(s) = -grad(p) with s = 0 on every boundary patch. The Laplacian is
/// factorised once and reused for every right-hand side.
class SupremizerSolver {
public:
    explicit SupremizerSolver(std::shared_ptr<const Mesh> mesh);

    SupremizerSolution solve(const Field& pressure) const;

private:
    std::shared_ptr<const Mesh> mesh_;
    BoundaryConditions bcs_;
    Eigen::SparseMatrix<double> laplacian_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

SupremizerSolution solve_supremizer(const Field& pressure);

enum class EnrichmentStrategy { exact, approximate };

std::string_view to_string(EnrichmentStrategy strategy);
EnrichmentStrategy enrichment_from_string(std::string_view text);

/// One supremizer per pressure mode, each normalised to unit L2 norm. No spectrum.
PodBasis exact_supremizer_basis(const PodBasis& pressure_basis);

/// Supremizers of every pressure snapshot, compressed by POD to n_modes.
PodBasis approximate_supremizer_basis(const SnapshotSet& pressure_snapshots, const BoundaryConditions& pressure_bcs,
                                      Index n_modes);

/// Velocity modes followed by supremizer modes. The supremizer block carries no
/// boundary data and takes the velocity boundary-condition kinds.
PodBasis enrich(const PodBasis& velocity, const PodBasis& supremizers);

PodBasis enrich_velocity_space(const PodBasis& velocity, const PodBasis& pressure_basis);
PodBasis enrich_velocity_space(const PodBasis& velocity, const SnapshotSet& pressure_snapshots,
                               const BoundaryConditions& pressure_bcs, Index n_supremizers);

}  // namespace romfv
