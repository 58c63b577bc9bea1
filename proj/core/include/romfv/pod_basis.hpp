#pragma once

#include <filesystem>
#include <memory>
#include <string_view>

#include <Eigen/Core>

#include "romfv/field.hpp"
#include "romfv/snapshot.hpp"

namespace romfv {

enum class BasisKind { velocity, pressure, supremizer, enriched_velocity };

std::string_view to_string(BasisKind kind);
BasisKind basis_kind_from_string(std::string_view text);

/// Volume-weighted L2 product sum_e V_e (a_e . b_e).
double inner_product(const Field& a, const Field& b);
double inner_product(const Mesh& mesh, int comps, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// X^T W Y for column sets X and Y.
Eigen::MatrixXd gram_matrix(const Mesh& mesh, int comps, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

Eigen::MatrixXd correlation_matrix(const SnapshotSet& snapshots);

/// Modal basis. Mode j carries the boundary data of `bcs` scaled by bc_weights[j], so any
/// linear combination sum a_j phi_j has boundary data (sum a_j bc_weights[j]) * bcs.
struct PodBasis {
    std::shared_ptr<const Mesh> mesh;
    Rank rank = Rank::vector;
    BasisKind kind = BasisKind::velocity;
    BoundaryConditions bcs;
    Eigen::MatrixXd modes;        // one column per mode
    Eigen::VectorXd bc_weights;
    Eigen::VectorXd eigenvalues;  // full spectrum of the correlation matrix, descending
    Eigen::VectorXd cumulative;   // running sum of eigenvalues over their total

    Index size() const noexcept { return static_cast<Index>(modes.cols()); }
    Field mode(Index j) const;
    /// First k modes with the same spectrum.
    PodBasis head(Index k) const;
    /// Field sum_j coeffs[j] phi_j including its boundary data.
    Field combine(const Eigen::VectorXd& coeffs) const;
};

/// POD through the eigenproblem of the unscaled correlation matrix. Each mode is
/// normalised to unit L2 norm and its sign fixed so the largest-magnitude cell value
/// is positive. `bcs` are the boundary conditions shared by all snapshots.
PodBasis compute_pod(const SnapshotSet& snapshots, Index n_modes, const BoundaryConditions& bcs, BasisKind kind);

/// Eigenvalues below this fraction of the largest one count as rank deficiency.
inline constexpr double kRankTolerance = 1e-12;

/// sum over snapshots of || u - sum_{i<k} <u, phi_i> phi_i ||^2 for an orthonormal basis.
double projection_error(const PodBasis& basis, const SnapshotSet& snapshots, Index k);

/// Modes in the snapshot file format (one single-record block per mode; record j has
/// mu = bc weight of mode j and t = j + 1) plus a CSV sidecar "index,lambda,cumulative".
void write_basis(const std::filesystem::path& path, const PodBasis& basis);
PodBasis read_basis(const std::filesystem::path& path, std::shared_ptr<const Mesh> mesh, const BoundaryConditions& bcs,
                    BasisKind kind);
std::filesystem::path eigenvalue_sidecar(const std::filesystem::path& path);

}  // namespace romfv
