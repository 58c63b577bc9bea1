#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "romfv/mesh.hpp"

namespace romfv {

enum class Rank { scalar = 1, vector = 2 };

constexpr int components(Rank rank) noexcept { return static_cast<int>(rank); }

enum class BcKind { fixed_value, fixed_gradient, zero_gradient, symmetry };

std::string_view to_string(BcKind kind);
BcKind bc_kind_from_string(std::string_view text);

/// Boundary condition of one patch. `datum` holds one entry per field component
/// for fixed-value and fixed-gradient conditions and is empty otherwise.
/// `face_data`, when non-empty, replaces the datum with per-face values
/// (patch size x components, face-major), e.g. for manufactured solutions.
/// Symmetry on a vector field means zero normal component and zero tangential gradient.
struct BoundaryCondition {
    std::string patch;
    BcKind kind = BcKind::zero_gradient;
    std::vector<double> datum;
    std::vector<double> face_data;

    bool operator==(const BoundaryCondition&) const = default;
};

using BoundaryConditions = std::vector<BoundaryCondition>;

/// Homogeneous fixed-value conditions on every patch of the mesh.
BoundaryConditions all_fixed_zero(const Mesh& mesh, Rank rank);

/// Same kinds with every datum multiplied by `scale`.
BoundaryConditions scale_data(const BoundaryConditions& bcs, double scale);

/// Boundary face value as an affine function of the owner cell value:
/// value = matrix * owner + offset (scalar fields use the (0,0) entry).
struct FaceAffine {
    double m[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    double offset[2] = {0.0, 0.0};
};

/// Cell-centred scalar or 2-vector field with boundary conditions on every patch.
/// Vector values are interleaved per cell: (x0, y0, x1, y1, ...).
class Field {
public:
    Field(std::shared_ptr<const Mesh> mesh, Rank rank, Eigen::VectorXd values, BoundaryConditions bcs);

    static Field uniform(std::shared_ptr<const Mesh> mesh, Rank rank, std::vector<double> value,
                         BoundaryConditions bcs);

    const Mesh& mesh() const noexcept { return *mesh_; }
    const std::shared_ptr<const Mesh>& mesh_ptr() const noexcept { return mesh_; }
    Rank rank() const noexcept { return rank_; }
    int n_components() const noexcept { return components(rank_); }
    const Eigen::VectorXd& values() const noexcept { return values_; }
    const BoundaryConditions& boundary_conditions() const noexcept { return bcs_; }
    /// Condition attached to the mesh patch with the given index.
    const BoundaryCondition& patch_condition(Index patch_index) const { return bcs_by_patch_[patch_index]; }

    double scalar(Index cell) const noexcept { return values_[static_cast<Eigen::Index>(cell)]; }
    Vec2 vector(Index cell) const noexcept {
        const auto i = static_cast<Eigen::Index>(2 * cell);
        return {values_[i], values_[i + 1]};
    }

    FaceAffine boundary_affine(Index face) const;
    double boundary_scalar(Index face) const;
    Vec2 boundary_vector(Index face) const;

    Field with_values(Eigen::VectorXd values) const { return {mesh_, rank_, std::move(values), bcs_}; }
    Field with_boundary_conditions(BoundaryConditions bcs) const { return {mesh_, rank_, values_, std::move(bcs)}; }

private:
    std::shared_ptr<const Mesh> mesh_;
    Rank rank_;
    Eigen::VectorXd values_;
    BoundaryConditions bcs_;
    std::vector<BoundaryCondition> bcs_by_patch_;
    std::vector<Index> face_patch_;  // patch index per boundary face (offset by n_internal_faces)
};

}  // namespace romfv
