#include "romfv/field.hpp"

#include <fmt/format.h>

#include "romfv/error.hpp"

namespace romfv {

std::string_view to_string(BcKind kind) {
    switch (kind) {
        case BcKind::fixed_value: return "fixed_value";
        case BcKind::fixed_gradient: return "fixed_gradient";
        case BcKind::zero_gradient: return "zero_gradient";
        case BcKind::symmetry: return "symmetry";
    }
    return "zero_gradient";
}

BcKind bc_kind_from_string(std::string_view text) {
    if (text == "fixed_value") return BcKind::fixed_value;
    if (text == "fixed_gradient") return BcKind::fixed_gradient;
    if (text == "zero_gradient") return BcKind::zero_gradient;
    if (text == "symmetry") return BcKind::symmetry;
    throw ConfigError(fmt::format("unknown boundary condition type '{}'", text));
}

BoundaryConditions all_fixed_zero(const Mesh& mesh, Rank rank) {
    BoundaryConditions bcs;
    for (const auto& p : mesh.patches()) {
        bcs.push_back({p.name, BcKind::fixed_value, std::vector<double>(static_cast<std::size_t>(components(rank)), 0.0), {}});
    }
    return bcs;
}

BoundaryConditions scale_data(const BoundaryConditions& bcs, double scale) {
    BoundaryConditions out = bcs;
    for (auto& bc : out) {
        for (double& d : bc.datum) d *= scale;
        for (double& d : bc.face_data) d *= scale;
    }
    return out;
}

Field::Field(std::shared_ptr<const Mesh> mesh, Rank rank, Eigen::VectorXd values, BoundaryConditions bcs)
    : mesh_(std::move(mesh)), rank_(rank), values_(std::move(values)), bcs_(std::move(bcs)) {
    if (!mesh_) throw ConfigError("field requires a mesh");
    const auto expected = static_cast<Eigen::Index>(mesh_->n_cells()) * components(rank_);
    if (values_.size() != expected) {
        throw ConfigError(fmt::format("field has {} values, expected {} ({} cells x {} components)",
                                      values_.size(), expected, mesh_->n_cells(), components(rank_)));
    }
    const auto& patches = mesh_->patches();
    bcs_by_patch_.resize(patches.size());
    std::vector<int> seen(patches.size(), 0);
    for (const auto& bc : bcs_) {
        Index idx = patches.size();
        for (Index p = 0; p < patches.size(); ++p) {
            if (patches[p].name == bc.patch) idx = p;
        }
        if (idx == patches.size()) {
            throw ConfigError(fmt::format("boundary condition for unknown patch '{}'", bc.patch));
        }
        if (seen[idx]++) throw ConfigError(fmt::format("patch '{}' has more than one boundary condition", bc.patch));
        const bool needs_datum = bc.kind == BcKind::fixed_value || bc.kind == BcKind::fixed_gradient;
        const auto want = needs_datum ? static_cast<std::size_t>(components(rank_)) : 0u;
        if (bc.datum.size() != want) {
            throw ConfigError(fmt::format("boundary condition on '{}' has a datum of rank {}, field rank is {}",
                                          bc.patch, bc.datum.size(), components(rank_)));
        }
        if (!bc.face_data.empty() && (!needs_datum || bc.face_data.size() != patches[idx].size * want)) {
            throw ConfigError(fmt::format("per-face data on '{}' has {} entries, expected {}", bc.patch,
                                          bc.face_data.size(), patches[idx].size * want));
        }
        bcs_by_patch_[idx] = bc;
    }
    for (Index p = 0; p < patches.size(); ++p) {
        if (!seen[p]) throw ConfigError(fmt::format("patch '{}' has no boundary condition", patches[p].name));
    }
    face_patch_.resize(mesh_->n_boundary_faces());
    for (Index p = 0; p < patches.size(); ++p) {
        for (Index k = 0; k < patches[p].size; ++k) {
            face_patch_[patches[p].start + k - mesh_->n_internal_faces()] = p;
        }
    }
}

Field Field::uniform(std::shared_ptr<const Mesh> mesh, Rank rank, std::vector<double> value, BoundaryConditions bcs) {
    if (value.size() != static_cast<std::size_t>(components(rank))) {
        throw ConfigError("uniform value rank does not match field rank");
    }
    const auto n = static_cast<Eigen::Index>(mesh->n_cells());
    Eigen::VectorXd v(n * components(rank));
    for (Eigen::Index c = 0; c < n; ++c) {
        for (int k = 0; k < components(rank); ++k) v[c * components(rank) + k] = value[static_cast<std::size_t>(k)];
    }
    return {std::move(mesh), rank, std::move(v), std::move(bcs)};
}

FaceAffine Field::boundary_affine(Index face) const {
    const Index p = face_patch_[face - mesh_->n_internal_faces()];
    const auto& bc = bcs_by_patch_[p];
    FaceAffine fa;
    const int nc = components(rank_);
    auto datum = [&](int k) {
        if (bc.face_data.empty()) return bc.datum[static_cast<std::size_t>(k)];
        return bc.face_data[(face - mesh_->patches()[p].start) * static_cast<std::size_t>(nc) + static_cast<std::size_t>(k)];
    };
    switch (bc.kind) {
        case BcKind::fixed_value:
            for (int k = 0; k < nc; ++k) fa.offset[k] = datum(k);
            break;
        case BcKind::fixed_gradient: {
            const Vec2 n = mesh_->face_normal(face);
            const double dn = dot(n, mesh_->delta(face));
            for (int k = 0; k < nc; ++k) {
                fa.m[k][k] = 1.0;
                fa.offset[k] = dn * datum(k);
            }
            break;
        }
        case BcKind::zero_gradient:
            for (int k = 0; k < nc; ++k) fa.m[k][k] = 1.0;
            break;
        case BcKind::symmetry:
            if (rank_ == Rank::scalar) {
                fa.m[0][0] = 1.0;
            } else {
                const Vec2 n = mesh_->face_normal(face);
                fa.m[0][0] = 1.0 - n.x * n.x;
                fa.m[0][1] = -n.x * n.y;
                fa.m[1][0] = -n.y * n.x;
                fa.m[1][1] = 1.0 - n.y * n.y;
            }
            break;
    }
    return fa;
}

double Field::boundary_scalar(Index face) const {
    const FaceAffine fa = boundary_affine(face);
    return fa.m[0][0] * scalar(mesh_->owner()[face]) + fa.offset[0];
}

Vec2 Field::boundary_vector(Index face) const {
    const FaceAffine fa = boundary_affine(face);
    const Vec2 o = vector(mesh_->owner()[face]);
    return {fa.m[0][0] * o.x + fa.m[0][1] * o.y + fa.offset[0], fa.m[1][0] * o.x + fa.m[1][1] * o.y + fa.offset[1]};
}

}  // namespace romfv
