#include "romfv/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "romfv/error.hpp"

namespace romfv {

std::string_view to_string(PatchKind kind) {
    switch (kind) {
        case PatchKind::wall: return "wall";
        case PatchKind::inlet: return "inlet";
        case PatchKind::outlet: return "outlet";
        case PatchKind::symmetry: return "symmetry";
        case PatchKind::patch: return "patch";
    }
    return "patch";
}

PatchKind patch_kind_from_string(std::string_view text) {
    if (text == "wall") return PatchKind::wall;
    if (text == "inlet") return PatchKind::inlet;
    if (text == "outlet") return PatchKind::outlet;
    if (text == "symmetry") return PatchKind::symmetry;
    if (text == "patch") return PatchKind::patch;
    throw MeshError(fmt::format("unknown patch kind '{}'", text));
}

Mesh::Mesh(std::vector<Vec2> points,
           std::vector<std::array<Index, 2>> faces,
           std::vector<Index> owner,
           std::vector<Index> neighbour,
           std::vector<Patch> patches)
    : points_(std::move(points)),
      faces_(std::move(faces)),
      owner_(std::move(owner)),
      neighbour_(std::move(neighbour)),
      patches_(std::move(patches)) {
    validate_topology();
    compute_geometry();
    validate_geometry();
}

const Patch& Mesh::patch(std::string_view name) const {
    for (const auto& p : patches_) {
        if (p.name == name) return p;
    }
    throw MeshError(fmt::format("mesh has no patch named '{}'", name));
}

Index Mesh::patch_index_of_face(Index face) const {
    for (Index i = 0; i < patches_.size(); ++i) {
        const auto& p = patches_[i];
        if (face >= p.start && face < p.start + p.size) return i;
    }
    throw MeshError(fmt::format("face {} is not a boundary face", face));
}

void Mesh::validate_topology() const {
    if (owner_.size() != faces_.size()) {
        throw MeshError(fmt::format("owner list has {} entries for {} faces", owner_.size(), faces_.size()));
    }
    if (neighbour_.size() > faces_.size()) {
        throw MeshError("more neighbour entries than faces");
    }
    for (Index f = 0; f < faces_.size(); ++f) {
        for (Index p : faces_[f]) {
            if (p >= points_.size()) {
                throw MeshError(fmt::format("face {} references nonexistent point {} (mesh has {} points)",
                                            f, p, points_.size()));
            }
        }
        if (faces_[f][0] == faces_[f][1]) {
            throw MeshError(fmt::format("face {} is degenerate (repeated point {})", f, faces_[f][0]));
        }
    }
    Index max_cell = 0;
    for (Index c : owner_) max_cell = std::max(max_cell, c);
    for (Index c : neighbour_) max_cell = std::max(max_cell, c);
    if (faces_.empty()) throw MeshError("mesh has no faces");
    for (Index f = 0; f < neighbour_.size(); ++f) {
        if (neighbour_[f] == owner_[f]) {
            throw MeshError(fmt::format("internal face {} has identical owner and neighbour {}", f, owner_[f]));
        }
    }
    // Every boundary face must belong to exactly one patch; patches tile the boundary range.
    std::vector<Patch> sorted = patches_;
    std::sort(sorted.begin(), sorted.end(), [](const Patch& a, const Patch& b) { return a.start < b.start; });
    Index expected = neighbour_.size();
    for (const auto& p : sorted) {
        if (p.size == 0) throw MeshError(fmt::format("patch '{}' is empty", p.name));
        if (p.start != expected) {
            throw MeshError(fmt::format("patch '{}' starts at face {} but boundary faces are expected from {}",
                                        p.name, p.start, expected));
        }
        expected += p.size;
    }
    if (expected != faces_.size()) {
        throw MeshError(fmt::format("patches cover boundary faces up to {} but mesh has {} faces",
                                    expected, faces_.size()));
    }
    for (Index i = 0; i < patches_.size(); ++i) {
        for (Index j = i + 1; j < patches_.size(); ++j) {
            if (patches_[i].name == patches_[j].name) {
                throw MeshError(fmt::format("duplicate patch name '{}'", patches_[i].name));
            }
        }
    }
    // Every cell index below max_cell must be used.
    std::vector<int> used(max_cell + 1, 0);
    for (Index c : owner_) used[c] = 1;
    for (Index c : neighbour_) used[c] = 1;
    for (Index c = 0; c < used.size(); ++c) {
        if (!used[c]) throw MeshError(fmt::format("cell {} has no faces", c));
    }
}

void Mesh::compute_geometry() {
    Index max_cell = 0;
    for (Index c : owner_) max_cell = std::max(max_cell, c);
    for (Index c : neighbour_) max_cell = std::max(max_cell, c);
    n_cells_ = max_cell + 1;

    const Index nf = faces_.size();
    area_.resize(nf);
    area_mag_.resize(nf);
    face_centre_.resize(nf);
    for (Index f = 0; f < nf; ++f) {
        const Vec2& a = points_[faces_[f][0]];
        const Vec2& b = points_[faces_[f][1]];
        const Vec2 e = b - a;
        area_[f] = {e.y, -e.x};
        area_mag_[f] = norm(e);
        face_centre_[f] = 0.5 * (a + b);
    }

    // Cell to face adjacency (CSR).
    cell_face_start_.assign(n_cells_ + 1, 0);
    for (Index f = 0; f < nf; ++f) {
        ++cell_face_start_[owner_[f] + 1];
        if (is_internal(f)) ++cell_face_start_[neighbour_[f] + 1];
    }
    for (Index c = 0; c < n_cells_; ++c) cell_face_start_[c + 1] += cell_face_start_[c];
    cell_face_index_.resize(cell_face_start_.back());
    std::vector<Index> fill(cell_face_start_.begin(), cell_face_start_.end() - 1);
    for (Index f = 0; f < nf; ++f) {
        cell_face_index_[fill[owner_[f]]++] = f;
        if (is_internal(f)) cell_face_index_[fill[neighbour_[f]]++] = f;
    }

    // Volume from the divergence theorem with div(x) = 2, centroid with div(x (x) x) = 3x.
    volume_.assign(n_cells_, 0.0);
    std::vector<Vec2> moment(n_cells_);
    for (Index f = 0; f < nf; ++f) {
        const double xs = dot(face_centre_[f], area_[f]);
        volume_[owner_[f]] += 0.5 * xs;
        moment[owner_[f]] += xs * face_centre_[f];
        if (is_internal(f)) {
            volume_[neighbour_[f]] -= 0.5 * xs;
            moment[neighbour_[f]] -= xs * face_centre_[f];
        }
    }
    cell_centre_.resize(n_cells_);
    total_volume_ = 0.0;
    for (Index c = 0; c < n_cells_; ++c) {
        cell_centre_[c] = volume_[c] > 0.0 ? moment[c] * (1.0 / (3.0 * volume_[c])) : Vec2{};
        total_volume_ += volume_[c];
    }

    delta_.resize(nf);
    weight_.assign(nf, 1.0);
    nonorth_coeff_.resize(nf);
    correction_.resize(nf);
    for (Index f = 0; f < nf; ++f) {
        const Vec2& co = cell_centre_[owner_[f]];
        const Vec2 n = area_[f] * (1.0 / area_mag_[f]);
        if (is_internal(f)) {
            const Vec2& cn = cell_centre_[neighbour_[f]];
            delta_[f] = cn - co;
            const double d_own = std::abs(dot(n, face_centre_[f] - co));
            const double d_nei = std::abs(dot(n, cn - face_centre_[f]));
            weight_[f] = (d_own + d_nei) > 0.0 ? d_nei / (d_own + d_nei) : 0.5;
        } else {
            delta_[f] = face_centre_[f] - co;
        }
        const double sd = dot(area_[f], delta_[f]);
        nonorth_coeff_[f] = sd > 0.0 ? area_mag_[f] * area_mag_[f] / sd : 0.0;
        correction_[f] = area_[f] - nonorth_coeff_[f] * delta_[f];
    }
}

void Mesh::validate_geometry() const {
    for (Index c = 0; c < n_cells_; ++c) {
        if (!(volume_[c] > 0.0)) {
            throw MeshError(fmt::format("cell {} has non-positive volume {}", c, volume_[c]));
        }
        Vec2 sum{};
        double perimeter = 0.0;
        for (Index f : cell_faces(c)) {
            sum += owner_[f] == c ? area_[f] : -area_[f];
            perimeter += area_mag_[f];
        }
        if (norm(sum) > 1e-12 * perimeter) {
            throw MeshError(fmt::format("cell {} is not closed: |sum S_f| = {:.3e}, perimeter {:.3e}",
                                        c, norm(sum), perimeter));
        }
    }
    for (Index f = 0; f < n_faces(); ++f) {
        if (!(dot(area_[f], delta_[f]) > 0.0)) {
            throw MeshError(fmt::format(
                "face {} has zero owner-neighbour distance or is oriented into its owner cell {}", f, owner_[f]));
        }
    }
}

double Mesh::max_nonorthogonality_deg() const {
    double worst = 0.0;
    for (Index f = 0; f < n_internal_faces(); ++f) {
        const double c = dot(area_[f], delta_[f]) / (area_mag_[f] * norm(delta_[f]));
        worst = std::max(worst, std::acos(std::clamp(c, -1.0, 1.0)));
    }
    return worst * 180.0 / std::numbers::pi;
}

}  // namespace romfv
