#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "romfv/geometry.hpp"

namespace romfv {

using Index = std::size_t;

enum class PatchKind { wall, inlet, outlet, symmetry, patch };

std::string_view to_string(PatchKind kind);
PatchKind patch_kind_from_string(std::string_view text);

/// Named contiguous range of boundary faces.
struct Patch {
    std::string name;
    PatchKind kind = PatchKind::patch;
    Index start = 0;  // first face index (global numbering)
    Index size = 0;

    bool operator==(const Patch&) const = default;
};

/// Two-dimensional unstructured finite-volume mesh in owner/neighbour form.
///
/// Faces are straight edges. Internal faces come first and carry a neighbour;
/// boundary faces follow, grouped contiguously by patch. The face area vector
/// points out of the owner cell. Volumes are areas times a unit depth.
///
/// The mesh is immutable once constructed; the constructor validates topology
/// and geometry and throws MeshError on any violation.
class Mesh {
public:
    Mesh(std::vector<Vec2> points,
         std::vector<std::array<Index, 2>> faces,
         std::vector<Index> owner,
         std::vector<Index> neighbour,
         std::vector<Patch> patches);

    Index n_points() const noexcept { return points_.size(); }
    Index n_cells() const noexcept { return n_cells_; }
    Index n_faces() const noexcept { return faces_.size(); }
    Index n_internal_faces() const noexcept { return neighbour_.size(); }
    Index n_boundary_faces() const noexcept { return n_faces() - n_internal_faces(); }
    bool is_internal(Index face) const noexcept { return face < neighbour_.size(); }

    const std::vector<Vec2>& points() const noexcept { return points_; }
    const std::vector<std::array<Index, 2>>& faces() const noexcept { return faces_; }
    const std::vector<Index>& owner() const noexcept { return owner_; }
    const std::vector<Index>& neighbour() const noexcept { return neighbour_; }
    const std::vector<Patch>& patches() const noexcept { return patches_; }

    /// Patch by name; throws MeshError when absent.
    const Patch& patch(std::string_view name) const;
    /// Index into patches() of the patch holding a boundary face.
    Index patch_index_of_face(Index face) const;

    double volume(Index cell) const noexcept { return volume_[cell]; }
    const std::vector<double>& volumes() const noexcept { return volume_; }
    double total_volume() const noexcept { return total_volume_; }
    const Vec2& cell_centre(Index cell) const noexcept { return cell_centre_[cell]; }

    const Vec2& face_area(Index face) const noexcept { return area_[face]; }
    double face_area_mag(Index face) const noexcept { return area_mag_[face]; }
    const Vec2& face_centre(Index face) const noexcept { return face_centre_[face]; }
    /// Unit normal, outward from the owner.
    Vec2 face_normal(Index face) const noexcept { return area_[face] * (1.0 / area_mag_[face]); }

    /// Owner-to-neighbour centre vector (internal) or owner-to-face-centre vector (boundary).
    const Vec2& delta(Index face) const noexcept { return delta_[face]; }
    /// Linear interpolation weight of the owner value on an internal face.
    double weight(Index face) const noexcept { return weight_[face]; }
    /// |S_f|^2 / (S_f . d_f): coefficient of the implicit two-point normal gradient
    /// (over-relaxed decomposition).
    double nonorth_coeff(Index face) const noexcept { return nonorth_coeff_[face]; }
    /// S_f - nonorth_coeff * d_f: vector multiplying the explicit face gradient.
    const Vec2& correction_vector(Index face) const noexcept { return correction_[face]; }

    /// Faces bounding a cell (both owned and neighbouring).
    std::span<const Index> cell_faces(Index cell) const noexcept {
        return {cell_face_index_.data() + cell_face_start_[cell],
                cell_face_start_[cell + 1] - cell_face_start_[cell]};
    }

    /// Angle in degrees between S_f and d_f, maximised over internal faces.
    double max_nonorthogonality_deg() const;

    friend bool operator==(const Mesh& a, const Mesh& b) {
        return a.points_ == b.points_ && a.faces_ == b.faces_ && a.owner_ == b.owner_ &&
               a.neighbour_ == b.neighbour_ && a.patches_ == b.patches_;
    }

private:
    void validate_topology() const;
    void compute_geometry();
    void validate_geometry() const;

    std::vector<Vec2> points_;
    std::vector<std::array<Index, 2>> faces_;
    std::vector<Index> owner_;
    std::vector<Index> neighbour_;
    std::vector<Patch> patches_;
    Index n_cells_ = 0;

    std::vector<Index> cell_face_start_;
    std::vector<Index> cell_face_index_;

    std::vector<double> volume_;
    std::vector<Vec2> cell_centre_;
    std::vector<Vec2> area_;
    std::vector<double> area_mag_;
    std::vector<Vec2> face_centre_;
    std::vector<Vec2> delta_;
    std::vector<double> weight_;
    std::vector<double> nonorth_coeff_;
    std::vector<Vec2> correction_;
    double total_volume_ = 0.0;
};

}  // namespace romfv
