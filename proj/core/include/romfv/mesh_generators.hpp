#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "romfv/mesh.hpp"

namespace romfv {

/// Builds owner/neighbour connectivity from counter-clockwise cell polygons.
/// `classify` maps a boundary face centre to one of the names in `patches`;
/// patches appear in the mesh in the given order.
Mesh mesh_from_cells(std::vector<Vec2> points,
                     const std::vector<std::vector<Index>>& cells,
                     const std::vector<std::pair<std::string, PatchKind>>& patches,
                     const std::function<std::string(const Vec2&)>& classify);

/// Uniform n x n lid-driven cavity on [0, L]^2 with patches `lid` (y = L) and `walls`.
Mesh generate_cavity_mesh(int n_per_side, double side_length);

/// Body-fitted O-grid around a cylinder centred at the origin, embedded in a
/// rectangular channel through a block of Cartesian cells.
///
/// The O-block spans the annulus between the cylinder and the square
/// [-block_half_width, block_half_width]^2. Its rays are equally spaced in angle,
/// so the square sides carry tangent-spaced points that the surrounding Cartesian
/// blocks inherit. Patches: `inlet` (x = x_min), `outlet` (x = x_max),
/// `cylinder`, `top_bottom` (y = y_min and y = y_max).
struct CylinderMeshSpec {
    int radial_cells = 24;
    int azimuthal_cells = 64;  // multiple of 4
    double cylinder_radius = 0.5;
    double block_half_width = 1.5;
    double radial_growth = 1.08;  // geometric ratio of successive radial spacings
    double x_min = -4.0;
    double x_max = 12.0;
    double y_min = -4.0;
    double y_max = 4.0;
    int upstream_cells = 8;
    int downstream_cells = 32;
    int side_cells = 8;
    double far_growth = 1.08;  // growth of Cartesian spacing away from the block
};

Mesh generate_cylinder_mesh(const CylinderMeshSpec& spec);

}  // namespace romfv
