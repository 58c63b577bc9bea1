#pragma once

#include <string_view>

#include <Eigen/Core>

#include "romfv/field.hpp"

namespace romfv {

enum class Scheme { linear, upwind, linear_upwind };

std::string_view to_string(Scheme scheme);
Scheme scheme_from_string(std::string_view text);

/// Extensive results are face sums (Gauss form); intensive results are divided by the cell volume.
enum class Form { extensive, intensive };

// Matrix-free discrete operators. Per-face results have length n_faces * components,
// per-cell vector results are interleaved (x0, y0, x1, y1, ...). Gradients of vector
// fields hold four entries per cell, index 2*i + j storing d u_j / d x_i.

/// Face values of a field. Upwind schemes need the face mass flux to choose the
/// upwind cell; boundary faces always take the boundary-condition value.
Eigen::VectorXd interpolate_to_faces(const Field& field, Scheme scheme, const Eigen::VectorXd* flux = nullptr);

/// S_f . u_f with linearly interpolated u_f.
Eigen::VectorXd mass_flux(const Field& velocity);

/// Sum over a cell's faces of the outward per-face values (length n_faces * comps).
Eigen::VectorXd surface_sum(const Mesh& mesh, const Eigen::VectorXd& face_values, int comps);

Eigen::VectorXd divergence_flux(const Field& velocity, Form form = Form::extensive);

/// Gauss gradient with linear face interpolation; works for scalar and vector fields.
Eigen::VectorXd gauss_gradient(const Field& field, Form form = Form::extensive);

/// S_f . grad(u)_f per face: two-point normal difference plus explicit non-orthogonal correction.
Eigen::VectorXd face_normal_gradient(const Field& field);

Eigen::VectorXd laplacian(const Field& field, double diffusivity, Form form = Form::extensive);

/// Picard-linearised convection: sum_f F_f u_f with u_f from `scheme`.
Eigen::VectorXd convection(const Eigen::VectorXd& flux, const Field& velocity, Scheme scheme = Scheme::linear,
                           Form form = Form::extensive);

/// Divides per-cell values with `comps` entries per cell by the cell volumes.
Eigen::VectorXd to_intensive(const Mesh& mesh, Eigen::VectorXd values, int comps);

}  // namespace romfv
