#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "romfv/field.hpp"
#include "romfv/fv_operators.hpp"

namespace romfv {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// x -> matrix * x + offset. Boundary data of the field enters through the offset.
struct AffineMap {
    SparseMatrix matrix;
    Eigen::VectorXd offset;

    Eigen::VectorXd operator()(const Eigen::VectorXd& x) const { return matrix * x + offset; }
};

// Sparse counterparts of the matrix-free operators. Only the boundary conditions of
// the field argument are used; its cell values are ignored.

SparseMatrix mass_matrix(const Mesh& mesh, int comps);
SparseMatrix surface_sum_matrix(const Mesh& mesh, int comps);

AffineMap face_interpolation_map(const Field& field, Scheme scheme, const Eigen::VectorXd* flux = nullptr);
AffineMap gradient_map(const Field& field, Form form = Form::extensive);
AffineMap mass_flux_map(const Field& velocity);
AffineMap divergence_map(const Field& velocity);
AffineMap face_normal_gradient_map(const Field& field);
/// Unit diffusivity; scale by the viscosity at the call site.
AffineMap laplacian_map(const Field& field);
AffineMap convection_map(const Eigen::VectorXd& flux, const Field& velocity, Scheme scheme = Scheme::linear);

/// Matrix form of the semi-discrete momentum and continuity equations, all extensive:
/// M = diag(V), A = Laplacian, B = pressure gradient, P = divergence, C = convection
/// with the given face flux.
struct OperatorMatrices {
    SparseMatrix M;
    AffineMap A;
    AffineMap B;
    AffineMap P;
    AffineMap C;
};

OperatorMatrices assemble_operator_matrices(const Field& velocity, const Field& pressure,
                                            const Eigen::VectorXd& flux, Scheme scheme = Scheme::linear);

}  // namespace romfv
