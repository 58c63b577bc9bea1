#include "romfv/fv_matrices.hpp"

#include <vector>

#include <fmt/format.h>

#include "romfv/error.hpp"

namespace romfv {

namespace {

using Eigen::VectorXd;
using Triplets = std::vector<Eigen::Triplet<double>>;

Eigen::Index at(Index i) { return static_cast<Eigen::Index>(i); }

SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols, const Triplets& t) {
    SparseMatrix m(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

AffineMap compose(const SparseMatrix& outer, const AffineMap& inner) {
    return {SparseMatrix(outer * inner.matrix), outer * inner.offset};
}

/// Boundary rows shared by every interpolation: value = FaceAffine(owner).
void boundary_rows(const Field& field, Triplets& t, VectorXd& offset) {
    const Mesh& mesh = field.mesh();
    const int nc = field.n_components();
    for (Index f = mesh.n_internal_faces(); f < mesh.n_faces(); ++f) {
        const FaceAffine fa = field.boundary_affine(f);
        const Index o = mesh.owner()[f];
        for (int j = 0; j < nc; ++j) {
            for (int l = 0; l < nc; ++l) {
                if (fa.m[j][l] != 0.0) t.emplace_back(at(f) * nc + j, at(o) * nc + l, fa.m[j][l]);
            }
            offset[at(f) * nc + j] = fa.offset[j];
        }
    }
}

/// Per-face S_f (outer) u_f: row f*2nc + i*nc + j picks S_i times component j.
SparseMatrix area_outer_matrix(const Mesh& mesh, int nc) {
    Triplets t;
    for (Index f = 0; f < mesh.n_faces(); ++f) {
        const Vec2& s = mesh.face_area(f);
        for (int j = 0; j < nc; ++j) {
            t.emplace_back(at(f) * 2 * nc + j, at(f) * nc + j, s.x);
            t.emplace_back(at(f) * 2 * nc + nc + j, at(f) * nc + j, s.y);
        }
    }
    return from_triplets(at(mesh.n_faces()) * 2 * nc, at(mesh.n_faces()) * nc, t);
}

SparseMatrix inverse_volume_matrix(const Mesh& mesh, int comps) {
    Triplets t;
    for (Index c = 0; c < mesh.n_cells(); ++c) {
        for (int k = 0; k < comps; ++k) t.emplace_back(at(c) * comps + k, at(c) * comps + k, 1.0 / mesh.volume(c));
    }
    return from_triplets(at(mesh.n_cells()) * comps, at(mesh.n_cells()) * comps, t);
}

}  // namespace

SparseMatrix mass_matrix(const Mesh& mesh, int comps) {
    Triplets t;
    for (Index c = 0; c < mesh.n_cells(); ++c) {
        for (int k = 0; k < comps; ++k) t.emplace_back(at(c) * comps + k, at(c) * comps + k, mesh.volume(c));
    }
    return from_triplets(at(mesh.n_cells()) * comps, at(mesh.n_cells()) * comps, t);
}

SparseMatrix surface_sum_matrix(const Mesh& mesh, int comps) {
    Triplets t;
    for (Index f = 0; f < mesh.n_faces(); ++f) {
        for (int k = 0; k < comps; ++k) {
            t.emplace_back(at(mesh.owner()[f]) * comps + k, at(f) * comps + k, 1.0);
            if (mesh.is_internal(f)) t.emplace_back(at(mesh.neighbour()[f]) * comps + k, at(f) * comps + k, -1.0);
        }
    }
    return from_triplets(at(mesh.n_cells()) * comps, at(mesh.n_faces()) * comps, t);
}

AffineMap gradient_map(const Field& field, Form form) {
    const Mesh& mesh = field.mesh();
    const int nc = field.n_components();
    SparseMatrix outer = surface_sum_matrix(mesh, 2 * nc) * area_outer_matrix(mesh, nc);
    if (form == Form::intensive) outer = inverse_volume_matrix(mesh, 2 * nc) * outer;
    return compose(outer, face_interpolation_map(field, Scheme::linear));
}

AffineMap face_interpolation_map(const Field& field, Scheme scheme, const VectorXd* flux) {
    const Mesh& mesh = field.mesh();
    const int nc = field.n_components();
    if (scheme != Scheme::linear) {
        if (flux == nullptr) throw ConfigError("upwind interpolation requires a face mass flux");
        if (flux->size() != at(mesh.n_faces())) throw ConfigError("mass flux length does not match the mesh");
    }
    const auto rows = at(mesh.n_faces()) * nc;
    const auto cols = at(mesh.n_cells()) * nc;
    Triplets t;
    VectorXd offset = VectorXd::Zero(rows);
    Triplets r;  // linear-upwind reconstruction from the upwind gradient
    for (Index f = 0; f < mesh.n_internal_faces(); ++f) {
        const Index o = mesh.owner()[f];
        const Index n = mesh.neighbour()[f];
        for (int j = 0; j < nc; ++j) {
            const auto row = at(f) * nc + j;
            if (scheme == Scheme::linear) {
                t.emplace_back(row, at(o) * nc + j, mesh.weight(f));
                t.emplace_back(row, at(n) * nc + j, 1.0 - mesh.weight(f));
                continue;
            }
            const Index up = (*flux)[at(f)] >= 0.0 ? o : n;
            t.emplace_back(row, at(up) * nc + j, 1.0);
            if (scheme == Scheme::linear_upwind) {
                const Vec2 d = mesh.face_centre(f) - mesh.cell_centre(up);
                r.emplace_back(row, at(up) * 2 * nc + j, d.x);
                r.emplace_back(row, at(up) * 2 * nc + nc + j, d.y);
            }
        }
    }
    boundary_rows(field, t, offset);
    AffineMap map{from_triplets(rows, cols, t), offset};
    if (scheme == Scheme::linear_upwind) {
        const SparseMatrix recon = from_triplets(rows, at(mesh.n_cells()) * 2 * nc, r);
        const AffineMap grad = gradient_map(field, Form::intensive);
        map.matrix += recon * grad.matrix;
        map.offset += recon * grad.offset;
    }
    return map;
}

AffineMap mass_flux_map(const Field& velocity) {
    if (velocity.rank() != Rank::vector) throw ConfigError("mass flux requires a vector field");
    const Mesh& mesh = velocity.mesh();
    Triplets t;
    for (Index f = 0; f < mesh.n_faces(); ++f) {
        t.emplace_back(at(f), at(2 * f), mesh.face_area(f).x);
        t.emplace_back(at(f), at(2 * f + 1), mesh.face_area(f).y);
    }
    const SparseMatrix dot = from_triplets(at(mesh.n_faces()), at(mesh.n_faces()) * 2, t);
    return compose(dot, face_interpolation_map(velocity, Scheme::linear));
}

AffineMap divergence_map(const Field& velocity) {
    return compose(surface_sum_matrix(velocity.mesh(), 1), mass_flux_map(velocity));
}

AffineMap face_normal_gradient_map(const Field& field) {
    const Mesh& mesh = field.mesh();
    const int nc = field.n_components();
    const auto rows = at(mesh.n_faces()) * nc;
    Triplets two_point;
    Triplets corr;
    VectorXd offset = VectorXd::Zero(rows);
    for (Index f = 0; f < mesh.n_faces(); ++f) {
        const Index o = mesh.owner()[f];
        const double coeff = mesh.nonorth_coeff(f);
        const Vec2& k = mesh.correction_vector(f);
        if (mesh.is_internal(f)) {
            const Index n = mesh.neighbour()[f];
            const double w = mesh.weight(f);
            for (int j = 0; j < nc; ++j) {
                const auto row = at(f) * nc + j;
                two_point.emplace_back(row, at(n) * nc + j, coeff);
                two_point.emplace_back(row, at(o) * nc + j, -coeff);
                corr.emplace_back(row, at(o) * 2 * nc + j, w * k.x);
                corr.emplace_back(row, at(o) * 2 * nc + nc + j, w * k.y);
                corr.emplace_back(row, at(n) * 2 * nc + j, (1.0 - w) * k.x);
                corr.emplace_back(row, at(n) * 2 * nc + nc + j, (1.0 - w) * k.y);
            }
        } else {
            const FaceAffine fa = field.boundary_affine(f);
            const bool fixed = field.patch_condition(mesh.patch_index_of_face(f)).kind == BcKind::fixed_value;
            for (int j = 0; j < nc; ++j) {
                const auto row = at(f) * nc + j;
                for (int l = 0; l < nc; ++l) {
                    const double m = fa.m[j][l] - (j == l ? 1.0 : 0.0);
                    if (m != 0.0) two_point.emplace_back(row, at(o) * nc + l, coeff * m);
                }
                offset[row] = coeff * fa.offset[j];
                if (fixed) {
                    corr.emplace_back(row, at(o) * 2 * nc + j, k.x);
                    corr.emplace_back(row, at(o) * 2 * nc + nc + j, k.y);
                }
            }
        }
    }
    const SparseMatrix c = from_triplets(rows, at(mesh.n_cells()) * 2 * nc, corr);
    const AffineMap grad = gradient_map(field, Form::intensive);
    return {from_triplets(rows, at(mesh.n_cells()) * nc, two_point) + c * grad.matrix, offset + c * grad.offset};
}

AffineMap laplacian_map(const Field& field) {
    return compose(surface_sum_matrix(field.mesh(), field.n_components()), face_normal_gradient_map(field));
}

AffineMap convection_map(const VectorXd& flux, const Field& velocity, Scheme scheme) {
    const Mesh& mesh = velocity.mesh();
    if (flux.size() != at(mesh.n_faces())) {
        throw ConfigError(fmt::format("mass flux has {} entries, mesh has {} faces", flux.size(), mesh.n_faces()));
    }
    const int nc = velocity.n_components();
    Triplets t;
    for (Index f = 0; f < mesh.n_faces(); ++f) {
        for (int j = 0; j < nc; ++j) t.emplace_back(at(f) * nc + j, at(f) * nc + j, flux[at(f)]);
    }
    const SparseMatrix weighted =
        surface_sum_matrix(mesh, nc) * from_triplets(at(mesh.n_faces()) * nc, at(mesh.n_faces()) * nc, t);
    return compose(weighted, face_interpolation_map(velocity, scheme, &flux));
}

OperatorMatrices assemble_operator_matrices(const Field& velocity, const Field& pressure, const VectorXd& flux,
                                            Scheme scheme) {
    if (velocity.rank() != Rank::vector || pressure.rank() != Rank::scalar) {
        throw ConfigError("operator matrices need a vector velocity and a scalar pressure");
    }
    if (velocity.mesh_ptr() != pressure.mesh_ptr()) throw ConfigError("velocity and pressure live on different meshes");
    return {mass_matrix(velocity.mesh(), 1), laplacian_map(velocity), gradient_map(pressure, Form::extensive),
            divergence_map(velocity), convection_map(flux, velocity, scheme)};
}

}  // namespace romfv
