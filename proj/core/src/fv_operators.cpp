#include "romfv/fv_operators.hpp"

#include <fmt/format.h>

#include "romfv/error.hpp"

namespace romfv {

std::string_view to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::linear: return "linear";
        case Scheme::upwind: return "upwind";
        case Scheme::linear_upwind: return "linear_upwind";
    }
    return "linear";
}

Scheme scheme_from_string(std::string_view text) {
    if (text == "linear") return Scheme::linear;
    if (text == "upwind") return Scheme::upwind;
    if (text == "linear_upwind" || text == "linear-upwind") return Scheme::linear_upwind;
    throw ConfigError(fmt::format("unknown interpolation scheme '{}'", text));
}

namespace {

using Eigen::VectorXd;

Eigen::Index at(Index i) { return static_cast<Eigen::Index>(i); }

void check_flux(const Mesh& mesh, const VectorXd* flux) {
    if (flux == nullptr) throw ConfigError("upwind interpolation requires a face mass flux");
    if (flux->size() != at(mesh.n_faces())) {
        throw ConfigError(fmt::format("mass flux has {} entries, mesh has {} faces", flux->size(), mesh.n_faces()));
    }
}

void fill_boundary(const Field& field, VectorXd& out) {
    const Mesh& mesh = field.mesh();
    const int nc = field.n_components();
    for (Index f = mesh.n_internal_faces(); f < mesh.n_faces(); ++f) {
        if (nc == 1) {
            out[at(f)] = field.boundary_scalar(f);
        } else {
            const Vec2 v = field.boundary_vector(f);
            out[at(2 * f)] = v.x;
            out[at(2 * f + 1)] = v.y;
        }
    }
}

bool is_fixed_value(const Field& field, Index face) {
    return field.patch_condition(field.mesh().patch_index_of_face(face)).kind == BcKind::fixed_value;
}

}  // namespace

VectorXd to_intensive(const Mesh& mesh, VectorXd values, int comps) {
    for (Index c = 0; c < mesh.n_cells(); ++c) {
        for (int k = 0; k < comps; ++k) values[at(c) * comps + k] /= mesh.volume(c);
    }
    return values;
}

VectorXd surface_sum(const Mesh& mesh, const VectorXd& face_values, int comps) {
    VectorXd out = VectorXd::Zero(at(mesh.n_cells()) * comps);
    for (Index f = 0; f < mesh.n_faces(); ++f) {
        const Index o = mesh.owner()[f];
        for (int k = 0; k < comps; ++k) out[at(o) * comps + k] += face_values[at(f) * comps + k];
        if (mesh.is_internal(f)) {
            const Index n = mesh.neighbour()[f];
            for (int k = 0; k < comps; ++k) out[at(n) * comps + k] -= face_values[at(f) * comps + k];
        }
    }
    return out;
}

VectorXd gauss_gradient(const Field& field, Form form) {
    const Mesh& mesh = field.mesh();
    const int nc = field.n_components();
    const VectorXd uf = interpolate_to_faces(field, Scheme::linear);
    VectorXd per_face(at(mesh.n_faces()) * 2 * nc);
    for (Index f = 0; f < mesh.n_faces(); ++f) {
        const Vec2& s = mesh.face_area(f);
        for (int j = 0; j < nc; ++j) {
            per_face[at(f) * 2 * nc + j] = s.x * uf[at(f) * nc + j];
            per_face[at(f) * 2 * nc + nc + j] = s.y * uf[at(f) * nc + j];
        }
    }
    VectorXd g = surface_sum(mesh, per_face, 2 * nc);
    return form == Form::intensive ? to_intensive(mesh, std::move(g), 2 * nc) : g;
}

VectorXd interpolate_to_faces(const Field& field, Scheme scheme, const VectorXd* flux) {
    const Mesh& mesh = field.mesh();
    const int nc = field.n_components();
    if (scheme != Scheme::linear) check_flux(mesh, flux);
    VectorXd out(at(mesh.n_faces()) * nc);
    const VectorXd& u = field.values();
    VectorXd grad;
    if (scheme == Scheme::linear_upwind) grad = gauss_gradient(field, Form::intensive);
    for (Index f = 0; f < mesh.n_internal_faces(); ++f) {
        const Index o = mesh.owner()[f];
        const Index n = mesh.neighbour()[f];
        for (int j = 0; j < nc; ++j) {
            const double uo = u[at(o) * nc + j];
            const double un = u[at(n) * nc + j];
            switch (scheme) {
                case Scheme::linear: {
                    const double w = mesh.weight(f);
                    out[at(f) * nc + j] = w * uo + (1.0 - w) * un;
                    break;
                }
                case Scheme::upwind:
                    out[at(f) * nc + j] = (*flux)[at(f)] >= 0.0 ? uo : un;
                    break;
                case Scheme::linear_upwind: {
                    const Index up = (*flux)[at(f)] >= 0.0 ? o : n;
                    const Vec2 r = mesh.face_centre(f) - mesh.cell_centre(up);
                    const auto g = at(up) * 2 * nc;
                    out[at(f) * nc + j] = u[at(up) * nc + j] + r.x * grad[g + j] + r.y * grad[g + nc + j];
                    break;
                }
            }
        }
    }
    fill_boundary(field, out);
    return out;
}

VectorXd mass_flux(const Field& velocity) {
    if (velocity.rank() != Rank::vector) throw ConfigError("mass flux requires a vector field");
    const Mesh& mesh = velocity.mesh();
    const VectorXd uf = interpolate_to_faces(velocity, Scheme::linear);
    VectorXd flux(at(mesh.n_faces()));
    for (Index f = 0; f < mesh.n_faces(); ++f) {
        const Vec2& s = mesh.face_area(f);
        flux[at(f)] = s.x * uf[at(2 * f)] + s.y * uf[at(2 * f + 1)];
    }
    return flux;
}

VectorXd divergence_flux(const Field& velocity, Form form) {
    VectorXd d = surface_sum(velocity.mesh(), mass_flux(velocity), 1);
    return form == Form::intensive ? to_intensive(velocity.mesh(), std::move(d), 1) : d;
}

VectorXd face_normal_gradient(const Field& field) {
    const Mesh& mesh = field.mesh();
    const int nc = field.n_components();
    const VectorXd& u = field.values();
    const VectorXd grad = gauss_gradient(field, Form::intensive);
    VectorXd out(at(mesh.n_faces()) * nc);
    VectorXd ub(nc);
    for (Index f = 0; f < mesh.n_faces(); ++f) {
        const Index o = mesh.owner()[f];
        const double coeff = mesh.nonorth_coeff(f);
        const Vec2& k = mesh.correction_vector(f);
        const auto go = at(o) * 2 * nc;
        if (mesh.is_internal(f)) {
            const Index n = mesh.neighbour()[f];
            const double w = mesh.weight(f);
            const auto gn = at(n) * 2 * nc;
            for (int j = 0; j < nc; ++j) {
                const double gx = w * grad[go + j] + (1.0 - w) * grad[gn + j];
                const double gy = w * grad[go + nc + j] + (1.0 - w) * grad[gn + nc + j];
                out[at(f) * nc + j] = coeff * (u[at(n) * nc + j] - u[at(o) * nc + j]) + k.x * gx + k.y * gy;
            }
        } else {
            if (nc == 1) {
                ub[0] = field.boundary_scalar(f);
            } else {
                const Vec2 v = field.boundary_vector(f);
                ub[0] = v.x;
                ub[1] = v.y;
            }
            const bool correct = is_fixed_value(field, f);
            for (int j = 0; j < nc; ++j) {
                double value = coeff * (ub[j] - u[at(o) * nc + j]);
                if (correct) value += k.x * grad[go + j] + k.y * grad[go + nc + j];
                out[at(f) * nc + j] = value;
            }
        }
    }
    return out;
}

VectorXd laplacian(const Field& field, double diffusivity, Form form) {
    if (diffusivity < 0.0) throw ConfigError(fmt::format("diffusivity must be non-negative, got {}", diffusivity));
    const int nc = field.n_components();
    VectorXd out = diffusivity * surface_sum(field.mesh(), face_normal_gradient(field), nc);
    return form == Form::intensive ? to_intensive(field.mesh(), std::move(out), nc) : out;
}

VectorXd convection(const VectorXd& flux, const Field& velocity, Scheme scheme, Form form) {
    const Mesh& mesh = velocity.mesh();
    check_flux(mesh, &flux);
    const int nc = velocity.n_components();
    VectorXd uf = interpolate_to_faces(velocity, scheme, &flux);
    for (Index f = 0; f < mesh.n_faces(); ++f) {
        for (int j = 0; j < nc; ++j) uf[at(f) * nc + j] *= flux[at(f)];
    }
    VectorXd out = surface_sum(mesh, uf, nc);
    return form == Form::intensive ? to_intensive(mesh, std::move(out), nc) : out;
}

}  // namespace romfv
