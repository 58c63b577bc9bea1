#include "romfv/rom.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <fmt/format.h>

#include "romfv/error.hpp"
#include "romfv/fv_operators.hpp"

namespace romfv {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

using EIndex = Eigen::Index;

EIndex at(Index i) { return static_cast<EIndex>(i); }

void require_same_mesh(const PodBasis& a, const PodBasis& b) {
    if (!a.mesh || !b.mesh) throw ConfigError("basis has no mesh");
    if (a.mesh != b.mesh && !(*a.mesh == *b.mesh)) throw ConfigError("velocity and pressure bases live on different meshes");
}

std::vector<Field> mode_fields(const PodBasis& basis) {
    std::vector<Field> out;
    out.reserve(basis.size());
    for (Index j = 0; j < basis.size(); ++j) out.push_back(basis.mode(j));
    return out;
}

/// Boundary-face term sum_f |S_f| (t . grad chi)(omega of u) with t = z x n and omega = d_n u_t - d_t u_n.
/// Tangential derivatives come from the owner-cell Gauss gradient, the normal derivative of u_t
/// from the two-point difference between the face and owner values.
double boundary_curl_term(const Mesh& mesh, const VectorXd& chi_grad, const Field& u, const VectorXd& u_grad) {
    double sum = 0.0;
    for (Index f = mesh.n_internal_faces(); f < mesh.n_faces(); ++f) {
        const Index o = mesh.owner()[f];
        const Vec2 n = mesh.face_normal(f);
        const Vec2 t{-n.y, n.x};
        const double dn = dot(n, mesh.delta(f));
        const Vec2 ub = u.boundary_vector(f);
        const Vec2 uo = u.vector(o);
        const double dn_ut = dot(ub - uo, t) / dn;
        const double nv[2] = {n.x, n.y};
        const double tv[2] = {t.x, t.y};
        double dt_un = 0.0;
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) dt_un += tv[i] * nv[j] * u_grad[at(4 * o) + 2 * i + j];
        }
        const double t_grad_chi = t.x * chi_grad[at(2 * o)] + t.y * chi_grad[at(2 * o + 1)];
        sum += mesh.face_area_mag(f) * t_grad_chi * (dn_ut - dt_un);
    }
    return sum;
}

void check_state(const ReducedModel& model, const RomState& state) {
    if (state.a.size() != at(model.n_velocity()) || state.b.size() != at(model.n_p)) {
        throw ConfigError(fmt::format("state has {} velocity and {} pressure coefficients, model expects {} and {}",
                                      state.a.size(), state.b.size(), model.n_velocity(), model.n_p));
    }
}

/// Newton iteration for the residual/Jacobian pair evaluated on x = [a; b].
template <typename System>
VectorXd newton(VectorXd x, System&& system, const char* label, NewtonReport* report) {
    constexpr int kMaxIterations = 100;
    std::vector<double> history;
    VectorXd r;
    MatrixXd j;
    for (int it = 0; it <= kMaxIterations; ++it) {
        system(x, r, j);
        const double rn = r.norm();
        history.push_back(rn);
        if (!std::isfinite(rn)) break;
        if (rn <= 1e-9) {
            if (report) *report = {it, history};
            return x;
        }
        if (it == kMaxIterations) break;
        const VectorXd dx = Eigen::FullPivLU<MatrixXd>(j).solve(-r);
        if (!dx.allFinite()) break;
        x += dx;
        if (dx.norm() <= 1e-10 * std::max(1.0, x.norm())) {
            system(x, r, j);
            history.push_back(r.norm());
            if (!std::isfinite(history.back())) break;
            if (report) *report = {it + 1, history};
            return x;
        }
    }
    std::string trace;
    for (std::size_t i = 0; i < history.size(); ++i) {
        if (i > 0) trace += ", ";
        if (history.size() > 12 && i == 6) {
            trace += "...";
            i = history.size() - 6;
        }
        trace += fmt::format("{:.3e}", history[i]);
    }
    throw NumericalError(fmt::format("{} Newton iteration did not converge (residual history: {})", label, trace));
}

RomState finish(const RomState& state, const VectorXd& x, Index n, double dt) {
    RomState out;
    out.a = x.head(at(n));
    out.b = x.tail(x.size() - at(n));
    out.t = state.t + dt;
    out.nu = state.nu;
    return out;
}

// Binary model file.
constexpr char kMagic[8] = {'R', 'O', 'M', 'F', 'V', 'R', 'M', '1'};
constexpr std::uint64_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
    static_assert(sizeof(T) == 8);
    unsigned char bytes[8];
    std::memcpy(bytes, &value, 8);
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + 8);
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
        throw IoError(fmt::format("'{}': unexpected end of reduced model file", path.string()));
    }
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + 8);
    T value;
    std::memcpy(&value, bytes, 8);
    return value;
}

void put_matrix(std::ostream& out, const MatrixXd& m) {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
    for (EIndex i = 0; i < m.rows(); ++i) {
        for (EIndex j = 0; j < m.cols(); ++j) put(out, m(i, j));
    }
}

MatrixXd get_matrix(std::istream& in, const std::filesystem::path& path, EIndex rows, EIndex cols, const char* name) {
    const auto r = get<std::uint64_t>(in, path);
    const auto c = get<std::uint64_t>(in, path);
    if (r != static_cast<std::uint64_t>(rows) || c != static_cast<std::uint64_t>(cols)) {
        throw IoError(fmt::format("'{}': {} is {}x{}, expected {}x{}", path.string(), name, r, c, rows, cols));
    }
    MatrixXd m(rows, cols);
    for (EIndex i = 0; i < rows; ++i) {
        for (EIndex j = 0; j < cols; ++j) m(i, j) = get<double>(in, path);
    }
    return m;
}

}  // namespace

std::string_view to_string(Stabilisation kind) {
    switch (kind) {
        case Stabilisation::none: return "none";
        case Stabilisation::sup: return "sup";
        case Stabilisation::ppe: return "ppe";
    }
    return "?";
}

Stabilisation stabilisation_from_string(std::string_view text) {
    if (text == "none") return Stabilisation::none;
    if (text == "sup") return Stabilisation::sup;
    if (text == "ppe") return Stabilisation::ppe;
    throw ConfigError(fmt::format("unknown stabilisation '{}' (expected none, sup or ppe)", text));
}

VectorXd contract(const Tensor3& t, const VectorXd& a) {
    VectorXd out(static_cast<EIndex>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) out[static_cast<EIndex>(i)] = a.dot(t[i] * a);
    return out;
}

MatrixXd contract_jacobian(const Tensor3& t, const VectorXd& a) {
    MatrixXd out(static_cast<EIndex>(t.size()), a.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        out.row(static_cast<EIndex>(i)) = (t[i] * a + t[i].transpose() * a).transpose();
    }
    return out;
}

ReducedModel project_offline(const PodBasis& velocity, const PodBasis& pressure, Stabilisation kind,
                             Index n_supremizers) {
    require_same_mesh(velocity, pressure);
    if (velocity.rank != Rank::vector) throw ConfigError("velocity basis must hold vector modes");
    if (pressure.rank != Rank::scalar) throw ConfigError("pressure basis must hold scalar modes");
    const Index n = velocity.size();
    const Index np = pressure.size();
    if (n == 0 || np == 0) throw ConfigError("reduced model needs at least one velocity and one pressure mode");
    if (n > kMaxReducedModes) {
        throw ConfigError(fmt::format("velocity space has {} modes; the dense tensors are capped at {}", n,
                                      kMaxReducedModes));
    }
    if (kind == Stabilisation::sup) {
        if (velocity.kind != BasisKind::enriched_velocity || n_supremizers == 0) {
            throw ConfigError("SUP stabilisation requires a supremizer-enriched velocity basis");
        }
        if (n_supremizers >= n) throw ConfigError("supremizer block is larger than the enriched basis");
    } else if (n_supremizers != 0) {
        throw ConfigError(fmt::format("{} stabilisation uses a plain velocity basis", to_string(kind)));
    }

    const Mesh& mesh = *velocity.mesh;
    const auto phi = mode_fields(velocity);
    const auto chi = mode_fields(pressure);
    const EIndex en = at(n);
    const EIndex enp = at(np);

    ReducedModel m;
    m.kind = kind;
    m.n_u = n - n_supremizers;
    m.n_s = n_supremizers;
    m.n_p = np;
    m.M = gram_matrix(mesh, 2, velocity.modes, velocity.modes);
    m.A.resize(en, en);
    m.B.resize(en, enp);
    m.P.resize(enp, en);
    for (EIndex j = 0; j < en; ++j) {
        const VectorXd lap = laplacian(phi[at(j)], 1.0, Form::extensive);
        const VectorXd div = divergence_flux(phi[at(j)], Form::extensive);
        m.A.col(j) = velocity.modes.transpose() * lap;
        m.P.col(j) = pressure.modes.transpose() * div;
    }
    for (EIndex j = 0; j < enp; ++j) {
        m.B.col(j) = velocity.modes.transpose() * gauss_gradient(chi[at(j)], Form::extensive);
    }

    const bool ppe = kind == Stabilisation::ppe;
    MatrixXd chi_grad;  // intensive gradients of the pressure modes, one column each
    if (ppe) {
        chi_grad.resize(at(2 * mesh.n_cells()), enp);
        for (EIndex i = 0; i < enp; ++i) chi_grad.col(i) = gauss_gradient(chi[at(i)], Form::intensive);
    }

    m.C.assign(n, MatrixXd::Zero(en, en));
    if (ppe) m.G.assign(np, MatrixXd::Zero(en, en));
    for (EIndex j = 0; j < en; ++j) {
        const VectorXd flux = mass_flux(phi[at(j)]);
        for (EIndex k = 0; k < en; ++k) {
            const VectorXd conv = convection(flux, phi[at(k)], Scheme::linear, Form::extensive);
            const VectorXd cu = velocity.modes.transpose() * conv;
            for (EIndex i = 0; i < en; ++i) m.C[at(i)](j, k) = cu[i];
            if (ppe) {
                const VectorXd cp = chi_grad.transpose() * conv;
                for (EIndex i = 0; i < enp; ++i) m.G[at(i)](j, k) = cp[i];
            }
        }
    }

    if (ppe) {
        m.D = gram_matrix(mesh, 2, chi_grad, chi_grad);
        m.D = 0.5 * (m.D + m.D.transpose());
        m.N.resize(enp, en);
        for (EIndex j = 0; j < en; ++j) {
            const VectorXd ug = gauss_gradient(phi[at(j)], Form::intensive);
            for (EIndex i = 0; i < enp; ++i) m.N(i, j) = boundary_curl_term(mesh, chi_grad.col(i), phi[at(j)], ug);
        }
        // Boundary data is constant in time, so the time-derivative boundary term vanishes identically.
        m.F = VectorXd::Zero(enp);
        Eigen::FullPivLU<MatrixXd> lu(m.D);
        if (lu.rank() < enp) {
            m.d_shift = 1e-12 * m.D.trace() / static_cast<double>(np);
            m.D.diagonal().array() += m.d_shift;
        }
    }
    return m;
}

VectorXd project_initial_condition(const ReducedModel& model, const PodBasis& velocity, const Field& u0) {
    if (velocity.size() != model.n_velocity()) {
        throw ConfigError(fmt::format("velocity basis has {} modes, model expects {}", velocity.size(),
                                      model.n_velocity()));
    }
    if (u0.rank() != Rank::vector || u0.values().size() != velocity.modes.rows()) {
        throw ConfigError("initial velocity does not match the basis mesh");
    }
    const VectorXd e = gram_matrix(*velocity.mesh, 2, velocity.modes, u0.values());
    Eigen::LLT<MatrixXd> llt(model.M);
    if (llt.info() != Eigen::Success) throw NumericalError("reduced mass matrix is not positive definite");
    return llt.solve(e);
}

RomState step_sup_rom(const ReducedModel& model, const RomState& state, double dt, NewtonReport* report) {
    if (model.kind == Stabilisation::ppe) throw ConfigError("step_sup_rom called with a PPE model");
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    check_state(model, state);
    const EIndex n = at(model.n_velocity());
    const EIndex np = at(model.n_p);
    const double nu = state.nu;
    const MatrixXd linear = model.M / dt - nu * model.A;
    const VectorXd rhs = model.M * state.a / dt;
    auto system = [&](const VectorXd& x, VectorXd& r, MatrixXd& j) {
        const auto a = x.head(n);
        const auto b = x.tail(np);
        r.resize(n + np);
        r.head(n) = linear * a - rhs + contract(model.C, a) + model.B * b;
        r.tail(np) = model.P * a;
        j.setZero(n + np, n + np);
        j.topLeftCorner(n, n) = linear + contract_jacobian(model.C, a);
        j.topRightCorner(n, np) = model.B;
        j.bottomLeftCorner(np, n) = model.P;
    };
    VectorXd x(n + np);
    x << state.a, state.b;
    return finish(state, newton(std::move(x), system, "SUP-ROM", report), model.n_velocity(), dt);
}

RomState step_ppe_rom(const ReducedModel& model, const RomState& state, double dt, NewtonReport* report) {
    if (model.kind != Stabilisation::ppe) throw ConfigError("step_ppe_rom requires a PPE model");
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    check_state(model, state);
    const EIndex n = at(model.n_velocity());
    const EIndex np = at(model.n_p);
    const double nu = state.nu;
    const MatrixXd linear = model.M / dt - nu * model.A;
    const VectorXd rhs = model.M * state.a / dt;
    auto system = [&](const VectorXd& x, VectorXd& r, MatrixXd& j) {
        const auto a = x.head(n);
        const auto b = x.tail(np);
        r.resize(n + np);
        r.head(n) = linear * a - rhs + contract(model.C, a) + model.B * b;
        r.tail(np) = model.D * b + contract(model.G, a) - nu * model.N * a - model.F;
        j.resize(n + np, n + np);
        j.topLeftCorner(n, n) = linear + contract_jacobian(model.C, a);
        j.topRightCorner(n, np) = model.B;
        j.bottomLeftCorner(np, n) = contract_jacobian(model.G, a) - nu * model.N;
        j.bottomRightCorner(np, np) = model.D;
    };
    VectorXd x(n + np);
    x << state.a, state.b;
    return finish(state, newton(std::move(x), system, "PPE-ROM", report), model.n_velocity(), dt);
}

RomState step_rom(const ReducedModel& model, const RomState& state, double dt, NewtonReport* report) {
    return model.kind == Stabilisation::ppe ? step_ppe_rom(model, state, dt, report)
                                            : step_sup_rom(model, state, dt, report);
}

std::vector<RomState> integrate(const ReducedModel& model, RomState state, double dt, Index n_steps,
                                Index record_every) {
    if (record_every == 0) throw ConfigError("record interval must be at least one step");
    std::vector<RomState> out;
    out.reserve(n_steps / record_every);
    const double t0 = state.t;
    for (Index s = 1; s <= n_steps; ++s) {
        state = step_rom(model, state, dt);
        // Recompute the clock from the step count so long runs do not accumulate rounding.
        state.t = t0 + static_cast<double>(s) * dt;
        if (s % record_every == 0) out.push_back(state);
    }
    return out;
}

std::pair<Field, Field> reconstruct(const RomState& state, const PodBasis& velocity, const PodBasis& pressure) {
    if (state.a.size() != at(velocity.size()) || state.b.size() != at(pressure.size())) {
        throw ConfigError(fmt::format("coefficient lengths {}/{} do not match bases of {}/{} modes", state.a.size(),
                                      state.b.size(), velocity.size(), pressure.size()));
    }
    return {velocity.combine(state.a), pressure.combine(state.b)};
}

double infsup_constant(const PodBasis& velocity, const PodBasis& pressure) {
    require_same_mesh(velocity, pressure);
    const Mesh& mesh = *velocity.mesh;
    const EIndex n = at(velocity.size());
    const EIndex np = at(pressure.size());
    MatrixXd grads(at(4 * mesh.n_cells()), n);
    MatrixXd p(np, n);
    for (EIndex j = 0; j < n; ++j) {
        const Field phi = velocity.mode(at(j));
        grads.col(j) = gauss_gradient(phi, Form::intensive);
        p.col(j) = pressure.modes.transpose() * divergence_flux(phi, Form::extensive);
    }
    MatrixXd k(n, n);
    {
        VectorXd w(grads.rows());
        for (Index c = 0; c < mesh.n_cells(); ++c) w.segment<4>(at(4 * c)).setConstant(mesh.volume(c));
        k = grads.transpose() * w.asDiagonal() * grads;
    }
    Eigen::LDLT<MatrixXd> ldlt(0.5 * (k + k.transpose()));
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) {
        throw NumericalError("velocity gradient Gram matrix is singular (degenerate modes)");
    }
    MatrixXd s = p * ldlt.solve(p.transpose());
    s = 0.5 * (s + s.transpose());
    const MatrixXd mp = gram_matrix(mesh, 1, pressure.modes, pressure.modes);
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> eig(s, 0.5 * (mp + mp.transpose()));
    if (eig.info() != Eigen::Success) throw NumericalError("inf-sup eigenproblem failed");
    return std::sqrt(std::max(0.0, eig.eigenvalues().minCoeff()));
}

void write_reduced_model(const std::filesystem::path& path, const ReducedModel& model,
                         const std::map<std::string, std::string>& provenance) {
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
        out.write(kMagic, sizeof(kMagic));
        put(out, kVersion);
        put<std::uint64_t>(out, static_cast<std::uint64_t>(model.kind));
        put<std::uint64_t>(out, model.n_u);
        put<std::uint64_t>(out, model.n_p);
        put<std::uint64_t>(out, model.n_s);
        put(out, model.d_shift);
        for (const MatrixXd* mat : {&model.M, &model.A, &model.B, &model.P, &model.D, &model.N}) put_matrix(out, *mat);
        put_matrix(out, model.F);
        for (const Tensor3* t : {&model.C, &model.G}) {
            put<std::uint64_t>(out, t->size());
            for (const auto& slice : *t) put_matrix(out, slice);
        }
        if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
    }
    std::ofstream man(path.string() + ".manifest", std::ios::trunc);
    if (!man) throw IoError(fmt::format("cannot write manifest for '{}'", path.string()));
    man << "format romfv-reduced-model " << kVersion << '\n'
        << "stabilisation " << to_string(model.kind) << '\n'
        << "velocity_modes " << model.n_u << '\n'
        << "pressure_modes " << model.n_p << '\n'
        << "supremizer_modes " << model.n_s << '\n'
        << "pressure_shift " << fmt::format("{:.17g}", model.d_shift) << '\n';
    for (const auto& [key, value] : provenance) man << key << ' ' << value << '\n';
    if (!man) throw IoError(fmt::format("failed writing manifest for '{}'", path.string()));
}

ReducedModel read_reduced_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open reduced model '{}'", path.string()));
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
        throw IoError(fmt::format("'{}' is not a reduced model file", path.string()));
    }
    const auto version = get<std::uint64_t>(in, path);
    if (version != kVersion) throw IoError(fmt::format("'{}': unsupported format version {}", path.string(), version));
    ReducedModel m;
    const auto kind = get<std::uint64_t>(in, path);
    if (kind > static_cast<std::uint64_t>(Stabilisation::ppe)) {
        throw IoError(fmt::format("'{}': invalid stabilisation tag {}", path.string(), kind));
    }
    m.kind = static_cast<Stabilisation>(kind);
    m.n_u = get<std::uint64_t>(in, path);
    m.n_p = get<std::uint64_t>(in, path);
    m.n_s = get<std::uint64_t>(in, path);
    m.d_shift = get<double>(in, path);
    const EIndex n = at(m.n_velocity());
    const EIndex np = at(m.n_p);
    if (n == 0 || n > at(kMaxReducedModes) || np == 0 || np > 4096) {
        throw IoError(fmt::format("'{}': implausible mode counts", path.string()));
    }
    const bool ppe = m.kind == Stabilisation::ppe;
    m.M = get_matrix(in, path, n, n, "M");
    m.A = get_matrix(in, path, n, n, "A");
    m.B = get_matrix(in, path, n, np, "B");
    m.P = get_matrix(in, path, np, n, "P");
    m.D = get_matrix(in, path, ppe ? np : 0, ppe ? np : 0, "D");
    m.N = get_matrix(in, path, ppe ? np : 0, ppe ? n : 0, "N");
    m.F = get_matrix(in, path, ppe ? np : 0, 1, "F");
    const auto read_tensor = [&](Tensor3& t, std::uint64_t expected, const char* name) {
        const auto count = get<std::uint64_t>(in, path);
        if (count != expected) {
            throw IoError(fmt::format("'{}': {} has {} slices, expected {}", path.string(), name, count, expected));
        }
        t.resize(count);
        for (auto& slice : t) slice = get_matrix(in, path, n, n, name);
    };
    read_tensor(m.C, static_cast<std::uint64_t>(n), "C");
    read_tensor(m.G, ppe ? static_cast<std::uint64_t>(np) : 0, "G");
    if (in.peek() != std::char_traits<char>::eof()) {
        throw IoError(fmt::format("'{}': trailing bytes after reduced model", path.string()));
    }
    return m;
}

}  // namespace romfv
