#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "romfv/pod_basis.hpp"

namespace romfv {

enum class Stabilisation { none, sup, ppe };

std::string_view to_string(Stabilisation kind);
Stabilisation stabilisation_from_string(std::string_view text);

/// Third-order tensor stored as slices: t[i](j, k).
using Tensor3 = std::vector<Eigen::MatrixXd>;

/// i-th entry a^T t[i] a.
Eigen::VectorXd contract(const Tensor3& t, const Eigen::VectorXd& a);
/// Jacobian of contract(t, a) with respect to a.
Eigen::MatrixXd contract_jacobian(const Tensor3& t, const Eigen::VectorXd& a);

/// Galerkin-projected operators. With N velocity modes phi and n_p pressure modes chi:
///   M_ij = <phi_i, phi_j>          A_ij = <phi_i, lap phi_j>
///   B_ij = <phi_i, grad chi_j>     P_ij = <chi_i, div phi_j>
///   C_ijk = <phi_i, div(phi_j (x) phi_k)>
/// and for PPE also
///   D_ij = <grad chi_i, grad chi_j>    G_ijk = <grad chi_i, div(phi_j (x) phi_k)>
///   N_ij = boundary integral of (n x grad chi_i) . (curl phi_j),   F = 0.
/// Momentum residual: M da/dt - nu A a + a^T C a + B b = 0.
struct ReducedModel {
    Stabilisation kind = Stabilisation::sup;
    Index n_u = 0;
    Index n_p = 0;
    Index n_s = 0;
    Eigen::MatrixXd M, A, B, P, D, N;
    Eigen::VectorXd F;
    Tensor3 C, G;
    double d_shift = 0.0;  // diagonal shift applied to D, zero unless D was singular

    Index n_velocity() const noexcept { return n_u + n_s; }
};

/// Hard cap on the velocity space dimension because the tensors grow cubically.
inline constexpr Index kMaxReducedModes = 30;

/// `n_supremizers` counts the trailing supremizer block of an enriched basis.
ReducedModel project_offline(const PodBasis& velocity, const PodBasis& pressure, Stabilisation kind,
                             Index n_supremizers = 0);

struct RomState {
    Eigen::VectorXd a;
    Eigen::VectorXd b;
    double t = 0.0;
    double nu = 0.0;
};

/// Solves M a0 = e with e_i = <phi_i, u0>.
Eigen::VectorXd project_initial_condition(const ReducedModel& model, const PodBasis& velocity, const Field& u0);

struct NewtonReport {
    int iterations = 0;
    std::vector<double> residuals;
};

/// One implicit-Euler step of the coupled momentum/constraint system (SUP and NONE).
RomState step_sup_rom(const ReducedModel& model, const RomState& state, double dt, NewtonReport* report = nullptr);
/// One implicit-Euler step of the momentum/pressure-Poisson system (PPE).
RomState step_ppe_rom(const ReducedModel& model, const RomState& state, double dt, NewtonReport* report = nullptr);
/// Dispatches on the model kind.
RomState step_rom(const ReducedModel& model, const RomState& state, double dt, NewtonReport* report = nullptr);

/// States after every `record_every` steps (the initial state is not included).
std::vector<RomState> integrate(const ReducedModel& model, RomState state, double dt, Index n_steps,
                                Index record_every = 1);

std::pair<Field, Field> reconstruct(const RomState& state, const PodBasis& velocity, const PodBasis& pressure);

/// Square root of the smallest eigenvalue of (P K^-1 P^T) q = beta^2 M_p q with
/// P_ij = <chi_i, div phi_j>, K_ij = <grad phi_i, grad phi_j>, M_p the pressure Gram matrix.
double infsup_constant(const PodBasis& velocity, const PodBasis& pressure);

/// Versioned little-endian binary file plus "<path>.manifest" text with mode counts,
/// stabilisation kind and the given provenance entries.
void write_reduced_model(const std::filesystem::path& path, const ReducedModel& model,
                         const std::map<std::string, std::string>& provenance = {});
ReducedModel read_reduced_model(const std::filesystem::path& path);

}  // namespace romfv
