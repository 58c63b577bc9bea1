#include <memory>
#include <random>

#include <benchmark/benchmark.h>

#include "romfv/fv_matrices.hpp"
#include "romfv/fv_operators.hpp"
#include "romfv/hf_solver.hpp"
#include "romfv/mesh_generators.hpp"
#include "romfv/pod_basis.hpp"
#include "romfv/rom.hpp"
#include "romfv/supremizer.hpp"

namespace {

using namespace romfv;
using Eigen::VectorXd;

VectorXd random_vector(Eigen::Index n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    VectorXd v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

BoundaryConditions uniform(const Mesh& mesh, BcKind kind, std::vector<double> datum) {
    BoundaryConditions bcs;
    for (const auto& p : mesh.patches()) bcs.push_back({p.name, kind, datum, {}});
    return bcs;
}

Field random_velocity(int n) {
    auto mesh = std::make_shared<const Mesh>(generate_cavity_mesh(n, 0.1));
    return {mesh, Rank::vector, random_vector(2 * mesh->n_cells(), 1),
            uniform(*mesh, BcKind::fixed_value, {0.0, 0.0})};
}

void BM_GaussGradient(benchmark::State& state) {
    const Field u = random_velocity(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(gauss_gradient(u));
    state.SetItemsProcessed(state.iterations() * u.mesh().n_cells());
}
BENCHMARK(BM_GaussGradient)->Arg(32)->Arg(64)->Arg(128);

void BM_Convection(benchmark::State& state) {
    const Field u = random_velocity(static_cast<int>(state.range(0)));
    const VectorXd flux = mass_flux(u);
    for (auto _ : state) benchmark::DoNotOptimize(convection(flux, u));
    state.SetItemsProcessed(state.iterations() * u.mesh().n_cells());
}
BENCHMARK(BM_Convection)->Arg(64)->Arg(128);

void BM_LaplacianAssembly(benchmark::State& state) {
    const Field u = random_velocity(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(laplacian_map(u));
}
BENCHMARK(BM_LaplacianAssembly)->Arg(64)->Arg(128);

void BM_CavityTimeSteps(benchmark::State& state) {
    TransientCase c;
    c.mesh = std::make_shared<const Mesh>(generate_cavity_mesh(static_cast<int>(state.range(0)), 0.1));
    c.velocity_bcs = {{"lid", BcKind::fixed_value, {1.0, 0.0}, {}}, {"walls", BcKind::fixed_value, {0.0, 0.0}, {}}};
    c.pressure_bcs = uniform(*c.mesh, BcKind::zero_gradient, {});
    c.viscosity = 1e-4;
    c.dt = 5e-4;
    c.end_time = 10 * c.dt;
    c.snapshot_interval = c.end_time;
    for (auto _ : state) benchmark::DoNotOptimize(solve_transient(c));
    state.SetItemsProcessed(state.iterations() * 10);
}
BENCHMARK(BM_CavityTimeSteps)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

SnapshotSet random_snapshots(std::shared_ptr<const Mesh> mesh, Rank rank, Index count, unsigned seed) {
    std::vector<SnapshotRecord> records;
    const auto width = static_cast<Eigen::Index>(mesh->n_cells()) * components(rank);
    for (Index k = 0; k < count; ++k) {
        records.push_back({1.0, 0.01 * static_cast<double>(k + 1), random_vector(width, seed + static_cast<unsigned>(k))});
    }
    return {std::move(mesh), rank, 1, count, std::move(records)};
}

void BM_Pod(benchmark::State& state) {
    auto mesh = std::make_shared<const Mesh>(generate_cavity_mesh(64, 0.1));
    const SnapshotSet s = random_snapshots(mesh, Rank::vector, state.range(0), 5);
    const auto bcs = uniform(*mesh, BcKind::fixed_value, {0.0, 0.0});
    for (auto _ : state) benchmark::DoNotOptimize(compute_pod(s, 10, bcs, BasisKind::velocity));
}
BENCHMARK(BM_Pod)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

struct Bases {
    PodBasis u, p, s;
};

const Bases& bases() {
    static const Bases b = [] {
        auto mesh = std::make_shared<const Mesh>(generate_cavity_mesh(32, 0.1));
        const auto pbcs = uniform(*mesh, BcKind::zero_gradient, {});
        const SnapshotSet ps = random_snapshots(mesh, Rank::scalar, 40, 900);
        return Bases{compute_pod(random_snapshots(mesh, Rank::vector, 40, 100), 10,
                                 uniform(*mesh, BcKind::fixed_value, {0.0, 0.0}), BasisKind::velocity),
                     compute_pod(ps, 10, pbcs, BasisKind::pressure), approximate_supremizer_basis(ps, pbcs, 10)};
    }();
    return b;
}

void BM_ProjectOffline(benchmark::State& state) {
    const Bases& b = bases();
    const auto kind = static_cast<Stabilisation>(state.range(0));
    const PodBasis u = kind == Stabilisation::sup ? enrich(b.u, b.s) : b.u;
    for (auto _ : state) benchmark::DoNotOptimize(project_offline(u, b.p, kind, kind == Stabilisation::sup ? 10 : 0));
    state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_ProjectOffline)
    ->Arg(static_cast<int>(Stabilisation::sup))
    ->Arg(static_cast<int>(Stabilisation::ppe))
    ->Unit(benchmark::kMillisecond);

void BM_RomStep(benchmark::State& state) {
    const Bases& b = bases();
    const auto kind = static_cast<Stabilisation>(state.range(0));
    const bool sup = kind == Stabilisation::sup;
    const ReducedModel m = project_offline(sup ? enrich(b.u, b.s) : b.u, b.p, kind, sup ? 10 : 0);
    const RomState start{0.01 * random_vector(static_cast<Eigen::Index>(m.n_velocity()), 3),
                         VectorXd::Zero(static_cast<Eigen::Index>(m.n_p)), 0.0, 1e-2};
    for (auto _ : state) benchmark::DoNotOptimize(step_rom(m, start, 1e-3));
    state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_RomStep)->Arg(static_cast<int>(Stabilisation::sup))->Arg(static_cast<int>(Stabilisation::ppe));

}  // namespace

BENCHMARK_MAIN();
