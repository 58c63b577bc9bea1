#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "romfv/field.hpp"
#include "romfv/fv_operators.hpp"
#include "romfv/snapshot.hpp"

namespace romfv {

enum class TimeScheme { euler, bdf2 };

std::string_view to_string(TimeScheme scheme);
TimeScheme time_scheme_from_string(std::string_view text);

/// One transient incompressible run. Snapshots are taken at
/// snapshot_start + k * snapshot_interval for k = 1, 2, ... up to end_time.
struct TransientCase {
    std::shared_ptr<const Mesh> mesh;
    BoundaryConditions velocity_bcs;
    BoundaryConditions pressure_bcs;
    Eigen::VectorXd initial_velocity;  // interleaved, empty means zero
    double viscosity = 0.0;
    double dt = 0.0;
    double end_time = 0.0;
    double snapshot_start = 0.0;
    double snapshot_interval = 0.0;
    Scheme convection_scheme = Scheme::linear;
    TimeScheme time_scheme = TimeScheme::euler;
    int outer_iterations = 1;
    int correctors = 2;
    double momentum_tolerance = 1e-7;
    double pressure_tolerance = 1e-8;
    int max_linear_iterations = 2000;
    double continuity_tolerance = 1e-8;  // relative to the largest face flux
    std::vector<Vec2> probes;

    /// Throws ConfigError on any violated precondition.
    void validate() const;
    Index n_steps() const;
    Index steps_per_snapshot() const;
    Index first_snapshot_step() const;
    Index n_snapshots() const;
};

struct StepRecord {
    Index step = 0;
    double t = 0.0;
    int momentum_iterations = 0;
    double momentum_residual = 0.0;
    double continuity = 0.0;  // max |sum_f S_f . u_f| / max |F_f|
    double cfl = 0.0;
    double kinetic_energy = 0.0;
};

struct ProbeSample {
    double t = 0.0;
    std::vector<Vec2> velocity;
    std::vector<double> pressure;
};

struct TimingRecord {
    double mu = 0.0;
    double wall_seconds = 0.0;
    Index steps = 0;
    double simulated_time = 0.0;
};

struct TransientResult {
    SnapshotSet velocity;
    SnapshotSet pressure;
    TimingRecord timing;
    std::vector<StepRecord> history;
    std::vector<ProbeSample> probes;
    Eigen::VectorXd final_velocity;
    Eigen::VectorXd final_pressure;
};

using LogFn = std::function<void(std::string_view)>;

/// Segregated predictor/projection solver: momentum predictor with Picard-linearised
/// convection, then pressure corrections that make the linearly interpolated velocity
/// exactly discretely divergence-free.
TransientResult solve_transient(const TransientCase& c, const LogFn& log = {});

struct SweepResult {
    SnapshotSet velocity;
    SnapshotSet pressure;
    std::vector<TimingRecord> timings;
    std::vector<std::vector<StepRecord>> histories;
    std::vector<std::vector<ProbeSample>> probes;
};

/// Independent runs of `base` with each viscosity, merged parameter-major in list order.
SweepResult run_parameter_sweep(const TransientCase& base, const std::vector<double>& viscosities,
                                const LogFn& log = {});

void write_history_csv(const std::filesystem::path& path, const std::vector<StepRecord>& history, double mu);
void write_probes_csv(const std::filesystem::path& path, const std::vector<ProbeSample>& samples,
                      const std::vector<Vec2>& locations, double mu);

}  // namespace romfv
