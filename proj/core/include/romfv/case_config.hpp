#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "romfv/hf_solver.hpp"
#include "romfv/mesh_generators.hpp"
#include "romfv/rom.hpp"
#include "romfv/supremizer.hpp"

namespace romfv {

enum class MeshGenerator { cavity, cylinder, file };

struct MeshConfig {
    MeshGenerator generator = MeshGenerator::cavity;
    int cells = 64;  // cavity cells per side
    double side = 0.1;
    CylinderMeshSpec cylinder;
    std::filesystem::path file;
};

/// Whole-pipeline case description, see docs/case_format.md for the file grammar.
struct CaseConfig {
    std::string name;
    std::filesystem::path output;

    MeshConfig mesh;
    BoundaryConditions velocity_bcs;
    BoundaryConditions pressure_bcs;
    std::vector<double> initial_velocity;  // uniform (ux, uy); empty means rest

    std::vector<double> viscosities;
    double dt = 0.0;
    double end_time = 0.0;
    double snapshot_start = 0.0;
    double snapshot_interval = 0.0;

    Scheme convection = Scheme::linear;
    TimeScheme time_scheme = TimeScheme::euler;
    int outer_iterations = 1;
    int correctors = 2;
    double momentum_tolerance = 1e-7;
    double pressure_tolerance = 1e-8;
    double continuity_tolerance = 1e-8;
    int max_linear_iterations = 2000;
    std::vector<Vec2> probes;

    Index velocity_modes = 10;
    Index pressure_modes = 10;
    Index supremizer_modes = 10;
    EnrichmentStrategy enrichment = EnrichmentStrategy::approximate;
    std::vector<Stabilisation> stabilisations{Stabilisation::none, Stabilisation::sup, Stabilisation::ppe};

    double online_viscosity = 0.0;
    double online_horizon = 0.0;  // measured from snapshot_start
    double online_dt = 0.0;       // zero means the snapshot interval
    int timing_repeats = 3;

    /// Time of the first snapshot, which is also where online integration starts.
    double online_start() const;
    double online_end() const { return snapshot_start + online_horizon; }
    double effective_online_dt() const { return online_dt > 0.0 ? online_dt : snapshot_interval; }
    /// Online steps between recorded states and the number of recorded states.
    Index online_steps_per_record() const;
    Index online_records() const;
    /// True when the online run is covered by a training run (same viscosity, window within the training snapshots).
    bool reference_in_training() const;

    /// Canonical text of the settings a pipeline stage depends on (used for manifest fingerprints).
    std::string fingerprint(std::string_view stage) const;
};

/// Parses a case file. `overrides` are "dotted.key=value" strings applied before validation,
/// with values in the same syntax as the file. Unknown keys and invalid values raise ConfigError.
/// Relative mesh file paths are resolved against `base_dir`.
CaseConfig parse_case(const std::string& text, const std::vector<std::string>& overrides = {},
                      const std::filesystem::path& base_dir = {});
CaseConfig load_case(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

std::shared_ptr<const Mesh> build_mesh(const MeshConfig& config);

/// Training run template (viscosity left at the first list entry).
TransientCase training_case(const CaseConfig& config, std::shared_ptr<const Mesh> mesh);

}  // namespace romfv
