#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "romfv/case_config.hpp"

namespace romfv {

enum class Stage { mesh, hf, pod, supremizer, offline, online, compare };

std::string_view to_string(Stage stage);
Stage stage_from_string(std::string_view text);
const std::vector<Stage>& all_stages();
/// Stages whose artifacts `stage` reads directly.
const std::vector<Stage>& upstream(Stage stage);

/// Artifact directory driver. Each stage writes "<stage>.manifest" with the SHA-256 of its
/// configuration fingerprint, of every input it read and of every output it wrote. Before a
/// stage runs, all upstream manifests are verified against the files on disk; a mismatch
/// raises StaleArtifactError naming the stage to rerun. Timing files are written next to
/// the artifacts but are not hashed, so wall-clock noise never marks a stage stale.
class Pipeline {
public:
    explicit Pipeline(CaseConfig config, LogFn log = {});

    const CaseConfig& config() const noexcept { return config_; }
    const std::filesystem::path& dir() const noexcept { return config_.output; }

    /// Runs one stage after verifying its upstream artifacts.
    void run(Stage stage);
    /// Runs every stage in order, skipping stages that are already current unless `force`.
    void run_all(bool force = false);
    /// Throws StaleArtifactError if the stage or anything upstream of it is out of date.
    void verify(Stage stage) const;
    bool is_current(Stage stage) const;

    std::filesystem::path manifest_path(Stage stage) const;
    std::filesystem::path model_path(Stabilisation kind) const;
    std::filesystem::path coefficients_path(Stabilisation kind) const;
    std::filesystem::path energy_path(Stabilisation kind) const;

private:
    struct Manifest {
        std::string stage;
        std::string config;
        std::map<std::string, std::string> inputs;
        std::map<std::string, std::string> outputs;
    };

    std::string hash(const std::filesystem::path& file) const;
    Manifest read_manifest(Stage stage) const;
    void write_manifest(Stage stage, const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) const;
    std::vector<std::string> outputs_of(Stage stage) const;
    std::shared_ptr<const Mesh> load_mesh_artifact() const;

    void run_mesh();
    void run_hf();
    void run_pod();
    void run_supremizer();
    void run_offline();
    void run_online();
    void run_compare();

    CaseConfig config_;
    LogFn log_;
    mutable std::map<std::string, std::pair<std::filesystem::file_time_type, std::string>> hash_cache_;
};

/// Process exit codes of the command line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitOther = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

}  // namespace romfv
