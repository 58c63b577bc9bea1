#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "romfv/field.hpp"

namespace romfv {

struct SnapshotRecord {
    double mu = 0.0;
    double t = 0.0;
    Eigen::VectorXd values;
};

/// Fields at (parameter, time) pairs, ordered parameter-major. Every parameter
/// block holds the same number of records with strictly increasing times.
class SnapshotSet {
public:
    SnapshotSet(std::shared_ptr<const Mesh> mesh, Rank rank, Index n_params, Index n_times,
                std::vector<SnapshotRecord> records);

    /// Concatenates parameter blocks in the given order.
    static SnapshotSet merge(const std::vector<SnapshotSet>& sets);

    const Mesh& mesh() const noexcept { return *mesh_; }
    const std::shared_ptr<const Mesh>& mesh_ptr() const noexcept { return mesh_; }
    Rank rank() const noexcept { return rank_; }
    Index n_params() const noexcept { return n_params_; }
    Index n_times() const noexcept { return n_times_; }
    Index size() const noexcept { return records_.size(); }
    const std::vector<SnapshotRecord>& records() const noexcept { return records_; }
    const SnapshotRecord& operator[](Index i) const { return records_.at(i); }

    /// Records of one parameter block.
    SnapshotSet block(Index param) const;

    /// Snapshot values as matrix columns.
    Eigen::MatrixXd matrix() const;

private:
    std::shared_ptr<const Mesh> mesh_;
    Rank rank_;
    Index n_params_;
    Index n_times_;
    std::vector<SnapshotRecord> records_;
};

/// Binary little-endian file: magic "ROMSNAP1", then rank, N_FV, N_params, N_times
/// as uint64, then per record mu, t and the cell values as float64.
void write_snapshots(const std::filesystem::path& path, const SnapshotSet& set);
SnapshotSet read_snapshots(const std::filesystem::path& path, std::shared_ptr<const Mesh> mesh);

}  // namespace romfv
