#include "romfv/snapshot.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "romfv/error.hpp"

namespace romfv {

namespace {

constexpr char kMagic[8] = {'R', 'O', 'M', 'S', 'N', 'A', 'P', '1'};

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
        throw IoError(fmt::format("'{}': unexpected end of snapshot file", path.string()));
    }
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + 8);
    T value;
    std::memcpy(&value, bytes, 8);
    return value;
}

}  // namespace

SnapshotSet::SnapshotSet(std::shared_ptr<const Mesh> mesh, Rank rank, Index n_params, Index n_times,
                         std::vector<SnapshotRecord> records)
    : mesh_(std::move(mesh)), rank_(rank), n_params_(n_params), n_times_(n_times), records_(std::move(records)) {
    if (!mesh_) throw ConfigError("snapshot set requires a mesh");
    if (records_.size() != n_params_ * n_times_) {
        throw ConfigError(fmt::format("snapshot set has {} records, expected {} parameters x {} times",
                                      records_.size(), n_params_, n_times_));
    }
    const auto width = static_cast<Eigen::Index>(mesh_->n_cells()) * components(rank_);
    for (Index i = 0; i < records_.size(); ++i) {
        if (records_[i].values.size() != width) {
            throw ConfigError(fmt::format("snapshot {} has {} values, expected {}", i, records_[i].values.size(), width));
        }
        if (i % n_times_ != 0 && !(records_[i].t > records_[i - 1].t)) {
            throw ConfigError(fmt::format("snapshot times must increase within a parameter block (record {})", i));
        }
        if (i % n_times_ != 0 && records_[i].mu != records_[i - 1].mu) {
            throw ConfigError(fmt::format("parameter changes inside a block at record {}", i));
        }
    }
}

SnapshotSet SnapshotSet::merge(const std::vector<SnapshotSet>& sets) {
    if (sets.empty()) throw ConfigError("cannot merge an empty list of snapshot sets");
    const auto& first = sets.front();
    std::vector<SnapshotRecord> records;
    Index n_params = 0;
    for (const auto& s : sets) {
        if (s.mesh_ != first.mesh_ && !(*s.mesh_ == *first.mesh_)) throw ConfigError("snapshot sets live on different meshes");
        if (s.rank_ != first.rank_ || s.n_times_ != first.n_times_) {
            throw ConfigError("snapshot sets differ in rank or time schedule");
        }
        records.insert(records.end(), s.records_.begin(), s.records_.end());
        n_params += s.n_params_;
    }
    return {first.mesh_, first.rank_, n_params, first.n_times_, std::move(records)};
}

SnapshotSet SnapshotSet::block(Index param) const {
    if (param >= n_params_) throw ConfigError(fmt::format("parameter block {} out of range", param));
    const auto begin = records_.begin() + static_cast<std::ptrdiff_t>(param * n_times_);
    return {mesh_, rank_, 1, n_times_, {begin, begin + static_cast<std::ptrdiff_t>(n_times_)}};
}

Eigen::MatrixXd SnapshotSet::matrix() const {
    Eigen::MatrixXd m(records_.empty() ? 0 : records_.front().values.size(), static_cast<Eigen::Index>(records_.size()));
    for (Index i = 0; i < records_.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = records_[i].values;
    return m;
}

void write_snapshots(const std::filesystem::path& path, const SnapshotSet& set) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
    out.write(kMagic, 8);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(components(set.rank())));
    put<std::uint64_t>(out, set.mesh().n_cells());
    put<std::uint64_t>(out, set.n_params());
    put<std::uint64_t>(out, set.n_times());
    for (const auto& r : set.records()) {
        put(out, r.mu);
        put(out, r.t);
        if constexpr (std::endian::native == std::endian::little) {
            out.write(reinterpret_cast<const char*>(r.values.data()), r.values.size() * 8);
        } else {
            for (double v : r.values) put(out, v);
        }
    }
    if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

SnapshotSet read_snapshots(const std::filesystem::path& path, std::shared_ptr<const Mesh> mesh) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open snapshot file '{}'", path.string()));
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
        throw IoError(fmt::format("'{}' is not a snapshot file (bad magic)", path.string()));
    }
    const auto rank = get<std::uint64_t>(in, path);
    const auto n_fv = get<std::uint64_t>(in, path);
    const auto n_params = get<std::uint64_t>(in, path);
    const auto n_times = get<std::uint64_t>(in, path);
    if (rank != 1 && rank != 2) throw IoError(fmt::format("'{}': invalid field rank {}", path.string(), rank));
    if (n_fv != mesh->n_cells()) {
        throw IoError(fmt::format("'{}' holds {} cells but the mesh has {}", path.string(), n_fv, mesh->n_cells()));
    }
    std::vector<SnapshotRecord> records(n_params * n_times);
    const auto width = static_cast<Eigen::Index>(n_fv * rank);
    for (auto& r : records) {
        r.mu = get<double>(in, path);
        r.t = get<double>(in, path);
        r.values.resize(width);
        if constexpr (std::endian::native == std::endian::little) {
            if (!in.read(reinterpret_cast<char*>(r.values.data()), width * 8)) {
                throw IoError(fmt::format("'{}': unexpected end of snapshot file", path.string()));
            }
        } else {
            for (Eigen::Index k = 0; k < width; ++k) r.values[k] = get<double>(in, path);
        }
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw IoError(fmt::format("'{}': trailing bytes after the last record", path.string()));
    }
    return {std::move(mesh), rank == 1 ? Rank::scalar : Rank::vector, n_params, n_times, std::move(records)};
}

}  // namespace romfv
